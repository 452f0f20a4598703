#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "blochspec/fourier_series.hpp"

namespace blochspec {

enum class OperatorForm {
  divergence,     // L = sum_k d^k (a_k(x) .)
  nondivergence,  // L = sum_k a_k(x) d^k
};

std::string to_string(OperatorForm form);

// Periodic-coefficient differential operator
//
//   L = d^m a_m(x) + ... + d a_1(x) + a_0(x)          (divergence form)
//
// acting on C^n-valued functions. For composite operators, row i has its own
// order m_i and coefficients a_k with k > m_i must vanish in row i; a_k(i, l)
// must also vanish for k > m_l so the operator reduces to a first-order system.
class OperatorSpec {
 public:
  // coeffs[k] = a_k for k = 0..order. All series share the period and dim.
  OperatorSpec(std::vector<FourierSeries> coeffs,
               OperatorForm form = OperatorForm::divergence,
               std::optional<std::vector<int>> composite_orders = std::nullopt);

  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  int dim() const { return coeffs_.front().dim(); }
  double period() const { return coeffs_.front().period(); }
  OperatorForm form() const { return form_; }
  const FourierSeries& coeff(int k) const { return coeffs_.at(k); }
  const std::vector<FourierSeries>& coeffs() const { return coeffs_; }
  const std::optional<std::vector<int>>& composite_orders() const { return composite_orders_; }
  bool is_composite() const { return composite_orders_.has_value(); }

  // Order of row i (m_i for composite operators, m otherwise).
  int row_order(int i) const;
  int max_cutoff() const;

  // Row-principal coefficient: row i of a_{m_i}. Equals a_m for uniform order.
  FourierSeries principal() const;
  bool has_identity_principal(double tol = 1e-14) const;

  // SHA-256 of a canonical binary serialisation (hex).
  std::string content_hash() const;

  OperatorSpec with_form(OperatorForm form, std::vector<FourierSeries> coeffs) const;

 private:
  std::vector<FourierSeries> coeffs_;
  OperatorForm form_;
  std::optional<std::vector<int>> composite_orders_;
};

// Floquet exponent reduced into the Brillouin interval [0, 2 pi / X).
struct BlochParams {
  double sigma = 0.0;

  static BlochParams reduced(double sigma, double period);
};

double brillouin_width(double period);

struct ValidationReport {
  double lower_bound = 0.0;       // min_x of the smallest eigenvalue of the hermitian part
  double argmin_x = 0.0;
  double symmetry_defect = 0.0;   // max_x |a - a^*|_inf
  bool spd = false;
  std::string status;             // "ok" or "outside proven convergence class"
};

inline constexpr double kSpdTolerance = 1e-10;

// Samples the principal coefficient on grid_n equispaced points.
ValidationReport validate(const OperatorSpec& spec, int grid_n);

// Leibniz rewrites between the two forms. Cutoffs are unchanged.
OperatorSpec to_divergence_form(const OperatorSpec& spec);
OperatorSpec to_nondivergence_form(const OperatorSpec& spec);

// For L_sigma = (d + i sigma)^2 + (d + i sigma) a_1 + a_0, returns the
// sigma-absorbed divergence coefficients
//   A_1 = a_1 + 2 i sigma,   A_0 = a_0 - sigma^2 + i sigma a_1.
// Requires order 2, divergence form and identity principal coefficient.
std::pair<FourierSeries, FourierSeries> bloch_rewrite_order2(const OperatorSpec& spec,
                                                             double sigma);

}  // namespace blochspec
