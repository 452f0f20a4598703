#pragma once

#include <utility>
#include <vector>

#include "blochspec/winding.hpp"

namespace blochspec {

// First-order reduction W' = B(x, lambda) W of (L - lambda) u = 0 with
// W = (u_1, u_1', ..., u_1^{(m_1 - 1)}, u_2, ...). Divergence-form products are
// expanded by the Leibniz rule; the top derivatives are solved from the
// pointwise principal matrix, which must be invertible.
class CompanionSystem {
 public:
  CompanionSystem(const OperatorSpec& spec, cplx lambda);

  int dimension() const { return dimension_; }
  double period() const { return period_; }
  cplx lambda() const { return lambda_; }

  CMatrix operator()(double x) const;

  // int_0^X tr B(x) dx by the periodic trapezoid rule on `points` nodes.
  cplx trace_integral(int points = 256) const;

 private:
  CMatrix stacked(double x) const;
  CMatrix principal_at(const CMatrix& values) const;
  CMatrix top_rows(double x) const;

  double period_;
  cplx lambda_;
  int n_;
  int dimension_;
  std::vector<int> orders_;
  std::vector<int> offsets_;
  double scale_ = 0.0;  // max_x |principal(x)|
  std::vector<std::pair<double, CMatrix>> terms_;  // (xi_k, [b_0(k) | ... | b_m(k)])
};

CompanionSystem companion_system(const OperatorSpec& spec, cplx lambda);

struct IntegratorStats {
  int steps = 0;
  int rejected = 0;
  double max_local_error = 0.0;  // largest accepted local error estimate (max norm)
  double error_estimate = 0.0;   // sum of accepted local error estimates
};

struct MonodromyResult {
  CMatrix M;
  cplx lambda;
  IntegratorStats stats;
  double liouville_defect = 0.0;  // |det M / exp(int tr B) - 1|
};

// Fundamental matrix over one period, by an embedded Dormand-Prince 5(4)
// pair with PI step-size control at local tolerance tol in [1e-12, 1e-4].
MonodromyResult monodromy(const OperatorSpec& spec, cplx lambda, double tol = 1e-12);

// det(M(lambda) - exp(i sigma X) I); vanishes at eigenvalues of L_sigma.
cplx evans_gardner(const MonodromyResult& monodromy, double sigma, double period);
cplx evans_gardner(const OperatorSpec& spec, cplx lambda, double sigma, double tol = 1e-12);

// The Gardner function in log form, for winding_number / localize_roots.
AnalyticFn gardner_function(const OperatorSpec& spec, double sigma, double tol = 1e-12);

}  // namespace blochspec
