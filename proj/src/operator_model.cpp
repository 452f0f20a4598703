#include "blochspec/operator_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include <Eigen/Eigenvalues>

#include "blochspec/hash.hpp"

namespace blochspec {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// k-th derivative series by repeated differentiation.
FourierSeries nth_derivative(const FourierSeries& s, int k) {
  FourierSeries out = s;
  for (int i = 0; i < k; ++i) out = derivative_series(out);
  return out;
}

template <typename T>
void append_bytes(std::string& buf, const T& value) {
  char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  buf.append(raw, sizeof(T));
}

}  // namespace

std::string to_string(OperatorForm form) {
  return form == OperatorForm::divergence ? "divergence" : "nondivergence";
}

OperatorSpec::OperatorSpec(std::vector<FourierSeries> coeffs, OperatorForm form,
                           std::optional<std::vector<int>> composite_orders)
    : coeffs_(std::move(coeffs)), form_(form), composite_orders_(std::move(composite_orders)) {
  if (coeffs_.size() < 2) throw DomainError("OperatorSpec: order must be >= 1 (need a_0..a_m)");
  const double period = coeffs_.front().period();
  const int n = coeffs_.front().dim();
  for (const auto& c : coeffs_) {
    if (c.period() != period) throw DomainError("OperatorSpec: coefficient periods differ");
    if (c.dim() != n) throw DomainError("OperatorSpec: coefficient dimensions differ");
  }
  if (composite_orders_) {
    const auto& rows = *composite_orders_;
    if (static_cast<int>(rows.size()) != n)
      throw DomainError("OperatorSpec: composite_orders must have one entry per row (dim)");
    for (int m : rows)
      if (m < 1) throw DomainError("OperatorSpec: composite row orders must be >= 1");
    if (*std::max_element(rows.begin(), rows.end()) != order())
      throw DomainError("OperatorSpec: largest composite row order must equal the coefficient count - 1");
    for (int k = 0; k <= order(); ++k) {
      for (int i = 0; i < n; ++i) {
        for (int l = 0; l < n; ++l) {
          bool nonzero = false;
          for (int f = -coeffs_[k].cutoff(); f <= coeffs_[k].cutoff() && !nonzero; ++f)
            nonzero = coeffs_[k].coeff(f)(i, l) != cplx(0.0);
          if (!nonzero) continue;
          if (k > rows[i])
            throw DomainError("OperatorSpec: a_" + std::to_string(k) + " has a nonzero entry in row " +
                              std::to_string(i) + " whose order is " + std::to_string(rows[i]));
          if (k > rows[l])
            throw DomainError("OperatorSpec: a_" + std::to_string(k) + "(" + std::to_string(i) + "," +
                              std::to_string(l) + ") differentiates component " + std::to_string(l) +
                              " beyond its order " + std::to_string(rows[l]));
        }
      }
    }
  }
}

int OperatorSpec::row_order(int i) const {
  return composite_orders_ ? composite_orders_->at(i) : order();
}

int OperatorSpec::max_cutoff() const {
  int m = 0;
  for (const auto& c : coeffs_) m = std::max(m, c.cutoff());
  return m;
}

FourierSeries OperatorSpec::principal() const {
  if (!composite_orders_) return coeffs_.back();
  const int n = dim();
  const int cutoff = max_cutoff();
  std::vector<CMatrix> out(2 * cutoff + 1, CMatrix::Zero(n, n));
  for (int k = -cutoff; k <= cutoff; ++k)
    for (int i = 0; i < n; ++i) out[k + cutoff].row(i) = coeffs_[row_order(i)].coeff(k).row(i);
  return FourierSeries(period(), std::move(out));
}

bool OperatorSpec::has_identity_principal(double tol) const {
  const FourierSeries p = principal();
  const int n = dim();
  for (int k = -p.cutoff(); k <= p.cutoff(); ++k) {
    const CMatrix target = k == 0 ? CMatrix(CMatrix::Identity(n, n)) : CMatrix(CMatrix::Zero(n, n));
    if ((p.coeff(k) - target).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

std::string OperatorSpec::content_hash() const {
  std::string buf = "blochspec-operator-v1";
  append_bytes(buf, static_cast<int>(form_));
  append_bytes(buf, order());
  append_bytes(buf, dim());
  append_bytes(buf, period());
  append_bytes(buf, static_cast<int>(composite_orders_.has_value()));
  if (composite_orders_)
    for (int m : *composite_orders_) append_bytes(buf, m);
  for (const auto& c : coeffs_) {
    append_bytes(buf, c.cutoff());
    for (int k = -c.cutoff(); k <= c.cutoff(); ++k) {
      const CMatrix& m = c.coeff(k);
      for (Eigen::Index p = 0; p < m.rows(); ++p) {
        for (Eigen::Index q = 0; q < m.cols(); ++q) {
          append_bytes(buf, m(p, q).real());
          append_bytes(buf, m(p, q).imag());
        }
      }
    }
  }
  return sha256_hex(buf);
}

OperatorSpec OperatorSpec::with_form(OperatorForm form, std::vector<FourierSeries> coeffs) const {
  return OperatorSpec(std::move(coeffs), form, composite_orders_);
}

double brillouin_width(double period) { return kTwoPi / period; }

BlochParams BlochParams::reduced(double sigma, double period) {
  if (!std::isfinite(sigma)) throw DomainError("BlochParams: sigma must be finite");
  const double width = brillouin_width(period);
  double r = std::fmod(sigma, width);
  if (r < 0.0) r += width;
  if (r >= width) r = 0.0;
  return {r};
}

ValidationReport validate(const OperatorSpec& spec, int grid_n) {
  const FourierSeries principal = spec.principal();
  if (grid_n < 2 * spec.max_cutoff() + 1)
    throw DomainError("validate: grid of " + std::to_string(grid_n) +
                      " points is too coarse for cutoff " + std::to_string(spec.max_cutoff()));
  ValidationReport report;
  report.lower_bound = std::numeric_limits<double>::infinity();
  for (int s = 0; s < grid_n; ++s) {
    const double x = spec.period() * s / grid_n;
    const CMatrix a = principal.evaluate(x);
    report.symmetry_defect =
        std::max(report.symmetry_defect, (a - a.adjoint()).cwiseAbs().maxCoeff());
    const CMatrix herm = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    if (lo < report.lower_bound) {
      report.lower_bound = lo;
      report.argmin_x = x;
    }
  }
  report.spd = report.symmetry_defect < kSpdTolerance && report.lower_bound > 0.0;
  report.status = report.spd ? "ok" : "outside proven convergence class";
  return report;
}

OperatorSpec to_divergence_form(const OperatorSpec& spec) {
  if (spec.form() == OperatorForm::divergence) return spec;
  // b_k d^k u = sum_{l<=k} C(k,l) (-1)^(k-l) d^l (b_k^{(k-l)} u)
  const int m = spec.order();
  std::vector<FourierSeries> out;
  for (int l = 0; l <= m; ++l) {
    FourierSeries acc = spec.coeff(l);
    for (int k = l + 1; k <= m; ++k) {
      const double sign = ((k - l) % 2 == 0) ? 1.0 : -1.0;
      acc = acc + nth_derivative(spec.coeff(k), k - l) * cplx(sign * binomial(k, l));
    }
    out.push_back(acc);
  }
  return spec.with_form(OperatorForm::divergence, std::move(out));
}

OperatorSpec to_nondivergence_form(const OperatorSpec& spec) {
  if (spec.form() == OperatorForm::nondivergence) return spec;
  // d^k (a_k u) = sum_{l<=k} C(k,l) a_k^{(k-l)} d^l u
  const int m = spec.order();
  std::vector<FourierSeries> out;
  for (int l = 0; l <= m; ++l) {
    FourierSeries acc = spec.coeff(l);
    for (int k = l + 1; k <= m; ++k)
      acc = acc + nth_derivative(spec.coeff(k), k - l) * cplx(binomial(k, l));
    out.push_back(acc);
  }
  return spec.with_form(OperatorForm::nondivergence, std::move(out));
}

std::pair<FourierSeries, FourierSeries> bloch_rewrite_order2(const OperatorSpec& spec,
                                                             double sigma) {
  if (spec.order() != 2 || spec.is_composite())
    throw DomainError("bloch_rewrite_order2: unsupported form (order must be 2)");
  if (spec.form() != OperatorForm::divergence)
    throw DomainError("bloch_rewrite_order2: unsupported form (divergence form required)");
  if (!spec.has_identity_principal())
    throw DomainError("bloch_rewrite_order2: unsupported form (principal coefficient must be identity)");
  const int n = spec.dim();
  const double X = spec.period();
  const FourierSeries& a1 = spec.coeff(1);
  const FourierSeries& a0 = spec.coeff(0);
  const FourierSeries shift1 = FourierSeries::constant(X, (2.0 * kI * sigma) * CMatrix::Identity(n, n));
  const FourierSeries shift0 = FourierSeries::constant(X, cplx(-sigma * sigma) * CMatrix::Identity(n, n));
  return {a1 + shift1, a0 + shift0 + a1 * (kI * sigma)};
}

}  // namespace blochspec
