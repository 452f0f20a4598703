#include "blochspec/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

namespace blochspec {

namespace {

constexpr double kPrincipalRcond = 1e-13;

}  // namespace

CompanionSystem::CompanionSystem(const OperatorSpec& spec, cplx lambda)
    : period_(spec.period()), lambda_(lambda), n_(spec.dim()) {
  if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()))
    throw DomainError("companion_system: lambda must be finite");
  const OperatorSpec expanded = to_nondivergence_form(spec);
  const int m = expanded.order();
  dimension_ = 0;
  for (int i = 0; i < n_; ++i) {
    orders_.push_back(spec.row_order(i));
    offsets_.push_back(dimension_);
    dimension_ += orders_.back();
  }
  // Stack b_0 | b_1 | ... | b_m per frequency so one pass evaluates them all.
  const int M = expanded.max_cutoff();
  for (int k = -M; k <= M; ++k) {
    CMatrix c(n_, n_ * (m + 1));
    for (int d = 0; d <= m; ++d) c.middleCols(d * n_, n_) = expanded.coeff(d).coeff(k);
    if (c.isZero(0.0)) continue;
    terms_.push_back({(kTwoPi / period_) * k, std::move(c)});
  }
  // Reject singular principal matrices up front on a sampling grid.
  const int grid = std::max(64, 4 * M + 1);
  scale_ = 0.0;
  for (int s = 0; s < grid; ++s)
    scale_ = std::max(scale_, principal_at(stacked(period_ * s / grid)).cwiseAbs().maxCoeff());
  for (int s = 0; s < grid; ++s) top_rows(period_ * s / grid);
}

CMatrix CompanionSystem::stacked(double x) const {
  CMatrix out = CMatrix::Zero(n_, terms_.empty() ? n_ : terms_.front().second.cols());
  for (const auto& [xi, c] : terms_) out += std::polar(1.0, xi * x) * c;
  return out;
}

CMatrix CompanionSystem::principal_at(const CMatrix& values) const {
  CMatrix principal = CMatrix::Zero(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int l = 0; l < n_; ++l)
      if (orders_[l] <= orders_[i]) principal(i, l) = values(i, orders_[l] * n_ + l);
  return principal;
}

CMatrix CompanionSystem::top_rows(double x) const {
  const CMatrix values = stacked(x);
  const CMatrix principal = principal_at(values);
  CMatrix rhs = CMatrix::Zero(n_, dimension_);
  for (int i = 0; i < n_; ++i) {
    for (int l = 0; l < n_; ++l)
      for (int d = 0; d < orders_[l]; ++d) rhs(i, offsets_[l] + d) = -values(i, d * n_ + l);
    rhs(i, offsets_[i]) += lambda_;
  }
  auto singular = [&]() {
    std::ostringstream os;
    os << "companion_system: principal coefficient is singular at x = " << x;
    return NumericalError(os.str());
  };
  if (n_ == 1) {
    const cplx p = principal(0, 0);
    if (!(std::abs(p) > kPrincipalRcond * scale_)) throw singular();
    return rhs / p;
  }
  const Eigen::PartialPivLU<CMatrix> lu(principal);
  const double rcond = lu.rcond();
  if (!(rcond > kPrincipalRcond) ||
      !(rcond * principal.cwiseAbs().colwise().sum().maxCoeff() > kPrincipalRcond * scale_))
    throw singular();
  return lu.solve(rhs);
}

CMatrix CompanionSystem::operator()(double x) const {
  CMatrix B = CMatrix::Zero(dimension_, dimension_);
  for (int l = 0; l < n_; ++l)
    for (int d = 0; d + 1 < orders_[l]; ++d) B(offsets_[l] + d, offsets_[l] + d + 1) = 1.0;
  const CMatrix top = top_rows(x);
  for (int l = 0; l < n_; ++l) B.row(offsets_[l] + orders_[l] - 1) = top.row(l);
  return B;
}

cplx CompanionSystem::trace_integral(int points) const {
  cplx total = 0.0;
  for (int s = 0; s < points; ++s) total += (*this)(period_ * s / points).trace();
  return total * (period_ / points);
}

CompanionSystem companion_system(const OperatorSpec& spec, cplx lambda) {
  return CompanionSystem(spec, lambda);
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

MonodromyResult monodromy(const OperatorSpec& spec, cplx lambda, double tol) {
  if (!(tol >= 1e-12 && tol <= 1e-4))
    throw DomainError("monodromy: tol must lie in [1e-12, 1e-4]");
  const CompanionSystem system(spec, lambda);
  const double X = system.period();
  const int d = system.dimension();

  MonodromyResult result;
  result.lambda = lambda;
  CMatrix W = CMatrix::Identity(d, d);
  double x = 0.0;
  double h = X / 64.0;
  const double h_min = 1e-14 * X;
  double err_old = 1e-4;
  CMatrix k1 = system(x) * W;

  while (x < X) {
    bool last = false;
    if (x + h >= X) {
      h = X - x;
      last = true;
    }
    const CMatrix k2 = system(x + c2 * h) * (W + h * (a21 * k1));
    const CMatrix k3 = system(x + c3 * h) * (W + h * (a31 * k1 + a32 * k2));
    const CMatrix k4 = system(x + c4 * h) * (W + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const CMatrix k5 = system(x + c5 * h) * (W + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const CMatrix k6 =
        system(x + h) * (W + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const CMatrix next = W + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const double x_next = last ? X : x + h;
    const CMatrix k7 = system(x_next) * next;
    const CMatrix err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double norm = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
      const double scale = tol * (1.0 + std::max(std::abs(W(i)), std::abs(next(i))));
      norm += std::norm(err(i) / scale);
    }
    norm = std::sqrt(norm / static_cast<double>(err.size()));
    if (!std::isfinite(norm))
      throw NumericalError("monodromy: non-finite solution; try a larger tol or smaller |lambda|");

    if (norm <= 1.0) {
      const double local = err.cwiseAbs().maxCoeff();
      result.stats.max_local_error = std::max(result.stats.max_local_error, local);
      result.stats.error_estimate += local;
      ++result.stats.steps;
      W = next;
      k1 = k7;
      x = x_next;
      const double fac = std::clamp(0.9 * std::pow(std::max(norm, 1e-10), -0.17) *
                                        std::pow(err_old, 0.04),
                                    0.2, 10.0);
      err_old = std::max(norm, 1e-4);
      if (!last) h *= fac;
    } else {
      ++result.stats.rejected;
      h *= std::max(0.2, 0.9 * std::pow(norm, -0.2));
    }
    if (x < X && h < h_min)
      throw NumericalError("monodromy: step size underflow at x = " + std::to_string(x) +
                           " (stiff problem); try a larger tol or smaller |lambda|");
  }
  result.M = W;

  const cplx expected = std::exp(system.trace_integral());
  const cplx det = W.determinant();
  result.liouville_defect = std::abs(det / expected - 1.0);
  return result;
}

cplx evans_gardner(const MonodromyResult& monodromy, double sigma, double period) {
  const auto d = monodromy.M.rows();
  const cplx multiplier = std::polar(1.0, sigma * period);
  return (monodromy.M - multiplier * CMatrix::Identity(d, d)).determinant();
}

cplx evans_gardner(const OperatorSpec& spec, cplx lambda, double sigma, double tol) {
  return evans_gardner(monodromy(spec, lambda, tol), sigma, spec.period());
}

AnalyticFn gardner_function(const OperatorSpec& spec, double sigma, double tol) {
  auto f = log_form([spec, sigma, tol](cplx lambda) { return evans_gardner(spec, lambda, sigma, tol); });
  return [f = std::move(f), sigma](cplx lambda) {
    EvansValue v = f(lambda);
    v.sigma = sigma;
    return v;
  };
}

}  // namespace blochspec
