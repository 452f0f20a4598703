#include "blochspec/fredholm.hpp"

#include <cmath>
#include <limits>

#include "blochspec/hill.hpp"

namespace blochspec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_divergence(const OperatorSpec& spec, const char* who) {
  if (spec.form() != OperatorForm::divergence)
    throw DomainError(std::string(who) + ": operator must be in divergence form");
}

void require_finite(cplx lambda) {
  if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()))
    throw DomainError("Evans function: lambda must be finite");
}

// Rows of the truncated system whose order m_i > k, scaled by Dt^k, summed over
// 1 <= k < m_i: the lower-order derivative part of L_{sigma,J}.
CMatrix lower_derivative_terms(const OperatorSpec& spec, double sigma, int J) {
  const int n = spec.dim();
  const int blocks = 2 * J + 1;
  const std::vector<cplx> symbol = bloch_symbol(spec.period(), sigma, J);
  CMatrix out = CMatrix::Zero(n * blocks, n * blocks);
  for (int k = 1; k < spec.order(); ++k) {
    if (spec.coeff(k).is_zero()) continue;
    const CMatrix T = toeplitz_block(spec.coeff(k), J);
    for (int b = 0; b < blocks; ++b) {
      const cplx factor = int_power(symbol[b], k);
      for (int i = 0; i < n; ++i) {
        if (k >= spec.row_order(i)) continue;
        out.row(b * n + i) += factor * T.row(b * n + i);
      }
    }
  }
  return out;
}

}  // namespace

cplx EvansValue::value() const {
  if (log_mag == kNegInf) return 0.0;
  return std::polar(std::exp(log_mag), phase);
}

double wrap_phase(double phase) {
  double r = std::remainder(phase, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

EvansValue det2_finite(const CMatrix& A, Det2Path path) {
  if (A.rows() != A.cols()) throw DomainError("det2_finite: matrix must be square");
  if (!A.allFinite()) throw DomainError("det2_finite: matrix has non-finite entries");
  EvansValue out;
  if (path == Det2Path::eigenvalues) {
    try {
      const std::vector<cplx> alphas = eigenvalues(A);
      double log_mag = 0.0;
      double phase = 0.0;
      for (cplx a : alphas) {
        const cplx f = 1.0 - a;
        log_mag += (f == cplx(0.0) ? kNegInf : std::log(std::abs(f))) + a.real();
        phase += std::arg(f) + a.imag();
      }
      out.log_mag = log_mag;
      out.phase = wrap_phase(phase);
      return out;
    } catch (const NumericalError&) {
      // fall through to the factorization path
    }
  }
  const auto n = A.rows();
  const CMatrix shifted = CMatrix::Identity(n, n) - A;
  const Eigen::PartialPivLU<CMatrix> lu(shifted);
  const cplx trace = A.trace();
  double log_mag = trace.real();
  double phase = trace.imag();
  if (lu.permutationP().determinant() < 0) phase += kPi;
  const CMatrix& LU = lu.matrixLU();
  for (Eigen::Index i = 0; i < n; ++i) {
    const cplx u = LU(i, i);
    if (u == cplx(0.0)) {
      log_mag = kNegInf;
      continue;
    }
    log_mag += std::log(std::abs(u));
    phase += std::arg(u);
  }
  out.log_mag = log_mag;
  out.phase = wrap_phase(phase);
  return out;
}

CVector multiplier(const OperatorSpec& spec, double sigma, int J) {
  const int n = spec.dim();
  const double base = kTwoPi / spec.period();
  CVector p(n * (2 * J + 1));
  for (int j = -J; j <= J; ++j) {
    const double xi = base * j + sigma;
    const cplx phase = xi < 0.0 ? -kI : kI;
    for (int i = 0; i < n; ++i) {
      const int m = spec.row_order(i);
      p[(j + J) * n + i] = int_power(phase, m) * std::pow(xi * xi + 1.0, 0.5 * m);
    }
  }
  return p;
}

CVector inverse_multiplier(const OperatorSpec& spec, double sigma, int J) {
  return multiplier(spec, sigma, J).cwiseInverse();
}

KMatrix assemble_K(const OperatorSpec& spec, double sigma, cplx lambda, int J) {
  require_divergence(spec, "assemble_K");
  require_finite(lambda);
  const CVector p = multiplier(spec, sigma, J);
  const CVector inv_p = p.cwiseInverse();
  CMatrix shifted = assemble_matrix(spec, sigma, J);
  shifted.diagonal().array() -= lambda;
  shifted.diagonal() -= p;
  KMatrix out;
  out.data = inv_p.asDiagonal() * shifted;
  const CMatrix k1 = inv_p.asDiagonal() * lower_derivative_terms(spec, sigma, J);
  out.norm_k1 = k1.norm();
  out.norm_k0 = (out.data - k1).norm();
  return out;
}

EvansFunction::EvansFunction(const OperatorSpec& spec, double sigma, int J,
                             EvansVariant variant, Det2Path path)
    : J_(J), sigma_(sigma), path_(path) {
  require_divergence(spec, "EvansFunction");
  p_ = multiplier(spec, sigma, J);
  inv_p_ = p_.cwiseInverse();
  hill_ = assemble_matrix(spec, sigma, J);
  if (variant == EvansVariant::standard || spec.has_identity_principal(0.0)) return;
  principal_ = toeplitz_block(spec.principal(), J);
  principal_lu_.emplace(principal_);
  const double rcond = principal_lu_->rcond();
  if (!(rcond > 1e-14))
    throw NumericalError("evans_principal: principal Toeplitz minor A_{m,J} is singular (rcond " +
                         std::to_string(rcond) + ") at J=" + std::to_string(J));
  const int grid = std::max(64, 4 * spec.max_cutoff() + 1);
  const ValidationReport report = validate(spec, grid);
  if (!report.spd) warning_ = report.status;
}

CMatrix EvansFunction::perturbation(cplx lambda) const {
  require_finite(lambda);
  CMatrix k = hill_;
  k.diagonal().array() -= lambda;
  if (!principal_lu_) {
    k.diagonal() -= p_;
    return inv_p_.asDiagonal() * k;
  }
  k = inv_p_.asDiagonal() * k;
  k -= principal_;
  return principal_lu_->solve(k);
}

EvansValue EvansFunction::operator()(cplx lambda) const {
  EvansValue v = det2_finite(-perturbation(lambda), path_);
  v.J = J_;
  v.lambda = lambda;
  v.sigma = sigma_;
  v.warning = warning_;
  return v;
}

EvansValue evans(const OperatorSpec& spec, double sigma, cplx lambda, int J, Det2Path path) {
  return EvansFunction(spec, sigma, J, EvansVariant::standard, path)(lambda);
}

EvansValue evans_principal(const OperatorSpec& spec, double sigma, cplx lambda, int J,
                           Det2Path path) {
  return EvansFunction(spec, sigma, J, EvansVariant::principal, path)(lambda);
}

}  // namespace blochspec
