#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "blochspec/operator_model.hpp"

namespace blochspec {

// A complex number held as (log |z|, arg z) so that very large or very small
// 2-modified determinants neither overflow nor underflow.
struct EvansValue {
  double log_mag = 0.0;  // -inf only for an exact floating-point zero
  double phase = 0.0;    // in (-pi, pi]
  int J = -1;            // truncation level, -1 for a bare matrix determinant
  cplx lambda{};
  double sigma = 0.0;
  std::string warning;   // set when the operator is outside the proven class

  // exp(log_mag + i phase); may overflow to inf.
  cplx value() const;
};

double wrap_phase(double phase);

enum class Det2Path {
  eigenvalues,    // sum_k log(1 - alpha_k) + alpha_k over eigenvalues of A
  factorization,  // log det(I - A) from pivoted LU, plus tr A
};

// det_2(I - A) = det(I - A) exp(tr A). The eigenvalue path falls back to the
// factorization path if the QR iteration fails.
EvansValue det2_finite(const CMatrix& A, Det2Path path = Det2Path::eigenvalues);

// Birman-Schwinger truncation. With P the diagonal multiplier
//   p_{j,i} = (i sgn(xi_j + sigma))^{m_i} ((xi_j + sigma)^2 + 1)^{m_i / 2}
// (for order 2 this is Dt^2 - I), the matrix is
//   K_J = P^{-1} (L_{sigma,J} - lambda I - P),
// so (I + K_J) U = 0 is the truncated eigenproblem. For order 2 with identity
// principal part this is Dt (Dt^2 - I)^{-1} A_1 + (Dt^2 - I)^{-1} (A_0 + 1 - lambda).
struct KMatrix {
  CMatrix data;
  double norm_k1 = 0.0;  // Frobenius norm of the lower-order derivative terms
  double norm_k0 = 0.0;  // Frobenius norm of the rest (carries the lambda dependence)
};

// Diagonal of P, one entry per row of the truncated system.
CVector multiplier(const OperatorSpec& spec, double sigma, int J);
CVector inverse_multiplier(const OperatorSpec& spec, double sigma, int J);

KMatrix assemble_K(const OperatorSpec& spec, double sigma, cplx lambda, int J);

enum class EvansVariant {
  standard,   // D_{sigma,J} = det_2(I + K_J)
  principal,  // Dcheck_{sigma,J} = det_2(I + A_{m,J}^{-1} K'_J), K'_J = P^{-1}(L - lambda) - A_{m,J}
};

// Truncated generalised Evans function at fixed (spec, sigma, J). The
// lambda-independent parts are assembled once; each call costs one dense
// determinant. Sign convention: the value is det_2 of (I + K_J), i.e.
// det2_finite(-K_J), so its zeros are exactly the eigenvalues of L_{sigma,J}.
class EvansFunction {
 public:
  EvansFunction(const OperatorSpec& spec, double sigma, int J,
                EvansVariant variant = EvansVariant::standard,
                Det2Path path = Det2Path::eigenvalues);

  EvansValue operator()(cplx lambda) const;

  // The matrix whose det_2(I + .) is returned (K_J, or A_{m,J}^{-1} K'_J).
  CMatrix perturbation(cplx lambda) const;

  int J() const { return J_; }
  double sigma() const { return sigma_; }
  const std::string& warning() const { return warning_; }

 private:
  int J_;
  double sigma_;
  Det2Path path_;
  CMatrix hill_;       // L_{sigma,J}
  CMatrix principal_;  // A_{m,J}, principal variant only
  CVector p_;
  CVector inv_p_;
  std::optional<Eigen::PartialPivLU<CMatrix>> principal_lu_;
  std::string warning_;
};

EvansValue evans(const OperatorSpec& spec, double sigma, cplx lambda, int J,
                 Det2Path path = Det2Path::eigenvalues);

// Principal-coefficient variant. Solves A_{m,J} Y = K'_J by partial-pivot LU.
// Throws NumericalError if A_{m,J} is numerically singular; attaches a warning
// if the principal coefficient fails SPD validation.
EvansValue evans_principal(const OperatorSpec& spec, double sigma, cplx lambda, int J,
                           Det2Path path = Det2Path::eigenvalues);

}  // namespace blochspec
