#pragma once

#include <span>
#include <string>
#include <vector>

#include "blochspec/operator_model.hpp"

namespace blochspec {

// Dense Galerkin truncation L_{sigma,J} of the Bloch operator on frequencies
// |j| <= J. Block rows/columns are ordered j = -J..J, each block n x n.
struct HillMatrix {
  CMatrix data;
  int J = 0;
  double sigma = 0.0;
  std::string spec_hash;
};

// base^exponent by repeated multiplication (exact for small integer symbols).
cplx int_power(cplx base, int exponent);

// Diagonal Bloch symbol i (xi_j + sigma) for j = -J..J.
std::vector<cplx> bloch_symbol(double period, double sigma, int J);

// L_{sigma,J} = sum_k Dt^k A_{k,J} in divergence form and sum_k A_{k,J} Dt^k in
// nondivergence form, where Dt = diag(i (xi_j + sigma)). sigma is used as given.
HillMatrix assemble(const OperatorSpec& spec, double sigma, int J);

// Same matrix without hashing the spec (hot path for Evans evaluation).
CMatrix assemble_matrix(const OperatorSpec& spec, double sigma, int J);

// Budget of shifted QR sweeps per eigenvalue before giving up.
inline constexpr int kQrIterationsPerRow = 30;

// All eigenvalues (Hessenberg reduction + shifted complex QR), sorted by
// (real part, imaginary part). Throws NumericalError on non-convergence.
std::vector<cplx> eigenvalues(const CMatrix& matrix);
inline std::vector<cplx> eigenvalues(const HillMatrix& hill) { return eigenvalues(hill.data); }

struct SpectrumEntry {
  double sigma = 0.0;  // reduced into [0, 2 pi / X)
  int J = 0;
  std::vector<cplx> eigenvalues;
  bool ok = true;
  std::string error;
};

struct SpectrumResult {
  std::vector<SpectrumEntry> entries;
  std::string spec_hash;
  double elapsed_seconds = 0.0;

  bool all_ok() const;
};

// One spectrum per sigma (reduced into the Brillouin interval). Failed points
// are flagged, never abort the sweep. Output order follows the input grid for
// any thread count.
SpectrumResult sweep(const OperatorSpec& spec, std::span<const double> sigma_grid, int J,
                     int threads = 1);

}  // namespace blochspec
