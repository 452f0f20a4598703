#include "blochspec/hill.hpp"

#include <algorithm>
#include <chrono>

#include <Eigen/Eigenvalues>

#include "blochspec/parallel.hpp"

namespace blochspec {

cplx int_power(cplx base, int exponent) {
  cplx result = 1.0;
  for (int e = 0; e < exponent; ++e) result *= base;
  return result;
}

std::vector<cplx> bloch_symbol(double period, double sigma, int J) {
  std::vector<cplx> symbol(2 * J + 1);
  for (int j = -J; j <= J; ++j) symbol[j + J] = kI * ((kTwoPi / period) * j + sigma);
  return symbol;
}

CMatrix assemble_matrix(const OperatorSpec& spec, double sigma, int J) {
  if (J < 0) throw DomainError("assemble: J must be >= 0");
  const int n = spec.dim();
  const int size = n * (2 * J + 1);
  const std::vector<cplx> symbol = bloch_symbol(spec.period(), sigma, J);
  const bool divergence = spec.form() == OperatorForm::divergence;

  CMatrix out = CMatrix::Zero(size, size);
  for (int k = 0; k <= spec.order(); ++k) {
    if (spec.coeff(k).is_zero()) continue;
    CMatrix term = toeplitz_block(spec.coeff(k), J);
    if (term.rows() != size) throw DomainError("assemble: coefficient dimension mismatch");
    if (k > 0) {
      for (int b = 0; b < 2 * J + 1; ++b) {
        const cplx factor = int_power(symbol[b], k);
        if (divergence)
          term.middleRows(b * n, n) *= factor;
        else
          term.middleCols(b * n, n) *= factor;
      }
    }
    out += term;
  }
  return out;
}

HillMatrix assemble(const OperatorSpec& spec, double sigma, int J) {
  return {assemble_matrix(spec, sigma, J), J, sigma, spec.content_hash()};
}

std::vector<cplx> eigenvalues(const CMatrix& matrix) {
  if (matrix.rows() != matrix.cols()) throw DomainError("eigenvalues: matrix must be square");
  if (!matrix.allFinite()) throw DomainError("eigenvalues: matrix has non-finite entries");
  const auto n = matrix.rows();
  std::vector<cplx> values;
  if (n == 0) return values;

  Eigen::ComplexSchur<CMatrix> schur(n);
  schur.setMaxIterations(kQrIterationsPerRow * n);
  schur.compute(matrix, /*computeU=*/false);
  const CMatrix& T = schur.matrixT();
  if (schur.info() != Eigen::Success) {
    Eigen::Index deflated = 0;
    for (Eigen::Index i = 0; i + 1 < n; ++i)
      if (T(i + 1, i) == cplx(0.0)) ++deflated;
    throw NumericalError("eigenvalues: shifted QR did not converge within " +
                         std::to_string(kQrIterationsPerRow * n) + " sweeps (" +
                         std::to_string(deflated) + " of " + std::to_string(n - 1) +
                         " subdiagonal entries deflated)");
  }
  values.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) values.push_back(T(i, i));
  std::sort(values.begin(), values.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return values;
}

bool SpectrumResult::all_ok() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.ok; });
}

SpectrumResult sweep(const OperatorSpec& spec, std::span<const double> sigma_grid, int J,
                     int threads) {
  const auto start = std::chrono::steady_clock::now();
  SpectrumResult result;
  result.spec_hash = spec.content_hash();
  result.entries.resize(sigma_grid.size());
  parallel_for(sigma_grid.size(), threads, [&](std::size_t i) {
    SpectrumEntry& entry = result.entries[i];
    entry.J = J;
    entry.sigma = BlochParams::reduced(sigma_grid[i], spec.period()).sigma;
    try {
      entry.eigenvalues = eigenvalues(assemble_matrix(spec, entry.sigma, J));
    } catch (const NumericalError& e) {
      entry.ok = false;
      entry.error = e.what();
    }
  });
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace blochspec
