#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "blochspec/types.hpp"

namespace blochspec {

// Finitely supported Fourier series of an X-periodic n x n matrix function,
//
//   A(x) = sum_{|k| <= M} Ahat(k) exp(i xi_k x),   xi_k = 2 pi k / X.
//
// Immutable after construction. Coefficients outside |k| <= M read as zero.
class FourierSeries {
 public:
  // Zero series.
  FourierSeries(double period, int dim, int cutoff);
  // coeffs[k + M] = Ahat(k) for k = -M..M; coeffs.size() must be odd.
  FourierSeries(double period, std::vector<CMatrix> coeffs);

  static FourierSeries constant(double period, const CMatrix& value);
  static FourierSeries scalar_constant(double period, cplx value);
  // Scalar series from (k, Ahat(k)) pairs; the cutoff is the largest |k|.
  static FourierSeries scalar(double period,
                              std::initializer_list<std::pair<int, cplx>> terms);

  double period() const { return period_; }
  int dim() const { return dim_; }
  int cutoff() const { return cutoff_; }

  const CMatrix& coeff(int k) const;
  double wavenumber(int k) const { return (kTwoPi / period_) * k; }

  CMatrix evaluate(double x) const;
  // d^order/dx^order A(x), evaluated from the series termwise.
  CMatrix evaluate_derivative(double x, int order) const;

  // Ahat(-k) == conj(Ahat(k)) entrywise for all k.
  bool is_real(double tol = 1e-12) const;
  bool is_zero(double tol = 0.0) const;

  // Same function with a different cutoff (zero-padded or truncated).
  FourierSeries with_cutoff(int cutoff) const;

  FourierSeries operator+(const FourierSeries& other) const;
  FourierSeries operator-(const FourierSeries& other) const;
  FourierSeries operator*(cplx factor) const;

 private:
  double period_;
  int dim_;
  int cutoff_;
  std::vector<CMatrix> coeffs_;
  CMatrix zero_;
};

// DFT of N equispaced samples f(x_n), x_n = n X / N, normalised so that a
// constant sample value c gives Ahat(0) = c. Frequencies beyond the cutoff are
// discarded. Throws DomainError if samples is empty or N < 2 M + 1.
FourierSeries from_samples(std::span<const CMatrix> samples, double period, int cutoff);
FourierSeries from_samples(std::span<const cplx> samples, double period, int cutoff);

// Block-Toeplitz Galerkin matrix of size n(2J+1): block (j, k) = Ahat(j - k),
// rows and columns ordered j = -J, ..., J.
CMatrix toeplitz_block(const FourierSeries& series, int J);

// sum_{|j| >= J} |Ahat(j)|_F^2.
double sobolev_tail(const FourierSeries& series, int J);
// sum_j (1 + xi_j^2) |Ahat(j)|_F^2.
double h1_norm(const FourierSeries& series);

// Series of A'(x): Ahat(k) -> i xi_k Ahat(k).
FourierSeries derivative_series(const FourierSeries& series);

// Drops trailing frequencies whose Frobenius norm is below rel * max_k |Ahat(k)|_F.
FourierSeries truncate_decay(const FourierSeries& series, double rel = 1e-14);

// Flat text table:
//   # blochspec-fourier v1
//   # period <X>
//   # dim <n>
//   k  re(A_00) im(A_00)  re(A_01) im(A_01) ...   (row-major entries)
// one line per frequency k, written in increasing k.
void write_table(std::ostream& out, const FourierSeries& series);
FourierSeries read_table(std::istream& in);

// Sample file: one line per sample point, each with 2 n^2 numbers (re, im pairs
// in row-major order). Lines starting with '#' are comments.
std::vector<CMatrix> read_samples(std::istream& in, int dim);

}  // namespace blochspec
