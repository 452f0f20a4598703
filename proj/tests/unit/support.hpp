#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "blochspec/operator_model.hpp"

namespace blochspec::test {

// Triangle wave |x - pi| - pi/2 on [0, 2 pi): Ahat(k) = 2 / (pi k^2) for odd k.
inline FourierSeries triangle_wave(int cutoff) {
  std::vector<CMatrix> c(2 * cutoff + 1, CMatrix::Zero(1, 1));
  for (int k = -cutoff; k <= cutoff; ++k)
    if (k % 2 != 0) c[k + cutoff](0, 0) = 2.0 / (kPi * k * k);
  return FourierSeries(kTwoPi, std::move(c));
}

inline FourierSeries cosine(double amplitude = 1.0, double period = kTwoPi) {
  return FourierSeries::scalar(period, {{-1, amplitude / 2}, {1, amplitude / 2}});
}

inline FourierSeries sine(double amplitude = 1.0, double period = kTwoPi) {
  return FourierSeries::scalar(period, {{-1, cplx(0, amplitude / 2)}, {1, cplx(0, -amplitude / 2)}});
}

inline FourierSeries zero(double period = kTwoPi) { return FourierSeries(period, 1, 0); }
inline FourierSeries one(double period = kTwoPi) { return FourierSeries::scalar_constant(period, 1.0); }

// Scalar d^2 + d a1 + a0 in divergence form.
inline OperatorSpec schrodinger(const FourierSeries& a0, const FourierSeries& a1) {
  return OperatorSpec({a0, a1, one(a0.period())});
}
inline OperatorSpec schrodinger(const FourierSeries& a0) { return schrodinger(a0, zero(a0.period())); }
inline OperatorSpec free_operator() { return schrodinger(zero()); }

inline CMatrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * cplx(normal(rng), normal(rng));
  return m;
}

// Random scalar series with cutoff M and sum_k |Ahat(k)| <= bound.
inline FourierSeries random_series(std::mt19937_64& rng, int cutoff, double bound) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<CMatrix> c(2 * cutoff + 1, CMatrix::Zero(1, 1));
  double total = 0.0;
  for (auto& m : c) {
    m(0, 0) = cplx(u(rng), u(rng));
    total += std::abs(m(0, 0));
  }
  std::uniform_real_distribution<double> s(0.2, 1.0);
  const double scale = bound * s(rng) / total;
  for (auto& m : c) m *= scale;
  return FourierSeries(kTwoPi, std::move(c));
}

// Scaling and squaring with a degree-18 Taylor polynomial.
inline CMatrix expm(const CMatrix& a) {
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = norm > 0.5 ? static_cast<int>(std::ceil(std::log2(norm / 0.5))) : 0;
  const CMatrix b = a / std::ldexp(1.0, s);
  CMatrix term = CMatrix::Identity(a.rows(), a.cols());
  CMatrix sum = term;
  for (int k = 1; k <= 18; ++k) {
    term = term * b / static_cast<double>(k);
    sum += term;
  }
  for (; s > 0; --s) sum = sum * sum;
  return sum;
}

}  // namespace blochspec::test
