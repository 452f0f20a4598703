#include <doctest.h>

#include <sstream>

#include "blochspec/fourier_series.hpp"
#include "support.hpp"

using namespace blochspec;
using blochspec::test::triangle_wave;

namespace {

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double triangle(double x) { return std::abs(x - kPi) - kPi / 2; }

}  // namespace

TEST_CASE("constant samples give a single mean coefficient") {
  for (int N : {1, 7, 64}) {
    std::vector<cplx> s(N, 3.0);
    const FourierSeries f = from_samples(std::span<const cplx>(s), 2.0, 0);
    CHECK(std::abs(f.coeff(0)(0, 0) - 3.0) < 1e-14);
  }
  std::vector<cplx> s(16, 3.0);
  const FourierSeries f = from_samples(std::span<const cplx>(s), 2.0, 5);
  for (int k = -5; k <= 5; ++k)
    CHECK(std::abs(f.coeff(k)(0, 0) - (k == 0 ? 3.0 : 0.0)) < 1e-14);
}

TEST_CASE("single harmonic") {
  const double X = 3.0;
  std::vector<cplx> s(64);
  for (int n = 0; n < 64; ++n) s[n] = std::cos(kTwoPi * n / 64.0);
  const FourierSeries f = from_samples(std::span<const cplx>(s), X, 2);
  for (int k = -2; k <= 2; ++k)
    CHECK(std::abs(f.coeff(k)(0, 0) - (std::abs(k) == 1 ? 0.5 : 0.0)) < 1e-12);
}

TEST_CASE("triangle wave coefficients match the closed-form integral") {
  const int N = 1 << 18;
  std::vector<cplx> s(N);
  for (int n = 0; n < N; ++n) s[n] = triangle(kTwoPi * n / N);
  const FourierSeries f = from_samples(std::span<const cplx>(s), kTwoPi, 40);
  const FourierSeries exact = triangle_wave(40);
  for (int k = -40; k <= 40; ++k)
    CHECK(std::abs(f.coeff(k)(0, 0) - exact.coeff(k)(0, 0)) < 1e-10);
}

TEST_CASE("from_samples rejects bad input") {
  std::vector<cplx> empty;
  CHECK_THROWS_AS(from_samples(std::span<const cplx>(empty), 1.0, 0), DomainError);
  std::vector<cplx> s(8, 1.0);
  CHECK_THROWS_AS(from_samples(std::span<const cplx>(s), 1.0, 4), DomainError);
  CHECK_NOTHROW(from_samples(std::span<const cplx>(s), 1.0, 3));
}

TEST_CASE("matrix samples and round trip") {
  const double X = 5.0;
  const int N = 37;
  const FourierSeries g(X, {CMatrix{{1, 2}, {0, cplx(0, 1)}}, CMatrix{{3, 0}, {1, 1}},
                            CMatrix{{cplx(0.5, 0.5), 0}, {0, -2}}});
  std::vector<CMatrix> s;
  for (int n = 0; n < N; ++n) s.push_back(g.evaluate(X * n / N));
  const FourierSeries f = from_samples(std::span<const CMatrix>(s), X, 1);
  for (int k = -1; k <= 1; ++k) CHECK(max_abs(f.coeff(k) - g.coeff(k)) < 1e-12);
  for (int n = 0; n < N; ++n) CHECK(max_abs(f.evaluate(X * n / N) - s[n]) < 1e-10);
}

TEST_CASE("Parseval for band-limited samples") {
  std::mt19937_64 rng(11);
  const FourierSeries g = test::random_series(rng, 6, 3.0);
  const int N = 32;
  double mean = 0.0;
  for (int n = 0; n < N; ++n) mean += std::norm(g.evaluate(kTwoPi * n / N)(0, 0));
  mean /= N;
  double sum = 0.0;
  for (int k = -6; k <= 6; ++k) sum += std::norm(g.coeff(k)(0, 0));
  CHECK(std::abs(sum - mean) < 1e-10);
}

TEST_CASE("coefficients outside the cutoff are zero") {
  const FourierSeries c = test::cosine();
  CHECK(c.cutoff() == 1);
  CHECK(c.coeff(5)(0, 0) == cplx(0.0));
  CHECK(c.coeff(-2)(0, 0) == cplx(0.0));
}

TEST_CASE("is_real flag") {
  CHECK(test::cosine().is_real());
  CHECK(test::sine().is_real());
  CHECK_FALSE(FourierSeries::scalar(kTwoPi, {{1, 1.0}}).is_real());
  CHECK_FALSE(FourierSeries::scalar_constant(kTwoPi, cplx(0, 1)).is_real());
}

TEST_CASE("invalid construction") {
  CHECK_THROWS(FourierSeries(0.0, 1, 0));
  CHECK_THROWS(FourierSeries(1.0, 0, 0));
  CHECK_THROWS(FourierSeries(1.0, std::vector<CMatrix>(2, CMatrix::Zero(1, 1))));
}

TEST_CASE("toeplitz blocks") {
  SUBCASE("constant") {
    const CMatrix c{{1, 2}, {3, 4}};
    const CMatrix T = toeplitz_block(FourierSeries::constant(1.0, c), 2);
    REQUIRE(T.rows() == 10);
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 5; ++k)
        CHECK(max_abs(T.block(2 * j, 2 * k, 2, 2) - (j == k ? c : CMatrix::Zero(2, 2))) == 0.0);
  }
  SUBCASE("single mode is a subdiagonal shift") {
    const CMatrix T = toeplitz_block(FourierSeries::scalar(kTwoPi, {{1, 1.0}}), 1);
    const CMatrix expected{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    CHECK(max_abs(T - expected) == 0.0);
  }
  SUBCASE("cosine") {
    const CMatrix T = toeplitz_block(test::cosine(), 1);
    const CMatrix expected{{0, 0.5, 0}, {0.5, 0, 0.5}, {0, 0.5, 0}};
    CHECK(max_abs(T - expected) == 0.0);
  }
  SUBCASE("J = 0") {
    const CMatrix T = toeplitz_block(test::cosine(), 0);
    CHECK(T.rows() == 1);
    CHECK(T(0, 0) == cplx(0.0));
  }
}

TEST_CASE("toeplitz of a real symmetric series is hermitian") {
  std::mt19937_64 rng(5);
  std::vector<CMatrix> c(7);
  for (int k = 0; k <= 3; ++k) {
    const CMatrix m = test::random_matrix(rng, 2, 2, 1.0);
    c[3 + k] = m + m.transpose();
    c[3 - k] = c[3 + k].conjugate();
  }
  c[3] = (c[3] + c[3].adjoint()).eval() * 0.5;
  c[3] = c[3].real().cast<cplx>();
  const FourierSeries f(2.0, c);
  REQUIRE(f.is_real());
  const CMatrix T = toeplitz_block(f, 4);
  CHECK(max_abs(T - T.adjoint()) < 1e-15);
}

TEST_CASE("toeplitz_block is linear") {
  std::mt19937_64 rng(9);
  const FourierSeries a = test::random_series(rng, 3, 1.0);
  const FourierSeries b = test::random_series(rng, 5, 1.0);
  const cplx s(0.3, -1.2);
  const CMatrix lhs = toeplitz_block(a * s + b, 6);
  const CMatrix rhs = s * toeplitz_block(a, 6) + toeplitz_block(b, 6);
  CHECK(max_abs(lhs - rhs) < 1e-15);
}

TEST_CASE("sobolev tail") {
  CHECK(sobolev_tail(FourierSeries::scalar_constant(1.0, 2.0), 1) == 0.0);
  CHECK(sobolev_tail(test::cosine(), 2) == 0.0);
  CHECK(sobolev_tail(test::cosine(), 1) == doctest::Approx(0.5));
  CHECK_THROWS(sobolev_tail(test::cosine(), 0));

  const FourierSeries t = triangle_wave(2001);
  double direct = 0.0;
  for (int k = 8; k <= 2001; ++k)
    if (k % 2 != 0) direct += 2.0 * std::pow(2.0 / (kPi * k * k), 2);
  const double tail = sobolev_tail(t, 8);
  CHECK(tail == doctest::Approx(direct).epsilon(1e-12));
  CHECK(tail <= h1_norm(t) / 8);
}

TEST_CASE("h1 norm") {
  CHECK(h1_norm(test::cosine()) == doctest::Approx(1.0));
  CHECK(h1_norm(test::cosine(1.0, kPi)) == doctest::Approx(0.5 * (1 + 4)));
}

TEST_CASE("derivative series") {
  CHECK(derivative_series(FourierSeries::scalar_constant(3.0, 2.0)).is_zero());
  const FourierSeries d = derivative_series(test::cosine());
  CHECK(std::abs(d.coeff(1)(0, 0) - cplx(0, 0.5)) < 1e-15);
  CHECK(std::abs(d.coeff(-1)(0, 0) - cplx(0, -0.5)) < 1e-15);
  CHECK(std::abs(d.evaluate(0.7)(0, 0) + std::sin(0.7)) < 1e-15);
}

TEST_CASE("derivative of the triangle wave matches square wave samples") {
  const int N = 1 << 18;
  std::vector<cplx> s(N);
  for (int n = 0; n < N; ++n) {
    const double x = kTwoPi * n / N;
    s[n] = (n == 0 || 2 * n == N) ? 0.0 : (x < kPi ? -1.0 : 1.0);
  }
  const FourierSeries square = from_samples(std::span<const cplx>(s), kTwoPi, 32);
  const FourierSeries d = derivative_series(triangle_wave(32));
  for (int k = -32; k <= 32; ++k) CHECK(std::abs(square.coeff(k)(0, 0) - d.coeff(k)(0, 0)) < 1e-8);
}

TEST_CASE("evaluate_derivative agrees with finite differences") {
  const FourierSeries f = FourierSeries::scalar(2.0, {{-2, 0.3}, {1, cplx(0.2, 1)}, {2, -0.4}});
  const double x = 0.37, h = 1e-5;
  const cplx fd = (f.evaluate(x + h)(0, 0) - f.evaluate(x - h)(0, 0)) / (2 * h);
  CHECK(std::abs(f.evaluate_derivative(x, 1)(0, 0) - fd) < 1e-8);
  CHECK(max_abs(f.evaluate_derivative(x, 0) - f.evaluate(x)) == 0.0);
}

TEST_CASE("decay truncation") {
  const FourierSeries f = FourierSeries::scalar(1.0, {{-3, 1e-18}, {-1, 1.0}, {1, 1.0}, {3, 1e-18}});
  CHECK(truncate_decay(f).cutoff() == 1);
  CHECK(truncate_decay(triangle_wave(10)).cutoff() == 9);
}

TEST_CASE("table round trip") {
  const FourierSeries g(1.5, {CMatrix{{1, cplx(2, -1)}, {0, 3}}, CMatrix{{cplx(0.1, 0.2), 0}, {1e-17, -2}},
                              CMatrix{{1, 1}, {1, 1}}});
  std::stringstream ss;
  write_table(ss, g);
  const FourierSeries h = read_table(ss);
  CHECK(h.period() == 1.5);
  CHECK(h.dim() == 2);
  CHECK(h.cutoff() == 1);
  for (int k = -1; k <= 1; ++k) CHECK(max_abs(h.coeff(k) - g.coeff(k)) == 0.0);
}

TEST_CASE("malformed tables are rejected") {
  std::istringstream dup("# blochspec-fourier v1\n# period 1\n# dim 1\n0 1 0\n0 2 0\n");
  CHECK_THROWS(read_table(dup));
  std::istringstream short_line("# blochspec-fourier v1\n# period 1\n# dim 1\n0 1\n");
  CHECK_THROWS(read_table(short_line));
  std::istringstream sparse("# blochspec-fourier v1\n# period 6.5\n# dim 1\n2 1 0\n");
  const FourierSeries f = read_table(sparse);
  CHECK(f.cutoff() == 2);
  CHECK(f.coeff(0)(0, 0) == cplx(0.0));
}

TEST_CASE("sample files") {
  std::istringstream in("# two samples\n1 0 0 1 0 0 1 0\n2 0 0 0 0 0 2 0\n");
  const auto s = read_samples(in, 2);
  REQUIRE(s.size() == 2);
  CHECK(s[0](0, 1) == cplx(0, 1));
  std::istringstream bad("1 0 0 1 0 0 1 0\n");
  CHECK_THROWS(read_samples(bad, 1));
}
