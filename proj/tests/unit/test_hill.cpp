#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "blochspec/hill.hpp"
#include "blochspec/winding.hpp"
#include "support.hpp"

using namespace blochspec;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

CMatrix diag(std::initializer_list<cplx> d) {
  CVector v(d.size());
  int i = 0;
  for (cplx x : d) v(i++) = x;
  return v.asDiagonal();
}

}  // namespace

TEST_CASE("free operator at sigma = 0") {
  const HillMatrix H = assemble(test::free_operator(), 0.0, 2);
  CHECK(H.J == 2);
  CHECK(H.spec_hash == test::free_operator().content_hash());
  CHECK(max_abs(H.data - diag({-4, -1, 0, -1, -4})) == 0.0);
}

TEST_CASE("cosine potential at J = 1") {
  const CMatrix H = assemble_matrix(test::schrodinger(test::cosine()), 0.0, 1);
  const CMatrix expected{{-1, 0.5, 0}, {0.5, 0, 0.5}, {0, 0.5, -1}};
  CHECK(max_abs(H - expected) == 0.0);
  const auto ev = eigenvalues(H);
  REQUIRE(ev.size() == 3);
  CHECK(std::abs(ev[0] - (-1 - std::sqrt(3.0)) / 2.0) < 1e-10);
  CHECK(std::abs(ev[1] - cplx(-1.0)) < 1e-10);
  CHECK(std::abs(ev[2] - (-1 + std::sqrt(3.0)) / 2.0) < 1e-10);
}

TEST_CASE("shifted symbol") {
  const double s = 1.0 / 3.0;
  const CMatrix H = assemble_matrix(test::free_operator(), s, 1);
  const CMatrix expected = diag({-(s - 1) * (s - 1), -s * s, -(1 + s) * (1 + s)});
  CHECK(max_abs(H - expected) < 1e-15);
}

TEST_CASE("diagonal eigenvalues are sorted") {
  const auto ev = eigenvalues(diag({-4, -1, 0, -1, -4}));
  const std::vector<cplx> expected{-4, -4, -1, -1, 0};
  REQUIRE(ev.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(ev[i] == expected[i]);
}

TEST_CASE("constant coefficients are exact") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const cplx a1(n(rng), n(rng)), a0(n(rng), n(rng));
    const double X = 1.0 + std::abs(n(rng));
    const OperatorSpec spec({FourierSeries::scalar_constant(X, a0), FourierSeries::scalar_constant(X, a1),
                             FourierSeries::scalar_constant(X, 1.0)});
    for (double sigma : {0.0, 0.3, 1.1}) {
      const int J = 6;
      const auto ev = eigenvalues(assemble_matrix(spec, sigma, J));
      std::vector<cplx> symbol;
      for (cplx d : bloch_symbol(X, sigma, J)) symbol.push_back(d * d + d * a1 + a0);
      const MatchReport m = match_spectra(ev, symbol, 1e300);
      CHECK(m.unmatched_a == 0);
      CHECK(m.max_distance < 1e-10);
    }
  }
}

TEST_CASE("bloch symbol") {
  const auto d = bloch_symbol(kTwoPi, 0.25, 2);
  REQUIRE(d.size() == 5);
  CHECK(d[0] == cplx(0, -1.75));
  CHECK(d[4] == cplx(0, 2.25));
  CHECK(int_power(cplx(0, 1), 4) == cplx(1.0));
  CHECK(int_power(cplx(0, 2), 0) == cplx(1.0));
}

TEST_CASE("truncation nesting") {
  std::mt19937_64 rng(1);
  const OperatorSpec spec = test::schrodinger(test::random_series(rng, 3, 1.0), test::random_series(rng, 2, 1.0));
  for (int J = 0; J < 6; ++J) {
    const CMatrix a = assemble_matrix(spec, 0.4, J);
    const CMatrix b = assemble_matrix(spec, 0.4, J + 1);
    CHECK(max_abs(b.block(1, 1, a.rows(), a.cols()) - a) == 0.0);
  }
}

TEST_CASE("systems: block layout") {
  const FourierSeries a0 = FourierSeries::constant(kTwoPi, CMatrix{{0, 1}, {2, 0}});
  const FourierSeries a1(kTwoPi, 2, 0);
  const FourierSeries a2 = FourierSeries::constant(kTwoPi, CMatrix::Identity(2, 2));
  const CMatrix H = assemble_matrix(OperatorSpec({a0, a1, a2}), 0.0, 1);
  REQUIRE(H.rows() == 6);
  CHECK(H(0, 0) == cplx(-1.0));
  CHECK(H(0, 1) == cplx(1.0));
  CHECK(H(1, 0) == cplx(2.0));
  CHECK(H(2, 2) == cplx(0.0));
  CHECK(H(0, 2) == cplx(0.0));
}

TEST_CASE("real self-adjoint potential has real spectrum") {
  const OperatorSpec spec = test::schrodinger(test::cosine(2.0));
  for (double sigma : {0.0, 0.2, 0.5, 0.9}) {
    const CMatrix H = assemble_matrix(spec, sigma, 12);
    CHECK(max_abs(H - H.adjoint()) < 1e-12);
    const auto ev = eigenvalues(H);
    const CMatrix herm = 0.5 * (H + H.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> oracle(herm);
    for (std::size_t i = 0; i < ev.size(); ++i) {
      CHECK(std::abs(ev[i].imag()) < 1e-8);
      CHECK(std::abs(ev[i].real() - oracle.eigenvalues()(i)) < 1e-8);
    }
  }
}

TEST_CASE("eigenpair residuals") {
  std::mt19937_64 rng(6);
  const OperatorSpec spec = test::schrodinger(test::random_series(rng, 4, 1.0), test::random_series(rng, 4, 1.0));
  const CMatrix H = assemble_matrix(spec, 0.3, 8);
  const double hn = H.norm();
  for (cplx lambda : eigenvalues(H)) {
    const CMatrix shifted = H - lambda * CMatrix::Identity(H.rows(), H.cols());
    Eigen::JacobiSVD<CMatrix> svd(shifted);
    CHECK(svd.singularValues().minCoeff() <= 1e-8 * hn);
  }
}

TEST_CASE("eigenvalue continuity in sigma") {
  const OperatorSpec spec = test::schrodinger(test::cosine());
  const int J = 8;
  const double delta = 1e-6;
  // |dH/dsigma| <= 2 (J + 1) for this operator and the matrix is normal.
  const double kappa = 2.0 * (J + 1);
  for (double sigma : {0.1, 0.45}) {
    const auto a = eigenvalues(assemble_matrix(spec, sigma, J));
    const auto b = eigenvalues(assemble_matrix(spec, sigma + delta, J));
    const MatchReport m = match_spectra(a, b, 1e300);
    CHECK(m.max_distance <= kappa * delta);
  }
}

TEST_CASE("eigenvalues rejects bad input") {
  CMatrix bad = CMatrix::Identity(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(eigenvalues(bad), DomainError);
  CHECK_THROWS_AS(eigenvalues(CMatrix::Zero(2, 3)), DomainError);
  CHECK(eigenvalues(CMatrix(0, 0)).empty());
}

TEST_CASE("sweep") {
  const OperatorSpec free = test::free_operator();
  SUBCASE("exact spectra on a reduced grid") {
    const std::vector<double> grid{0.0, kPi / 2, kPi};
    const SpectrumResult r = sweep(free, grid, 1);
    REQUIRE(r.entries.size() == 3);
    CHECK(r.all_ok());
    for (std::size_t i = 0; i < 3; ++i) {
      const double s = r.entries[i].sigma;
      CHECK(s >= 0.0);
      CHECK(s < 1.0);
      std::vector<cplx> expected;
      for (int j = -1; j <= 1; ++j) expected.push_back(-(j + s) * (j + s));
      std::sort(expected.begin(), expected.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
      for (int k = 0; k < 3; ++k) CHECK(std::abs(r.entries[i].eigenvalues[k] - expected[k]) < 1e-14);
    }
    CHECK(r.entries[2].sigma == doctest::Approx(kPi - 3));
  }
  SUBCASE("singleton grid") {
    const OperatorSpec spec = test::schrodinger(test::cosine());
    const std::vector<double> grid{0.3};
    const SpectrumResult r = sweep(spec, grid, 5);
    REQUIRE(r.entries.size() == 1);
    CHECK(r.entries[0].eigenvalues == eigenvalues(assemble(spec, 0.3, 5)));
  }
  SUBCASE("independent of thread count") {
    const OperatorSpec spec = test::schrodinger(test::cosine(), test::sine(0.5));
    std::vector<double> grid;
    for (int i = 0; i < 9; ++i) grid.push_back(i / 9.0);
    const SpectrumResult a = sweep(spec, grid, 6, 1);
    const SpectrumResult b = sweep(spec, grid, 6, 4);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(a.entries[i].sigma == b.entries[i].sigma);
      CHECK(a.entries[i].eigenvalues == b.entries[i].eigenvalues);
    }
  }
}
