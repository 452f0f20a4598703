#include <doctest.h>

#include "blochspec/hill.hpp"
#include "blochspec/operator_model.hpp"
#include "support.hpp"

using namespace blochspec;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

double series_distance(const FourierSeries& a, const FourierSeries& b) {
  const int M = std::max(a.cutoff(), b.cutoff());
  double d = 0.0;
  for (int k = -M; k <= M; ++k) d = std::max(d, max_abs(a.coeff(k) - b.coeff(k)));
  return d;
}

FourierSeries zero2() { return FourierSeries(kTwoPi, 2, 0); }

}  // namespace

TEST_CASE("validate: identity principal part") {
  const ValidationReport r = validate(test::free_operator(), 16);
  CHECK(r.spd);
  CHECK(r.lower_bound == doctest::Approx(1.0));
  CHECK(r.status == "ok");
}

TEST_CASE("validate: 2 + cos x") {
  const FourierSeries a2 = FourierSeries::scalar_constant(kTwoPi, 2.0) + test::cosine();
  const OperatorSpec spec({test::zero(), test::zero(), a2});
  const ValidationReport r = validate(spec, 64);
  CHECK(r.spd);
  CHECK(std::abs(r.lower_bound - 1.0) < 1e-10);
  CHECK(r.argmin_x == doctest::Approx(kPi));
}

TEST_CASE("validate: indefinite constant matrix") {
  const FourierSeries a2 = FourierSeries::constant(kTwoPi, CMatrix{{0, 1}, {1, 0}});
  const OperatorSpec spec({zero2(), zero2(), a2});
  const ValidationReport r = validate(spec, 8);
  CHECK_FALSE(r.spd);
  CHECK(r.lower_bound == doctest::Approx(-1.0));
  CHECK(r.status == "outside proven convergence class");
}

TEST_CASE("validate: nonhermitian principal part is not SPD") {
  const FourierSeries a2 = FourierSeries::constant(kTwoPi, CMatrix{{2, 1}, {0, 2}});
  const ValidationReport r = validate(OperatorSpec({zero2(), zero2(), a2}), 8);
  CHECK(r.symmetry_defect == doctest::Approx(1.0));
  CHECK_FALSE(r.spd);
}

TEST_CASE("validate: lower bound is monotone in shifts") {
  std::mt19937_64 rng(3);
  const FourierSeries a2 = FourierSeries::scalar_constant(kTwoPi, 1.5) + test::cosine(0.8) +
                           FourierSeries::scalar(kTwoPi, {{-2, 0.1}, {2, 0.1}});
  const double c0 = validate(OperatorSpec({test::zero(), test::zero(), a2}), 128).lower_bound;
  for (double eps : {1e-3, 0.1, 2.0}) {
    const FourierSeries shifted = a2 + FourierSeries::scalar_constant(kTwoPi, eps);
    const double c1 = validate(OperatorSpec({test::zero(), test::zero(), shifted}), 128).lower_bound;
    CHECK(std::abs(c1 - (c0 + eps)) < 1e-12);
  }
}

TEST_CASE("validate: grid too coarse") {
  const OperatorSpec spec({test::zero(), test::zero(), test::one() + test::cosine(0.5)});
  CHECK_THROWS_AS(validate(spec, 2), DomainError);
  CHECK_NOTHROW(validate(spec, 3));
}

TEST_CASE("spec construction checks") {
  CHECK_THROWS(OperatorSpec({test::zero()}));
  CHECK_THROWS(OperatorSpec({test::zero(), FourierSeries(1.0, 1, 0)}));
  CHECK_THROWS(OperatorSpec({test::zero(), zero2()}));
  const FourierSeries diag2 = FourierSeries::constant(kTwoPi, CMatrix{{1, 0}, {0, 0}});
  const FourierSeries id2 = FourierSeries::constant(kTwoPi, CMatrix::Identity(2, 2));
  CHECK_NOTHROW(OperatorSpec({zero2(), id2, diag2}, OperatorForm::divergence, std::vector<int>{2, 1}));
  CHECK_THROWS(OperatorSpec({zero2(), id2, diag2}, OperatorForm::divergence, std::vector<int>{2}));
  CHECK_THROWS(OperatorSpec({zero2(), id2, diag2}, OperatorForm::divergence, std::vector<int>{1, 1}));
  CHECK_THROWS(OperatorSpec({zero2(), id2, id2}, OperatorForm::divergence, std::vector<int>{2, 1}));
  const FourierSeries couple = FourierSeries::constant(kTwoPi, CMatrix{{1, 1}, {0, 0}});
  CHECK_THROWS(OperatorSpec({zero2(), id2, couple}, OperatorForm::divergence, std::vector<int>{2, 1}));
}

TEST_CASE("composite principal part takes each row from its own order") {
  const FourierSeries a2 = FourierSeries::constant(kTwoPi, CMatrix{{3, 0}, {0, 0}});
  const FourierSeries a1 = FourierSeries::constant(kTwoPi, CMatrix{{7, 0}, {0, 5}});
  const OperatorSpec spec({zero2(), a1, a2}, OperatorForm::divergence, std::vector<int>{2, 1});
  const CMatrix p = spec.principal().coeff(0);
  CHECK(p(0, 0) == cplx(3.0));
  CHECK(p(1, 1) == cplx(5.0));
  CHECK(spec.row_order(1) == 1);
}

TEST_CASE("content hash") {
  const std::string h = test::free_operator().content_hash();
  CHECK(h.size() == 64);
  CHECK(h == test::free_operator().content_hash());
  CHECK(h != test::schrodinger(test::cosine()).content_hash());
  const OperatorSpec nd({test::zero(), test::zero(), test::one()}, OperatorForm::nondivergence);
  CHECK(h != nd.content_hash());
}

TEST_CASE("Brillouin reduction") {
  CHECK(BlochParams::reduced(0.0, kTwoPi).sigma == 0.0);
  CHECK(BlochParams::reduced(kPi, kTwoPi).sigma == doctest::Approx(kPi - 3));
  CHECK(BlochParams::reduced(1.0, kTwoPi).sigma == 0.0);
  CHECK(BlochParams::reduced(-0.25, kTwoPi).sigma == doctest::Approx(0.75));
  CHECK(BlochParams::reduced(1.3, kPi).sigma == doctest::Approx(1.3));
  CHECK(BlochParams::reduced(2.5, kPi).sigma == doctest::Approx(0.5));
  CHECK_THROWS(BlochParams::reduced(std::nan(""), 1.0));
}

TEST_CASE("divergence form conversion") {
  SUBCASE("constant coefficients only change the flag") {
    const OperatorSpec nd({FourierSeries::scalar_constant(kTwoPi, 2.0), FourierSeries::scalar_constant(kTwoPi, cplx(1, 1)),
                           test::one()},
                          OperatorForm::nondivergence);
    const OperatorSpec d = to_divergence_form(nd);
    CHECK(d.form() == OperatorForm::divergence);
    for (int k = 0; k <= 2; ++k) CHECK(series_distance(d.coeff(k), nd.coeff(k)) == 0.0);
  }
  SUBCASE("cos x d folds +sin x into a_0") {
    const OperatorSpec nd({test::zero(), test::cosine()}, OperatorForm::nondivergence);
    const OperatorSpec d = to_divergence_form(nd);
    CHECK(series_distance(d.coeff(1), test::cosine()) < 1e-12);
    CHECK(series_distance(d.coeff(0), test::sine()) < 1e-12);
  }
  SUBCASE("already divergence form is a no-op") {
    const OperatorSpec s = test::schrodinger(test::cosine());
    CHECK(to_divergence_form(s).content_hash() == s.content_hash());
  }
}

TEST_CASE("form conversion round trip") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<FourierSeries> c;
    for (int k = 0; k <= 4; ++k) c.push_back(test::random_series(rng, 3, 1.0));
    const OperatorSpec nd(c, OperatorForm::nondivergence);
    const OperatorSpec back = to_nondivergence_form(to_divergence_form(nd));
    CHECK(back.form() == OperatorForm::nondivergence);
    for (int k = 0; k <= 4; ++k) CHECK(series_distance(back.coeff(k), nd.coeff(k)) < 1e-12);
  }
}

TEST_CASE("Leibniz rewrite commutes with truncation") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<FourierSeries> c;
    for (int k = 0; k <= 3; ++k) c.push_back(test::random_series(rng, 2, 1.0));
    const OperatorSpec nd(c, OperatorForm::nondivergence);
    const OperatorSpec d = to_divergence_form(nd);
    for (double sigma : {0.0, 0.37}) {
      const CMatrix a = assemble_matrix(nd, sigma, 4);
      const CMatrix b = assemble_matrix(d, sigma, 4);
      CHECK(max_abs(a - b) < 1e-12 * (1 + max_abs(a)));
    }
  }
}

TEST_CASE("order-2 Bloch rewrite") {
  SUBCASE("sigma = 0 leaves the coefficients unchanged") {
    const OperatorSpec s = test::schrodinger(test::sine(), test::cosine());
    const auto [A1, A0] = bloch_rewrite_order2(s, 0.0);
    CHECK(series_distance(A1, test::cosine()) == 0.0);
    CHECK(series_distance(A0, test::sine()) == 0.0);
  }
  SUBCASE("free operator at sigma = 1/2") {
    const auto [A1, A0] = bloch_rewrite_order2(test::free_operator(), 0.5);
    CHECK(series_distance(A1, FourierSeries::scalar_constant(kTwoPi, cplx(0, 1))) == 0.0);
    CHECK(series_distance(A0, FourierSeries::scalar_constant(kTwoPi, -0.25)) == 0.0);
  }
  SUBCASE("matches the shifted-symbol assembly") {
    const OperatorSpec s = test::schrodinger(test::sine(0.25), test::cosine());
    for (double sigma : {1.0, 0.25, 0.5}) {
      const auto [A1, A0] = bloch_rewrite_order2(s, sigma);
      CHECK(series_distance(A0, test::sine(0.25) + FourierSeries::scalar_constant(kTwoPi, -sigma * sigma) +
                                    test::cosine() * cplx(0, sigma)) < 1e-15);
      const OperatorSpec rewritten({A0, A1, test::one()});
      for (int J : {1, 2, 4}) {
        const CMatrix a = assemble_matrix(s, sigma, J);
        const CMatrix b = assemble_matrix(rewritten, 0.0, J);
        CHECK(max_abs(a - b) < 1e-12);
        if (sigma != 1.0) CHECK(max_abs(a - b) == 0.0);
      }
    }
  }
  SUBCASE("unsupported forms") {
    CHECK_THROWS(bloch_rewrite_order2(OperatorSpec({test::zero(), test::one()}), 0.1));
    CHECK_THROWS(bloch_rewrite_order2(OperatorSpec({test::zero(), test::zero(), test::cosine() + test::one()}), 0.1));
    CHECK_THROWS(bloch_rewrite_order2(
        OperatorSpec({test::zero(), test::zero(), test::one()}, OperatorForm::nondivergence), 0.1));
  }
}
