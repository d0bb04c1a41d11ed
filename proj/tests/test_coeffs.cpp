#include <catch_amalgamated.hpp>

#include <cmath>

#include "common.hpp"

using namespace xlre;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("aggregate coefficients at full retention") {
  const auto m = testing::figure_model(1);
  const auto n = nbar(m, 1.0);
  // 4 * 1/2 + 2 * (1/2 - 1/12); 1/3 + (1/4 - 1/18).
  CHECK_THAT(n.drift, WithinRel(2.0 + 2.0 * (0.5 - 1.0 / 12.0), 1e-14));
  CHECK_THAT(n.variance, WithinRel(1.0 / 3.0 + 0.25 - 1.0 / 18.0, 1e-14));
  CHECK_THAT(n.drift, WithinAbs(2.83333, 1e-5));
  CHECK_THAT(n.variance, WithinAbs(0.527778, 1e-6));
  CHECK_THROWS_AS(nbar(m, 1.1), DomainError);
  CHECK_THROWS_AS(nbar(m, -0.1), DomainError);
}

TEST_CASE("paired retention follows the loading ratio up to the cap") {
  auto m = testing::figure_model(1);
  CHECK(m.paired_retention(0.4) == 0.2);
  m.kappa2 = 8.0;
  CHECK(m.paired_retention(0.4) == 0.8);
  CHECK(m.paired_retention(1.0) == 1.5);
}

TEST_CASE("characteristic roots satisfy Vieta's identities") {
  for (int k : {1, 2, 3, 4}) {
    const auto m = testing::figure_model(k);
    for (RootFamily f : {RootFamily::Two, RootFamily::Three, RootFamily::Four}) {
      for (double y : {0.1, 0.5, 1.0}) {
        const auto n = nbar(m, y);
        double drift = n.drift;
        if (f == RootFamily::Three) drift -= m.cbar2;
        if (f == RootFamily::Four) drift -= m.cbar1 + m.cbar2;
        const auto r = gamma_roots(m, f, y);
        const double v = n.variance;
        CHECK_THAT(r.plus + r.minus, WithinAbs(-2.0 * drift / v, 1e-12 * std::max(1.0, std::abs(2.0 * drift / v))));
        CHECK_THAT(r.plus * r.minus, WithinAbs(-2.0 * m.delta / v, 1e-12 * std::max(1.0, 2.0 * m.delta / v)));
        CHECK(r.plus > 0.0);
        CHECK(r.minus < 0.0);
      }
    }
  }
  CHECK_THROWS_AS(characteristic_roots(1.0, 0.0, 0.5), SingularInputError);
}

TEST_CASE("roots are accurate for large drift") {
  const auto r = characteristic_roots(1e8, 1.0, 0.5);
  CHECK_THAT(r.plus, WithinRel(0.5e-8, 1e-12));
  const auto q = characteristic_roots(-1e8, 1.0, 0.5);
  CHECK_THAT(q.minus, WithinRel(-0.5e-8, 1e-12));
}

TEST_CASE("reinsurance bound") {
  const auto m = testing::figure_model(1);
  CHECK_THAT(reinsurance_bound(m), WithinAbs(1.90278, 1e-5));
}

TEST_CASE("band function at the ends of its domain") {
  const auto m = testing::figure_model(1);
  const auto g = gamma_set(m);
  const auto L = alpha_ladder(m, g, CaseHint::A);
  CHECK_THAT(psi(g, m.a, L.alpha_ub), WithinAbs(1.0 - 2.0 * m.a, 1e-12));
  CHECK(psi(g, m.a, L.lower_limit) == -m.a);
  CHECK_THAT(psi(g, m.a, L.lower_limit * (1.0 - 1e-9)), WithinAbs(-m.a, 1e-6));
  CHECK(L.lower_limit < L.alpha_ub);
}

TEST_CASE("band coefficients solve the band equation") {
  const auto m = testing::figure_model(1);
  const auto g = gamma_set(m);
  const auto L = alpha_ladder(m, g, CaseHint::A);
  const auto k = solve_k3minus(g, m.a, std::max(L.alpha_lb, L.lower_limit), L.alpha_ub);
  CHECK(std::abs(psi(g, m.a, k.minus)) < 1e-12);
  CHECK_THAT(k.plus * g.g3p + k.minus * g.g3m, WithinAbs(1.0 - m.a, 1e-14));
  CHECK(k.minus < 0.0);
  CHECK(k.plus >= 0.0);
}
