#include <catch_amalgamated.hpp>

#include <cmath>

#include "common.hpp"

using namespace xlre;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("G by quadrature agrees with the tabulated curve") {
  for (int k : {1, 3, 5}) {
    const auto m = testing::figure_model(k);
    const GCurve c(m);
    for (double p : {1e-4, 0.01, 0.1, 0.4, 0.9}) {
      if (p > m.M1()) continue;
      CHECK_THAT(c.at_retention(p).x, WithinRel(g_integral(m, p), 1e-9));
    }
  }
}

TEST_CASE("G slope near zero") {
  const auto m = testing::figure_model(1);
  CHECK_THAT(g_slope(m, 1e-7), WithinRel(g_slope_at_zero(m), 1e-5));
  CHECK(g_slope(m, 0.0) == g_slope_at_zero(m));
}

TEST_CASE("G inverse round trip") {
  const auto m = testing::figure_model(1);
  for (double x : {0.001, 0.05, 0.15}) CHECK_THAT(g_integral(m, g_inverse(m, x)), WithinAbs(x, 1e-11));
  CHECK(g_inverse(m, 0.0) == 0.0);
  CHECK_THROWS_AS(g_inverse(m, 10.0), DomainError);
}

TEST_CASE("curve reserve lookup inverts retention lookup") {
  const auto m = testing::figure_model(2);
  const GCurve c(m);
  for (double p : {0.02, 0.3, 0.7, 1.0}) {
    const auto a = c.at_retention(p);
    const auto b = c.at_reserve(a.x);
    CHECK_THAT(b.p, WithinRel(p, 1e-9));
    CHECK_THAT(b.S, WithinRel(a.S, 1e-9));
  }
}

TEST_CASE("with no Line-2 cap the band ODE retraces G inverse") {
  auto m = testing::figure_model(1);
  m.cbar2 = 0.0;
  const double x0 = 0.02;
  const double h0 = g_inverse(m, x0);
  const auto t = HTrajectory::shoot(m, x0, h0, m.M1(), 5.0);
  REQUIRE(t.has_value());
  const double top = std::min(t->x_end(), g_integral(m, m.M1()));
  for (int i = 0; i <= 40; ++i) {
    const double x = std::min(top, x0 + (top - x0) * i / 40.0);
    CHECK_THAT(t->at(x).H, WithinAbs(g_inverse(m, x), 1e-8));
  }
}

TEST_CASE("maximal retention root") {
  const auto m = testing::figure_model(3);
  const auto r = solve_m0(m);
  CHECK_THAT(r.m0, WithinAbs(0.71, 0.01));
  CHECK_THAT(gamma_roots(m, RootFamily::Four, r.m0).minus + m.kappa1 / r.m0, WithinAbs(0.0, 1e-9));
}
