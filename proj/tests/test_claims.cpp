#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "xlre/claims.hpp"

using namespace xlre;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Limited moments straight from the survival function.
double mu_by_quadrature(const ClaimDistribution& d, double s) {
  return numerics::integrate([&](double y) { return d.survival(y); }, 0.0, s).value;
}
double m2_by_quadrature(const ClaimDistribution& d, double s) {
  return numerics::integrate([&](double y) { return 2.0 * y * d.survival(y); }, 0.0, s).value;
}

ClaimDistribution table() {
  return ClaimDistribution::tabulated({0.0, 0.3, 0.8, 1.2, 2.0}, {1.0, 0.7, 0.25, 0.0, 0.0});
}

}  // namespace

TEST_CASE("uniform limited moments") {
  const auto d = ClaimDistribution::uniform(1.0);
  CHECK_THAT(d.limited_mean(0.5), WithinAbs(0.375, 1e-15));
  CHECK_THAT(d.limited_mean(1.0), WithinAbs(0.5, 1e-15));
  CHECK_THAT(d.limited_second_moment(1.0), WithinAbs(1.0 / 3.0, 1e-15));
  CHECK_THAT(d.limited_second_moment(0.5), WithinAbs(0.25 - 1.0 / 12.0, 1e-15));
  CHECK_THAT(h_ratio(d, 1.0), WithinRel(4.0 / 3.0, 1e-14));
  CHECK(d.support_bound() == 1.0);
}

TEST_CASE("exponential limited moments") {
  const auto d = ClaimDistribution::exponential(1.0);
  CHECK_THAT(d.limited_mean(kInfinity), WithinRel(1.0, 1e-15));
  CHECK_THAT(d.limited_second_moment(kInfinity), WithinRel(2.0, 1e-15));
  CHECK_THAT(d.limited_mean(1.0), WithinRel(1.0 - std::exp(-1.0), 1e-14));
  // h tends to 1 as the retention shrinks.
  CHECK_THAT(h_ratio(d, 1e-6), WithinAbs(1.0, 1e-5));
  CHECK(std::isinf(d.support_bound()));
  const auto e = ClaimDistribution::exponential(1.5);
  CHECK_THAT(e.limited_mean(kInfinity), WithinRel(1.0 / 1.5, 1e-15));
}

TEST_CASE("closed-form moments agree with quadrature of the survival") {
  for (const auto& d : {ClaimDistribution::uniform(1.5), ClaimDistribution::exponential(0.7), table()}) {
    const double top = std::isfinite(d.support_bound()) ? d.support_bound() : 8.0;
    for (double f : {0.01, 0.2, 0.45, 0.8, 1.0}) {
      const double s = f * top;
      CHECK_THAT(d.limited_mean(s), WithinRel(mu_by_quadrature(d, s), 1e-11));
      CHECK_THAT(d.limited_second_moment(s), WithinRel(m2_by_quadrature(d, s), 1e-11));
    }
  }
}

TEST_CASE("second moment never exceeds retention times mean") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& d : {ClaimDistribution::uniform(1.0), ClaimDistribution::exponential(1.5), table()}) {
    const double top = std::isfinite(d.support_bound()) ? d.support_bound() : 10.0;
    for (int i = 0; i < 2000; ++i) {
      const double s = top * u(gen);
      CHECK(d.limited_second_moment(s) <= s * d.limited_mean(s) * (1 + 1e-14) + 1e-300);
    }
  }
}

TEST_CASE("tabulated survival validates its knots") {
  CHECK_THROWS_AS(ClaimDistribution::tabulated({0.0, 1.0}, {1.0, 0.5}), DomainError);
  CHECK_THROWS_AS(ClaimDistribution::tabulated({0.0, 1.0, 0.5}, {1.0, 0.5, 0.0}), DomainError);
  CHECK_THROWS_AS(ClaimDistribution::tabulated({0.1, 1.0}, {1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(ClaimDistribution::tabulated({0.0, 1.0, 2.0}, {1.0, 0.2, 0.4}), DomainError);
  CHECK(table().support_bound() == 1.2);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(ClaimDistribution::uniform(0.0), DomainError);
  CHECK_THROWS_AS(ClaimDistribution::uniform(kInfinity), DomainError);
  CHECK_THROWS_AS(ClaimDistribution::exponential(-1.0), DomainError);
  CHECK_THROWS_AS(h_ratio(ClaimDistribution::uniform(1.0), 0.0), SingularInputError);
}

TEST_CASE("h ratio is non-decreasing in the retention") {
  for (const auto& d : {ClaimDistribution::uniform(1.5), ClaimDistribution::exponential(1.0), table()}) {
    const double top = std::isfinite(d.support_bound()) ? d.support_bound() : 10.0;
    double prev = 0.0;
    for (int i = 1; i <= 400; ++i) {
      const double h = h_ratio(d, top * i / 400.0);
      CHECK(h >= prev * (1 - 1e-12));
      CHECK(h >= 1.0 - 1e-12);
      prev = h;
    }
  }
}

TEST_CASE("pure excess of loss matches the mixed contract volatility") {
  const auto d = ClaimDistribution::uniform(1.0);
  for (double theta : {0.1, 0.5, 0.9}) {
    for (double pi : {0.05, 0.3, 0.9}) {
      const auto r = dominating_pure_xl(d, theta, pi);
      const double target = theta * theta * d.limited_second_moment(pi / theta);
      CHECK_THAT(d.limited_second_moment(r.retention), WithinRel(target, 1e-10));
      CHECK(r.drift_gain >= 0.0);
      CHECK(r.retention <= std::min(pi / theta, 1.0));
    }
  }
  const auto e = ClaimDistribution::exponential(1.5);
  const auto r = dominating_pure_xl(e, 0.4, 2.0);
  CHECK_THAT(e.limited_second_moment(r.retention),
             WithinRel(0.16 * e.limited_second_moment(5.0), 1e-10));
  CHECK_THROWS_AS(dominating_pure_xl(d, 1.0, 0.5), DomainError);
  CHECK_THROWS_AS(dominating_pure_xl(d, 0.5, 1.5), DomainError);
}
