#include <catch_amalgamated.hpp>

#include <cmath>

#include "common.hpp"

using namespace xlre;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("figure thresholds") {
  const auto f1 = solve(testing::figure(1));
  CHECK(f1.case_tag == CaseTag::BoundedA);
  CHECK_THAT(f1.w0, WithinAbs(0.19, 0.01));
  CHECK_THAT(f1.u1, WithinAbs(0.24, 0.01));
  CHECK_THAT(f1.u2, WithinAbs(0.87, 0.01));

  const auto f2 = solve(testing::figure(2));
  CHECK(f2.case_tag == CaseTag::BoundedB);
  CHECK_THAT(f2.u1, WithinAbs(0.17, 0.01));
  CHECK_THAT(f2.w0, WithinAbs(0.22, 0.01));
  CHECK_THAT(f2.u2, WithinAbs(0.57, 0.01));

  const auto f3 = solve(testing::figure(3));
  CHECK(f3.case_tag == CaseTag::BoundedC);
  CHECK_THAT(f3.m0, WithinAbs(0.71, 0.01));
  CHECK_THAT(f3.u1, WithinAbs(0.09, 0.01));
  CHECK_THAT(f3.u2, WithinAbs(0.19, 0.01));

  const auto f4 = solve(testing::figure(4));
  CHECK(f4.case_tag == CaseTag::UnboundedFinite);
  CHECK_THAT(f4.w0, WithinAbs(0.19, 0.01));
  CHECK_THAT(f4.u1, WithinAbs(0.52, 0.01));

  const auto f5 = solve(testing::figure(5));
  CHECK(f5.case_tag == CaseTag::UnboundedInfinite);
  CHECK_THAT(f5.u1, WithinAbs(1.25, 0.01));
}

TEST_CASE("marginal value at the dividend thresholds") {
  for (int k : {1, 2, 3, 4, 5}) {
    CAPTURE(k);
    const auto s = solve(testing::figure(k));
    const double a = s.model.a;
    CHECK(s.value(0.0).g == 0.0);
    CHECK_THAT(s.value(s.u1).g1, WithinAbs(1.0 - a, 1e-9));
    if (s.bounded()) CHECK_THAT(s.value(s.u2).g1, WithinAbs(a, 1e-9));
    else CHECK_THAT(s.value(s.u1 + 1.0).g1, WithinAbs(1.0 - a, 1e-9));
  }
}

TEST_CASE("bounded value approaches the discounted dividend cap") {
  for (int k : {1, 2, 3}) {
    const auto s = solve(testing::figure(k));
    const auto& m = s.model;
    const double limit = (m.a * m.cbar1 + (1.0 - m.a) * m.cbar2) / m.delta;
    const double x = s.u2 + 12.0 / std::abs(s.gammas.g4m);
    CHECK_THAT(s.value(x).g, WithinAbs(limit, 1e-3));
    CHECK(s.value(x).g < limit);
  }
  CHECK_THAT((0.3 * 3 + 0.7 * 2) / 0.5, WithinAbs(4.6, 1e-12));
}

TEST_CASE("unbounded value grows linearly past the barrier") {
  const auto s = solve(testing::figure(4));
  const double a = s.model.a;
  const double g0 = s.value(s.u1).g;
  CHECK_THAT(s.value(s.u1 + 2.0).g, WithinRel(g0 + 2.0 * (1.0 - a), 1e-13));
  CHECK(s.value(s.u1 + 2.0).g2 == 0.0);
}

TEST_CASE("swapping the lines and the weight gives the same solution") {
  auto p = testing::figure(1);
  auto q = p;
  std::swap(q.line1, q.line2);
  q.a = 0.7;
  const auto s = solve(p), t = solve(q);
  CHECK_FALSE(s.swapped);
  CHECK(t.swapped);
  CHECK(t.case_tag == s.case_tag);
  CHECK_THAT(t.u1, WithinRel(s.u1, 1e-13));
  CHECK_THAT(t.u2, WithinRel(s.u2, 1e-13));
  CHECK_THAT(t.w0, WithinRel(s.w0, 1e-13));
  for (double x : {0.1, 0.5, 2.0}) CHECK_THAT(t.value(x).g, WithinRel(s.value(x).g, 1e-13));
}

TEST_CASE("equal weights collapse the Line-2 band") {
  auto p = testing::figure(3);
  p.a = 0.5;
  const auto s = solve(p);
  CHECK(s.case_tag == CaseTag::BoundedC);
  CHECK_THAT(s.u1, WithinAbs(s.u2, 1e-8));
}

TEST_CASE("band width matching stays close to slope matching") {
  const auto p = testing::figure(2);
  const auto s = solve(p);
  const auto b = solve(p, SolveOptions{CaseBMatching::BandWidth});
  CHECK_THAT(b.u1, WithinAbs(s.u1, 1e-3));
  CHECK_THAT(b.u2, WithinAbs(s.u2, 1e-3));
  CHECK_THAT(s.closed_form_k3m, WithinAbs(s.K3m, 1e-4));
}

TEST_CASE("retention is capped past the reinsurance threshold") {
  const auto s = solve(testing::figure(3));
  for (double x : {s.u2, s.u2 + 0.5, 5.0}) CHECK(s.retention(x) == s.m0);
  const auto f = solve(testing::figure(1));
  CHECK(f.retention(f.w0 + 1e-9) == 1.0);
  CHECK(f.retention(0.5 * f.w0) < 1.0);
}

TEST_CASE("configuration errors") {
  auto p = testing::figure(1);
  p.line1.kappa = 0.0;
  CHECK_THROWS_AS(solve(p), DomainError);
  p = testing::figure(1);
  p.line1.cbar = 0.0;
  CHECK_THROWS_AS(solve(p), DomainError);
  p = testing::figure(1);
  p.line2.claims = ClaimDistribution::uniform(0.2);
  CHECK_THROWS_AS(solve(p), UnsupportedConfigurationError);
  p = testing::figure(1);
  p.delta = -1.0;
  CHECK_THROWS_AS(solve(p), DomainError);
}

TEST_CASE("solves are fast") {
  for (int k : {1, 2, 3, 4, 5}) {
    Catch::Timer t;
    t.start();
    (void)solve(testing::figure(k));
    CHECK(t.getElapsedSeconds() < 1.0);
  }
}
