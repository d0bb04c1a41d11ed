#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "common.hpp"
#include "xlre/rng.hpp"
#include "xlre/simulate.hpp"

using namespace xlre;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SimConfig small(std::size_t paths = 400) {
  SimConfig c;
  c.paths = paths;
  c.threads = 1;
  c.horizon = 20.0;
  c.dt = 2e-3;
  return c;
}

}  // namespace

TEST_CASE("normal draws have unit moments") {
  rng::Stream s(1, 2);
  double m1 = 0, m2 = 0, m4 = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  CHECK_THAT(m1 / n, WithinAbs(0.0, 5e-3));
  CHECK_THAT(m2 / n, WithinAbs(1.0, 5e-3));
  CHECK_THAT(m4 / n, WithinAbs(3.0, 3e-2));
}

TEST_CASE("uniform draws stay inside the open interval") {
  rng::Stream s(9, 0);
  double mean = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    mean += u;
  }
  CHECK_THAT(mean / 1e5, WithinAbs(0.5, 3e-3));
}

TEST_CASE("streams depend only on seed and index") {
  rng::Stream a(5, 7), b(5, 7), c(5, 8);
  for (int i = 0; i < 10; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
  }
}

TEST_CASE("estimates are reproducible across thread counts") {
  const auto s = solve(testing::figure(1));
  auto c = small(64);
  const auto e1 = simulate_value(s, 0.5, 0.5, c);
  const auto e2 = simulate_value(s, 0.5, 0.5, c);
  c.threads = 3;
  const auto e3 = simulate_value(s, 0.5, 0.5, c);
  CHECK(e1.mean == e2.mean);
  CHECK(e1.mean == e3.mean);
  CHECK(e1.stderr_ == e3.stderr_);
  c.seed += 1;
  CHECK(simulate_value(s, 0.5, 0.5, c).mean != e1.mean);
}

TEST_CASE("a start at zero pays nothing") {
  for (int k : {1, 4}) {
    const auto s = solve(testing::figure(k));
    const auto e = simulate_value(s, 0.0, 0.0, small(16));
    CHECK(e.mean == 0.0);
    CHECK(e.paths_ruined == 1.0);
  }
}

TEST_CASE("without noise the dividends form an annuity") {
  auto p = testing::figure(1);
  p.line1.kappa = 10.0;
  p.line2.kappa = 5.0;
  const auto s = solve(p);
  auto c = small(2);
  c.zero_volatility = true;
  StrategyOptions o;
  o.retention = RetentionRule::Full;
  const auto e = simulate_value(s, 2.0, 2.0, c, o);
  const double rate = 0.3 * 3.0 + 0.7 * 2.0;
  CHECK_THAT(e.mean, WithinRel(rate * (1.0 - std::exp(-0.5 * c.horizon)) / 0.5, 1e-6));
  CHECK(e.stderr_ == 0.0);
  CHECK(e.paths_ruined == 0.0);
}

TEST_CASE("a policy compared with itself differs by exactly zero") {
  const auto s = solve(testing::figure(1));
  const PolicyStrategy base(s);
  const std::vector<std::pair<std::string, PolicyStrategy>> others{{"same", PolicyStrategy(s)}};
  const auto rows = compare_policies(base, others, 0.5, 0.5, 0.5, small(50));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].difference == 0.0);
  CHECK(rows[0].stderr_ == 0.0);
  CHECK(rows[0].base_mean == rows[0].other_mean);
}

TEST_CASE("antithetic pairs are averaged") {
  const auto s = solve(testing::figure(1));
  auto c = small(64);
  c.antithetic = true;
  const auto e = simulate_value(s, 0.5, 0.5, c);
  CHECK(e.paths == 64);
  CHECK(e.stderr_ > 0.0);
}

TEST_CASE("small runs agree with the value function") {
  for (int k : {1, 4}) {
    const auto s = solve(testing::figure(k));
    auto c = small(1500);
    c.horizon = 40.0;
    c.dt = 1e-3;
    const auto e = simulate_value(s, 0.5, 0.5, c);
    CAPTURE(k, e.mean, e.stderr_);
    CHECK(std::abs(e.mean - s.value(1.0).g) <= 4.0 * e.stderr_ + e.truncation_bound);
  }
}

TEST_CASE("perturbed strategies do not beat the solved policy") {
  const auto s = solve(testing::figure(1));
  StrategyOptions full;
  full.retention = RetentionRule::Full;
  const PolicyStrategy base(s);
  const std::vector<std::pair<std::string, PolicyStrategy>> others{{"full", PolicyStrategy(s, full)}};
  const auto r = compare_policies(base, others, 0.5, 0.5, 0.5, small(500)).front();
  CHECK(r.difference >= -2.5 * r.stderr_);
}

TEST_CASE("event log records the first path") {
  const auto s = solve(testing::figure(1));
  std::ostringstream log;
  auto c = small(4);
  c.event_log = &log;
  (void)simulate_value(s, 0.05, 0.05, c);
  CHECK_FALSE(log.str().empty());
  std::istringstream in(log.str());
  std::string line;
  double last_t = 0.0;
  while (std::getline(in, line)) {
    double t, x1, x2;
    char c1, c2;
    std::istringstream row(line);
    REQUIRE(row >> t >> c1 >> x1 >> c2 >> x2);
    CHECK(x1 >= 0.0);
    CHECK(x2 >= 0.0);
    CHECK(t >= last_t);
    last_t = t;
  }
}

TEST_CASE("discounted dividends accrue monotonically") {
  const auto s = solve(testing::figure(1));
  double prev = 0.0;
  for (double h : {20.0, 30.0, 40.0}) {
    auto c = small(50);
    c.horizon = h;
    const double m = simulate_value(s, 0.5, 0.5, c).mean;
    CHECK(m >= prev);
    prev = m;
  }
}

TEST_CASE("halving the step moves the estimate little") {
  const auto s = solve(testing::figure(1));
  const auto d = dt_halving_drift(PolicyStrategy(s), 0.5, 0.5, 0.5, small(200));
  CHECK(std::abs(d.drift) < 3.0 * d.combined_stderr);
  CHECK(d.stderr_ > 0.0);
  CHECK(d.stderr_ < d.combined_stderr);
}

TEST_CASE("simulation configuration is validated") {
  const auto s = solve(testing::figure(1));
  auto c = small();
  c.paths = 0;
  CHECK_THROWS_AS(simulate_value(s, 0.5, 0.5, c), ConfigError);
  c = small();
  c.dt = 0.0;
  CHECK_THROWS_AS(simulate_value(s, 0.5, 0.5, c), ConfigError);
  c = small();
  c.substeps = 0;
  CHECK_THROWS_AS(simulate_value(s, 0.5, 0.5, c), ConfigError);
  c = small();
  c.horizon = 1.0;
  CHECK_THROWS_AS(simulate_value(s, 0.5, 0.5, c), ConfigError);
  CHECK_THROWS_AS(simulate_value(s, -0.5, 0.5, small()), DomainError);
}

TEST_CASE("estimate CSV layout") {
  std::ostringstream os;
  write_csv(os, SimEstimate{1.5, 0.01, 0.0, 1e-9, 10});
  CHECK(os.str().rfind("mean,stderr,paths_ruined,truncation_bound,paths\n", 0) == 0);
}

TEST_CASE("event logging does not change the path") {
  const auto s = solve(testing::figure(4));
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto c = small(1);
    c.seed = seed;
    const double plain = simulate_value(s, 0.3, 0.2, c).mean;
    std::ostringstream log;
    c.event_log = &log;
    CHECK(simulate_value(s, 0.3, 0.2, c).mean == plain);
  }
}
