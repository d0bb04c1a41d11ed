// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "xlre/simulate.hpp"
#include "xlre/verify.hpp"

using namespace xlre;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Criterion {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << ']';
    }
  }
};

bool near(double got, double want, double tol) { return std::abs(got - want) <= tol; }

const char* fig_name(int k) {
  static const char* n[] = {"", "fig1", "fig2", "fig3", "fig4", "fig5"};
  return n[k];
}

void thresholds(Criterion& c) {
  struct Want {
    int fig;
    CaseTag tag;
    std::vector<std::pair<std::string, double>> values;
  };
  const std::vector<Want> want = {
      {1, CaseTag::BoundedA, {{"w0", 0.19}, {"u1", 0.24}, {"u2", 0.87}}},
      {2, CaseTag::BoundedB, {{"u1", 0.17}, {"w0", 0.22}, {"u2", 0.57}}},
      {3, CaseTag::BoundedC, {{"m0", 0.71}, {"u1", 0.09}, {"u2", 0.19}}},
      {4, CaseTag::UnboundedFinite, {{"w0", 0.19}, {"u1", 0.52}}},
      {5, CaseTag::UnboundedInfinite, {{"u1", 1.25}}},
  };
  double slowest = 0.0;
  for (const auto& w : want) {
    const auto t0 = Clock::now();
    const auto s = solve(testing::figure(w.fig));
    const double secs = seconds_since(t0);
    slowest = std::max(slowest, secs);
    c.require(s.case_tag == w.tag, std::string(fig_name(w.fig)) + " case " + to_string(s.case_tag));
    c.detail << ' ' << fig_name(w.fig) << '(';
    for (const auto& [n, v] : w.values) {
      const double got = n == "w0" ? s.w0 : n == "u1" ? s.u1 : n == "u2" ? s.u2 : s.m0;
      c.detail << n << '=' << got << ' ';
      c.require(near(got, v, 0.01), std::string(fig_name(w.fig)) + " " + n);
    }
    c.detail << secs << "s)";
    c.require(secs < 1.0, std::string(fig_name(w.fig)) + " solve time");
  }
  c.detail << " slowest solve " << slowest << 's';
}

void identities(Criterion& c) {
  double vieta = 0.0, psi_ub = 0.0, g0 = 0.0, fit = 0.0, asym = 0.0;
  for (int k = 1; k <= 5; ++k) {
    const auto s = solve(testing::figure(k));
    const auto& m = s.model;
    for (RootFamily f : {RootFamily::Two, RootFamily::Three, RootFamily::Four}) {
      for (double y : {0.25 * std::min(m.M1(), 4.0), 0.5 * std::min(m.M1(), 4.0), std::min(m.M1(), 4.0)}) {
        const auto n = nbar(m, y);
        double drift = n.drift;
        if (f == RootFamily::Three) drift -= m.cbar2;
        if (f == RootFamily::Four) drift -= m.cbar1 + m.cbar2;
        const auto r = characteristic_roots(drift, n.variance, m.delta);
        const double sum = -2.0 * drift / n.variance, prod = -2.0 * m.delta / n.variance;
        vieta = std::max(vieta, std::abs(r.plus + r.minus - sum) / std::max(1.0, std::abs(sum)));
        vieta = std::max(vieta, std::abs(r.plus * r.minus - prod) / std::max(1.0, std::abs(prod)));
      }
    }
    g0 = std::max(g0, std::abs(s.value(0.0).g));
    fit = std::max(fit, std::abs(s.value(s.u1).g1 - (1.0 - m.a)));
    if (!s.bounded()) continue;
    fit = std::max(fit, std::abs(s.value(s.u2).g1 - m.a));
    const double x_max = s.u2 + 12.0 / std::abs(s.gammas.g4m);
    asym = std::max(asym, std::abs(s.value(x_max).g - (m.a * m.cbar1 + (1.0 - m.a) * m.cbar2) / m.delta));
    if (s.case_tag != CaseTag::BoundedC) {
      const auto g = gamma_set(m);
      const auto L = alpha_ladder(m, g, CaseHint::A);
      psi_ub = std::max(psi_ub, std::abs(psi(g, m.a, L.alpha_ub) - (1.0 - 2.0 * m.a)));
    }
  }
  c.detail << " psi(alpha_UB) err " << psi_ub << ", Vieta err " << vieta << ", |g(0)| " << g0
           << ", g' fit err " << fit << ", asymptote err " << asym;
  c.require(psi_ub <= 1e-12, "psi(alpha_UB)");
  c.require(vieta <= 1e-12, "Vieta");
  c.require(g0 == 0.0, "g(0)");
  c.require(fit <= 1e-9, "g' at thresholds");
  c.require(asym <= 1e-3, "bounded asymptote");
}

void hjb(Criterion& c) {
  for (int k = 1; k <= 5; ++k) {
    const auto s = solve(testing::figure(k));
    const auto t0 = Clock::now();
    const auto grid = make_verification_grid(s, 2001);
    const auto rep = hjb_residual(s, grid);
    const double secs = seconds_since(t0);
    double worst = 0.0;
    for (const auto& r : rep.checks) {
      if (r.informational) continue;
      if (!r.passed) c.require(false, std::string(fig_name(k)) + " " + r.name);
      if (r.name == "hjb.sup") worst = r.max_residual;
    }
    c.detail << ' ' << fig_name(k) << "(sup " << worst << ", " << secs << "s)";
    c.require(secs < 10.0, std::string(fig_name(k)) + " runtime");
  }
}

void smooth(Criterion& c) {
  double worst = 0.0;
  for (int k = 1; k <= 5; ++k) {
    const auto rep = smooth_fit(solve(testing::figure(k)));
    for (const auto& r : rep.checks) {
      worst = std::max(worst, r.max_residual);
      c.require(r.passed && r.max_residual <= 1e-7, std::string(fig_name(k)) + " " + r.name);
    }
  }
  c.detail << " largest relative jump " << worst;
}

void monte_carlo(Criterion& c) {
  for (int k : {1, 4}) {
    const auto s = solve(testing::figure(k));
    const PolicyStrategy st(s);
    SimConfig cfg;
    cfg.paths = 100000;
    cfg.dt = 1e-3;
    cfg.horizon = 40.0;
    const auto t0 = Clock::now();
    const auto e = simulate_value(st, s.model.delta, 0.5, 0.5, cfg);
    const double secs = seconds_since(t0);
    SimConfig dc = cfg;
    dc.paths = 20000;
    dc.seed = cfg.seed + 1;
    const auto d = dt_halving_drift(st, s.model.delta, 0.5, 0.5, dc);
    const double g = s.value(1.0).g;
    const double band = 2.5 * e.stderr_ + e.truncation_bound + 3.0 * std::abs(d.drift);
    c.detail << ' ' << fig_name(k) << "(mean " << e.mean << " se " << e.stderr_ << " g " << g
             << " |diff| " << std::abs(e.mean - g) << " band " << band << " drift " << d.drift
             << " " << secs << "s)";
    c.require(std::abs(e.mean - g) <= band, std::string(fig_name(k)) + " agreement");
    c.require(secs <= 60.0, std::string(fig_name(k)) + " runtime over 60 s");
  }
}

void dominance(Criterion& c) {
  for (int k : {1, 4}) {
    const auto s = solve(testing::figure(k));
    const auto& m = s.model;
    SimConfig cfg;
    cfg.paths = 20000;
    cfg.seed = 424242;
    std::vector<std::pair<std::string, StrategyOptions>> fam;
    StrategyOptions o;
    o.retention = RetentionRule::Full;
    fam.emplace_back("no reinsurance", o);
    o = {};
    o.retention = RetentionRule::Constant;
    o.constant_retention = 0.5 * m.M1();
    fam.emplace_back("constant M1/2", o);
    o = {};
    o.shift_u1 = o.shift_u2 = 0.2;
    fam.emplace_back("thresholds +0.2", o);
    o = {};
    o.shift_u1 = o.shift_u2 = -0.2;
    fam.emplace_back("thresholds -0.2", o);
    o = {};
    o.retention = RetentionRule::Proportional;
    o.theta = 0.7;
    fam.emplace_back("proportional 0.7", o);
    o = {};
    o.injections = false;
    fam.emplace_back("no injection", o);
    std::vector<std::pair<std::string, PolicyStrategy>> others;
    for (const auto& [n, opt] : fam) others.emplace_back(n, PolicyStrategy(s, opt));
    const auto rows = compare_policies(PolicyStrategy(s), others, m.delta, 0.5, 0.5, cfg);
    c.detail << ' ' << fig_name(k) << '(';
    for (const auto& r : rows) {
      const double z = r.stderr_ > 0.0 ? r.difference / r.stderr_ : (r.difference >= 0.0 ? 0.0 : -1e300);
      c.detail << r.name << ": " << r.difference << " (" << z << " se); ";
      c.require(r.difference >= -2.5 * r.stderr_, std::string(fig_name(k)) + " " + r.name);
    }
    c.detail << ')';
  }
}

void pure_xl(Criterion& c) {
  double match = 0.0;
  for (int k : {1, 5}) {
    const auto s = solve(testing::figure(k));
    const auto rep = dominance_check(s, dominance_samples(s.model, 1000));
    for (const auto& r : rep.checks) {
      c.require(r.passed, std::string(fig_name(k)) + " " + r.name);
      if (r.name == "dominance.sigma_match") match = std::max(match, r.max_residual);
    }
  }
  c.detail << " sigma match " << match;
  for (const auto& d : {ClaimDistribution::uniform(1.0), ClaimDistribution::uniform(1.5),
                        ClaimDistribution::exponential(1.0), ClaimDistribution::exponential(1.5)}) {
    const auto r = h_ratio_monotonicity(d, 1000);
    c.require(r.passed, r.name);
    c.detail << ", " << r.name << ' ' << r.max_residual;
  }
}

void cross_oracle(Criterion& c) {
  auto m = testing::figure_model(1);
  m.cbar2 = 0.0;
  const double x0 = 0.02;
  const auto t = HTrajectory::shoot(m, x0, g_inverse(m, x0), m.M1(), 5.0);
  double worst = 0.0;
  if (!t) {
    c.require(false, "H trajectory did not reach M1");
  } else {
    const double top = std::min(t->x_end(), g_integral(m, m.M1()));
    for (int i = 0; i <= 200; ++i) {
      const double x = std::min(top, x0 + (top - x0) * i / 200.0);
      worst = std::max(worst, std::abs(t->at(x).H - g_inverse(m, x)));
    }
  }
  auto p = testing::figure(3);
  p.a = 0.5;
  const auto s = solve(p);
  const double gap = std::abs(s.u1 - s.u2);
  c.detail << " |H - G^-1| " << worst << ", a=0.5 |u1-u2| " << gap;
  c.require(worst <= 1e-8, "H vs G^-1");
  c.require(s.case_tag == CaseTag::BoundedC && gap <= 1e-8, "a=0.5 band");
}

}  // namespace

int main() {
  std::cout.precision(6);
  const std::vector<std::pair<std::string, std::function<void(Criterion&)>>> all = {
      {"1 figure thresholds", thresholds}, {"2 analytic identities", identities},
      {"3 HJB residual", hjb},             {"4 smooth fit", smooth},
      {"5 Monte Carlo agreement", monte_carlo}, {"6 optimality dominance", dominance},
      {"7 pure-XL construction", pure_xl}, {"8 cross-oracle", cross_oracle},
  };
  bool ok = true;
  for (const auto& [name, run] : all) {
    Criterion c;
    c.detail.precision(6);
    try {
      run(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail << " [error: " << e.what() << ']';
    }
    std::cout << (c.ok ? "PASS" : "FAIL") << " criterion " << name << ':' << c.detail.str() << std::endl;
    ok = ok && c.ok;
  }
  return ok ? 0 : 1;
}
