#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "xlre/claims.hpp"
#include "xlre/coeffs.hpp"
#include "xlre/simulate.hpp"
#include "xlre/solver.hpp"
#include "xlre/strategy.hpp"

namespace xlre {

struct CheckResult {
  std::string name;
  std::size_t grid_size = 0;
  double max_residual = 0.0;
  double location = numerics::kNaN;  // x (or sample index) of the worst residual
  double tolerance = 0.0;
  bool passed = true;
  bool informational = false;  // reported but never fails the report
  std::string note;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.passed || c.informational; });
  }

  void merge(const VerificationReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
    std::stable_sort(checks.begin(), checks.end(),
                     [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; });
  }

  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  void write_csv(std::ostream& os) const {
    os << "check,grid_size,max_residual,location,tolerance,status,note\n" << std::setprecision(12);
    for (const auto& c : checks)
      os << c.name << ',' << c.grid_size << ',' << c.max_residual << ',' << c.location << ','
         << c.tolerance << ',' << (c.informational ? "info" : c.passed ? "pass" : "FAIL") << ','
         << c.note << '\n';
  }

  void write_text(std::ostream& os) const {
    os << std::setprecision(4);
    for (const auto& c : checks) {
      os << (c.informational ? "INFO " : c.passed ? "PASS " : "FAIL ") << c.name << "  max "
         << c.max_residual << " (tol " << c.tolerance << ")";
      if (!c.passed || c.informational) os << " at " << c.location;
      if (!c.note.empty()) os << "  " << c.note;
      os << '\n';
    }
    os << (passed() ? "all checks passed" : "some checks FAILED") << '\n';
  }
};

namespace detail {

// Tracks the worst residual of a check; a residual counts against the
// tolerance given with it.
struct Worst {
  CheckResult r;
  double worst_ratio = -1.0;

  Worst(std::string name, std::size_t n, double tol) {
    r.name = std::move(name);
    r.grid_size = n;
    r.tolerance = tol;
  }
  void see(double residual, double where, double tol) {
    const double ratio = tol > 0.0 ? residual / tol : (residual > 0.0 ? numerics::kInf : 0.0);
    if (!(ratio <= 1.0)) r.passed = false;
    if (ratio > worst_ratio || std::isnan(ratio)) {
      worst_ratio = std::isnan(ratio) ? numerics::kInf : ratio;
      r.max_residual = residual;
      r.location = where;
    }
  }
  CheckResult done() { return r; }
};

inline double top_threshold(const SolvedPolicy& s) {
  double top = 0.0;
  for (const auto& [n, v] : s.thresholds()) top = std::max(top, v);
  return top;
}

}  // namespace detail

/// Verification grid: geometric from x_max * 1e-4 up to the lowest threshold,
/// uniform beyond; x_max defaults to the top threshold plus 3.
inline std::vector<double> make_verification_grid(const SolvedPolicy& s, std::size_t points = 2001,
                                                  double x_max = numerics::kNaN) {
  if (points < 4) throw DomainError("verification grid needs at least 4 points");
  const auto th = s.thresholds();
  if (std::isnan(x_max)) x_max = detail::top_threshold(s) + 3.0;
  const double lo = x_max * 1e-4;
  const double knee = th.empty() ? 0.1 * x_max : std::min(th.front().second, 0.5 * x_max);
  const std::size_t ng = points / 4;
  std::vector<double> g;
  g.reserve(points);
  for (std::size_t i = 0; i < ng; ++i)
    g.push_back(lo * std::pow(knee / lo, static_cast<double>(i) / static_cast<double>(ng)));
  const std::size_t nu = points - ng;
  for (std::size_t i = 0; i < nu; ++i)
    g.push_back(knee + (x_max - knee) * static_cast<double>(i) / static_cast<double>(nu - 1));
  return g;
}

struct HjbOptions {
  double tol_scale = 1e-6;   // residual tolerance is tol_scale * delta * g(x)
  std::size_t pi_points = 129;
  double gradient_tol = 1e-9;
};

namespace detail {

struct Hamiltonian {
  const AggregateModel& m;
  ValueDerivs v;

  // Generator without the dividend part.
  double at(double pi) const {
    const Nbar n = nbar(m, pi);
    return 0.5 * n.variance * v.g2 + n.drift * v.g1 - m.delta * v.g;
  }
  double at(double pi1, double pi2) const {
    const double s2 = m.claims1.limited_second_moment(pi1) + m.claims2.limited_second_moment(pi2);
    const double mu = m.kappa1 * m.claims1.limited_mean(pi1) + m.kappa2 * m.claims2.limited_mean(pi2);
    return 0.5 * s2 * v.g2 + mu * v.g1 - m.delta * v.g;
  }
};

inline double pi_range(const SolvedPolicy& s, const std::vector<double>& grid) {
  if (std::isfinite(s.model.M1())) return s.model.M1();
  double hi = 0.0;
  for (double x : grid) {
    const double p = s.retention(x);
    if (std::isfinite(p)) hi = std::max(hi, p);
  }
  return std::max(2.0 * hi, 4.0 * s.model.claims1.mean());
}

}  // namespace detail

/// HJB residuals over the retention family pi2 = min(r pi1, M2) with the
/// closed-form controls as the candidate maximizer.
inline VerificationReport hjb_residual(const SolvedPolicy& s, const std::vector<double>& grid,
                                       HjbOptions opt = {}) {
  const AggregateModel& m = s.model;
  const double a = m.a;
  const bool bounded = s.bounded();
  const double top = detail::pi_range(s, grid);
  const double cell = top / static_cast<double>(opt.pi_points - 1);
  const bool inf_m1 = std::isinf(m.M1());

  detail::Worst sup_check("hjb.sup", grid.size(), opt.tol_scale);
  detail::Worst at_star("hjb.closed_form", grid.size(), opt.tol_scale);
  detail::Worst argmax_pi("hjb.argmax_pi", grid.size(), cell);
  detail::Worst argmax_c("hjb.argmax_c", grid.size(), 0.0);
  detail::Worst variational("hjb.variational", grid.size(), opt.tol_scale);
  detail::Worst gradient("hjb.gradient", grid.size(), opt.gradient_tol);
  argmax_pi.r.note = "grid cell " + std::to_string(cell);
  std::size_t ties = 0;

  for (double x : grid) {
    const ValueDerivs v = s.value(x);
    const detail::Hamiltonian hm{m, v};
    const double tol = opt.tol_scale * m.delta * std::max(v.g, 1e-300);
    const ControlDecision star = controls(s, x);

    // Dividend part: sup over c in {0, cbar}, and the candidate.
    double div_sup = 0.0, div_star = 0.0;
    bool c_ok = true;
    if (bounded) {
      div_sup = std::max(0.0, m.cbar1 * (a - v.g1)) + std::max(0.0, m.cbar2 * (1.0 - a - v.g1));
      div_star = star.c1 * (a - v.g1) + star.c2 * (1.0 - a - v.g1);
      const bool tie1 = std::abs(v.g1 - a) < 1e-9, tie2 = std::abs(v.g1 - (1.0 - a)) < 1e-9;
      const double best_c1 = v.g1 < a ? m.cbar1 : 0.0, best_c2 = v.g1 < 1.0 - a ? m.cbar2 : 0.0;
      c_ok = (tie1 || best_c1 == star.c1) && (tie2 || best_c2 == star.c2);
    }
    argmax_c.see(c_ok ? 0.0 : 1.0, x, 0.0);

    // Retention part.
    double best = -numerics::kInf, best_pi = 0.0;
    for (std::size_t k = 0; k < opt.pi_points; ++k) {
      const double p = top * static_cast<double>(k) / static_cast<double>(opt.pi_points - 1);
      const double h = hm.at(p);
      if (h > best) {
        best = h;
        best_pi = p;
      }
    }
    double sup = best;
    if (inf_m1) {
      const double h = hm.at(kInfinity);
      if (h > sup) sup = h;
    }
    const double pstar = star.pi1;
    if (std::isfinite(pstar)) {
      for (int k = -8; k <= 8; ++k) {
        const double p = pstar + cell * k / 8.0;
        if (p >= 0.0 && p <= top) sup = std::max(sup, hm.at(p));
      }
    }
    const double h_star = hm.at(pstar);
    sup = std::max(sup, h_star);

    if (bounded) {
      sup_check.see(std::max(0.0, sup + div_sup), x, tol);
      at_star.see(std::abs(h_star + div_star), x, tol);
      variational.see(std::abs(sup + div_sup), x, tol);
    } else {
      // Terms: L - delta g, a - g', 1 - a - g'; the gradient terms in the
      // line difference vanish identically for V(x1, x2) = g(x1 + x2).
      gradient.see(std::max(0.0, std::max(a, 1.0 - a) - v.g1), x, opt.gradient_tol);
      sup_check.see(std::max(0.0, sup), x, tol);
      // One of the generator term and 1 - a - g' must be active.
      variational.see(std::min(std::abs(sup) / tol, std::abs(1.0 - a - v.g1) / opt.gradient_tol), x,
                      1.0);
      if (x < s.u1) at_star.see(std::abs(h_star), x, tol);
    }

    // The grid maximizer must sit within one cell of the candidate.
    if (std::isfinite(pstar) && pstar <= top) {
      // Where the generator is flat in pi to rounding, any grid point is a maximizer.
      const Nbar nb = nbar(m, pstar);
      const double size = std::abs(0.5 * nb.variance * v.g2) + std::abs(nb.drift * v.g1) + m.delta * v.g;
      const double dist = std::abs(best_pi - pstar);
      const bool tie = dist > cell && best - h_star <= 1e-13 * size;
      if (tie) ++ties;
      argmax_pi.see(tie ? 0.0 : dist, x, cell);
    } else {
      const double at_top = inf_m1 ? hm.at(kInfinity) : best;
      argmax_pi.see(at_top >= best ? 0.0 : top - best_pi, x, cell);
    }
  }

  if (ties) argmax_pi.r.note += ", " + std::to_string(ties) + " points flat to rounding";
  VerificationReport rep;
  rep.checks.push_back(sup_check.done());
  rep.checks.push_back(at_star.done());
  rep.checks.push_back(argmax_pi.done());
  if (bounded) rep.checks.push_back(argmax_c.done());
  rep.checks.push_back(variational.done());
  if (!bounded) rep.checks.push_back(gradient.done());
  for (auto& c : rep.checks)
    if (c.name != "hjb.argmax_pi" && c.name != "hjb.argmax_c" && c.name != "hjb.gradient")
      c.note = "tolerance is this factor times delta * g(x)";
  return rep;
}

/// How much the Hamiltonian gains when Line 2 may choose its retention
/// independently of Line 1 (reported, not enforced).
inline VerificationReport decoupled_retention_gap(const SolvedPolicy& s,
                                                  const std::vector<double>& grid,
                                                  std::size_t points = 129) {
  const AggregateModel& m = s.model;
  const double top1 = detail::pi_range(s, grid);
  const double top2 = std::isfinite(m.M2()) ? m.M2() : m.ratio() * top1;
  detail::Worst w("hjb.decoupled_gap", grid.size(), 0.0);
  w.r.informational = true;
  for (double x : grid) {
    const ValueDerivs v = s.value(x);
    const detail::Hamiltonian hm{m, v};
    const double p1 = s.retention(x);
    const double coupled = hm.at(p1);
    double best = coupled;
    for (std::size_t k = 0; k < points; ++k) {
      const double p2 = top2 * static_cast<double>(k) / static_cast<double>(points - 1);
      best = std::max(best, hm.at(p1, p2));
    }
    w.see((best - coupled) / (m.delta * std::max(v.g, 1e-300)), x, 0.0);
  }
  w.r.passed = true;
  w.r.note = "relative to delta * g(x)";
  VerificationReport rep;
  rep.checks.push_back(w.done());
  return rep;
}

/// Continuity of g, g', g'' across every piece boundary.
inline VerificationReport smooth_fit(const SolvedPolicy& s, double tol = 1e-7) {
  detail::Worst w[3] = {{"smooth_fit.g", 0, tol}, {"smooth_fit.g1", 0, tol}, {"smooth_fit.g2", 0, tol}};
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < s.pieces.size(); ++i) {
    const double x = s.pieces[i].hi;
    if (!std::isfinite(x)) continue;
    const ValueDerivs l = s.evaluate(i, x), r = s.evaluate(i + 1, x);
    const double d[3][2] = {{l.g, r.g}, {l.g1, r.g1}, {l.g2, r.g2}};
    for (int k = 0; k < 3; ++k) {
      const double scale = std::max({std::abs(d[k][0]), std::abs(d[k][1]), 1.0});
      w[k].see(std::abs(d[k][0] - d[k][1]) / scale, x, tol);
    }
    ++n;
  }
  VerificationReport rep;
  for (auto& c : w) {
    c.r.grid_size = n;
    c.r.note = "relative to max(|left|, |right|, 1)";
    rep.checks.push_back(c.done());
  }
  return rep;
}

/// Central differences of g and g' against the analytic derivatives.
inline VerificationReport derivative_fd_check(const SolvedPolicy& s, const std::vector<double>& grid,
                                              double tol = 1e-6) {
  const double scale = std::max(detail::top_threshold(s), 1.0);
  std::vector<double> thr;
  for (std::size_t i = 0; i + 1 < s.pieces.size(); ++i) thr.push_back(s.pieces[i].hi);
  detail::Worst w1("fd.g1", 0, tol), w2("fd.g2", 0, tol);
  std::size_t used = 0;
  for (double x : grid) {
    const double h = 1e-5 * std::min(scale, std::max(x, 1e-3 * scale));
    if (x < 10.0 * h) continue;
    bool near = false;
    for (double t : thr) near = near || std::abs(x - t) < 10.0 * h;
    if (near) continue;
    const ValueDerivs c = s.value(x), p = s.value(x + h), m = s.value(x - h);
    const double fd1 = (p.g - m.g) / (2.0 * h);
    const double fd2 = (p.g1 - m.g1) / (2.0 * h);
    // Rounding in g limits the difference quotient to about eps |g| / h.
    w1.see(std::abs(fd1 - c.g1) / std::max(std::abs(c.g1), 1e-3 * std::abs(c.g) / scale), x, tol);
    // g'' may vanish on linear pieces; measure against the slope scale there.
    w2.see(std::abs(fd2 - c.g2) / std::max(std::abs(c.g2), std::abs(c.g1) / scale), x, tol);
    ++used;
  }
  VerificationReport rep;
  for (auto* w : {&w1, &w2}) {
    w->r.grid_size = used;
    w->r.note = "relative, step 1e-5 scaled, thresholds guarded";
    rep.checks.push_back(w->done());
  }
  return rep;
}

/// g increasing and concave; retention non-decreasing and constant beyond
/// its threshold.
inline VerificationReport shape_checks(const SolvedPolicy& s, const std::vector<double>& grid) {
  detail::Worst inc("shape.increasing", grid.size(), 0.0);
  detail::Worst conc("shape.concave", grid.size(), 1e-12);
  detail::Worst ret("shape.retention_monotone", grid.size(), 1e-12);
  detail::Worst cap("shape.retention_cap", grid.size(), 1e-12);
  const double cap_level = s.case_tag == CaseTag::BoundedC ? s.m0 : s.model.M1();
  double cap_from = s.case_tag == CaseTag::BoundedC ? s.u2 : s.w0;
  if (s.case_tag == CaseTag::BoundedB) cap_from = s.w0;
  double prev_g1 = numerics::kInf, prev_pi = -numerics::kInf;
  for (double x : grid) {
    const ValueDerivs v = s.value(x);
    inc.see(v.g1 > 0.0 ? 0.0 : -v.g1 + 1e-300, x, 0.0);
    const double tolc = 1e-12 * std::max(std::abs(v.g1), 1.0);
    conc.see(std::max(0.0, v.g1 - prev_g1) / std::max(std::abs(v.g1), 1.0), x, 1e-12);
    conc.see(std::max(0.0, v.g2) / std::max(std::abs(v.g1), 1.0), x, tolc);
    prev_g1 = v.g1;
    const double p = s.retention(x);
    const double tolp = 1e-12 * (std::isfinite(p) ? std::max(p, 1.0) : 1.0);
    if (!(std::isinf(p) && std::isinf(prev_pi)))
      ret.see(std::max(0.0, prev_pi - p), x, tolp);
    prev_pi = p;
    if (std::isfinite(cap_from) && x >= cap_from && std::isfinite(cap_level))
      cap.see(std::abs(p - cap_level) / std::max(cap_level, 1.0), x, 1e-12);
  }
  VerificationReport rep;
  rep.checks.push_back(inc.done());
  rep.checks.push_back(conc.done());
  rep.checks.push_back(ret.done());
  cap.r.note = "pi1 equals its cap beyond the reinsurance threshold";
  rep.checks.push_back(cap.done());
  return rep;
}

struct DominanceSample {
  double theta = 0.5;
  double pi = 0.0;  // Line-1 retention of the mixed contract
};

/// Random (theta, pi) samples with theta in (0, 1), pi in (0, M1].
inline std::vector<DominanceSample> dominance_samples(const AggregateModel& m, std::size_t n,
                                                      std::uint64_t seed = 7) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double hi = std::isfinite(m.M1()) ? m.M1() : 5.0 * m.claims1.mean();
  std::vector<DominanceSample> s(n);
  for (auto& d : s) {
    d.theta = 0.01 + 0.98 * u(gen);
    d.pi = hi * (0.001 + 0.999 * u(gen));
  }
  return s;
}

struct DominanceOptions {
  double match_tol = 1e-10;
  std::size_t simulated = 0;  // simulate the first this many samples
  SimConfig sim;
  double x1 = 0.5, x2 = 0.5;
};

/// Pure-XL replacement of mixed contracts: volatility matched, drift gain
/// non-negative, and (optionally) no loss of value under common random
/// numbers.
inline VerificationReport dominance_check(const SolvedPolicy& s,
                                          const std::vector<DominanceSample>& samples,
                                          const DominanceOptions& opt = {}) {
  const AggregateModel& m = s.model;
  detail::Worst match("dominance.sigma_match", samples.size(), opt.match_tol);
  detail::Worst gain("dominance.drift_gain", samples.size(), 0.0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& d = samples[i];
    const double pi1 = std::min(d.pi, m.M1());
    const double pi2 = m.paired_retention(pi1);
    for (int line = 0; line < 2; ++line) {
      const ClaimDistribution& c = line == 0 ? m.claims1 : m.claims2;
      const double p = line == 0 ? pi1 : pi2;
      const auto r = dominating_pure_xl(c, d.theta, p);
      const double target = d.theta * d.theta * c.limited_second_moment(p / d.theta);
      const double got = c.limited_second_moment(r.retention);
      match.see(std::abs(got - target) / std::max(target, 1e-300), static_cast<double>(i),
                opt.match_tol);
      gain.see(std::max(0.0, -r.drift_gain), static_cast<double>(i), 0.0);
    }
  }
  VerificationReport rep;
  rep.checks.push_back(match.done());
  rep.checks.push_back(gain.done());
  if (opt.simulated > 0) {
    detail::Worst sim("dominance.simulated", std::min(opt.simulated, samples.size()), 2.5);
    sim.r.note = "paired stderr units, replaced minus mixed";
    for (std::size_t i = 0; i < samples.size() && i < opt.simulated; ++i) {
      StrategyOptions mixed;
      mixed.retention = RetentionRule::Mixed;
      mixed.theta = samples[i].theta;
      mixed.mixed_retention = std::min(samples[i].pi, m.M1());
      StrategyOptions pure = mixed;
      pure.retention = RetentionRule::PureXl;
      const PolicyStrategy base(s, pure);
      const std::vector<std::pair<std::string, PolicyStrategy>> other{{"mixed", PolicyStrategy(s, mixed)}};
      const auto rows = compare_policies(base, other, m.delta, opt.x1, opt.x2, opt.sim);
      const auto& r = rows.front();
      const double z = r.stderr_ > 0.0 ? -r.difference / r.stderr_ : (r.difference < 0.0 ? numerics::kInf : 0.0);
      sim.see(std::max(0.0, z), static_cast<double>(i), 2.5);
    }
    rep.checks.push_back(sim.done());
  }
  return rep;
}

/// h(s1) <= h(s2) for random pairs s1 < s2 inside the support.
inline CheckResult h_ratio_monotonicity(const ClaimDistribution& d, std::size_t pairs,
                                        std::uint64_t seed = 11) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double hi = std::isfinite(d.support_bound()) ? d.support_bound() : 10.0 * d.mean();
  detail::Worst w("h_ratio.monotone." + d.describe(), pairs, 1e-12);
  for (std::size_t i = 0; i < pairs; ++i) {
    double s1 = hi * (1e-4 + (1 - 1e-4) * u(gen)), s2 = hi * (1e-4 + (1 - 1e-4) * u(gen));
    if (s1 > s2) std::swap(s1, s2);
    const double h1 = h_ratio(d, s1), h2 = h_ratio(d, s2);
    w.see(std::max(0.0, h1 - h2) / h2, s1, 1e-12);
  }
  return w.done();
}

struct VerifyOptions {
  std::size_t grid_points = 2001;
  HjbOptions hjb;
  double smooth_tol = 1e-7;
  double fd_tol = 1e-6;
  std::size_t dominance_samples = 1000;
};

/// Every deterministic check on one solved policy.
inline VerificationReport verify_all(const SolvedPolicy& s, const VerifyOptions& opt = {}) {
  const auto grid = make_verification_grid(s, opt.grid_points);
  VerificationReport rep;
  rep.merge(hjb_residual(s, grid, opt.hjb));
  rep.merge(decoupled_retention_gap(s, grid));
  rep.merge(smooth_fit(s, opt.smooth_tol));
  rep.merge(derivative_fd_check(s, grid, opt.fd_tol));
  rep.merge(shape_checks(s, grid));
  if (opt.dominance_samples)
    rep.merge(dominance_check(s, dominance_samples(s.model, opt.dominance_samples)));
  return rep;
}

}  // namespace xlre
