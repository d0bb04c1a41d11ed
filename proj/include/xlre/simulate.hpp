#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "xlre/claims.hpp"
#include "xlre/errors.hpp"
#include "xlre/numerics.hpp"
#include "xlre/rng.hpp"
#include "xlre/solver.hpp"
#include "xlre/strategy.hpp"

namespace xlre {

struct SimConfig {
  double dt = 1e-3;
  double horizon = 40.0;
  std::size_t paths = 100000;
  std::uint64_t seed = 20240601;
  bool antithetic = false;
  // Each step's Brownian increment is the scaled sum of this many unit
  // normals, so that a run at dt with substeps = 2 shares its noise with a
  // run at dt / 2.
  int substeps = 1;
  unsigned threads = 0;  // 0: hardware concurrency
  bool zero_volatility = false;
  std::ostream* event_log = nullptr;  // events of path 0, CSV
};

struct SimEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  double paths_ruined = 0.0;  // fraction
  double truncation_bound = 0.0;
  std::size_t paths = 0;
};

/// Drift, volatility and dividend rate of both lines at one state.
struct LineRates {
  double drift1 = 0.0, vol1 = 0.0, div1 = 0.0;
  double drift2 = 0.0, vol2 = 0.0, div2 = 0.0;
};

/// Reinsurance rule used by a simulated strategy.
enum class RetentionRule {
  Optimal,       // the solved policy
  Full,          // no reinsurance
  Constant,      // fixed Line-1 retention, Line 2 paired
  Proportional,  // quota share theta only
  Mixed,         // quota share theta, then excess of loss
  PureXl,        // pure excess of loss with the volatility of Mixed, gain paid out
};

struct StrategyOptions {
  RetentionRule retention = RetentionRule::Optimal;
  double constant_retention = 0.0;
  double theta = 1.0;
  double mixed_retention = 0.0;
  double shift_u1 = 0.0;  // dividend thresholds (bounded) or barrier (unbounded)
  double shift_u2 = 0.0;
  bool injections = true;
  LowRegionRule low_region = LowRegionRule::EqualSplit;
};

/// The solved policy, optionally perturbed, in the form the simulator needs.
class PolicyStrategy {
 public:
  explicit PolicyStrategy(const SolvedPolicy& policy, StrategyOptions opts = {})
      : opts_(opts), a_(policy.model.a), bounded_(policy.bounded()) {
    const AggregateModel& m = policy.model;
    geometry_ = InjectionGeometry::of(policy);
    geometry_.barrier += opts.shift_u1;
    u1_ = policy.u1 + opts.shift_u1;
    u2_ = policy.u2 + opts.shift_u2;
    cbar1_ = m.cbar1;
    cbar2_ = m.cbar2;
    const double n1 = nbar(m, m.M1()).drift;
    continuation_ = bounded_ ? (a_ * cbar1_ + (1.0 - a_) * cbar2_) / m.delta
                             : (1.0 - a_) * (std::max(geometry_.barrier, policy.u1) -
                                             policy.u1 + n1 / m.delta);
    auto line = [&](const ClaimDistribution& d, double kappa, double pi, double& drift,
                    double& vol) {
      drift = kappa * d.limited_mean(pi);
      vol = std::sqrt(d.limited_second_moment(pi));
    };
    switch (opts.retention) {
      case RetentionRule::Optimal: build_table(policy); break;
      case RetentionRule::Full:
        line(m.claims1, m.kappa1, m.M1(), fixed_.drift1, fixed_.vol1);
        line(m.claims2, m.kappa2, m.M2(), fixed_.drift2, fixed_.vol2);
        break;
      case RetentionRule::Constant: {
        const double p = opts.constant_retention;
        line(m.claims1, m.kappa1, p, fixed_.drift1, fixed_.vol1);
        line(m.claims2, m.kappa2, m.paired_retention(p), fixed_.drift2, fixed_.vol2);
        break;
      }
      case RetentionRule::Proportional:
        line(m.claims1, m.kappa1, m.M1(), fixed_.drift1, fixed_.vol1);
        line(m.claims2, m.kappa2, m.M2(), fixed_.drift2, fixed_.vol2);
        fixed_.drift1 *= opts.theta;
        fixed_.vol1 *= opts.theta;
        fixed_.drift2 *= opts.theta;
        fixed_.vol2 *= opts.theta;
        break;
      case RetentionRule::Mixed:
      case RetentionRule::PureXl: {
        const double th = opts.theta;
        const double p1 = opts.mixed_retention, p2 = m.paired_retention(p1);
        line(m.claims1, m.kappa1, p1 / th, fixed_.drift1, fixed_.vol1);
        line(m.claims2, m.kappa2, p2 / th, fixed_.drift2, fixed_.vol2);
        fixed_.drift1 *= th;
        fixed_.vol1 *= th;
        fixed_.drift2 *= th;
        fixed_.vol2 *= th;
        if (opts.retention == RetentionRule::PureXl) {
          const auto r1 = dominating_pure_xl(m.claims1, th, p1);
          const auto r2 = dominating_pure_xl(m.claims2, th, p2);
          line(m.claims1, m.kappa1, r1.retention, fixed_.drift1, fixed_.vol1);
          line(m.claims2, m.kappa2, r2.retention, fixed_.drift2, fixed_.vol2);
          extra1_ = m.kappa1 * r1.drift_gain;
          extra2_ = m.kappa2 * r2.drift_gain;
        }
        break;
      }
    }
  }

  double weight() const { return a_; }
  bool singular_dividends() const { return !bounded_; }
  double continuation_bound() const { return continuation_; }

  LineRates rates(double x1, double x2) const {
    const double x = x1 + x2;
    LineRates r;
    if (opts_.retention != RetentionRule::Optimal) {
      r = fixed_;
    } else {
      if (x >= table_top_) {
        r = beyond_;
      } else {
        const double s = x * inv_step_;
        const std::size_t i = static_cast<std::size_t>(s);
        const double w = s - static_cast<double>(i);
        const LineRates& lo = table_[i];
        const LineRates& hi = table_[i + 1];
        r.drift1 = lo.drift1 + w * (hi.drift1 - lo.drift1);
        r.vol1 = lo.vol1 + w * (hi.vol1 - lo.vol1);
        r.drift2 = lo.drift2 + w * (hi.drift2 - lo.drift2);
        r.vol2 = lo.vol2 + w * (hi.vol2 - lo.vol2);
      }
    }
    r.div1 = extra1_;
    r.div2 = extra2_;
    if (bounded_) {
      r.div2 += x >= u1_ ? cbar2_ : 0.0;
      r.div1 += x >= u2_ ? cbar1_ : 0.0;
    }
    return r;
  }

  /// Whether the injection rule keeps both lines alive until the aggregate
  /// itself reaches zero.
  bool aggregate_ruin(double x1, double x2) const {
    if (!opts_.injections || opts_.low_region != LowRegionRule::EqualSplit) return false;
    const Region r = geometry_.region(x1, x2);
    return r == (bounded_ ? Region::A7 : Region::A3);
  }

  double barrier_level() const { return geometry_.barrier; }

  bool above_barrier(double x1, double x2) const {
    return x1 > geometry_.barrier || x1 + x2 > geometry_.barrier;
  }

  /// Highest restoring level strictly below the aggregate x, or 0.
  double level_below(double x) const {
    if (!bounded_) return 0.0;
    const auto& d = geometry_.levels;
    for (double l : {d.d2, d.d1, d.d0})
      if (l < x) return l;
    return 0.0;
  }

  InjectionOutcome on_event(double x1, double x2, Trigger t) const {
    if (t != Trigger::None && !opts_.injections) {
      InjectionOutcome o{0.0, x1, x2, 0.0, geometry_.region(x1, x2), true};
      return o;
    }
    return geometry_.apply(x1, x2, t, opts_.low_region);
  }

 private:
  static constexpr std::size_t kTable = 8192;

  void build_table(const SolvedPolicy& policy) {
    const AggregateModel& m = policy.model;
    double top = 0.0;
    for (const auto& p : policy.pieces)
      if (p.kind == Piece::Kind::GCurve || p.kind == Piece::Kind::HBand) top = p.hi;
    auto at = [&](double pi1) {
      LineRates r;
      const double pi2 = m.paired_retention(pi1);
      r.drift1 = m.kappa1 * m.claims1.limited_mean(pi1);
      r.vol1 = std::sqrt(m.claims1.limited_second_moment(pi1));
      r.drift2 = m.kappa2 * m.claims2.limited_mean(pi2);
      r.vol2 = std::sqrt(m.claims2.limited_second_moment(pi2));
      return r;
    };
    table_top_ = top;
    inv_step_ = static_cast<double>(kTable) / top;
    table_.resize(kTable + 2);
    for (std::size_t i = 0; i <= kTable; ++i) {
      const double x = std::min(top, top * static_cast<double>(i) / kTable);
      table_[i] = at(policy.retention(std::nextafter(x, 0.0) < 0 ? 0.0 : std::min(x, std::nextafter(top, 0.0))));
    }
    table_[kTable + 1] = table_[kTable];
    beyond_ = at(policy.retention(top));
  }

  StrategyOptions opts_;
  double a_;
  bool bounded_;
  InjectionGeometry geometry_;
  double u1_ = 0.0, u2_ = 0.0;
  double cbar1_ = 0.0, cbar2_ = 0.0;
  double extra1_ = 0.0, extra2_ = 0.0;
  double continuation_ = 0.0;
  LineRates fixed_;
  LineRates beyond_;
  std::vector<LineRates> table_;
  double table_top_ = 0.0;
  double inv_step_ = 0.0;
};

namespace detail {

inline void validate(const SimConfig& c, double delta) {
  if (c.paths == 0) throw ConfigError("simulation needs at least one path");
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw ConfigError("time step must be positive");
  if (c.substeps < 1) throw ConfigError("substeps must be at least 1");
  if (!(c.horizon >= 8.0 / delta))
    throw ConfigError("horizon must cover at least 8 / delta");
}

struct PathResult {
  double value = 0.0;
  bool ruined = false;
};

struct PathState {
  double x1 = 0.0, x2 = 0.0;
  double t = 0.0, disc = 1.0;
  double pv = 0.0;
};

template <class Strategy>
class PathEvents {
 public:
  PathEvents(const Strategy& st, double delta, std::ostream* log)
      : st_(st), a_(st.weight()), delta_(delta), log_(log) {}

  void emit(const PathState& s, const char* what) const {
    if (log_) *log_ << std::setprecision(12) << s.t << ',' << s.x1 << ',' << s.x2 << ',' << what << '\n';
  }

  // Lump dividends and transfers above the barrier.
  void barrier(PathState& s) const {
    for (int k = 0; k < 4; ++k) {
      const auto o = st_.on_event(s.x1, s.x2, Trigger::None);
      if (o.x1 == s.x1 && o.x2 == s.x2) break;
      if (o.lump_dividend > 0.0) {
        s.pv += (1.0 - a_) * o.lump_dividend * s.disc;
        emit(s, "lump");
      }
      s.x1 = o.x1;
      s.x2 = o.x2;
    }
  }

  // A line sits at zero at time s.t. Returns false on ruin.
  bool hit(PathState& s, Trigger tr) const {
    if (s.x1 <= 0.0 && s.x2 <= 0.0) {
      emit(s, "ruin");
      return false;
    }
    if (st_.singular_dividends()) {
      barrier(s);
      if (s.x1 > 0.0 && s.x2 > 0.0) return true;
    }
    const auto o = st_.on_event(s.x1, s.x2, tr);
    if (o.ruined) {
      emit(s, "ruin");
      return false;
    }
    if (o.lump_dividend > 0.0) s.pv += (1.0 - a_) * o.lump_dividend * s.disc;
    s.x1 = o.x1;
    s.x2 = o.x2;
    emit(s, tr == Trigger::Line1AtZero ? "inject_to_line1" : "inject_to_line2");
    return true;
  }

  bool start(PathState& s) const {
    if (st_.singular_dividends()) barrier(s);
    for (int k = 0; k < 8 && (s.x1 <= 0.0 || s.x2 <= 0.0); ++k) {
      const Trigger tr = s.x1 <= 0.0 ? Trigger::Line1AtZero : Trigger::Line2AtZero;
      if (!hit(s, tr)) return false;
    }
    return s.x1 > 0.0 && s.x2 > 0.0;
  }

  // Follows the step's increments d1, d2 linearly over [s.t, t_end]; each
  // zero hit stops the clock, applies the injection rule and the rest of the
  // step resumes. Returns false on ruin.
  bool step(PathState& s, double d1, double d2, double rate, double h, double t_end,
            std::uint64_t path) const {
    double rem = 1.0;
    auto accrue = [&](double frac) {
      const double next = std::exp(-delta_ * (s.t + frac * h));
      if (rate > 0.0) s.pv += rate * frac * h * 0.5 * (s.disc + next);
      s.t += frac * h;
      s.disc = next;
      rem -= frac;
    };
    for (int hits = 0;; ++hits) {
      if (hits > 10000)
        throw SimulationError("injection cascade did not terminate on path " + std::to_string(path));
      const double e1 = s.x1 + rem * d1, e2 = s.x2 + rem * d2;
      if (e1 > 0.0 && e2 > 0.0) {
        const double next = std::exp(-delta_ * t_end);
        if (rate > 0.0) s.pv += rate * rem * h * 0.5 * (s.disc + next);
        s.x1 = e1;
        s.x2 = e2;
        s.t = t_end;
        s.disc = next;
        return true;
      }
      const double f1 = e1 <= 0.0 ? s.x1 / -d1 : numerics::kInf;
      const double f2 = e2 <= 0.0 ? s.x2 / -d2 : numerics::kInf;
      if (s.x1 + s.x2 + rem * (d1 + d2) <= 0.0 && st_.aggregate_ruin(s.x1, s.x2)) {
        accrue((s.x1 + s.x2) / -(d1 + d2));
        s.x1 = s.x2 = 0.0;
        emit(s, "ruin");
        return false;
      }
      if (hits >= 64 && d1 + d2 < 0.0) {
        // Transfers bouncing between two lines that both lose reserves
        // converge to the aggregate reaching the next restoring level.
        const double level = st_.level_below(s.x1 + s.x2);
        const double fl = (s.x1 + s.x2 - level) / -(d1 + d2);
        if (level > 0.0 && fl <= rem) {
          accrue(fl);
          const bool one = f1 <= f2;
          s.x1 = one ? 0.0 : level;
          s.x2 = one ? level : 0.0;
          if (!hit(s, one ? Trigger::Line1AtZero : Trigger::Line2AtZero)) return false;
          hits = 0;
          continue;
        }
      }
      const double f = std::min(f1, f2);
      const double y1 = s.x1 + f * d1, y2 = s.x2 + f * d2;
      accrue(f);
      // Lower-indexed line first on a tie.
      Trigger tr;
      if (f1 <= f2) {
        s.x1 = 0.0;
        s.x2 = std::max(y2, 0.0);
        tr = Trigger::Line1AtZero;
      } else {
        s.x2 = 0.0;
        s.x1 = std::max(y1, 0.0);
        tr = Trigger::Line2AtZero;
      }
      if (!hit(s, tr)) return false;
    }
  }

 private:
  const Strategy& st_;
  double a_;
  double delta_;
  std::ostream* log_;
};

[[noreturn, gnu::cold, gnu::noinline]] inline void non_finite_increment(std::uint64_t path) {
  throw SimulationError("non-finite reserve increment on path " + std::to_string(path));
}

template <class Strategy>
PathResult run_path(const Strategy& st, double x1, double x2, double delta, const SimConfig& cfg,
                    std::uint64_t path, bool negate, std::ostream* log) {
  rng::Stream rs(cfg.seed, path);
  const PathEvents<Strategy> ev(st, delta, log);
  const double a = st.weight();
  const double dt = cfg.dt;
  const double sq = cfg.zero_volatility ? 0.0 : std::sqrt(dt) / std::sqrt(double(cfg.substeps));
  const double noise_sign = negate ? -1.0 : 1.0;
  const double step_disc = std::exp(-delta * dt);
  // Trapezoidal weight of a full step relative to the discount at its start.
  const double full_weight = 0.5 * dt * (1.0 + step_disc);
  const bool singular = st.singular_dividends();
  const double barrier = singular ? st.barrier_level() : 0.0;
  const auto full_steps = static_cast<std::uint64_t>(std::floor(cfg.horizon / dt));
  const double tail = cfg.horizon - static_cast<double>(full_steps) * dt;

  PathState s{x1, x2, 0.0, 1.0, 0.0};
  if (!ev.start(s)) return {s.pv, true};
  const auto increments = [&](double y1, double y2, double h, double scale, double& d1,
                              double& d2, double& rate) __attribute__((always_inline)) {
    const LineRates r = st.rates(y1, y2);
    double z1 = rs.normal(), z2 = rs.normal();
    for (int k = 1; k < cfg.substeps; ++k) {
      z1 += rs.normal();
      z2 += rs.normal();
    }
    const double vs = scale * noise_sign;
    d1 = (r.drift1 - r.div1) * h + r.vol1 * vs * z1;
    d2 = (r.drift2 - r.div2) * h + r.vol2 * vs * z2;
    if (!std::isfinite(d1 + d2)) [[unlikely]]
      non_finite_increment(path);
    rate = a * r.div1 + (1.0 - a) * r.div2;
  };
  // Hot loop state lives in registers; s is synchronised around events.
  double y1 = s.x1, y2 = s.x2, disc = s.disc, pv = s.pv;
  for (std::uint64_t k = 0; k < full_steps; ++k) {
    double d1, d2, rate;
    increments(y1, y2, dt, sq, d1, d2, rate);
    if (y1 + d1 > 0.0 && y2 + d2 > 0.0) {
      pv += rate * disc * full_weight;
      y1 += d1;
      y2 += d2;
      disc *= step_disc;
      if (!singular) continue;
      if (!log) {
        // The barrier transfers of the injection rule, inline.
        if (y1 > barrier) {
          y2 = y2 + (y1 - barrier);
          y1 = barrier;
        }
        if (y2 > 0.0 && y1 + y2 > barrier) {
          pv += (1.0 - a) * (y1 + y2 - barrier) * disc;
          y2 = barrier - y1;
        }
        continue;
      }
      if (!st.above_barrier(y1, y2)) continue;
      s = {y1, y2, static_cast<double>(k + 1) * dt, disc, pv};
    } else {
      s = {y1, y2, static_cast<double>(k) * dt, disc, pv};
      if (!ev.step(s, d1, d2, rate, dt, static_cast<double>(k + 1) * dt, path)) return {s.pv, true};
    }
    if (singular && st.above_barrier(s.x1, s.x2)) ev.barrier(s);
    y1 = s.x1;
    y2 = s.x2;
    disc = s.disc;
    pv = s.pv;
  }
  s = {y1, y2, static_cast<double>(full_steps) * dt, disc, pv};
  if (tail > 1e-12 * dt) {
    double d1, d2, rate;
    increments(s.x1, s.x2, tail, cfg.zero_volatility ? 0.0 : sq * std::sqrt(tail / dt), d1, d2,
               rate);
    if (!ev.step(s, d1, d2, rate, tail, cfg.horizon, path)) return {s.pv, true};
    if (singular && st.above_barrier(s.x1, s.x2)) ev.barrier(s);
  }
  return {s.pv, false};
}

template <class Strategy>
std::vector<PathResult> run_paths(const Strategy& st, double x1, double x2, double delta,
                                  const SimConfig& cfg) {
  std::vector<PathResult> out(cfg.paths);
  unsigned nt = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  nt = static_cast<unsigned>(std::min<std::size_t>(nt, cfg.paths));
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p) {
      const std::uint64_t stream = cfg.antithetic ? p / 2 : p;
      const bool neg = cfg.antithetic && (p % 2 == 1);
      out[p] = run_path(st, x1, x2, delta, cfg, stream, neg, p == 0 ? cfg.event_log : nullptr);
    }
  };
  if (nt <= 1) {
    work(0, cfg.paths);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (cfg.paths + nt - 1) / nt;
    for (unsigned k = 0; k < nt; ++k) {
      const std::size_t lo = k * chunk, hi = std::min(cfg.paths, lo + chunk);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

// Sample values (antithetic pairs averaged), in path order.
inline std::vector<double> samples(const std::vector<PathResult>& r, bool antithetic) {
  std::vector<double> s;
  if (!antithetic) {
    s.reserve(r.size());
    for (const auto& p : r) s.push_back(p.value);
    return s;
  }
  for (std::size_t i = 0; i + 1 < r.size(); i += 2) s.push_back(0.5 * (r[i].value + r[i + 1].value));
  if (r.size() % 2) s.push_back(r.back().value);
  return s;
}

inline void mean_stderr(const std::vector<double>& v, double& mean, double& se) {
  numerics::CompensatedSum sum, sq;
  for (double x : v) sum.add(x);
  const double n = static_cast<double>(v.size());
  mean = sum.value() / n;
  for (double x : v) sq.add((x - mean) * (x - mean));
  se = v.size() > 1 ? std::sqrt(sq.value() / (n - 1.0) / n) : 0.0;
}

}  // namespace detail

/// Monte Carlo estimate of the expected discounted weighted dividends.
template <class Strategy>
SimEstimate simulate_value(const Strategy& st, double delta, double x1, double x2,
                           const SimConfig& cfg) {
  if (!(x1 >= 0.0 && x2 >= 0.0)) throw DomainError("simulate: reserves must be non-negative");
  detail::validate(cfg, delta);
  const auto res = detail::run_paths(st, x1, x2, delta, cfg);
  SimEstimate e;
  e.paths = cfg.paths;
  detail::mean_stderr(detail::samples(res, cfg.antithetic), e.mean, e.stderr_);
  std::size_t ruined = 0;
  for (const auto& r : res) ruined += r.ruined;
  e.paths_ruined = static_cast<double>(ruined) / static_cast<double>(res.size());
  e.truncation_bound = st.continuation_bound() * std::exp(-delta * cfg.horizon);
  return e;
}

inline SimEstimate simulate_value(const SolvedPolicy& policy, double x1, double x2,
                                  const SimConfig& cfg, StrategyOptions opts = {}) {
  return simulate_value(PolicyStrategy(policy, opts), policy.model.delta, x1, x2, cfg);
}

struct ComparisonRow {
  std::string name;
  double base_mean = 0.0;
  double other_mean = 0.0;
  double difference = 0.0;  // base - other
  double stderr_ = 0.0;     // paired
};

/// Common-random-number comparison of a base strategy against alternatives.
template <class Strategy>
std::vector<ComparisonRow> compare_policies(
    const Strategy& base, const std::vector<std::pair<std::string, Strategy>>& others,
    double delta, double x1, double x2, const SimConfig& cfg) {
  detail::validate(cfg, delta);
  const auto b = detail::samples(detail::run_paths(base, x1, x2, delta, cfg), cfg.antithetic);
  double bm, bse;
  detail::mean_stderr(b, bm, bse);
  std::vector<ComparisonRow> rows;
  for (const auto& [name, st] : others) {
    const auto o = detail::samples(detail::run_paths(st, x1, x2, delta, cfg), cfg.antithetic);
    std::vector<double> d(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) d[i] = b[i] - o[i];
    ComparisonRow r;
    r.name = name;
    r.base_mean = bm;
    double om, ose;
    detail::mean_stderr(o, om, ose);
    r.other_mean = om;
    detail::mean_stderr(d, r.difference, r.stderr_);
    rows.push_back(r);
  }
  return rows;
}

/// Change of the mean when dt is halved, measured on shared Brownian paths.
struct StepDrift {
  double coarse = 0.0, fine = 0.0;
  double drift = 0.0;  // fine - coarse
  double stderr_ = 0.0;  // paired
  double combined_stderr = 0.0;  // of the two means taken separately
};

template <class Strategy>
StepDrift dt_halving_drift(const Strategy& st, double delta, double x1, double x2, SimConfig cfg) {
  cfg.substeps = 2;
  detail::validate(cfg, delta);
  const auto c = detail::samples(detail::run_paths(st, x1, x2, delta, cfg), cfg.antithetic);
  cfg.substeps = 1;
  cfg.dt *= 0.5;
  const auto f = detail::samples(detail::run_paths(st, x1, x2, delta, cfg), cfg.antithetic);
  StepDrift s;
  double se_c, se_f;
  detail::mean_stderr(c, s.coarse, se_c);
  detail::mean_stderr(f, s.fine, se_f);
  s.combined_stderr = std::hypot(se_c, se_f);
  std::vector<double> d(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) d[i] = f[i] - c[i];
  detail::mean_stderr(d, s.drift, s.stderr_);
  return s;
}

inline void write_csv(std::ostream& os, const SimEstimate& e) {
  os << "mean,stderr,paths_ruined,truncation_bound,paths\n"
     << std::setprecision(12) << e.mean << ',' << e.stderr_ << ',' << e.paths_ruined << ','
     << e.truncation_bound << ',' << e.paths << '\n';
}

}  // namespace xlre
