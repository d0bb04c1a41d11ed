#pragma once

#include <cmath>
#include <ostream>
#include <iomanip>
#include <string>
#include <vector>

#include "xlre/errors.hpp"
#include "xlre/solver.hpp"

namespace xlre {

/// Controls at an aggregate reserve level, in normalized labels. In
/// unbounded mode the dividend fields are zero (dividends are lump sums
/// paid by the injection automaton).
struct ControlDecision {
  double pi1 = 0.0, pi2 = 0.0;
  double c1 = 0.0, c2 = 0.0;

  ControlDecision relabeled(bool swapped) const {
    return swapped ? ControlDecision{pi2, pi1, c2, c1} : *this;
  }
};

inline ControlDecision controls(const SolvedPolicy& s, double x) {
  if (!(x >= 0.0)) throw DomainError("controls: reserve must be non-negative");
  ControlDecision d;
  d.pi1 = s.retention(x);
  d.pi2 = s.model.paired_retention(d.pi1);
  if (s.bounded()) {
    if (x >= s.u1) d.c2 = s.model.cbar2;
    if (x >= s.u2) d.c1 = s.model.cbar1;
  }
  return d;
}

enum class Region { A1 = 1, A2, A3, A4, A5, A6, A7 };

inline std::string to_string(Region r) { return "A" + std::to_string(static_cast<int>(r)); }

enum class Trigger { None, Line1AtZero, Line2AtZero };

/// What happens when a line reaches zero while the aggregate sits in the
/// lowest region (A7 bounded, A3 unbounded).
enum class LowRegionRule {
  Ruin,        // no transfer, the path ends
  EqualSplit,  // the aggregate is split evenly between the lines
};

struct InjectionOutcome {
  double transfer = 0.0;  // positive: Line 2 -> Line 1
  double x1 = 0.0, x2 = 0.0;
  double lump_dividend = 0.0;  // paid by Line 2, unbounded mode
  Region region = Region::A1;
  bool ruined = false;
};

namespace detail {

inline InjectionOutcome low_region(double x1, double x2, Region r, LowRegionRule rule) {
  InjectionOutcome o{0.0, x1, x2, 0.0, r, false};
  const double x = x1 + x2;
  if (rule == LowRegionRule::Ruin || !(x > 0.0)) {
    o.ruined = true;
    return o;
  }
  o.x1 = 0.5 * x;
  o.x2 = x - o.x1;
  o.transfer = o.x1 - x1;
  return o;
}

}  // namespace detail

/// Levels that drive the injection automaton: the three restoring levels in
/// bounded mode, the dividend barrier in unbounded mode.
struct InjectionGeometry {
  bool bounded = true;
  InjectionLevels levels;
  double barrier = 0.0;

  static InjectionGeometry of(const SolvedPolicy& s) {
    return {s.bounded(), s.injection_levels(), s.u1};
  }

  Region region(double x1, double x2) const {
    const double x = x1 + x2;
    if (!bounded) {
      if (x1 > barrier) return Region::A1;
      if (x2 > 0.0 && x > barrier) return Region::A2;
      return Region::A3;
    }
    const auto& d = levels;
    if (x2 > d.d2) return Region::A1;
    if (x1 > 0.0 && x > d.d2) return Region::A2;
    if (x2 > d.d1 && x <= d.d2) return Region::A3;
    if (x1 > 0.0 && x > d.d1) return Region::A4;
    if (x2 > d.d0 && x <= d.d1) return Region::A5;
    if (x1 > 0.0 && x > d.d0) return Region::A6;
    return Region::A7;
  }

  /// One step of the capital-injection automaton.
  InjectionOutcome apply(double x1, double x2, Trigger t, LowRegionRule rule) const {
    if (!(x1 >= 0.0 && x2 >= 0.0))
      throw ContractViolation("injection: reserves must be non-negative");
    if (t == Trigger::Line1AtZero && x1 != 0.0)
      throw ContractViolation("injection: Line 1 is not at zero");
    if (t == Trigger::Line2AtZero && x2 != 0.0)
      throw ContractViolation("injection: Line 2 is not at zero");
    const Region r = region(x1, x2);
    InjectionOutcome o{0.0, x1, x2, 0.0, r, false};
    if (!bounded) {
      if (r == Region::A1) {
        o.transfer = -(x1 - barrier);
        o.x1 = barrier;
        o.x2 = x2 + (x1 - barrier);
        return o;
      }
      if (r == Region::A2) {
        o.lump_dividend = x1 + x2 - barrier;
        o.x2 = barrier - x1;
        return o;
      }
      if (t == Trigger::None) return o;
      return detail::low_region(x1, x2, r, rule);
    }
    if (t == Trigger::None) return o;
    const auto& d = levels;
    double floor = 0.0;
    if (t == Trigger::Line1AtZero) {
      switch (r) {
        case Region::A1: floor = d.d2; break;
        case Region::A3: floor = d.d1; break;
        case Region::A5: floor = d.d0; break;
        case Region::A7: return detail::low_region(x1, x2, r, rule);
        default: throw ContractViolation("injection: Line 1 at zero outside A1/A3/A5/A7");
      }
      const double amount = x2 - floor;
      if (!(amount > 0.0)) {
        o.ruined = true;
        return o;
      }
      o.transfer = amount;
      o.x1 = amount;
      o.x2 = floor;
      return o;
    }
    switch (r) {
      case Region::A2: floor = d.d2; break;
      case Region::A4: floor = d.d1; break;
      case Region::A6: floor = d.d0; break;
      case Region::A7: return detail::low_region(x1, x2, r, rule);
      default: throw ContractViolation("injection: Line 2 at zero outside A2/A4/A6/A7");
    }
    const double amount = x1 - floor;
    if (!(amount > 0.0)) {
      o.ruined = true;
      return o;
    }
    o.transfer = -amount;
    o.x1 = floor;
    o.x2 = amount;
    return o;
  }
};

inline Region classify_region(const SolvedPolicy& s, double x1, double x2) {
  if (!(x1 >= 0.0 && x2 >= 0.0)) throw DomainError("classify_region: reserves must be non-negative");
  return InjectionGeometry::of(s).region(x1, x2);
}

inline InjectionOutcome injection(const SolvedPolicy& s, double x1, double x2, Trigger t,
                                  LowRegionRule rule = LowRegionRule::Ruin) {
  return InjectionGeometry::of(s).apply(x1, x2, t, rule);
}

/// Strategy curve on a grid, as exported for plotting.
struct StrategyTable {
  std::vector<double> x;
  std::vector<ControlDecision> controls;

  void write_csv(std::ostream& os) const {
    os << "x,pi1,pi2,c1,c2\n" << std::setprecision(12);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto& c = controls[i];
      os << x[i] << ',' << c.pi1 << ',' << c.pi2 << ',' << c.c1 << ',' << c.c2 << '\n';
    }
  }
};

inline StrategyTable strategy_table(const SolvedPolicy& s, const std::vector<double>& grid,
                                    bool original_labels = true) {
  StrategyTable t;
  t.x = grid;
  for (double x : grid) {
    auto c = controls(s, x);
    t.controls.push_back(original_labels ? c.relabeled(s.swapped) : c);
  }
  return t;
}

}  // namespace xlre
