#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "xlre/coeffs.hpp"
#include "xlre/errors.hpp"
#include "xlre/numerics.hpp"

namespace xlre {

/// Limit of G'(p) as p -> 0 (the claim survival equals one near zero).
inline double g_slope_at_zero(const AggregateModel& m) {
  const double k1 = m.kappa1, k2 = m.kappa2;
  return (k1 * k1 + k2 * k2) / (k1 * (k1 * k1 + k2 * k2 + 2.0 * m.delta));
}

/// Denominator of G'(p); it must stay positive along the curve.
inline double g_denominator(const AggregateModel& m, double p, const Nbar& n) {
  return 2.0 * p * n.drift + 2.0 * m.delta * p * p / m.kappa1 - m.kappa1 * n.variance;
}

/// Derivative of the reserve level at which Line 1 retains p, in the region
/// where neither line pays dividends.
inline double g_slope(const AggregateModel& m, double p) {
  if (!(p >= 0.0)) throw DomainError("G': retention must be non-negative");
  if (p == 0.0) return g_slope_at_zero(m);
  if (std::isinf(p)) return 0.0;
  const Nbar n = nbar(m, std::min(p, m.M1()));
  const double d = g_denominator(m, p, n);
  if (!(d > 0.0))
    throw ModelInconsistencyError("G': denominator is not positive at p = " + std::to_string(p));
  return n.variance / d;
}

/// G'(1 / v) / v^2, finite down to v = 0 when M1 is infinite.
inline double g_slope_inverted(const AggregateModel& m, double v) {
  if (v == 0.0) {
    const Nbar n = nbar(m, kInfinity);
    return m.kappa1 * n.variance / (2.0 * m.delta);
  }
  const double p = 1.0 / v;
  const Nbar n = nbar(m, std::min(p, m.M1()));
  const double d = 2.0 * v * n.drift + 2.0 * m.delta / m.kappa1 - m.kappa1 * n.variance * v * v;
  if (!(d > 0.0))
    throw ModelInconsistencyError("G': denominator is not positive at p = " + std::to_string(p));
  return n.variance / d;
}

/// Right-hand side of the retention ODE in the band where Line 2 already
/// pays at its cap.
inline double h_slope(const AggregateModel& m, double h) {
  const Nbar n = nbar(m, std::min(h, m.M1()));
  return (g_denominator(m, h, n) - 2.0 * m.cbar2 * h) / n.variance;
}

/// G(y) by direct adaptive quadrature of G' on [0, y]; y may be infinite
/// when M1 is.
inline double g_integral(const AggregateModel& m, double y) {
  if (!(y >= 0.0)) throw DomainError("G: retention must be non-negative");
  if (y > m.M1()) throw DomainError("G: retention exceeds the claim support of Line 1");
  numerics::QuadratureOptions q;
  q.abs_tol = 1e-14;
  q.rel_tol = 1e-13;
  return numerics::integrate([&](double z) { return g_slope(m, z); }, 0.0, y, q).value;
}

/// Inverse of g_integral by monotone bisection, |G(y) - x| <= 1e-10.
inline double g_inverse(const AggregateModel& m, double x) {
  if (!(x >= 0.0)) throw DomainError("G^-1: reserve must be non-negative");
  if (x == 0.0) return 0.0;
  const double top = g_integral(m, m.M1());
  if (x > top) throw DomainError("G^-1: reserve lies beyond the range of G");
  if (x == top) return m.M1();
  double hi = m.M1();
  if (std::isinf(hi)) {
    hi = 1.0;
    while (g_integral(m, hi) < x) hi *= 2.0;
  }
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g_integral(m, mid);
    if (std::abs(gm - x) <= 1e-12) return mid;
    (gm < x ? lo : hi) = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi);
}

/// Tabulated retention map, exported as two-column CSV.
struct RetentionMap {
  enum class Direction { G, H };
  Direction direction = Direction::G;
  std::vector<double> x;
  std::vector<double> y;

  void write_csv(std::ostream& os) const {
    os << "x,y\n" << std::setprecision(12);
    for (std::size_t i = 0; i < x.size(); ++i) os << x[i] << ',' << y[i] << '\n';
  }
};

/// The curve x = G(p) together with the two quantities that the value
/// function needs along it:
///   A(p) = integral of kappa1 G'(q) / q dq (up to a constant), and
///   S(p) = integral over [0, p] of exp(-A(q)) G'(q) dq.
/// The first piece of the value function is then g'(x) = K exp(A_ref - A(p))
/// and g(x) = K exp(A_ref) S(p) with p = G^-1(x).
class GCurve {
 public:
  struct Point {
    double p = 0.0;  // retention of Line 1
    double x = 0.0;  // reserve
    double A = 0.0;
    double S = 0.0;
  };

  explicit GCurve(AggregateModel model) : m_(std::move(model)) { build(); }

  const AggregateModel& model() const { return m_; }
  double slope_at_zero() const { return g0_; }
  double exponent() const { return m_.kappa1 * g0_; }

  /// Supremum of G over the retention range, i.e. G(M1) or G(infinity).
  double top() const { return nodes_.back().x; }

  Point at_retention(double p) const {
    if (!(p >= 0.0)) throw DomainError("G: retention must be non-negative");
    if (p > m_.M1()) throw DomainError("G: retention exceeds the claim support of Line 1");
    if (p == 0.0) return {0.0, 0.0, -kInfinity, 0.0};
    if (p <= p0_) return series(p);
    if (p <= split_) {
      const double l = std::log(p);
      auto it = std::upper_bound(nodes_.begin(), nodes_.begin() + n_phase1_, l,
                                 [](double v, const Node& n) { return v < n.param; });
      const auto& n = nodes_[std::max<std::ptrdiff_t>(0, it - nodes_.begin() - 1)];
      auto out = numerics::integrate_ode<3>(
          [&](double t, const numerics::State<3>& s) { return rhs_log(t, s); }, n.param,
          {n.x, n.A, n.S}, l, query_opts());
      return {p, out.y[0], out.y[1], out.y[2]};
    }
    const double v = std::isinf(p) ? 0.0 : 1.0 / p;
    std::size_t k = n_phase1_ - 1;
    while (k + 1 < nodes_.size() && nodes_[k + 1].param >= v) ++k;
    const auto& n = nodes_[k];
    auto out = numerics::integrate_ode<3>(
        [&](double t, const numerics::State<3>& s) { return rhs_inv(t, s); }, inv_param(k),
        {n.x, n.A, n.S}, v, query_opts());
    return {p, out.y[0], out.y[1], out.y[2]};
  }

  Point at_reserve(double x) const {
    if (!(x >= 0.0)) throw DomainError("G^-1: reserve must be non-negative");
    if (x > top()) throw DomainError("G^-1: reserve lies beyond the range of G");
    if (x == 0.0) return {0.0, 0.0, -kInfinity, 0.0};
    if (x < nodes_.front().x) return series(invert_series(x));
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x,
                               [](double v, const Node& n) { return v < n.x; });
    const std::size_t k = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    const auto& n = nodes_[k];
    if (x == n.x) return {n.p, n.x, n.A, n.S};
    if (k < n_phase1_ - 1 || (k == n_phase1_ - 1 && !phase2_)) {
      auto out = numerics::integrate_ode<3>(
          [&](double t, const numerics::State<3>& s) { return rhs_x_log(t, s); }, n.x,
          {n.param, n.A, n.S}, x, query_opts());
      return {std::exp(out.y[0]), x, out.y[1], out.y[2]};
    }
    auto out = numerics::integrate_ode<3>(
        [&](double t, const numerics::State<3>& s) { return rhs_x_inv(t, s); }, n.x,
        {inv_param(k), n.A, n.S}, x, query_opts());
    const double v = std::max(out.y[0], 0.0);
    return {v == 0.0 ? kInfinity : 1.0 / v, x, out.y[1], out.y[2]};
  }

  double G(double p) const { return at_retention(p).x; }
  double inverse(double x) const { return at_reserve(x).p; }

  /// Nodes of the build, as a retention map (reserve, retention).
  RetentionMap retention_map() const {
    RetentionMap r;
    r.x.push_back(0.0);
    r.y.push_back(0.0);
    for (const auto& n : nodes_) {
      r.x.push_back(n.x);
      r.y.push_back(n.p);
    }
    return r;
  }

 private:
  struct Node {
    double param;  // ln p in phase 1, 1 / p in phase 2
    double p, x, A, S;
  };

  static numerics::OdeOptions build_opts() {
    numerics::OdeOptions o;
    o.rtol = 1e-13;
    o.atol = 1e-16;
    return o;
  }
  static numerics::OdeOptions query_opts() {
    numerics::OdeOptions o;
    o.rtol = 1e-13;
    o.atol = 1e-16;
    return o;
  }

  numerics::State<3> rhs_log(double l, const numerics::State<3>& s) const {
    const double p = std::exp(l);
    const double gp = g_slope(m_, p);
    return {gp * p, m_.kappa1 * gp, p * std::exp(-s[1]) * gp};
  }
  numerics::State<3> rhs_inv(double v, const numerics::State<3>& s) const {
    const double gs = g_slope_inverted(m_, v);
    return {-gs, -m_.kappa1 * gs * v, -std::exp(-s[1]) * gs};
  }
  // Same systems with the reserve as the independent variable.
  numerics::State<3> rhs_x_log(double, const numerics::State<3>& s) const {
    const double p = std::exp(s[0]);
    return {1.0 / (g_slope(m_, p) * p), m_.kappa1 / p, std::exp(-s[1])};
  }
  numerics::State<3> rhs_x_inv(double, const numerics::State<3>& s) const {
    const double v = std::max(s[0], 0.0);
    return {-1.0 / g_slope_inverted(m_, v), m_.kappa1 * v, std::exp(-s[1])};
  }

  double inv_param(std::size_t k) const {
    return k < n_phase1_ ? 1.0 / nodes_[k].p : nodes_[k].param;
  }

  Point series(double p) const {
    const double b = exponent();
    return {p, g0_ * p, b * std::log(p), g0_ * std::pow(p, 1.0 - b) / (1.0 - b)};
  }
  double invert_series(double x) const { return x / g0_; }

  void build() {
    g0_ = g_slope_at_zero(m_);
    if (!(exponent() < 1.0))
      throw ModelInconsistencyError("G-curve: value function would not be integrable at 0");
    const double M1 = m_.M1();
    const double scale = std::isinf(M1) ? m_.claims1.mean() : M1;
    p0_ = 1e-12 * scale;
    phase2_ = std::isinf(M1);
    split_ = phase2_ ? 4.0 * scale : M1;
    const Point s0 = series(p0_);
    auto keep_log = [&](double l, const numerics::State<3>& s) {
      nodes_.push_back({l, std::exp(l), s[0], s[1], s[2]});
    };
    auto out = numerics::integrate_ode<3>(
        [&](double t, const numerics::State<3>& s) { return rhs_log(t, s); }, std::log(p0_),
        {s0.x, s0.A, s0.S}, std::log(split_), build_opts(), numerics::NoEvent{}, keep_log);
    nodes_.back().p = split_;
    n_phase1_ = nodes_.size();
    if (!phase2_) return;
    bool first = true;
    auto keep_inv = [&](double v, const numerics::State<3>& s) {
      if (first) {
        first = false;  // duplicate of the last phase-1 node
        return;
      }
      nodes_.push_back({v, v == 0.0 ? kInfinity : 1.0 / v, s[0], s[1], s[2]});
    };
    numerics::integrate_ode<3>(
        [&](double t, const numerics::State<3>& s) { return rhs_inv(t, s); }, 1.0 / split_,
        out.y, 0.0, build_opts(), numerics::NoEvent{}, keep_inv);
    (void)out;
  }

  AggregateModel m_;
  double g0_ = 0.0;
  double p0_ = 0.0;
  double split_ = 0.0;
  bool phase2_ = false;
  std::size_t n_phase1_ = 0;
  std::vector<Node> nodes_;
};

/// Retention trajectory in the band where Line 2 pays at its cap while Line
/// 1 does not, started at (u1, G^-1(u1)). Along it
///   I(x) = integral over [u1, x] of kappa1 / H, and E(x) = integral of exp(-I).
class HTrajectory {
 public:
  struct Point {
    double x = 0.0, H = 0.0, I = 0.0, E = 0.0;
  };

  /// Integrates until H reaches target. Returns nothing when the
  /// trajectory turns down, stalls, or leaves (0, M1] first.
  static std::optional<HTrajectory> shoot(const AggregateModel& m, double u1, double h0,
                                          double target, double max_span) {
    HTrajectory traj(m);
    if (!(h0 > 0.0) || h0 > m.M1()) return std::nullopt;
    if (h0 >= target) {
      traj.nodes_.push_back({u1, h0, 0.0, 0.0});
      return traj;
    }
    if (!(h_slope(m, h0) > 0.0)) return std::nullopt;
    numerics::OdeOptions o;
    o.rtol = 1e-13;
    o.atol = 1e-16;
    o.max_steps = 200000;
    try {
      auto out = numerics::integrate_ode<3>(
          [&](double x, const numerics::State<3>& s) { return traj.rhs(x, s); }, u1,
          {h0, 0.0, 0.0}, u1 + max_span, o,
          [&](double, const numerics::State<3>& s) {
            return std::min(target - s[0], h_slope(m, std::max(s[0], 1e-300)));
          },
          [&](double x, const numerics::State<3>& s) {
            traj.nodes_.push_back({x, s[0], s[1], s[2]});
          });
      if (!out.event) return std::nullopt;
      if (std::abs(out.y[0] - target) > 1e-10 * std::max(1.0, target)) return std::nullopt;
      traj.nodes_.back().H = target;
    } catch (const Error&) {
      return std::nullopt;
    }
    return traj;
  }

  double x_begin() const { return nodes_.front().x; }
  double x_end() const { return nodes_.back().x; }
  const Point& end() const { return nodes_.back(); }

  Point at(double x) const {
    if (x < x_begin() || x > x_end()) throw DomainError("H: reserve outside the trajectory");
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x,
                               [](double v, const Point& n) { return v < n.x; });
    const auto& n = *(it - 1);
    if (x == n.x) return n;
    numerics::OdeOptions o;
    o.rtol = 1e-13;
    o.atol = 1e-16;
    auto out = numerics::integrate_ode<3>(
        [&](double t, const numerics::State<3>& s) { return rhs(t, s); }, n.x,
        {n.H, n.I, n.E}, x, o);
    return {x, out.y[0], out.y[1], out.y[2]};
  }

  RetentionMap retention_map() const {
    RetentionMap r;
    r.direction = RetentionMap::Direction::H;
    for (const auto& n : nodes_) {
      r.x.push_back(n.x);
      r.y.push_back(n.H);
    }
    return r;
  }

 private:
  explicit HTrajectory(const AggregateModel& m) : m_(m) {}
  numerics::State<3> rhs(double, const numerics::State<3>& s) const {
    const double h = s[0];
    if (!(h > 0.0)) throw DomainError("H left the positive half-line");
    return {h_slope(m_, h), m_.kappa1 / h, std::exp(-s[1])};
  }

  AggregateModel m_;
  std::vector<Point> nodes_;
};

/// Retention chosen by Line 1 once both lines pay at their caps: the
/// smallest root of gamma4-(y) + kappa1 / y on (0, M1).
struct M0Result {
  double m0 = 0.0;
  int sign_changes = 0;
};

inline M0Result solve_m0(const AggregateModel& m) {
  auto f = [&](double y) { return gamma_roots(m, RootFamily::Four, y).minus + m.kappa1 / y; };
  double top = m.M1();
  if (std::isinf(top)) {
    top = 4.0 * m.claims1.mean();
    for (int i = 0; i < 200 && f(top) >= 0.0; ++i) top *= 2.0;
  }
  constexpr int kScan = 1024;
  M0Result r;
  double first_lo = -1.0, first_hi = -1.0;
  double prev_y = top / kScan, prev_f = f(prev_y);
  for (int k = 2; k <= kScan; ++k) {
    const double y = top * k / kScan;
    const double fy = f(y);
    if ((prev_f > 0.0) != (fy > 0.0)) {
      if (r.sign_changes == 0) {
        first_lo = prev_y;
        first_hi = y;
      }
      ++r.sign_changes;
    }
    prev_y = y;
    prev_f = fy;
  }
  if (r.sign_changes == 0)
    throw CaseClassificationError("M0: gamma4-(y) + kappa1 / y has no root below M1");
  r.m0 = numerics::bisect(f, first_lo, first_hi);
  return r;
}

/// Outcome of a shooting search for the lower end u1 of the H band.
struct ShootingResult {
  double u1 = 0.0;
  double x_end = 0.0;  // reserve at which H reaches its target
  std::shared_ptr<const HTrajectory> trajectory;
};

namespace detail {

// Bisection on u1 in (0, G(target)] for residual(trajectory) = 0, where the
// residual is decreasing in u1 and failed trajectories count as +infinity.
template <class Residual>
ShootingResult shoot_band(const AggregateModel& m, const GCurve& curve, double target,
                          Residual&& residual) {
  const double hi0 = curve.G(target);
  const double span = 50.0 * (curve.top() + 1.0);
  auto start = [&](double u1) { return u1 == hi0 ? target : curve.inverse(u1); };
  auto eval = [&](double u1) -> double {
    auto t = HTrajectory::shoot(m, u1, start(u1), target, span);
    return t ? residual(*t) : kInfinity;
  };
  double hi = hi0;
  double fhi = eval(hi);
  if (fhi > 0.0)
    throw CaseInconsistencyError("shooting: residual is positive at the upper end");
  if (fhi < 0.0) {
    double lo = 0.5 * hi;
    double flo = eval(lo);
    int guard = 0;
    while (flo < 0.0) {
      hi = lo;
      lo *= 0.5;
      flo = eval(lo);
      if (++guard > 60) throw CaseInconsistencyError("shooting: no bracket for u1");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = eval(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      (fm > 0.0 ? lo : hi) = mid;
    }
  }
  auto t = HTrajectory::shoot(m, hi, start(hi), target, span);
  if (!t) throw CaseInconsistencyError("shooting: final trajectory failed");
  ShootingResult r;
  r.u1 = hi;
  r.x_end = t->x_end();
  r.trajectory = std::make_shared<const HTrajectory>(std::move(*t));
  return r;
}

}  // namespace detail

/// Both caps are paid above u2; the H band ends where the retention reaches
/// M0 and the exposure integral over the band equals ln((1 - a) / a).
inline ShootingResult shoot_case_c(const AggregateModel& m, const GCurve& curve, double m0) {
  if (!(m.a > 0.0)) throw UnsupportedConfigurationError("shoot_case_c: needs a > 0");
  const double target = std::log((1.0 - m.a) / m.a);
  return detail::shoot_band(m, curve, m0,
                            [&](const HTrajectory& t) { return t.end().I - target; });
}

/// Width w0 - u1 of the H band as implied by the closed-form K3 coefficients.
inline double case_b_band_width(const GammaSet& g, const AggregateModel& m, double k3m,
                                double k3p) {
  const double k = m.kappa1 / m.M1();
  return std::log(k3m * g.g3m * (g.g3m + k) / (k3p * g.g3p * (-k - g.g3p))) /
         (g.g3p - g.g3m);
}

/// Distance u2 - w0 for the band where only Line 2 pays.
inline double case_b_upper_gap(const GammaSet& g, const AggregateModel& m) {
  const double k = m.kappa1 / m.M1();
  return std::log((g.g4m - g.g3m) * (-k - g.g3p) / ((g.g3p - g.g4m) * (g.g3m + k))) /
         (g.g3p - g.g3m);
}

/// Slope g'(w0) implied by the piece on [w0, u2) anchored at the tail.
inline double case_b_slope_at_w0(const GammaSet& g, const AggregateModel& m) {
  const double gap = case_b_upper_gap(g, m);
  const double w = g.g3p - g.g3m;
  const double cp = (g.g4m - g.g3m) / w, cm = (g.g3p - g.g4m) / w;
  return m.a * (cp * std::exp(-g.g3p * gap) + cm * std::exp(-g.g3m * gap));
}

enum class CaseBMatching {
  Slope,      // match g'(w0) from both sides
  BandWidth,  // match w0 - u1 to the closed-form K3 coefficients
};

/// The H band ends where the retention reaches M1. Its lower end is fixed
/// either by continuity of g' at w0 or by the closed-form band width.
inline ShootingResult shoot_case_b(const AggregateModel& m, const GCurve& curve,
                                   const GammaSet& g, CaseBMatching matching,
                                   double band_width = 0.0) {
  if (!(m.a > 0.0)) throw UnsupportedConfigurationError("shoot_case_b: needs a > 0");
  if (matching == CaseBMatching::Slope) {
    const double target = std::log((1.0 - m.a) / case_b_slope_at_w0(g, m));
    return detail::shoot_band(m, curve, m.M1(),
                              [&](const HTrajectory& t) { return t.end().I - target; });
  }
  return detail::shoot_band(m, curve, m.M1(), [&](const HTrajectory& t) {
    return (t.x_end() - t.x_begin()) - band_width;
  });
}

}  // namespace xlre
