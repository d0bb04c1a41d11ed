#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "xlre/claims.hpp"
#include "xlre/coeffs.hpp"
#include "xlre/errors.hpp"
#include "xlre/freeboundary.hpp"

namespace xlre {

/// One business line as the user states it.
struct LineSpec {
  double kappa = 1.0;
  double cbar = 0.0;  // dividend-rate cap, bounded mode only
  ClaimDistribution claims = ClaimDistribution::uniform(1.0);
};

/// A problem in the user's labels.
struct ProblemSpec {
  LineSpec line1;
  LineSpec line2;
  double delta = 0.5;
  double a = 0.5;
  DividendMode mode = DividendMode::Bounded;
};

struct NormalizedProblem {
  AggregateModel model;
  bool swapped = false;
};

namespace detail {

inline bool retention_order_ok(const LineSpec& l1, const LineSpec& l2) {
  const double M1 = l1.claims.support_bound(), M2 = l2.claims.support_bound();
  if (std::isinf(M2)) return true;
  if (std::isinf(M1)) return false;
  return M2 * l1.kappa >= l2.kappa * M1;
}

inline AggregateModel make_model(const ProblemSpec& p, bool swap) {
  const LineSpec& l1 = swap ? p.line2 : p.line1;
  const LineSpec& l2 = swap ? p.line1 : p.line2;
  AggregateModel m;
  m.kappa1 = l1.kappa;
  m.kappa2 = l2.kappa;
  m.cbar1 = l1.cbar;
  m.cbar2 = l2.cbar;
  m.claims1 = l1.claims;
  m.claims2 = l2.claims;
  m.delta = p.delta;
  m.a = swap ? 1.0 - p.a : p.a;
  m.mode = p.mode;
  return m;
}

}  // namespace detail

/// Relabels the lines so that a <= 1/2 and M2 / M1 >= kappa2 / kappa1.
inline NormalizedProblem normalize(const ProblemSpec& p) {
  for (const LineSpec* l : {&p.line1, &p.line2}) {
    if (!(l->kappa > 0.0) || !std::isfinite(l->kappa))
      throw DomainError("safety loading kappa must be positive");
    if (p.mode == DividendMode::Bounded && !(l->cbar > 0.0 && std::isfinite(l->cbar)))
      throw DomainError("dividend-rate cap must be positive and finite in bounded mode");
  }
  if (!(p.delta > 0.0) || !std::isfinite(p.delta))
    throw DomainError("discount rate must be positive");
  if (!(p.a >= 0.0 && p.a <= 1.0)) throw DomainError("weight a must lie in [0, 1]");
  const bool orig_ok = detail::retention_order_ok(p.line1, p.line2);
  const bool swap_ok = detail::retention_order_ok(p.line2, p.line1);
  bool swap = false;
  if (p.a < 0.5) {
    if (!orig_ok)
      throw UnsupportedConfigurationError(
          "the line with weight a <= 1/2 must also satisfy M2 / M1 >= kappa2 / kappa1");
  } else if (p.a > 0.5) {
    if (!swap_ok)
      throw UnsupportedConfigurationError(
          "the line with weight a <= 1/2 must also satisfy M2 / M1 >= kappa2 / kappa1");
    swap = true;
  } else if (!orig_ok) {
    if (!swap_ok) throw UnsupportedConfigurationError("no labeling satisfies M2 / M1 >= kappa2 / kappa1");
    swap = true;
  }
  return {detail::make_model(p, swap), swap};
}

enum class CaseTag { BoundedA, BoundedB, BoundedC, UnboundedFinite, UnboundedInfinite };

inline std::string to_string(CaseTag c) {
  switch (c) {
    case CaseTag::BoundedA: return "BoundedA";
    case CaseTag::BoundedB: return "BoundedB";
    case CaseTag::BoundedC: return "BoundedC";
    case CaseTag::UnboundedFinite: return "UnboundedFinite";
    case CaseTag::UnboundedInfinite: return "UnboundedInfinite";
  }
  return "?";
}

inline CaseTag case_from_string(const std::string& s) {
  for (CaseTag c : {CaseTag::BoundedA, CaseTag::BoundedB, CaseTag::BoundedC,
                    CaseTag::UnboundedFinite, CaseTag::UnboundedInfinite})
    if (to_string(c) == s) return c;
  throw ConfigError("unknown case tag '" + s + "'");
}

inline bool is_bounded(CaseTag c) {
  return c == CaseTag::BoundedA || c == CaseTag::BoundedB || c == CaseTag::BoundedC;
}

/// psi at the Case-A lower bound, taking the limit -a at its left end.
inline double psi_at_lower_bound(const AggregateModel& m, const GammaSet& g,
                                 const AlphaLadder& L) {
  if (L.alpha_lb <= L.lower_limit) return -m.a;
  return psi(g, m.a, L.alpha_lb);
}

inline CaseTag classify(const AggregateModel& m) {
  if (m.mode == DividendMode::Unbounded)
    return std::isinf(m.M1()) ? CaseTag::UnboundedInfinite : CaseTag::UnboundedFinite;
  if (std::isinf(m.M1())) return CaseTag::BoundedC;
  if (m.cbar1 + m.cbar2 < reinsurance_bound(m)) return CaseTag::BoundedC;
  const GammaSet g = gamma_set(m);
  const AlphaLadder L = alpha_ladder(m, g, CaseHint::A);
  return psi_at_lower_bound(m, g, L) <= 0.0 ? CaseTag::BoundedA : CaseTag::BoundedB;
}

struct ValueDerivs {
  double g = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
};

/// One closed-form piece of the value function on [lo, hi).
struct Piece {
  enum class Kind { GCurve, HBand, Exponential, Linear };
  Kind kind = Kind::Exponential;
  double lo = 0.0;
  double hi = kInfinity;
  // GCurve: g = scale exp(aref) S, g' = scale exp(aref - A).
  // HBand: g = base + scale E, g' = scale exp(-I).
  // Exponential: bp exp(gp (x - xref)) + bm exp(gm (x - xref)) + c.
  // Linear: scale (x - xref) + c.
  double scale = 0.0, aref = 0.0, base = 0.0;
  double bp = 0.0, gp = 0.0, bm = 0.0, gm = 0.0, xref = 0.0, c = 0.0;
};

inline std::string to_string(Piece::Kind k) {
  switch (k) {
    case Piece::Kind::GCurve: return "gcurve";
    case Piece::Kind::HBand: return "hband";
    case Piece::Kind::Exponential: return "exponential";
    case Piece::Kind::Linear: return "linear";
  }
  return "?";
}

struct InjectionLevels {
  double d0 = 0.0, d1 = 0.0, d2 = 0.0;
};

struct SolveOptions {
  CaseBMatching case_b = CaseBMatching::Slope;
};

/// Solution of the HJB system: case, thresholds, constants and the value
/// function with its first two derivatives.
class SolvedPolicy {
 public:
  CaseTag case_tag = CaseTag::BoundedA;
  ProblemSpec problem;
  AggregateModel model;
  bool swapped = false;
  SolveOptions options;

  double w0 = kInfinity;
  double u1 = kInfinity;
  double u2 = kInfinity;
  double m0 = kInfinity;
  int m0_sign_changes = 0;

  GammaSet gammas;
  double K1 = 0.0;
  double K3p = 0.0, K3m = 0.0;  // coefficients of the Line-2 band, referenced at u1
  double alpha2p = 0.0, alpha2m = 0.0, alpha3 = 0.0;
  double tail_rate = 0.0;
  // Case B only: K3- from psi and the band width it implies.
  double closed_form_k3m = kNaN;
  double closed_form_band_width = kNaN;

  std::vector<Piece> pieces;
  std::shared_ptr<const GCurve> curve;
  std::shared_ptr<const HTrajectory> band;

  static constexpr double kNaN = numerics::kNaN;

  bool bounded() const { return is_bounded(case_tag); }

  std::size_t piece_index(double x) const {
    if (!(x >= 0.0)) throw DomainError("value: reserve must be non-negative");
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i)
      if (x < pieces[i].hi) return i;
    return pieces.size() - 1;
  }

  ValueDerivs value(double x) const { return evaluate(piece_index(x), x); }

  /// Evaluates piece i at x, also outside its nominal range where the
  /// closed form allows (used for one-sided limits at thresholds).
  ValueDerivs evaluate(std::size_t i, double x) const {
    const Piece& p = pieces.at(i);
    switch (p.kind) {
      case Piece::Kind::GCurve: {
        if (x == 0.0) return {0.0, kInfinity, -kInfinity};
        const auto q = curve->at_reserve(x);
        const double g1 = p.scale * std::exp(p.aref - q.A);
        return {p.scale * std::exp(p.aref) * q.S, g1, std::isinf(q.p) ? 0.0 : -model.kappa1 * g1 / q.p};
      }
      case Piece::Kind::HBand: {
        const auto q = band->at(x);
        const double g1 = p.scale * std::exp(-q.I);
        return {p.base + p.scale * q.E, g1, -model.kappa1 * g1 / q.H};
      }
      case Piece::Kind::Exponential: {
        const double ep = p.bp == 0.0 ? 0.0 : p.bp * std::exp(p.gp * (x - p.xref));
        const double em = p.bm == 0.0 ? 0.0 : p.bm * std::exp(p.gm * (x - p.xref));
        return {ep + em + p.c, p.gp * ep + p.gm * em, p.gp * p.gp * ep + p.gm * p.gm * em};
      }
      case Piece::Kind::Linear:
        return {p.scale * (x - p.xref) + p.c, p.scale, 0.0};
    }
    return {};
  }

  /// Line-1 retention of the optimal policy at aggregate reserve x.
  double retention(double x) const {
    const Piece& p = pieces.at(piece_index(x));
    if (p.kind == Piece::Kind::GCurve) return x == 0.0 ? 0.0 : curve->at_reserve(x).p;
    if (p.kind == Piece::Kind::HBand) return band->at(x).H;
    if (case_tag == CaseTag::BoundedC) return m0;
    return model.M1();
  }

  /// Interior thresholds in increasing order, with names.
  std::vector<std::pair<std::string, double>> thresholds() const {
    std::vector<std::pair<std::string, double>> t;
    auto add = [&](const char* n, double v) {
      if (std::isfinite(v)) t.emplace_back(n, v);
    };
    switch (case_tag) {
      case CaseTag::BoundedA: add("w0", w0); add("u1", u1); add("u2", u2); break;
      case CaseTag::BoundedB: add("u1", u1); add("w0", w0); add("u2", u2); break;
      case CaseTag::BoundedC: add("u1", u1); add("u2", u2); break;
      case CaseTag::UnboundedFinite: add("w0", w0); add("u1", u1); break;
      case CaseTag::UnboundedInfinite: add("u1", u1); break;
    }
    return t;
  }

  /// Reserve levels that Line 2 restores after a capital injection.
  InjectionLevels injection_levels() const {
    switch (case_tag) {
      case CaseTag::BoundedA: return {w0, u1, u2};
      case CaseTag::BoundedB: return {u1, w0, u2};
      case CaseTag::BoundedC: return {u1, u1, u2};
      default: return {u1, u1, u1};
    }
  }
};

namespace detail {

inline Piece gcurve_piece(double lo, double hi, double scale, double aref) {
  Piece p;
  p.kind = Piece::Kind::GCurve;
  p.lo = lo;
  p.hi = hi;
  p.scale = scale;
  p.aref = aref;
  return p;
}

inline Piece exp_piece(double lo, double hi, double bp, double gp, double bm, double gm,
                       double xref, double c) {
  Piece p;
  p.lo = lo;
  p.hi = hi;
  p.bp = bp;
  p.gp = gp;
  p.bm = bm;
  p.gm = gm;
  p.xref = xref;
  p.c = c;
  return p;
}

inline Piece hband_piece(double lo, double hi, double base, double scale) {
  Piece p;
  p.kind = Piece::Kind::HBand;
  p.lo = lo;
  p.hi = hi;
  p.base = base;
  p.scale = scale;
  return p;
}

inline Piece linear_piece(double lo, double slope, double xref, double c) {
  Piece p;
  p.kind = Piece::Kind::Linear;
  p.lo = lo;
  p.scale = slope;
  p.xref = xref;
  p.c = c;
  return p;
}

inline void push_piece(std::vector<Piece>& v, Piece p) {
  if (p.hi > p.lo) v.push_back(p);
}

inline void solve_case_a(SolvedPolicy& s) {
  const AggregateModel& m = s.model;
  const GammaSet& g = s.gammas;
  const double M1 = m.M1(), k = m.kappa1 / M1, a = m.a;
  s.w0 = s.curve->top();
  const AlphaLadder L = alpha_ladder(m, g, CaseHint::A);
  if (a == 0.0) {
    s.K3m = 1.0 / g.g3m;
    s.K3p = 0.0;
  } else {
    const auto k3 = solve_k3minus(g, a, L.alpha_lb, L.alpha_ub);
    s.K3m = k3.minus;
    s.K3p = k3.plus;
  }
  const double d2 = g.g2p - g.g2m, d3 = g.g3p - g.g3m;
  s.alpha2p = (-g.g2m - k) / (g.g2p * d2);
  s.alpha2m = (g.g2p + k) / (g.g2m * d2);
  s.alpha3 = 1.0 / g.g3p + m.cbar2 / m.delta + (1.0 - g.g3m / g.g3p) * s.K3m / (1.0 - a);
  s.u1 = s.w0 + std::log(s.alpha2m * (g.g2m * s.alpha3 - 1.0) /
                         (s.alpha2p * (1.0 - g.g2p * s.alpha3))) / d2;
  s.u2 = a == 0.0 ? kInfinity
                  : s.u1 + std::log(s.K3m * g.g3m * (g.g4m - g.g3m) /
                                    (s.K3p * g.g3p * (g.g3p - g.g4m))) / d3;
  if (!(s.w0 <= s.u1 && s.u1 <= s.u2))
    throw CaseInconsistencyError("case A: thresholds are out of order");
  s.K1 = (1.0 - a) / (s.alpha2p * g.g2p * std::exp(g.g2p * (s.u1 - s.w0)) +
                      s.alpha2m * g.g2m * std::exp(g.g2m * (s.u1 - s.w0)));
  s.tail_rate = g.g4m;
  const auto top = s.curve->at_retention(M1);
  push_piece(s.pieces, gcurve_piece(0.0, s.w0, s.K1, top.A));
  push_piece(s.pieces, exp_piece(s.w0, s.u1, s.K1 * s.alpha2p, g.g2p, s.K1 * s.alpha2m,
                                 g.g2m, s.w0, 0.0));
  push_piece(s.pieces, exp_piece(s.u1, s.u2, s.K3p, g.g3p, s.K3m, g.g3m, s.u1,
                                 (1.0 - a) * m.cbar2 / m.delta));
  if (a > 0.0)
    push_piece(s.pieces, exp_piece(s.u2, kInfinity, 0.0, 0.0, a / g.g4m, g.g4m, s.u2,
                                   (a * m.cbar1 + (1.0 - a) * m.cbar2) / m.delta));
}

inline void push_lower_pieces(SolvedPolicy& s, const ShootingResult& shot) {
  const double a = s.model.a;
  const auto ref = s.curve->at_reserve(s.u1);
  push_piece(s.pieces, gcurve_piece(0.0, s.u1, 1.0 - a, ref.A));
  const double base = (1.0 - a) * std::exp(ref.A) * ref.S;
  push_piece(s.pieces, hband_piece(s.u1, shot.x_end, base, 1.0 - a));
}

inline void solve_case_b(SolvedPolicy& s, const SolveOptions& opts) {
  const AggregateModel& m = s.model;
  const GammaSet& g = s.gammas;
  const double a = m.a;
  if (a == 0.0) throw UnsupportedConfigurationError("case B requires a > 0");
  const AlphaLadder L = alpha_ladder(m, g, CaseHint::B);
  // The closed-form K3 coefficients are reported for comparison and drive
  // the band-width matching.
  try {
    const auto k3 = solve_k3minus(g, a, L.lower_limit * (1.0 - 1e-15), L.alpha_lb);
    s.closed_form_k3m = k3.minus;
    s.closed_form_band_width = case_b_band_width(g, m, k3.minus, k3.plus);
  } catch (const Error&) {
    if (opts.case_b == CaseBMatching::BandWidth) throw;
  }
  const ShootingResult shot = shoot_case_b(m, *s.curve, g, opts.case_b, s.closed_form_band_width);
  s.band = shot.trajectory;
  s.u1 = shot.u1;
  s.w0 = shot.x_end;
  s.u2 = s.w0 + case_b_upper_gap(g, m);
  if (!(s.u1 < s.w0 && s.w0 <= s.u2))
    throw CaseInconsistencyError("case B: thresholds are out of order");
  const double w = g.g3p - g.g3m;
  const double bp = a * (g.g4m - g.g3m) / (w * g.g3p);
  const double bm = a * (g.g3p - g.g4m) / (w * g.g3m);
  s.K3p = bp * std::exp(g.g3p * (s.u1 - s.u2));
  s.K3m = bm * std::exp(g.g3m * (s.u1 - s.u2));
  s.K1 = 1.0 - a;
  s.tail_rate = g.g4m;
  push_lower_pieces(s, shot);
  push_piece(s.pieces, exp_piece(s.w0, s.u2, bp, g.g3p, bm, g.g3m, s.u2,
                                 (1.0 - a) * m.cbar2 / m.delta));
  push_piece(s.pieces, exp_piece(s.u2, kInfinity, 0.0, 0.0, a / g.g4m, g.g4m, s.u2,
                                 (a * m.cbar1 + (1.0 - a) * m.cbar2) / m.delta));
}

inline void solve_case_c(SolvedPolicy& s) {
  const AggregateModel& m = s.model;
  const double a = m.a;
  if (a == 0.0) throw UnsupportedConfigurationError("case C requires a > 0");
  const M0Result r = solve_m0(m);
  s.m0 = r.m0;
  s.m0_sign_changes = r.sign_changes;
  const ShootingResult shot = shoot_case_c(m, *s.curve, s.m0);
  s.band = shot.trajectory;
  s.u1 = shot.u1;
  s.u2 = shot.x_end;
  s.K1 = 1.0 - a;
  s.tail_rate = gamma_roots(m, RootFamily::Four, s.m0).minus;
  push_lower_pieces(s, shot);
  push_piece(s.pieces, exp_piece(s.u2, kInfinity, 0.0, 0.0, a / s.tail_rate, s.tail_rate, s.u2,
                                 (a * m.cbar1 + (1.0 - a) * m.cbar2) / m.delta));
}

inline void solve_unbounded_finite(SolvedPolicy& s) {
  const AggregateModel& m = s.model;
  const GammaSet& g = s.gammas;
  const double M1 = m.M1(), a = m.a, k1 = m.kappa1;
  const double d2 = g.g2p - g.g2m;
  s.w0 = s.curve->top();
  const double arg = g.g2m * (k1 + g.g2p * M1) / (g.g2p * (k1 + g.g2m * M1));
  if (!(arg >= 1.0))
    throw CaseInconsistencyError("unbounded case: barrier would lie below w0");
  s.u1 = s.w0 + std::log(arg) / d2;
  s.K1 = (1.0 - a) / d2 * (g.g2p * std::exp(g.g2m * (s.w0 - s.u1)) -
                           g.g2m * std::exp(g.g2p * (s.w0 - s.u1)));
  const double n1 = nbar(m, M1).drift;
  const auto top = s.curve->at_retention(M1);
  push_piece(s.pieces, gcurve_piece(0.0, s.w0, s.K1, top.A));
  push_piece(s.pieces, exp_piece(s.w0, s.u1, -(1.0 - a) * g.g2m / (g.g2p * d2), g.g2p,
                                 (1.0 - a) * g.g2p / (g.g2m * d2), g.g2m, s.u1, 0.0));
  push_piece(s.pieces, linear_piece(s.u1, 1.0 - a, s.u1, (1.0 - a) * n1 / m.delta));
}

inline void solve_unbounded_infinite(SolvedPolicy& s) {
  const AggregateModel& m = s.model;
  s.u1 = s.curve->top();
  s.K1 = 1.0 - m.a;
  const double n1 = nbar(m, kInfinity).drift;
  const auto top = s.curve->at_retention(kInfinity);
  push_piece(s.pieces, gcurve_piece(0.0, s.u1, 1.0 - m.a, top.A));
  push_piece(s.pieces, linear_piece(s.u1, 1.0 - m.a, s.u1, (1.0 - m.a) * n1 / m.delta));
}

}  // namespace detail

/// Solves a normalized model. The case is chosen by classify().
inline SolvedPolicy solve(const AggregateModel& m, const SolveOptions& opts = {}) {
  SolvedPolicy s;
  s.model = m;
  s.options = opts;
  s.problem.line1 = {m.kappa1, m.cbar1, m.claims1};
  s.problem.line2 = {m.kappa2, m.cbar2, m.claims2};
  s.problem.delta = m.delta;
  s.problem.a = m.a;
  s.problem.mode = m.mode;
  s.case_tag = classify(m);
  s.curve = std::make_shared<const GCurve>(m);
  if (std::isfinite(m.M1())) s.gammas = gamma_set(m);
  switch (s.case_tag) {
    case CaseTag::BoundedA: detail::solve_case_a(s); break;
    case CaseTag::BoundedB: detail::solve_case_b(s, opts); break;
    case CaseTag::BoundedC: detail::solve_case_c(s); break;
    case CaseTag::UnboundedFinite: detail::solve_unbounded_finite(s); break;
    case CaseTag::UnboundedInfinite: detail::solve_unbounded_infinite(s); break;
  }
  return s;
}

inline SolvedPolicy solve(const ProblemSpec& p, const SolveOptions& opts = {}) {
  const NormalizedProblem n = normalize(p);
  SolvedPolicy s = solve(n.model, opts);
  s.problem = p;
  s.swapped = n.swapped;
  return s;
}

}  // namespace xlre
