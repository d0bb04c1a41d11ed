#pragma once

#include <cmath>
#include <string>

#include "xlre/claims.hpp"
#include "xlre/errors.hpp"
#include "xlre/numerics.hpp"

namespace xlre {

enum class DividendMode { Bounded, Unbounded };

/// Two-line model in normalized labels: a <= 1/2 and M2 / M1 >= kappa2 / kappa1.
/// Under the optimal policy Line 2 retains r * y whenever Line 1 retains y.
struct AggregateModel {
  double kappa1 = 1.0;
  double kappa2 = 1.0;
  double cbar1 = 0.0;
  double cbar2 = 0.0;
  double delta = 1.0;
  double a = 0.5;
  DividendMode mode = DividendMode::Bounded;
  ClaimDistribution claims1 = ClaimDistribution::uniform(1.0);
  ClaimDistribution claims2 = ClaimDistribution::uniform(1.0);

  double ratio() const { return kappa2 / kappa1; }
  double M1() const { return claims1.support_bound(); }
  double M2() const { return claims2.support_bound(); }

  /// Line 2 retention paired with Line 1 retention y.
  double paired_retention(double y) const {
    const double p = std::isinf(y) ? kInfinity : ratio() * y;
    return std::min(p, M2());
  }
};

/// Aggregate drift and variance of the joint reserve for Line 1 retention y.
struct Nbar {
  double drift = 0.0;
  double variance = 0.0;
};

inline Nbar nbar(const AggregateModel& m, double y) {
  if (!(y >= 0.0) || y > m.M1()) throw DomainError("nbar: retention must lie in [0, M1]");
  const double y1 = y;
  const double y2 = m.paired_retention(y1);
  return {m.kappa1 * m.claims1.limited_mean(y1) + m.kappa2 * m.claims2.limited_mean(y2),
          m.claims1.limited_second_moment(y1) + m.claims2.limited_second_moment(y2)};
}

/// Roots of (variance / 2) g^2 + drift g - delta = 0.
struct QuadraticRoots {
  double plus = 0.0;
  double minus = 0.0;
};

inline QuadraticRoots characteristic_roots(double drift, double variance, double delta) {
  if (!(variance > 0.0)) throw SingularInputError("characteristic roots: zero variance");
  const double s = std::sqrt(drift * drift + 2.0 * delta * variance);
  // Pick the form of each root that avoids cancellation.
  if (drift >= 0.0) {
    const double minus = (-drift - s) / variance;
    return {2.0 * delta / (drift + s), minus};
  }
  const double plus = (s - drift) / variance;
  return {plus, -2.0 * delta / (s - drift)};
}

/// Families of roots: 2 uses the bare drift, 3 subtracts Line 2's dividend
/// cap and 4 subtracts both caps (only the negative root matters for 4).
enum class RootFamily { Two = 2, Three = 3, Four = 4 };

inline QuadraticRoots gamma_roots(const AggregateModel& m, RootFamily family, double y) {
  const Nbar n = nbar(m, y);
  double drift = n.drift;
  if (family == RootFamily::Three) drift -= m.cbar2;
  if (family == RootFamily::Four) drift -= m.cbar1 + m.cbar2;
  return characteristic_roots(drift, n.variance, m.delta);
}

/// Roots for the pieces beyond the free-boundary segment, all evaluated at
/// y = M1.
struct GammaSet {
  double g2p = 0.0, g2m = 0.0;
  double g3p = 0.0, g3m = 0.0;
  double g4m = 0.0;
};

inline GammaSet gamma_set(const AggregateModel& m, double y) {
  const auto r2 = gamma_roots(m, RootFamily::Two, y);
  const auto r3 = gamma_roots(m, RootFamily::Three, y);
  const auto r4 = gamma_roots(m, RootFamily::Four, y);
  return {r2.plus, r2.minus, r3.plus, r3.minus, r4.minus};
}

inline GammaSet gamma_set(const AggregateModel& m) { return gamma_set(m, m.M1()); }

struct PsiZeta {
  double psi = 0.0;
  double zeta = 0.0;
};

/// The pair (zeta, psi) that ties the Line-2 dividend band to the Line-1 band.
/// At the left end z = (1 - a) / g3m the band width diverges; the limit
/// psi = -a is returned there.
inline PsiZeta psi_zeta(const GammaSet& g, double a, double z) {
  const double width = g.g3p - g.g3m;
  const double left = 1.0 - a - g.g3m * z;
  const double num = g.g3m * (g.g4m - g.g3m) * z;
  const double den_r = g.g3p - g.g4m;
  if (left == 0.0 && num > 0.0) return {-a, kInfinity};
  if (!(num > 0.0) || !(left > 0.0) || !(den_r > 0.0))
    throw DomainError("psi: logarithm argument is not positive at z = " + std::to_string(z));
  const double log_num = std::log(num) - std::log(den_r);
  const double log_left = std::log(left);
  const double zeta = (log_num - log_left) / width;
  // Written in exponents that stay bounded as left -> 0.
  const double ep = g.g3p / width, em = g.g3m / width;
  const double first = std::exp(ep * log_num - em * log_left);
  const double second = g.g3m * z * std::exp(g.g3m * zeta);
  return {first + second - a, zeta};
}

inline double psi(const GammaSet& g, double a, double z) { return psi_zeta(g, a, z).psi; }

/// Drift bound below which Line 1 never reaches its maximal retention while
/// paying the full dividend rates.
inline double reinsurance_bound(const AggregateModel& m) {
  const Nbar n = nbar(m, m.M1());
  return n.drift - m.kappa1 * n.variance / (2.0 * m.M1()) + m.delta * m.M1() / m.kappa1;
}

enum class CaseHint { A, B };

struct AlphaLadder {
  double alpha0 = 0.0;
  double alpha_under = 0.0;
  double alpha_over = 0.0;
  double alpha_lb = 0.0;
  double alpha_ub = 0.0;
  double lower_limit = 0.0;  // (1 - a) / g3m, the left end of the psi domain
};

inline AlphaLadder alpha_ladder(const AggregateModel& m, const GammaSet& g, CaseHint hint) {
  const Nbar n = nbar(m, m.M1());
  const double M1 = m.M1();
  const double w = g.g3p - g.g3m;
  const double q = (1.0 - m.a) * g.g3p / w;
  AlphaLadder L;
  L.alpha0 = q * (n.drift / m.delta - m.kappa1 * n.variance / (2.0 * m.delta * M1) -
                  1.0 / g.g3p - m.cbar2 / m.delta);
  L.alpha_under = -q * (1.0 / g.g3p + m.cbar2 / m.delta);
  L.alpha_over = q * (1.0 / g.g2p - 1.0 / g.g3p - m.cbar2 / m.delta);
  L.alpha_ub = (1.0 - m.a) * (g.g3p - g.g4m) / (g.g3m * w);
  L.lower_limit = (1.0 - m.a) / g.g3m;
  const double bnd = reinsurance_bound(m);
  const double n_excess = n.drift - m.kappa1 * n.variance / (2.0 * M1);
  if (hint == CaseHint::A) {
    if (n_excess > 0.0)
      L.alpha_lb = m.cbar2 >= bnd ? L.lower_limit : L.alpha0;
    else
      L.alpha_lb = m.cbar2 >= m.delta * n.variance / (2.0 * n.drift) ? L.lower_limit
                                                                     : L.alpha_under;
  } else {
    L.alpha_lb =
        m.cbar2 > m.delta * n.variance / (2.0 * n.drift) ? L.alpha0 : L.alpha_under;
  }
  return L;
}

struct K3Coefficients {
  double minus = 0.0;
  double plus = 0.0;
};

/// Root of psi on [lo, hi] (the bracket must show a sign change), and the
/// matching positive coefficient.
inline K3Coefficients solve_k3minus(const GammaSet& g, double a, double lo, double hi) {
  auto f = [&](double z) { return psi(g, a, z); };
  const double flo = f(lo), fhi = f(hi);
  if (std::isnan(flo) || std::isnan(fhi) || flo * fhi > 0.0)
    throw CaseClassificationError("solve_k3minus: psi shows no sign change on [" +
                                  std::to_string(lo) + ", " + std::to_string(hi) + "]");
  const double k = numerics::bisect(f, lo, hi, {1e-16, 0.0, 400});
  const K3Coefficients out{k, (1.0 - a - k * g.g3m) / g.g3p};
  if (!(out.minus < 0.0) || out.plus < 0.0)
    throw CaseInconsistencyError("solve_k3minus: coefficient signs are inconsistent");
  return out;
}

}  // namespace xlre
