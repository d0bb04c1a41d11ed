#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "xlre/errors.hpp"
#include "xlre/numerics.hpp"

namespace xlre {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Claim-size law of one line, described by its survival function on
/// [0, M). Only the limited moments of the claim are ever used, so each
/// family provides them in closed form.
class ClaimDistribution {
 public:
  enum class Kind { Uniform, Exponential, Tabulated };

  static ClaimDistribution uniform(double upper) {
    if (!(upper > 0.0) || !std::isfinite(upper))
      throw DomainError("uniform claim bound must be positive and finite");
    return ClaimDistribution(Uniform{upper});
  }

  static ClaimDistribution exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate))
      throw DomainError("exponential rate must be positive and finite");
    return ClaimDistribution(Exponential{rate});
  }

  /// Piecewise-linear survival through the knots (y[k], survival[k]).
  /// Requires y[0] = 0, survival[0] = 1, strictly increasing y,
  /// non-increasing survival and a final survival value of 0.
  static ClaimDistribution tabulated(std::vector<double> y, std::vector<double> survival) {
    if (y.size() != survival.size() || y.size() < 2)
      throw DomainError("tabulated survival needs at least two matching knots");
    if (y.front() != 0.0 || survival.front() != 1.0)
      throw DomainError("tabulated survival must start at (0, 1)");
    for (std::size_t k = 1; k < y.size(); ++k) {
      if (!(y[k] > y[k - 1]) || !std::isfinite(y[k]))
        throw DomainError("tabulated knots must be strictly increasing and finite");
      if (survival[k] > survival[k - 1] || survival[k] < 0.0)
        throw DomainError("tabulated survival must be non-increasing in [0, 1]");
    }
    if (survival.back() != 0.0)
      throw DomainError("tabulated survival must reach 0 at the last knot");
    // Drop the flat zero tail so that the support bound is the first zero.
    std::size_t last = 1;
    while (survival[last] > 0.0) ++last;
    y.resize(last + 1);
    survival.resize(last + 1);
    Tabulated t{std::move(y), std::move(survival), {}, {}};
    t.mu.assign(t.y.size(), 0.0);
    t.m2.assign(t.y.size(), 0.0);
    for (std::size_t k = 0; k + 1 < t.y.size(); ++k) {
      t.mu[k + 1] = t.mu[k] + segment_mu(t, k, t.y[k + 1] - t.y[k]);
      t.m2[k + 1] = t.m2[k] + segment_m2(t, k, t.y[k + 1] - t.y[k]);
    }
    return ClaimDistribution(std::move(t));
  }

  Kind kind() const { return static_cast<Kind>(law_.index()); }

  /// Upper end M of the support (infinite for the exponential law).
  double support_bound() const {
    switch (kind()) {
      case Kind::Uniform:
        return std::get<Uniform>(law_).upper;
      case Kind::Exponential:
        return kInfinity;
      case Kind::Tabulated:
        return std::get<Tabulated>(law_).y.back();
    }
    return kInfinity;
  }

  double survival(double y) const {
    if (y < 0.0) return 1.0;
    switch (kind()) {
      case Kind::Uniform: {
        const double m = std::get<Uniform>(law_).upper;
        return y >= m ? 0.0 : 1.0 - y / m;
      }
      case Kind::Exponential:
        return std::exp(-std::get<Exponential>(law_).rate * y);
      case Kind::Tabulated: {
        const auto& t = std::get<Tabulated>(law_);
        if (y >= t.y.back()) return 0.0;
        const std::size_t k = locate(t, y);
        const double w = (y - t.y[k]) / (t.y[k + 1] - t.y[k]);
        return t.s[k] + w * (t.s[k + 1] - t.s[k]);
      }
    }
    return 0.0;
  }

  /// E[min(Y, s)] = integral of the survival function over [0, s].
  double limited_mean(double s) const {
    check_retention(s);
    switch (kind()) {
      case Kind::Uniform: {
        const double m = std::get<Uniform>(law_).upper;
        if (s >= m) return 0.5 * m;
        return s - s * s / (2.0 * m);
      }
      case Kind::Exponential: {
        const double l = std::get<Exponential>(law_).rate;
        if (std::isinf(s)) return 1.0 / l;
        return -std::expm1(-l * s) / l;
      }
      case Kind::Tabulated: {
        const auto& t = std::get<Tabulated>(law_);
        if (s >= t.y.back()) return t.mu.back();
        const std::size_t k = locate(t, s);
        return t.mu[k] + segment_mu(t, k, s - t.y[k]);
      }
    }
    return 0.0;
  }

  /// E[min(Y, s)^2] = integral of 2 y times the survival function over [0, s].
  double limited_second_moment(double s) const {
    check_retention(s);
    switch (kind()) {
      case Kind::Uniform: {
        const double m = std::get<Uniform>(law_).upper;
        if (s >= m) return m * m / 3.0;
        return s * s - 2.0 * s * s * s / (3.0 * m);
      }
      case Kind::Exponential: {
        const double l = std::get<Exponential>(law_).rate;
        if (std::isinf(s)) return 2.0 / (l * l);
        const double z = l * s;
        // 1 - e^{-z}(1 + z) loses everything to cancellation for small z.
        if (z < 0.05) {
          double term = z * z / 2.0, sum = 0.0;
          for (int n = 2; n < 14; ++n) {
            // coefficient of z^n is (-1)^n (n - 1) / n!
            sum += (n % 2 == 0 ? 1.0 : -1.0) * (n - 1) * term;
            term *= z / (n + 1);
          }
          return 2.0 * sum / (l * l);
        }
        return 2.0 * (1.0 - std::exp(-z) * (1.0 + z)) / (l * l);
      }
      case Kind::Tabulated: {
        const auto& t = std::get<Tabulated>(law_);
        if (s >= t.y.back()) return t.m2.back();
        const std::size_t k = locate(t, s);
        return t.m2[k] + segment_m2(t, k, s - t.y[k]);
      }
    }
    return 0.0;
  }

  double mean() const { return limited_mean(support_bound()); }
  double second_moment() const { return limited_second_moment(support_bound()); }

  /// Textual form understood by the problem-file parser.
  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind()) {
      case Kind::Uniform:
        os << "uniform:" << std::get<Uniform>(law_).upper;
        break;
      case Kind::Exponential:
        os << "exponential:" << std::get<Exponential>(law_).rate;
        break;
      case Kind::Tabulated: {
        const auto& t = std::get<Tabulated>(law_);
        os << "points:";
        for (std::size_t k = 0; k < t.y.size(); ++k)
          os << (k ? "," : "") << t.y[k] << '/' << t.s[k];
        break;
      }
    }
    return os.str();
  }

  const std::vector<double>& table_knots() const { return std::get<Tabulated>(law_).y; }
  const std::vector<double>& table_survival() const { return std::get<Tabulated>(law_).s; }

 private:
  struct Uniform {
    double upper;
  };
  struct Exponential {
    double rate;
  };
  struct Tabulated {
    std::vector<double> y, s;
    std::vector<double> mu, m2;  // cumulative moments at the knots
  };

  template <class Law>
  explicit ClaimDistribution(Law law) : law_(std::move(law)) {}

  static void check_retention(double s) {
    if (!(s >= 0.0)) throw DomainError("retention level must be non-negative");
  }

  static std::size_t locate(const Tabulated& t, double y) {
    auto it = std::upper_bound(t.y.begin(), t.y.end(), y);
    return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - t.y.begin()) - 1));
  }

  static double slope(const Tabulated& t, std::size_t k) {
    return (t.s[k + 1] - t.s[k]) / (t.y[k + 1] - t.y[k]);
  }

  // Integrals over [y_k, y_k + u] of the linear survival piece.
  static double segment_mu(const Tabulated& t, std::size_t k, double u) {
    return t.s[k] * u + 0.5 * slope(t, k) * u * u;
  }
  static double segment_m2(const Tabulated& t, std::size_t k, double u) {
    const double y0 = t.y[k], s0 = t.s[k], m = slope(t, k);
    return 2.0 * (y0 * s0 * u + 0.5 * (y0 * m + s0) * u * u + m * u * u * u / 3.0);
  }

  std::variant<Uniform, Exponential, Tabulated> law_;
};

inline double limited_mean(const ClaimDistribution& d, double s) { return d.limited_mean(s); }

inline double limited_second_moment(const ClaimDistribution& d, double s) {
  return d.limited_second_moment(s);
}

/// Ratio of the limited second moment to the squared limited mean.
inline double h_ratio(const ClaimDistribution& d, double s) {
  const double mu = d.limited_mean(s);
  if (!(mu > 0.0)) throw SingularInputError("h_ratio: limited mean vanishes");
  return d.limited_second_moment(s) / (mu * mu);
}

/// Pure excess-of-loss retention that reproduces the volatility of the mixed
/// contract (proportional share theta, then XL at pi), together with the drift
/// it frees up per unit claim intensity.
struct PureXlReplacement {
  double retention = 0.0;
  double drift_gain = 0.0;
};

inline PureXlReplacement dominating_pure_xl(const ClaimDistribution& d, double theta,
                                            double pi) {
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in (0, 1)");
  if (!(pi >= 0.0) || pi > d.support_bound())
    throw DomainError("retention must lie in [0, M]");
  const double inner = pi / theta;
  const double target = theta * theta * d.limited_second_moment(inner);
  const double mixed_mean = theta * d.limited_mean(inner);
  double hi = std::min(inner, d.support_bound());
  if (std::isinf(hi)) {
    hi = 1.0;
    while (d.limited_second_moment(hi) < target) hi *= 2.0;
  }
  const double p0 = numerics::bisect(
      [&](double p) { return d.limited_second_moment(p) - target; }, 0.0, hi);
  return {p0, d.limited_mean(p0) - mixed_mean};
}

}  // namespace xlre
