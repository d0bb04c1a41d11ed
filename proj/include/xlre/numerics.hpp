#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "xlre/errors.hpp"

namespace xlre::numerics {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Neumaier summation, used wherever many terms of mixed magnitude pile up.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  int max_intervals = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo, hi, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double lo, double hi) {
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kronrod += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {lo, hi, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace detail

namespace detail {

template <class F>
QuadratureResult integrate_finite(F& f, double lo, double hi, const QuadratureOptions& opts) {
  std::priority_queue<Panel> heap;
  auto first = gk15(f, lo, hi);
  double total = first.value;
  double err = first.error;
  heap.push(first);
  int n = 1;
  while (err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total)) &&
         n < opts.max_intervals) {
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (mid <= worst.lo || mid >= worst.hi) {
      heap.push(worst);
      break;
    }
    auto left = gk15(f, worst.lo, mid);
    auto right = gk15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++n;
  }
  // Re-sum the panels to shed the drift of the running totals.
  CompensatedSum v, e;
  while (!heap.empty()) {
    v.add(heap.top().value);
    e.add(heap.top().error);
    heap.pop();
  }
  return {v.value(), e.value(), n};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of f over [lo, hi].
/// An infinite upper limit is mapped onto [0, 1) by x = lo + t / (1 - t).
template <class F>
QuadratureResult integrate(F&& f, double lo, double hi,
                           const QuadratureOptions& opts = {}) {
  if (std::isnan(lo) || std::isnan(hi)) throw DomainError("integrate: NaN limit");
  double sign = 1.0;
  if (hi < lo) {
    std::swap(lo, hi);
    sign = -1.0;
  }
  if (hi == lo) return {};
  if (std::isinf(lo)) throw DomainError("integrate: infinite lower limit");
  QuadratureResult r;
  if (std::isinf(hi)) {
    auto g = [&](double t) {
      const double u = 1.0 - t;
      return f(lo + t / u) / (u * u);
    };
    r = detail::integrate_finite(g, 0.0, 1.0, opts);
  } else {
    r = detail::integrate_finite(f, lo, hi, opts);
  }
  r.value *= sign;
  return r;
}

struct BisectionOptions {
  double x_tol = 1e-15;
  double f_tol = 0.0;
  int max_iter = 400;
};

/// Bisection for a root of f in [lo, hi]. The endpoint values must differ in
/// sign (an exact zero at an endpoint is returned as is).
template <class F>
double bisect(F&& f, double lo, double hi, const BisectionOptions& opts = {}) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::isnan(flo) || std::isnan(fhi) || (flo > 0) == (fhi > 0))
    throw CaseClassificationError("bisect: bracket [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "] shows no sign change");
  for (int it = 0; it < opts.max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= std::min(lo, hi) || mid >= std::max(lo, hi)) break;
    const double fm = f(mid);
    if (fm == 0.0 || std::abs(fm) < opts.f_tol) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
    if (std::abs(hi - lo) <= opts.x_tol * std::max(1.0, std::abs(mid))) break;
  }
  return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

template <std::size_t N>
using State = std::array<double, N>;

struct OdeOptions {
  double rtol = 1e-12;
  double atol = 1e-14;
  double initial_step = 0.0;  // 0: chosen from the span
  double max_step = kInf;
  std::size_t max_steps = 2'000'000;
};

template <std::size_t N>
struct OdeOutcome {
  double t = 0.0;
  State<N> y{};
  bool event = false;      // stopped on an event rather than at t1
  std::size_t steps = 0;
};

struct NoEvent {
  template <class Y>
  double operator()(double, const Y&) const {
    return 1.0;
  }
};

struct NoObserver {
  template <class Y>
  void operator()(double, const Y&) const {}
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

template <std::size_t N, class Rhs>
State<N> dp_step(Rhs& f, double t, const State<N>& y, const State<N>& k1, double h,
                 State<N>& k7, State<N>& err) {
  State<N> tmp, k2, k3, k4, k5, k6, out;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
  k2 = f(t + c2 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  k3 = f(t + c3 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  k4 = f(t + c4 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  k5 = f(t + c5 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                         a65 * k5[i]);
  k6 = f(t + h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    out[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                         b6 * k6[i]);
  k7 = f(t + h, out);
  for (std::size_t i = 0; i < N; ++i)
    err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                  e7 * k7[i]);
  return out;
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) integration of y' = f(t, y) from t0 to t1
/// (either direction). Integration stops early at the first sign change of
/// event(t, y); the crossing is then located to near machine precision by
/// re-stepping from the last accepted point. observe(t, y) sees the initial
/// point and every accepted step.
template <std::size_t N, class Rhs, class Event = NoEvent, class Observer = NoObserver>
OdeOutcome<N> integrate_ode(Rhs&& f, double t0, State<N> y0, double t1,
                            const OdeOptions& opts = {}, Event&& event = {},
                            Observer&& observe = {}) {
  OdeOutcome<N> out;
  out.t = t0;
  out.y = y0;
  observe(t0, y0);
  if (t1 == t0) return out;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  double h = opts.initial_step > 0 ? opts.initial_step : span * 1e-3;
  h = std::min({h, span, opts.max_step});
  double t = t0;
  State<N> y = y0;
  State<N> k1 = f(t, y);
  double ev_prev = event(t, y);
  for (std::size_t step = 0; step < opts.max_steps; ++step) {
    const double remaining = std::abs(t1 - t);
    bool last = false;
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    State<N> k7, err;
    const State<N> yn = detail::dp_step<N>(f, t, y, k1, dir * h, k7, err);
    double norm = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(yn[i]));
      const double r = err[i] / sc;
      norm += r * r;
      if (!std::isfinite(yn[i])) finite = false;
    }
    norm = std::sqrt(norm / static_cast<double>(N));
    if (!finite || !std::isfinite(norm)) norm = 1e10;
    if (norm <= 1.0) {
      const double tn = last ? t1 : t + dir * h;
      const double ev = event(tn, yn);
      if ((ev_prev > 0) != (ev > 0) || ev == 0.0) {
        // Locate the crossing within this accepted step.
        double lo = 0.0, hi = h, flo = ev_prev, fhi = ev;
        State<N> yhit = yn;
        for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() *
                                                   std::max(std::abs(t), std::abs(tn));
             ++it) {
          double s = hi - fhi * (hi - lo) / (fhi - flo);
          // Safeguard the secant step with bisection.
          if (!(s > lo + 0.01 * (hi - lo) && s < hi - 0.01 * (hi - lo)))
            s = 0.5 * (lo + hi);
          State<N> kk, ee;
          const State<N> ys = detail::dp_step<N>(f, t, y, k1, dir * s, kk, ee);
          const double fs = event(t + dir * s, ys);
          if (fs == 0.0) {
            lo = hi = s;
            yhit = ys;
            break;
          }
          if ((fs > 0) == (flo > 0)) {
            lo = s;
            flo = fs;
          } else {
            hi = s;
            fhi = fs;
            yhit = ys;
          }
        }
        out.t = t + dir * hi;
        out.y = yhit;
        out.event = true;
        out.steps = step + 1;
        observe(out.t, out.y);
        return out;
      }
      ev_prev = ev;
      t = tn;
      y = yn;
      k1 = k7;
      observe(t, y);
      if (last) {
        out.t = t;
        out.y = y;
        out.steps = step + 1;
        return out;
      }
    }
    const double fac = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
    h = std::min(h * fac, opts.max_step);
    if (h < 1e-15 * std::max(1.0, std::abs(t)))
      throw DomainError("integrate_ode: step size underflow at t = " + std::to_string(t));
  }
  throw DomainError("integrate_ode: step budget exhausted");
}

}  // namespace xlre::numerics
