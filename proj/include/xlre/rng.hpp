#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace xlre::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based stream: the n-th draw is mix64(key + n * golden), so a
/// stream is fully determined by (seed, stream index).
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t index)
      : key_(mix64(seed ^ mix64(index + 0x632BE59BD9B4E019ULL))) {}

  std::uint64_t next() {
    counter_ += kGolden;
    return mix64(key_ + counter_);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

namespace detail {

// Marsaglia-Tsang ziggurat tables, 128 layers.
struct Ziggurat {
  std::array<std::uint32_t, 128> kn{};
  std::array<double, 128> wn{};
  std::array<double, 128> fn{};

  Ziggurat() {
    const double m1 = 2147483648.0;
    double dn = 3.442619855899, tn = dn;
    const double vn = 9.91256303526217e-3;
    const double q = vn / std::exp(-0.5 * dn * dn);
    kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
    kn[1] = 0;
    wn[0] = q / m1;
    wn[127] = dn / m1;
    fn[0] = 1.0;
    fn[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
      kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
      tn = dn;
      fn[i] = std::exp(-0.5 * dn * dn);
      wn[i] = dn / m1;
    }
  }
};

inline const Ziggurat kZiggurat;

}  // namespace detail

namespace detail {

// Rejection part of the ziggurat, for the ~1% of draws outside the boxes.
[[gnu::noinline]] inline double ziggurat_tail(Stream& s, std::int32_t hz, std::uint32_t iz) {
  const auto& z = kZiggurat;
  constexpr double r = 3.442619855899;
  for (;;) {
    const double x = hz * z.wn[iz];
    if (iz == 0) {
      double xx, yy;
      do {
        xx = -std::log(s.uniform()) / r;
        yy = -std::log(s.uniform());
      } while (yy + yy < xx * xx);
      return hz > 0 ? r + xx : -r - xx;
    }
    if (z.fn[iz] + s.uniform() * (z.fn[iz - 1] - z.fn[iz]) < std::exp(-0.5 * x * x)) return x;
    const std::uint64_t v = s.next();
    hz = static_cast<std::int32_t>(static_cast<std::uint32_t>(v >> 32));
    iz = static_cast<std::uint32_t>(v) & 127u;
    const std::uint32_t mag = hz < 0 ? 0u - static_cast<std::uint32_t>(hz) : static_cast<std::uint32_t>(hz);
    if (mag < z.kn[iz]) return hz * z.wn[iz];
  }
}

}  // namespace detail

inline double Stream::normal() {
  const auto& z = detail::kZiggurat;
  const std::uint64_t v = next();
  const std::int32_t hz = static_cast<std::int32_t>(static_cast<std::uint32_t>(v >> 32));
  const std::uint32_t iz = static_cast<std::uint32_t>(v) & 127u;
  const std::uint32_t mag = hz < 0 ? 0u - static_cast<std::uint32_t>(hz) : static_cast<std::uint32_t>(hz);
  if (mag < z.kn[iz]) [[likely]]
    return hz * z.wn[iz];
  return detail::ziggurat_tail(*this, hz, iz);
}

}  // namespace xlre::rng
