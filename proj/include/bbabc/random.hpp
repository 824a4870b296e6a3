#ifndef BBABC_RANDOM_HPP
#define BBABC_RANDOM_HPP

// Reproducible random variates.
//
// RngStream is a Philox4x32-10 counter-based generator. The 64-bit master
// seed is the Philox key; the 128-bit counter is split into a 64-bit stream
// index (high half) and a 64-bit block position (low half). Two streams with
// the same key and different indices therefore never share a counter value,
// and any stream can be created directly from (seed, index) without touching
// the others.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "bbabc/error.hpp"

namespace bbabc {

class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_index) noexcept
      : master_seed_(master_seed), stream_index_(stream_index) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (buffered_ == 0) refill();
    return buffer_[--buffered_];
  }

  /// Uniform on the open interval (0, 1), 53 random bits.
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal variate (Marsaglia polar method). The second value of
  /// each accepted pair is kept for the next call.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double s = u * u + v * v;
      if (s < 1.0 && s > 0.0) {
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
      }
    }
  }

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }
  /// Number of 128-bit Philox blocks consumed so far.
  std::uint64_t blocks_used() const noexcept { return block_; }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  using Block = std::array<std::uint32_t, 4>;

  static Block philox(Block ctr, std::uint32_t k0, std::uint32_t k1) noexcept {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    return ctr;
  }

  void refill() noexcept {
    const Block ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                    static_cast<std::uint32_t>(stream_index_),
                    static_cast<std::uint32_t>(stream_index_ >> 32)};
    const Block out = philox(ctr, static_cast<std::uint32_t>(master_seed_),
                             static_cast<std::uint32_t>(master_seed_ >> 32));
    ++block_;
    buffer_[1] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[0] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    buffered_ = 2;
  }

  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Independent stream number `index` of the family keyed by `master_seed`.
inline RngStream substream(std::uint64_t master_seed, std::uint64_t index) noexcept {
  return RngStream(master_seed, index);
}

inline double draw_normal(RngStream& stream) noexcept { return stream.normal(); }

inline double draw_exponential(RngStream& stream) noexcept { return -std::log(stream.uniform()); }

namespace detail {

// Marsaglia-Tsang squeeze for shape >= 1, unit scale.
inline double marsaglia_tsang(RngStream& stream, double shape) noexcept {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = draw_normal(stream);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

inline void require_gamma_params(double shape, double scale) {
  if (!(shape > 0.0) || !std::isfinite(shape) || !(scale > 0.0) || !std::isfinite(scale)) {
    throw ParameterError("gamma: shape and scale must be positive and finite (shape=" +
                         std::to_string(shape) + ", scale=" + std::to_string(scale) + ")");
  }
}

}  // namespace detail

/// Natural log of a Gamma(shape, 1) draw.
///
/// For shape < 1 uses G(a) = G(a+1) * U^{1/a} in log space, so draws that
/// would underflow a double (shape ~ 1e-3) keep their full value.
inline double draw_log_gamma(RngStream& stream, double shape) {
  detail::require_gamma_params(shape, 1.0);
  if (shape >= 1.0) return std::log(detail::marsaglia_tsang(stream, shape));
  const double boosted = detail::marsaglia_tsang(stream, shape + 1.0);
  return std::log(boosted) + std::log(stream.uniform()) / shape;
}

/// Gamma variate with the given shape and scale (mean shape * scale).
inline double draw_gamma(RngStream& stream, double shape, double scale) {
  detail::require_gamma_params(shape, scale);
  if (shape >= 1.0) return scale * detail::marsaglia_tsang(stream, shape);
  return scale * std::exp(draw_log_gamma(stream, shape));
}

/// Maps log(x) and log(y) of two positive quantities to x / (x + y), kept
/// strictly inside (0, 1).
inline double ratio_from_logs(double log_num, double log_den) noexcept {
  const double t = log_num - log_den;
  double z = t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
  constexpr double kLow = std::numeric_limits<double>::min();
  constexpr double kHigh = 1.0 - 0x1.0p-53;
  if (z < kLow) z = kLow;
  if (z > kHigh) z = kHigh;
  return z;
}

/// Beta(a, b) variate as G_a / (G_a + G_b); always strictly inside (0, 1).
inline double draw_beta(RngStream& stream, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw ParameterError("beta: shapes must be positive and finite");
  }
  const double la = draw_log_gamma(stream, a);
  const double lb = draw_log_gamma(stream, b);
  return ratio_from_logs(la, lb);
}

/// Binomial(trials, p) variate.
///
/// Small trial counts use inversion; larger ones first reduce the count
/// with the exact beta-splitting recursion on the median order statistic.
inline std::int64_t draw_binomial(RngStream& stream, std::int64_t trials, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("binomial: p must lie in [0, 1]");
  if (trials < 0) throw ParameterError("binomial: trials must be nonnegative");
  std::int64_t offset = 0;
  while (trials > 64) {
    if (p == 0.0) return offset;
    if (p == 1.0) return offset + trials;
    const std::int64_t i = (trials + 1) / 2;
    const double b = draw_beta(stream, static_cast<double>(i), static_cast<double>(trials + 1 - i));
    if (b <= p) {
      offset += i;
      trials -= i;
      p = (p - b) / (1.0 - b);
    } else {
      trials = i - 1;
      p /= b;
    }
    p = std::fmin(1.0, std::fmax(0.0, p));
  }
  if (p == 0.0) return offset;
  if (p == 1.0) return offset + trials;
  // Inversion with one uniform on the side where q = 1 - p >= 1/2, so
  // q^trials >= 2^-64 never underflows.
  const bool flip = p > 0.5;
  const double pp = flip ? 1.0 - p : p;
  const double q = 1.0 - pp;
  const double odds = pp / q;
  double pmf = std::pow(q, static_cast<double>(trials));
  double u = stream.uniform();
  std::int64_t k = 0;
  while (k < trials && u >= pmf) {
    u -= pmf;
    pmf *= odds * static_cast<double>(trials - k) / static_cast<double>(k + 1);
    ++k;
  }
  return offset + (flip ? trials - k : k);
}

}  // namespace bbabc

#endif  // BBABC_RANDOM_HPP
