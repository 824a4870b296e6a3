#ifndef BBABC_MODEL_HPP
#define BBABC_MODEL_HPP

// The flexible 8- and 5-parameter bivariate beta laws.
//
// With independent U_i ~ Gamma(delta_i, 1), i = 1..8,
//   Z1 = (U1 + U5 + U7) / (U1 + U5 + U7 + U3 + U6 + U8)
//   Z2 = (U2 + U5 + U8) / (U2 + U5 + U8 + U4 + U6 + U7)
// so Z1 ~ Beta(d1 + d5 + d7, d3 + d6 + d8) and Z2 ~ Beta(d2 + d5 + d8, d4 + d6 + d7).
// The 5-parameter law is the special case d3 = d4 = d5 = 0 with
// (a1, a2, a3, a4, a5) = (d1, d2, d7, d8, d6).

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bbabc/error.hpp"
#include "bbabc/random.hpp"

namespace bbabc {

namespace detail {

template <std::size_t N>
void require_nonnegative(const std::array<double, N>& v, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (!(v[i] >= 0.0) || !std::isfinite(v[i])) {
      throw ParameterError(std::string(what) + ": component " + std::to_string(i + 1) +
                           " must be a finite nonnegative number");
    }
  }
}

template <std::size_t N>
bool any_zero(const std::array<double, N>& v) {
  for (double x : v) {
    if (x == 0.0) return true;
  }
  return false;
}

}  // namespace detail

struct BetaShape {
  double a = 0.0;
  double b = 0.0;
  friend bool operator==(const BetaShape&, const BetaShape&) = default;
};

/// Beta laws of (Z1, Z2).
struct MarginalShapes {
  BetaShape first;
  BetaShape second;
  friend bool operator==(const MarginalShapes&, const MarginalShapes&) = default;
};

/// (delta_1, ..., delta_8). Zero components are allowed only as reduction
/// boundaries (see on_boundary()); every marginal shape must stay positive.
class BB8Params {
 public:
  explicit BB8Params(const std::array<double, 8>& delta) : delta_(delta) {
    detail::require_nonnegative(delta_, "BB8Params");
    const MarginalShapes m = marginals();
    if (!(m.first.a > 0.0 && m.first.b > 0.0 && m.second.a > 0.0 && m.second.b > 0.0)) {
      throw ParameterError("BB8Params: every marginal beta shape must be positive");
    }
  }

  const std::array<double, 8>& delta() const noexcept { return delta_; }
  double operator[](std::size_t i) const { return delta_.at(i); }
  bool on_boundary() const noexcept { return detail::any_zero(delta_); }

  MarginalShapes marginals() const noexcept {
    const auto& d = delta_;
    return {{d[0] + d[4] + d[6], d[2] + d[5] + d[7]}, {d[1] + d[4] + d[7], d[3] + d[5] + d[6]}};
  }

  friend bool operator==(const BB8Params&, const BB8Params&) = default;

 private:
  std::array<double, 8> delta_;
};

/// (alpha_1, ..., alpha_5). alpha_3 = alpha_4 = 0 is the 3-parameter
/// (positive-correlation only) boundary.
class BB5Params {
 public:
  explicit BB5Params(const std::array<double, 5>& alpha) : alpha_(alpha) {
    detail::require_nonnegative(alpha_, "BB5Params");
    const MarginalShapes m = marginals();
    if (!(m.first.a > 0.0 && m.first.b > 0.0 && m.second.a > 0.0 && m.second.b > 0.0)) {
      throw ParameterError("BB5Params: every marginal beta shape must be positive");
    }
  }

  const std::array<double, 5>& alpha() const noexcept { return alpha_; }
  double operator[](std::size_t i) const { return alpha_.at(i); }
  bool on_boundary() const noexcept { return detail::any_zero(alpha_); }

  MarginalShapes marginals() const noexcept {
    const auto& a = alpha_;
    return {{a[0] + a[2], a[3] + a[4]}, {a[1] + a[3], a[2] + a[4]}};
  }

  friend bool operator==(const BB5Params&, const BB5Params&) = default;

 private:
  std::array<double, 5> alpha_;
};

struct Observation {
  double z1 = 0.5;
  double z2 = 0.5;
  friend bool operator==(const Observation&, const Observation&) = default;
};

/// n >= 1 paired observations, every coordinate strictly inside (0, 1).
class BivariateDataset {
 public:
  explicit BivariateDataset(std::vector<Observation> pairs) : pairs_(std::move(pairs)) {
    if (pairs_.empty()) throw ParameterError("BivariateDataset: need at least one observation");
    for (const auto& p : pairs_) {
      if (!(p.z1 > 0.0 && p.z1 < 1.0 && p.z2 > 0.0 && p.z2 < 1.0)) {
        throw ParameterError("BivariateDataset: coordinates must lie in the open unit interval");
      }
    }
  }

  std::size_t size() const noexcept { return pairs_.size(); }
  const Observation& operator[](std::size_t i) const { return pairs_[i]; }
  std::span<const Observation> pairs() const noexcept { return pairs_; }
  auto begin() const noexcept { return pairs_.begin(); }
  auto end() const noexcept { return pairs_.end(); }

  std::vector<double> first() const {
    std::vector<double> out;
    out.reserve(pairs_.size());
    for (const auto& p : pairs_) out.push_back(p.z1);
    return out;
  }
  std::vector<double> second() const {
    std::vector<double> out;
    out.reserve(pairs_.size());
    for (const auto& p : pairs_) out.push_back(p.z2);
    return out;
  }

  friend bool operator==(const BivariateDataset&, const BivariateDataset&) = default;

 private:
  std::vector<Observation> pairs_;
};

inline MarginalShapes marginal_params(const BB5Params& p) noexcept { return p.marginals(); }
inline MarginalShapes marginal_params(const BB8Params& p) noexcept { return p.marginals(); }

/// delta = (a1, a2, 0, 0, 0, a5, a3, a4).
inline BB8Params embed_bb5(const BB5Params& p) {
  const auto& a = p.alpha();
  return BB8Params({a[0], a[1], 0.0, 0.0, 0.0, a[4], a[2], a[3]});
}

namespace detail {

inline double log_sum_exp(std::span<const double> xs) noexcept {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : xs) hi = std::fmax(hi, x);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

}  // namespace detail

namespace detail {

/// A Gamma(shape, 1) draw kept in linear form, plus its log when the linear
/// form may have lost it to underflow (shape < 1).
struct GammaTerm {
  double value = 0.0;
  double log_value = -std::numeric_limits<double>::infinity();
  bool has_log = true;
};

inline GammaTerm draw_gamma_term(RngStream& stream, double shape) {
  if (shape == 0.0) return {};
  if (shape >= 1.0) return {marsaglia_tsang(stream, shape), 0.0, false};
  const double lg = std::log(marsaglia_tsang(stream, shape + 1.0)) + std::log(stream.uniform()) / shape;
  return {std::exp(lg), lg, true};
}

inline double log_of(const GammaTerm& t) { return t.has_log ? t.log_value : std::log(t.value); }

/// x / (x + y) for the sums x = a + b + c and y = d + e + f.
inline double gamma_ratio(const GammaTerm& a, const GammaTerm& b, const GammaTerm& c, const GammaTerm& d,
                          const GammaTerm& e, const GammaTerm& f) {
  constexpr double kSafe = 0x1.0p-960;
  const double num = a.value + b.value + c.value;
  const double den = d.value + e.value + f.value;
  if (num >= kSafe && den >= kSafe) {
    double z = num / (num + den);
    constexpr double kHigh = 1.0 - 0x1.0p-53;
    return z > kHigh ? kHigh : z;
  }
  const std::array<double, 3> ln{log_of(a), log_of(b), log_of(c)};
  const std::array<double, 3> ld{log_of(d), log_of(e), log_of(f)};
  return ratio_from_logs(log_sum_exp(ln), log_sum_exp(ld));
}

}  // namespace detail

/// One (Z1, Z2) draw. U_1..U_8 are drawn in index order; zero components
/// contribute an exact 0 and consume no stream state.
inline Observation draw_bb8(RngStream& stream, const BB8Params& params) {
  std::array<detail::GammaTerm, 8> u;
  for (std::size_t i = 0; i < 8; ++i) u[i] = detail::draw_gamma_term(stream, params.delta()[i]);
  return {detail::gamma_ratio(u[0], u[4], u[6], u[2], u[5], u[7]),
          detail::gamma_ratio(u[1], u[4], u[7], u[3], u[5], u[6])};
}

inline Observation draw_bb5(RngStream& stream, const BB5Params& params) {
  return draw_bb8(stream, embed_bb5(params));
}

inline BivariateDataset sample_bb8(RngStream& stream, const BB8Params& params, std::size_t n) {
  if (n == 0) throw ParameterError("sample_bb8: n must be positive");
  std::vector<Observation> pairs;
  pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pairs.push_back(draw_bb8(stream, params));
  return BivariateDataset(std::move(pairs));
}

inline BivariateDataset sample_bb5(RngStream& stream, const BB5Params& params, std::size_t n) {
  return sample_bb8(stream, embed_bb5(params), n);
}

/// E[(1 - Z1)(1 - Z2) / (Z1 Z2)] under BB5; finite only when
/// a1 + a3 > 1 and a2 + a4 > 1.
inline double theoretical_cross_moment(const BB5Params& params) {
  const auto& a = params.alpha();
  const double s13 = a[0] + a[2];
  const double s24 = a[1] + a[3];
  if (!(s13 > 1.0) || !(s24 > 1.0)) {
    throw PoleError("theoretical_cross_moment: requires alpha1 + alpha3 > 1 and alpha2 + alpha4 > 1");
  }
  return (a[3] / s24) * (a[2] / s13) + (a[2] / s13) * (a[4] / (s24 - 1.0)) +
         (a[3] / s24) * (a[4] / (s13 - 1.0)) + (a[4] / (s13 - 1.0)) * ((a[4] + 1.0) / (s24 - 1.0));
}

/// Pearson correlation of two equally long sequences; NaN when either has
/// zero variance.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("pearson: length mismatch");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

/// Pearson correlation of a fresh sample of `draws` observations.
inline double mc_correlation(RngStream& stream, const BB8Params& params, std::size_t draws) {
  if (draws < 2) throw ParameterError("mc_correlation: need at least two draws");
  const BivariateDataset data = sample_bb8(stream, params, draws);
  return pearson(data.first(), data.second());
}

inline double mc_correlation(RngStream& stream, const BB5Params& params, std::size_t draws) {
  return mc_correlation(stream, embed_bb5(params), draws);
}

}  // namespace bbabc

#endif  // BBABC_MODEL_HPP
