#ifndef BBABC_ESTIMATION_HPP
#define BBABC_ESTIMATION_HPP

// Frequentist estimators: marginal beta MLE, beta-binomial MLE, and the
// modified maximum likelihood estimator (MMLE) of the 5-parameter law.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bbabc/error.hpp"
#include "bbabc/model.hpp"
#include "bbabc/numerics.hpp"
#include "bbabc/summaries.hpp"

namespace bbabc {

/// Sufficient statistics of a beta sample: mean log z and mean log(1 - z).
struct BetaSufficientStats {
  double mean_log = 0.0;
  double mean_log1m = 0.0;
};

namespace detail {

inline double beta_mean_loglik(double a, double b, const BetaSufficientStats& s) {
  return (a - 1.0) * s.mean_log + (b - 1.0) * s.mean_log1m - log_beta(a, b);
}

}  // namespace detail

/// Newton iteration on the beta score equations with the trigamma Fisher
/// information. Steps are halved whenever the likelihood would drop or a
/// shape would leave (0, inf); once the score is below 1e-6 plain Newton
/// steps are taken.
inline BetaShape beta_mle_from_stats(const BetaSufficientStats& stats, BetaShape start = {1.0, 1.0},
                                     int max_iter = 100) {
  if (!std::isfinite(stats.mean_log) || !std::isfinite(stats.mean_log1m)) {
    throw DegenerateError("beta_mle: sufficient statistics must be finite");
  }
  double a = start.a;
  double b = start.b;
  double ll = detail::beta_mean_loglik(a, b, stats);
  for (int iter = 0; iter < max_iter; ++iter) {
    const double dsum = digamma(a + b);
    const double ga = stats.mean_log - digamma(a) + dsum;
    const double gb = stats.mean_log1m - digamma(b) + dsum;
    if (std::fabs(ga) <= 1e-12 && std::fabs(gb) <= 1e-12) return {a, b};
    const double tsum = trigamma(a + b);
    const double haa = trigamma(a) - tsum;
    const double hbb = trigamma(b) - tsum;
    const double hab = -tsum;
    const double det = haa * hbb - hab * hab;
    double da = (hbb * ga - hab * gb) / det;
    double db = (haa * gb - hab * ga) / det;
    const bool near = std::fabs(ga) <= 1e-6 && std::fabs(gb) <= 1e-6;
    bool moved = false;
    for (int halving = 0; halving < 60; ++halving) {
      const double na = a + da;
      const double nb = b + db;
      if (na > 0.0 && nb > 0.0) {
        const double nll = detail::beta_mean_loglik(na, nb, stats);
        // Close to the optimum the likelihood change drops below its own
        // rounding noise, so only the positivity check applies there.
        if (near || nll >= ll - 1e-14 * std::fabs(ll)) {
          a = na;
          b = nb;
          ll = nll;
          moved = true;
          break;
        }
      }
      da *= 0.5;
      db *= 0.5;
    }
    if (!moved) break;
  }
  const double dsum = digamma(a + b);
  const double ga = stats.mean_log - digamma(a) + dsum;
  const double gb = stats.mean_log1m - digamma(b) + dsum;
  if (std::fabs(ga) <= 1e-9 && std::fabs(gb) <= 1e-9) return {a, b};
  throw ConvergenceError("beta_mle: Newton iteration did not converge");
}

/// Maximum likelihood Beta(a, b) fit, started from method of moments.
inline BetaShape beta_mle(std::span<const double> values) {
  if (values.size() < 2) throw DegenerateError("beta_mle: need at least two values");
  BetaSufficientStats stats;
  double m = 0.0;
  bool varied = false;
  for (double v : values) {
    if (!(v > 0.0 && v < 1.0)) throw DomainError("beta_mle: values must lie in (0, 1)");
    stats.mean_log += std::log(v);
    stats.mean_log1m += std::log1p(-v);
    m += v;
    varied = varied || v != values[0];
  }
  if (!varied) throw DegenerateError("beta_mle: all values are equal");
  const double n = static_cast<double>(values.size());
  stats.mean_log /= n;
  stats.mean_log1m /= n;
  m /= n;
  double var = 0.0;
  for (double v : values) var += (v - m) * (v - m);
  var /= n;
  BetaShape start{1.0, 1.0};
  const double common = m * (1.0 - m) / var - 1.0;
  if (var > 0.0 && common > 0.0) start = {m * common, (1.0 - m) * common};
  return beta_mle_from_stats(stats, start);
}

/// Log-likelihood of a histogram of beta-binomial counts, without the
/// binomial-coefficient constant. counts[k] households observed k successes
/// out of counts.size() - 1 trials.
inline double beta_binomial_loglik(std::span<const std::int64_t> counts, double a, double b) {
  const double trials = static_cast<double>(counts.size() - 1);
  const double lb = log_beta(a, b);
  double ll = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) continue;
    const double kk = static_cast<double>(k);
    ll += static_cast<double>(counts[k]) * (log_beta(kk + a, trials - kk + b) - lb);
  }
  return ll;
}

inline std::array<double, 2> beta_binomial_gradient(std::span<const std::int64_t> counts, double a, double b) {
  const double trials = static_cast<double>(counts.size() - 1);
  const double common = digamma(a + b) - digamma(trials + a + b);
  const double da0 = digamma(a);
  const double db0 = digamma(b);
  double ga = 0.0, gb = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) continue;
    const double kk = static_cast<double>(k);
    const double w = static_cast<double>(counts[k]);
    ga += w * (digamma(kk + a) - da0 + common);
    gb += w * (digamma(trials - kk + b) - db0 + common);
  }
  return {ga, gb};
}

/// Maximum likelihood (a, b) of a beta-binomial histogram over {0..trials}.
///
/// Newton ascent in (log a, log b) with backtracking; when the Hessian is
/// not negative definite the step falls back to plain gradient ascent.
/// Converges to a gradient norm <= 1e-8 in the (a, b) coordinates.
inline BetaShape beta_binomial_mle(std::span<const std::int64_t> counts, std::int64_t trials) {
  if (trials < 1 || counts.size() != static_cast<std::size_t>(trials + 1)) {
    throw DimensionError("beta_binomial_mle: histogram must have trials + 1 bins");
  }
  int distinct = 0;
  for (auto c : counts) {
    if (c < 0) throw DomainError("beta_binomial_mle: negative count");
    distinct += c > 0 ? 1 : 0;
  }
  if (distinct < 2) throw DegenerateError("beta_binomial_mle: need at least two distinct observed counts");

  const double tt = static_cast<double>(trials);
  double u = 0.0;  // log a
  double v = 0.0;  // log b
  double ll = beta_binomial_loglik(counts, 1.0, 1.0);
  for (int iter = 0; iter < 500; ++iter) {
    const double a = std::exp(u);
    const double b = std::exp(v);
    const auto g = beta_binomial_gradient(counts, a, b);
    if (std::hypot(g[0], g[1]) <= 1e-8) return {a, b};

    // Second derivatives in (a, b).
    const double tsum = trigamma(a + b) - trigamma(tt + a + b);
    const double ta0 = trigamma(a);
    const double tb0 = trigamma(b);
    double haa = 0.0, hbb = 0.0, hab = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (counts[k] == 0) continue;
      const double kk = static_cast<double>(k);
      const double w = static_cast<double>(counts[k]);
      haa += w * (trigamma(kk + a) - ta0 + tsum);
      hbb += w * (trigamma(tt - kk + b) - tb0 + tsum);
      hab += w * tsum;
    }
    // Chain rule to (u, v) = (log a, log b).
    const double gu = a * g[0];
    const double gv = b * g[1];
    const double huu = a * a * haa + gu;
    const double hvv = b * b * hbb + gv;
    const double huv = a * b * hab;
    const double det = huu * hvv - huv * huv;
    double du, dv;
    const bool newton = huu < 0.0 && det > 0.0;
    const bool near = newton && std::hypot(g[0], g[1]) <= 1e-4;
    if (newton) {
      du = -(hvv * gu - huv * gv) / det;
      dv = -(huu * gv - huv * gu) / det;
    } else {
      const double norm = std::hypot(gu, gv);
      du = gu / norm;
      dv = gv / norm;
    }
    // Keep single steps moderate in log space.
    const double len = std::hypot(du, dv);
    if (len > 2.0) {
      du *= 2.0 / len;
      dv *= 2.0 / len;
    }
    bool moved = false;
    for (int halving = 0; halving < 60; ++halving) {
      const double nll = beta_binomial_loglik(counts, std::exp(u + du), std::exp(v + dv));
      if (std::isfinite(nll) && (near || nll >= ll)) {
        u += du;
        v += dv;
        ll = nll;
        moved = true;
        break;
      }
      du *= 0.5;
      dv *= 0.5;
    }
    if (!moved) break;
  }
  const double a = std::exp(u);
  const double b = std::exp(v);
  const auto g = beta_binomial_gradient(counts, a, b);
  if (std::hypot(g[0], g[1]) <= 1e-6) return {a, b};
  throw ConvergenceError("beta_binomial_mle: ascent did not converge");
}

/// Marginal beta MLEs (a, b) of Z1 and (c, d) of Z2.
struct MarginalMLEs {
  double a_hat = 0.0;
  double b_hat = 0.0;
  double c_hat = 0.0;
  double d_hat = 0.0;
};

struct MMLEResult {
  std::array<double, 5> alpha_hat{};
  double quadratic_b = 0.0;
  double quadratic_c = 0.0;
  /// Which components were raised to the max{0, .} floor.
  std::array<bool, 5> clipped{};
  /// B^2 - 4C < 0: no real root, alpha_5 set to 0.
  bool complex_roots = false;
  MarginalMLEs marginals;
  double moment_stat = 0.0;
};

/// MMLE from the four marginal MLEs and the sample cross moment S.
///
/// Solves alpha5^2 + B alpha5 + C = 0 for the larger root, then recovers the
/// remaining components, clipping at zero in the order 5, 4, 3, 2, 1.
inline MMLEResult mmle5_from_statistics(const MarginalMLEs& m, double moment_stat) {
  const double a = m.a_hat, b = m.b_hat, c = m.c_hat, d = m.d_hat;
  if (!(a > 1.0) || !(c > 1.0)) {
    throw PoleError("mmle5: requires a_hat > 1 and c_hat > 1");
  }
  MMLEResult r;
  r.marginals = m;
  r.moment_stat = moment_stat;
  r.quadratic_b = b * c + a * c + a * d - b - d;
  r.quadratic_c = (a - 1.0) * (c - 1.0) * b * d - a * c * (a - 1.0) * (c - 1.0) * moment_stat;
  const double disc = r.quadratic_b * r.quadratic_b - 4.0 * r.quadratic_c;
  double root = 0.0;
  if (disc < 0.0) {
    r.complex_roots = true;
  } else {
    root = (-r.quadratic_b + std::sqrt(disc)) / 2.0;
  }
  auto floor_at_zero = [&r](std::size_t idx, double value) {
    r.clipped[idx] = !(value > 0.0);
    r.alpha_hat[idx] = r.clipped[idx] ? 0.0 : value;
  };
  floor_at_zero(4, r.complex_roots ? 0.0 : root);
  if (r.complex_roots) r.clipped[4] = true;
  floor_at_zero(3, b - r.alpha_hat[4]);
  floor_at_zero(2, d - r.alpha_hat[4]);
  floor_at_zero(1, c - r.alpha_hat[3]);
  floor_at_zero(0, a - r.alpha_hat[2]);
  return r;
}

inline MMLEResult mmle5(const BivariateDataset& data) {
  const BetaShape first = beta_mle(data.first());
  const BetaShape second = beta_mle(data.second());
  return mmle5_from_statistics({first.a, first.b, second.a, second.b}, legacy_moment_stat(data));
}

}  // namespace bbabc

#endif  // BBABC_ESTIMATION_HPP
