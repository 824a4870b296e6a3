#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "bbabc/random.hpp"

using namespace bbabc;

namespace {

// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

// Asymptotic 1% critical value.
double ks_critical(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

}  // namespace

TEST(RngStream, SameSeedAndIndexGiveSameSequence) {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(RngStream, DifferentIndicesOrSeedsDiffer) {
  RngStream a(42, 7), b(42, 8), c(43, 7);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    same_ab += x == b();
    same_ac += x == c();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(RngStream, SubstreamIsIndependentOfCreationOrder) {
  RngStream late = substream(9, 1000);
  std::vector<std::uint64_t> first;
  for (int i = 0; i < 16; ++i) first.push_back(late());
  for (std::uint64_t k = 0; k < 1000; ++k) {
    RngStream other = substream(9, k);
    other();
  }
  RngStream again = substream(9, 1000);
  for (int i = 0; i < 16; ++i) EXPECT_EQ(again(), first[i]);
}

TEST(RngStream, ReportsIdentityAndConsumption) {
  RngStream s(5, 11);
  EXPECT_EQ(s.master_seed(), 5u);
  EXPECT_EQ(s.stream_index(), 11u);
  EXPECT_EQ(s.blocks_used(), 0u);
  s();
  s();
  s();
  EXPECT_EQ(s.blocks_used(), 2u);
}

TEST(RngStream, WorksWithStandardDistributions) {
  RngStream s(1, 0);
  std::uniform_int_distribution<int> die(1, 6);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 60000; ++i) ++counts[die(s)];
  for (int k = 1; k <= 6; ++k) EXPECT_NEAR(counts[k], 10000, 500);
}

TEST(Uniform, OpenIntervalAndMoments) {
  RngStream s(3, 0);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sumsq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sumsq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(Normal, PassesKsTest) {
  RngStream s(4, 0);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = draw_normal(s);
  const boost::math::normal_distribution<> law;
  EXPECT_LT(ks_statistic(xs, [&](double x) { return cdf(law, x); }), ks_critical(xs.size()));
}

TEST(Gamma, PassesKsTestAcrossShapes) {
  // Tested on the log scale: at shape 1e-3 about half the mass lies below the
  // smallest double. Below 1e-280 the CDF is x^a / Gamma(a + 1) to within
  // a relative 1e-280.
  std::uint64_t index = 0;
  for (double shape : {0.001, 0.05, 0.3, 0.999, 1.0, 2.5, 7.0, 150.0}) {
    RngStream s(5, index++);
    std::vector<double> ls(20000);
    for (auto& l : ls) l = draw_log_gamma(s, shape);
    const auto log_cdf = [shape](double l) {
      if (l < std::log(1e-280)) return std::exp(shape * l - boost::math::lgamma(shape + 1.0));
      return boost::math::gamma_p(shape, std::exp(l));
    };
    EXPECT_LT(ks_statistic(ls, log_cdf), ks_critical(ls.size())) << "shape " << shape;
  }
}

TEST(Gamma, LinearDrawsPassKsWhereRepresentable) {
  std::uint64_t index = 0;
  for (double shape : {0.3, 1.0, 7.0}) {
    RngStream s(15, index++);
    std::vector<double> xs(20000);
    for (auto& x : xs) x = draw_gamma(s, shape, 1.0);
    const boost::math::gamma_distribution<> law(shape, 1.0);
    EXPECT_LT(ks_statistic(xs, [&](double x) { return cdf(law, x); }), ks_critical(xs.size())) << "shape " << shape;
  }
}

TEST(Gamma, ScaleMultipliesTheDraw) {
  RngStream a(6, 0), b(6, 0);
  for (int i = 0; i < 100; ++i) EXPECT_DOUBLE_EQ(draw_gamma(a, 2.5, 0.52), 0.52 * draw_gamma(b, 2.5, 1.0));
}

TEST(Gamma, TinyShapeStaysFiniteInLogSpace) {
  RngStream s(7, 0);
  for (int i = 0; i < 10000; ++i) {
    const double lg = draw_log_gamma(s, 1e-3);
    ASSERT_TRUE(std::isfinite(lg));
  }
}

TEST(Gamma, RejectsInvalidParameters) {
  RngStream s(8, 0);
  EXPECT_THROW(draw_gamma(s, 0.0, 1.0), ParameterError);
  EXPECT_THROW(draw_gamma(s, 1.0, -1.0), ParameterError);
  EXPECT_THROW(draw_log_gamma(s, std::nan("")), ParameterError);
}

TEST(Beta, PassesKsTestAndStaysInside) {
  std::uint64_t index = 0;
  for (auto [a, b] : {std::pair{0.5, 0.5}, {2.0, 2.0}, {0.02, 3.0}, {5.0, 0.3}, {30.0, 40.0}}) {
    RngStream s(9, index++);
    std::vector<double> xs(20000);
    for (auto& x : xs) {
      x = draw_beta(s, a, b);
      ASSERT_GT(x, 0.0);
      ASSERT_LT(x, 1.0);
    }
    const boost::math::beta_distribution<> law(a, b);
    EXPECT_LT(ks_statistic(xs, [&](double x) { return cdf(law, x); }), ks_critical(xs.size()))
        << "a " << a << " b " << b;
  }
}

TEST(RatioFromLogs, ClampsToOpenInterval) {
  EXPECT_DOUBLE_EQ(ratio_from_logs(0.0, 0.0), 0.5);
  EXPECT_GT(ratio_from_logs(-2000.0, 0.0), 0.0);
  EXPECT_LT(ratio_from_logs(2000.0, 0.0), 1.0);
  EXPECT_NEAR(ratio_from_logs(std::log(3.0), std::log(1.0)), 0.75, 1e-15);
}

TEST(Binomial, MatchesExactPmfByChiSquare) {
  std::uint64_t index = 0;
  for (auto [trials, p] : {std::pair<std::int64_t, double>{4, 0.1}, {4, 0.85}, {30, 0.4}, {200, 0.03}, {1000, 0.6}}) {
    RngStream s(10, index++);
    const boost::math::binomial_distribution<> law(static_cast<double>(trials), p);
    const int n = 50000;
    std::vector<double> counts(static_cast<std::size_t>(trials) + 1, 0.0);
    for (int i = 0; i < n; ++i) {
      const auto k = draw_binomial(s, trials, p);
      ASSERT_GE(k, 0);
      ASSERT_LE(k, trials);
      counts[static_cast<std::size_t>(k)] += 1.0;
    }
    // Pool cells into bins with expected count >= 20.
    double chi2 = 0.0, obs = 0.0, expct = 0.0;
    int bins = 0;
    for (std::int64_t k = 0; k <= trials; ++k) {
      obs += counts[static_cast<std::size_t>(k)];
      expct += n * pdf(law, static_cast<double>(k));
      if (expct >= 20.0 || k == trials) {
        chi2 += (obs - expct) * (obs - expct) / std::max(expct, 1e-12);
        obs = expct = 0.0;
        ++bins;
      }
    }
    const boost::math::chi_squared_distribution<> ref(bins - 1);
    EXPECT_LT(chi2, quantile(ref, 0.99)) << "trials " << trials << " p " << p;
  }
}

TEST(Binomial, EdgeCases) {
  RngStream s(11, 0);
  EXPECT_EQ(draw_binomial(s, 0, 0.5), 0);
  EXPECT_EQ(draw_binomial(s, 7, 0.0), 0);
  EXPECT_EQ(draw_binomial(s, 7, 1.0), 7);
  EXPECT_EQ(draw_binomial(s, 500, 1.0), 500);
  EXPECT_THROW(draw_binomial(s, -1, 0.5), ParameterError);
  EXPECT_THROW(draw_binomial(s, 3, 1.5), ParameterError);
}
