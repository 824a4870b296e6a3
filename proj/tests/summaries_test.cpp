#include <gtest/gtest.h>

#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <vector>

#include "bbabc/summaries.hpp"

using namespace bbabc;

TEST(Summaries5, PerfectAssociation) {
  const SummaryVector up = summaries5(BivariateDataset({{0.2, 0.2}, {0.8, 0.8}}));
  EXPECT_NEAR(up[4], 1.0, 1e-15);
  EXPECT_NEAR(up[0], (std::log(0.2) + std::log(0.8)) / 2, 1e-15);
  EXPECT_NEAR(up[0], -0.91629073187415511, 1e-15);
  EXPECT_NEAR(up[2], (std::log(0.8) + std::log(0.2)) / 2, 1e-15);
  const SummaryVector down = summaries5(BivariateDataset({{0.2, 0.8}, {0.8, 0.2}}));
  EXPECT_NEAR(down[4], -1.0, 1e-15);
}

TEST(Summaries5, DegenerateInputs) {
  EXPECT_THROW(summaries5(BivariateDataset({{0.5, 0.5}, {0.5, 0.5}})), DegenerateError);
  EXPECT_THROW(summaries5(BivariateDataset({{0.5, 0.5}})), DegenerateError);
  EXPECT_THROW(summaries5(BivariateDataset({{0.1, 0.5}, {0.4, 0.5}})), DegenerateError);
}

TEST(Summaries8, HandEnumeratedExample) {
  const BivariateDataset d({{0.1, 0.2}, {0.2, 0.1}, {0.3, 0.3}});
  const SummaryVector s = summaries8(d);
  ASSERT_EQ(s.size(), 8u);
  EXPECT_NEAR(s[5], 0.5, 1e-15);
  EXPECT_NEAR(s[6], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(s[7], (std::sqrt(0.02) + std::sqrt(0.02) + 0.3) / 3.0, 1e-15);
}

TEST(Summaries8, MonotonePairsGiveOne) {
  const BivariateDataset d({{0.1, 0.05}, {0.2, 0.3}, {0.5, 0.31}, {0.9, 0.99}});
  EXPECT_DOUBLE_EQ(spearman_statistic(d), 1.0);
  EXPECT_DOUBLE_EQ(kendall_statistic(d), 1.0);
}

TEST(Summaries8, DegenerateBranchTakesPrecedence) {
  EXPECT_THROW(summaries8(BivariateDataset(std::vector<Observation>(6, {0.25, 0.25}))), DegenerateError);
}

TEST(Spearman, TiesUseAverageRanks) {
  EXPECT_EQ(detail::average_ranks(std::vector<double>{0.3, 0.1, 0.3, 0.2}), (std::vector<double>{3.5, 1, 3.5, 2}));
}

TEST(Spearman, EqualsPearsonOfRanksWithoutTies) {
  RngStream s(1, 0);
  const BivariateDataset d = sample_bb5(s, BB5Params({1, 2, 0.5, 0.5, 3}), 300);
  const auto rx = detail::average_ranks(d.first());
  const auto ry = detail::average_ranks(d.second());
  EXPECT_NEAR(spearman_statistic(d), pearson(rx, ry), 1e-12);
}

TEST(Spearman, RawDifferenceModeUsesValues) {
  const BivariateDataset d({{0.1, 0.2}, {0.2, 0.1}, {0.3, 0.3}});
  const double want = 1.0 - 6.0 * (0.01 + 0.01 + 0.0) / (3.0 * 8.0);
  EXPECT_NEAR(spearman_statistic(d, SpearmanMode::kRawDifference), want, 1e-15);
}

TEST(Correlations, BoundedAndMonotoneInvariant) {
  RngStream s(2, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const BivariateDataset d = sample_bb8(s, BB8Params({2, 1, 1, 2, 4, 6, 2, 1}), 60);
    const SummaryVector v = summaries8(d);
    for (std::size_t i : {4, 5, 6}) {
      EXPECT_GE(v[i], -1.0);
      EXPECT_LE(v[i], 1.0);
    }
    std::vector<Observation> warped;
    for (const auto& o : d) warped.push_back({o.z1 * o.z1 * o.z1, std::sqrt(o.z2)});
    const BivariateDataset w(std::move(warped));
    EXPECT_NEAR(spearman_statistic(w), v[5], 1e-12);
    EXPECT_DOUBLE_EQ(kendall_statistic(w), v[6]);
  }
}

TEST(Summaries5, MeanLogMatchesBetaExpectation) {
  // Z1 ~ Beta(2, 2) under A1, so E[log Z1] = psi(2) - psi(4).
  RngStream s(3, 0);
  const std::size_t n = 10000;
  const BivariateDataset d = sample_bb5(s, BB5Params({1, 1, 1, 1, 1}), n);
  double sum = 0, sumsq = 0;
  for (const auto& o : d) {
    sum += std::log(o.z1);
    sumsq += std::log(o.z1) * std::log(o.z1);
  }
  const double mean = sum / n;
  const double se = std::sqrt((sumsq / n - mean * mean) / n);
  EXPECT_NEAR(summaries5(d)[0], boost::math::digamma(2.0) - boost::math::digamma(4.0), 4 * se);
}

TEST(LegacyMomentStat, HandValues) {
  EXPECT_DOUBLE_EQ(legacy_moment_stat(BivariateDataset({{0.5, 0.5}})), 1.0);
  EXPECT_NEAR(legacy_moment_stat(BivariateDataset({{0.5, 0.5}, {0.9, 0.9}})), (1.0 + 0.01 / 0.81) / 2.0, 1e-15);
  EXPECT_NEAR(legacy_moment_stat(BivariateDataset({{0.1089, 0.0038}})), 0.8911 * 0.9962 / (0.1089 * 0.0038), 1e-9);
  EXPECT_NEAR(legacy_moment_stat(BivariateDataset({{0.1089, 0.0038}})), 2145.2, 0.05);
}

TEST(LegacyMomentStat, ConvergesToCrossMoment) {
  RngStream s(4, 0);
  const BB5Params a2({3, 2.5, 2, 1.5, 1});
  const std::size_t n = 400000;
  const BivariateDataset d = sample_bb5(s, a2, n);
  double sumsq = 0;
  const double mean = legacy_moment_stat(d);
  for (const auto& o : d) {
    const double v = (1 - o.z1) * (1 - o.z2) / (o.z1 * o.z2);
    sumsq += (v - mean) * (v - mean);
  }
  EXPECT_NEAR(mean, theoretical_cross_moment(a2), 4 * std::sqrt(sumsq / n / n));
}

TEST(L1Distance, Properties) {
  const SummaryVector zero({0, 0, 0, 0, 0});
  const SummaryVector b({0.1, -0.1, 0.2, 0, 0.1});
  EXPECT_NEAR(l1_distance(zero, b), 0.5, 1e-15);
  EXPECT_EQ(l1_distance(b, b), 0.0);
  EXPECT_THROW(l1_distance(zero, SummaryVector({1, 2})), DimensionError);
  RngStream s(5, 0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x(8), y(8), z(8);
    for (int i = 0; i < 8; ++i) {
      x[i] = draw_normal(s);
      y[i] = draw_normal(s);
      z[i] = draw_normal(s);
    }
    const SummaryVector X(x), Y(y), Z(z);
    EXPECT_EQ(l1_distance(X, Y), l1_distance(Y, X));
    EXPECT_GT(l1_distance(X, Y), 0.0);
    EXPECT_LE(l1_distance(X, Z), l1_distance(X, Y) + l1_distance(Y, Z) + 1e-15);
  }
}

TEST(SummaryVector, RejectsNonFinite) {
  EXPECT_THROW(SummaryVector({1.0, std::nan("")}), DegenerateError);
  EXPECT_THROW(SummaryVector({1.0, HUGE_VAL}), DegenerateError);
}
