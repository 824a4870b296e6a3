#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "bbabc/study.hpp"

using namespace bbabc;

namespace {

StudyConfig small_config() {
  return parse_config("truth=A1 prior=G1 eps=1.5 n=50 datasets=3 acceptances=20 seed=7");
}

std::vector<std::vector<std::string>> read_csv_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  return parse_csv(in);
}

}  // namespace

TEST(Config, ParsesKeyValueText) {
  const StudyConfig c = parse_config("truth=A1 prior=G1 eps=0.6 n=100");
  EXPECT_EQ(c.truth, (ParamVector{1, 1, 1, 1, 1}));
  EXPECT_EQ(c.model, ModelKind::kBB5);
  EXPECT_DOUBLE_EQ(c.epsilon, 0.6);
  EXPECT_EQ(c.n, 100u);
  EXPECT_EQ(c.proposal_cap, 15'000'000u);
  EXPECT_EQ(c.prior(), PriorProduct::iid(named_priors::g1(), 5));
}

TEST(Config, InfersModelFromTruthAndAcceptsComments) {
  const StudyConfig c = parse_config("# eight parameters\ntruth=A5 prior=U2 # trailing\nspearman=raw\n");
  EXPECT_EQ(c.model, ModelKind::kBB8);
  EXPECT_EQ(c.truth.size(), 8u);
  EXPECT_EQ(c.spearman, SpearmanMode::kRawDifference);
  EXPECT_EQ(parse_config("truth=0.5,1,2,3,4").truth, (ParamVector{0.5, 1, 2, 3, 4}));
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("truth=A4 model=bb5"), DimensionError);
  EXPECT_THROW(parse_config("prior=G7"), ConfigError);
  EXPECT_THROW(parse_config("colour=blue"), ConfigError);
  EXPECT_THROW(parse_config("n=1"), ConfigError);
  EXPECT_THROW(parse_config("datasets=0"), ConfigError);
  EXPECT_THROW(parse_config("eps=abc"), ConfigError);
  EXPECT_THROW(parse_config("truth=1,1,-1,1,1"), ConfigError);
  EXPECT_THROW(parse_config("model=bb6"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/study.cfg"), ConfigError);
}

TEST(Streams, DatasetAndProposalIndicesDoNotOverlap) {
  EXPECT_EQ(dataset_proposals(5, 3).first_index, 3ull << 32);
  EXPECT_EQ(dataset_stream(5, 3, 1), substream(5, (1ull << 63) + (3ull << 16) + 1));
}

TEST(Study, OneDatasetGivesOneRowPerMethod) {
  StudyConfig c = small_config();
  c.datasets = 1;
  const StudyReport r = run_sim_study(c);
  ASSERT_TRUE(r.failures.empty());
  const auto dir = std::filesystem::temp_directory_path() / "bbabc_study_one";
  std::filesystem::remove_all(dir);
  emit_report(r, dir);
  const auto summary = read_csv_file(dir / "summary.csv");
  const auto estimates = read_csv_file(dir / "estimates.csv");
  EXPECT_EQ(summary.front(), (std::vector<std::string>{"method", "parameter", "truth", "bias", "mse", "n_datasets",
                                                        "proposals_mean", "proposals_sd", "capped"}));
  EXPECT_EQ(summary.size(), 1u + 2u * 5u);  // MMLE and ABC, five parameters each
  EXPECT_EQ(estimates.size(), 1u + 2u);
  EXPECT_EQ(estimates.front().front(), "dataset_index");
}

TEST(Study, BiasRecomputedFromEstimatesFile) {
  const StudyReport r = run_sim_study(small_config());
  std::stringstream io;
  write_estimates_csv(io, r);
  const auto back = read_estimates_csv(io);
  EXPECT_EQ(back, r.estimates);
  for (const std::string method : {"MMLE", "ABC"}) {
    std::vector<double> bias(5, 0.0);
    double count = 0;
    for (const auto& e : back) {
      if (e.method != method) continue;
      count += 1;
      for (std::size_t i = 0; i < 5; ++i) bias[i] += e.estimate[i] - r.truth[i];
    }
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(bias[i] / count, r.summary(method).bias[i], 1e-12);
  }
}

TEST(Study, SummaryRoundTrip) {
  const StudyReport r = run_sim_study(small_config());
  std::stringstream io;
  write_summary_csv(io, r);
  EXPECT_EQ(read_summary_csv(io), r.summaries);
  const MethodSummary& abc = r.summary("ABC");
  EXPECT_EQ(abc.datasets, 3u);
  ASSERT_TRUE(abc.proposals_mean.has_value());
  EXPECT_GE(*abc.proposals_mean, 20.0);
  EXPECT_FALSE(r.summary("MMLE").proposals_mean.has_value());
  EXPECT_THROW(r.summary("nope"), ConfigError);
}

TEST(Study, BitIdenticalReruns) {
  StudyConfig c = small_config();
  const StudyReport a = run_sim_study(c);
  c.workers = 3;
  const StudyReport b = run_sim_study(c);
  EXPECT_EQ(a.estimates, b.estimates);
  EXPECT_EQ(a.summaries, b.summaries);
}

TEST(Study, InfiniteToleranceBiasIsPriorMeanMinusTruth) {
  StudyConfig c = small_config();
  c.epsilon = std::numeric_limits<double>::infinity();
  c.datasets = 4;
  c.target_acceptances = 1000;
  const StudyReport r = run_sim_study(c);
  const MethodSummary& abc = r.summary("ABC");
  for (double b : abc.bias) EXPECT_NEAR(b, 1.3 - 1.0, 0.06);
  EXPECT_DOUBLE_EQ(*abc.proposals_mean, 1000.0);
  EXPECT_DOUBLE_EQ(*abc.proposals_sd, 0.0);
}

TEST(Study, EightParameterModelHasNoMomentEstimator) {
  StudyConfig c = parse_config("truth=A4 prior=G2 eps=4 n=50 datasets=2 acceptances=5");
  const StudyReport r = run_sim_study(c);
  EXPECT_EQ(r.summaries.size(), 1u);
  EXPECT_EQ(r.summary("ABC").bias.size(), 8u);
}

TEST(Aggregate, KnownValues) {
  const std::vector<DatasetEstimate> es{{0, "X", {1.0, 3.0}, 10, false}, {1, "X", {3.0, 3.0}, 20, true}};
  const auto s = aggregate_estimates(es, {1.0, 1.0});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].bias, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(s[0].mse, (std::vector<double>{2.0, 4.0}));
  EXPECT_DOUBLE_EQ(*s[0].proposals_mean, 15.0);
  EXPECT_NEAR(*s[0].proposals_sd, std::sqrt(50.0), 1e-12);
  EXPECT_EQ(s[0].capped, 1u);
  EXPECT_THROW(aggregate_estimates(es, {1.0}), DimensionError);
}

TEST(Csv, QuotingRoundTrip) {
  std::istringstream in("a,\"b,c\",\"say \"\"hi\"\"\"\r\n1,,\"line\nbreak\"\n");
  const auto rows = parse_csv(in);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"a", "b,c", "say \"hi\""}));
  EXPECT_EQ(rows[1], (std::vector<std::string>{"1", "", "line\nbreak"}));
  EXPECT_EQ(detail::csv_field("b,c"), "\"b,c\"");
  EXPECT_EQ(detail::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  std::istringstream bad("\"open");
  EXPECT_THROW(parse_csv(bad), ConfigError);
}

TEST(Csv, NumbersRoundTripExactly) {
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(detail::csv_number(x)), x);
}

TEST(DatasetCsv, RoundTrip) {
  RngStream s(1, 0);
  const BivariateDataset d = sample_bb5(s, BB5Params({1, 2, 3, 4, 5}), 25);
  std::stringstream io;
  write_dataset_csv(io, d);
  EXPECT_EQ(read_dataset_csv(io), d);
}
