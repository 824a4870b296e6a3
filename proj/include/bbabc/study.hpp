#ifndef BBABC_STUDY_HPP
#define BBABC_STUDY_HPP

// Repeated-sampling study of the estimators: simulate N data sets at a known
// truth, estimate each by accept-reject ABC (and MMLE for the 5-parameter
// law), and tabulate bias and MSE.
//
// Stream layout under master seed s:
//   data set j, attempt t      substream(s, 2^63 + j * 2^16 + t)
//   ABC proposal i of set j    substream(s, j * 2^32 + i)

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbabc/abc.hpp"
#include "bbabc/error.hpp"
#include "bbabc/estimation.hpp"
#include "bbabc/model.hpp"
#include "bbabc/parallel.hpp"
#include "bbabc/priors.hpp"
#include "bbabc/summaries.hpp"

namespace bbabc {

enum class ModelKind { kBB5, kBB8 };

inline std::size_t dimension(ModelKind m) noexcept { return m == ModelKind::kBB5 ? 5 : 8; }
inline std::string to_string(ModelKind m) { return m == ModelKind::kBB5 ? "bb5" : "bb8"; }

inline ModelKind parse_model(std::string_view text) {
  const std::string s = detail::lower(detail::trim(text));
  if (s == "bb5") return ModelKind::kBB5;
  if (s == "bb8") return ModelKind::kBB8;
  throw ConfigError("unknown model '" + std::string(text) + "' (expected bb5 or bb8)");
}

/// The study settings A1..A5; nullopt for any other name.
inline std::optional<ParamVector> named_setting(std::string_view name) {
  const std::string s = detail::lower(detail::trim(name));
  if (s == "a1") return ParamVector{1, 1, 1, 1, 1};
  if (s == "a2") return ParamVector{3, 2.5, 2, 1.5, 1};
  if (s == "a3") return ParamVector{1, 1, 2, 6, 1};
  if (s == "a4") return ParamVector{2, 1, 1, 2, 4, 6, 2, 1};
  if (s == "a5") return ParamVector{3.5, 2, 1.5, 4, 1, 2.5, 3, 4.5};
  return std::nullopt;
}

/// A named setting or a comma-separated list of values.
inline ParamVector parse_truth(std::string_view text) {
  if (auto named = named_setting(text)) return *named;
  ParamVector out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) out.push_back(detail::parse_double(detail::trim(item), "truth"));
  if (out.empty()) throw ConfigError("empty truth");
  return out;
}

/// Simulated data set of the observed size under either model.
inline BivariateDataset simulate_model(RngStream& stream, ModelKind model, const ParamVector& theta, std::size_t n) {
  if (theta.size() != dimension(model)) throw DimensionError("simulate_model: parameter dimension mismatch");
  if (model == ModelKind::kBB5) return sample_bb5(stream, BB5Params({theta[0], theta[1], theta[2], theta[3], theta[4]}), n);
  std::array<double, 8> d{};
  std::copy(theta.begin(), theta.end(), d.begin());
  return sample_bb8(stream, BB8Params(d), n);
}

/// S1..S5 for the 5-parameter law, S1..S8 for the 8-parameter law.
inline SummaryVector model_summaries(ModelKind model, const BivariateDataset& data,
                                     SpearmanMode mode = SpearmanMode::kRanks) {
  return model == ModelKind::kBB5 ? summaries5(data) : summaries8(data, mode);
}

using BivariateProblem = AbcProblem<BivariateDataset, SummaryVector>;

inline BivariateProblem make_bivariate_problem(const BivariateDataset& observed, ModelKind model, PriorProduct prior,
                                               double epsilon, SpearmanMode mode = SpearmanMode::kRanks) {
  if (prior.dimension() != dimension(model)) throw DimensionError("prior dimension does not match the model");
  const std::size_t n = observed.size();
  return BivariateProblem{std::move(prior),
                          [model, n](RngStream& s, const ParamVector& theta) { return simulate_model(s, model, theta, n); },
                          [model, mode](const BivariateDataset& d) { return model_summaries(model, d, mode); },
                          [](const SummaryVector& a, const SummaryVector& b) { return l1_distance(a, b); },
                          model_summaries(model, observed, mode),
                          epsilon};
}

struct StudyConfig {
  ModelKind model = ModelKind::kBB5;
  ParamVector truth{1, 1, 1, 1, 1};
  std::string truth_label = "A1";
  std::string prior_text = "G1";
  std::size_t n = 100;
  double epsilon = 0.6;
  std::size_t datasets = 200;
  std::size_t target_acceptances = 1000;
  std::uint64_t proposal_cap = 15'000'000;
  std::uint64_t master_seed = 0;
  unsigned workers = 1;
  SpearmanMode spearman = SpearmanMode::kRanks;

  PriorProduct prior() const { return parse_prior(prior_text, dimension(model)); }
};

namespace detail {

inline std::uint64_t parse_count(const std::string& value, const std::string& key, bool allow_zero = false) {
  const double v = parse_double(value, key);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e19 || (!allow_zero && v == 0.0)) {
    throw ConfigError(key + ": expected a " + (allow_zero ? "nonnegative" : "positive") + " integer, got '" + value + "'");
  }
  return static_cast<std::uint64_t>(v);
}

}  // namespace detail

/// Accumulates key=value settings, then validates them as a whole.
class StudyConfigBuilder {
 public:
  void set(const std::string& raw_key, const std::string& raw_value) {
    const std::string key = detail::lower(detail::trim(raw_key));
    const std::string value = detail::trim(raw_value);
    if (key == "model") {
      model_ = parse_model(value);
    } else if (key == "truth") {
      config_.truth = parse_truth(value);
      config_.truth_label = value;
    } else if (key == "prior") {
      config_.prior_text = value;
    } else if (key == "eps" || key == "epsilon") {
      config_.epsilon = detail::parse_double(value, key);
      if (!(config_.epsilon > 0.0)) throw ConfigError("eps must be positive");
    } else if (key == "n") {
      config_.n = detail::parse_count(value, key);
    } else if (key == "datasets") {
      config_.datasets = detail::parse_count(value, key);
    } else if (key == "acceptances") {
      config_.target_acceptances = detail::parse_count(value, key);
    } else if (key == "cap") {
      config_.proposal_cap = detail::parse_count(value, key);
    } else if (key == "seed") {
      config_.master_seed = detail::parse_count(value, key, true);
    } else if (key == "workers") {
      config_.workers = static_cast<unsigned>(detail::parse_count(value, key, true));
    } else if (key == "spearman") {
      const std::string v = detail::lower(value);
      if (v == "ranks") {
        config_.spearman = SpearmanMode::kRanks;
      } else if (v == "raw") {
        config_.spearman = SpearmanMode::kRawDifference;
      } else {
        throw ConfigError("spearman: expected ranks or raw");
      }
    } else {
      throw ConfigError("unknown setting '" + raw_key + "'");
    }
  }

  /// Whitespace- or newline-separated key=value tokens; '#' starts a comment.
  void read(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream tokens(line);
      std::string token;
      while (tokens >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + token + "'");
        set(token.substr(0, eq), token.substr(eq + 1));
      }
    }
  }

  StudyConfig build() const {
    StudyConfig c = config_;
    const std::size_t k = c.truth.size();
    if (model_) {
      c.model = *model_;
      if (k != dimension(c.model)) {
        throw DimensionError("truth " + c.truth_label + " has " + std::to_string(k) + " components but model " +
                             to_string(c.model) + " needs " + std::to_string(dimension(c.model)));
      }
    } else if (k == 5) {
      c.model = ModelKind::kBB5;
    } else if (k == 8) {
      c.model = ModelKind::kBB8;
    } else {
      throw DimensionError("truth must have 5 or 8 components");
    }
    try {
      if (c.model == ModelKind::kBB5) {
        BB5Params({c.truth[0], c.truth[1], c.truth[2], c.truth[3], c.truth[4]});
      } else {
        std::array<double, 8> d{};
        std::copy(c.truth.begin(), c.truth.end(), d.begin());
        BB8Params{d};
      }
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("truth: ") + e.what());
    }
    if (c.n < 2) throw ConfigError("n must be at least 2");
    (void)c.prior();
    return c;
  }

 private:
  StudyConfig config_;
  std::optional<ModelKind> model_;
};

inline StudyConfig parse_config(std::string_view text) {
  StudyConfigBuilder b;
  std::istringstream in{std::string(text)};
  b.read(in);
  return b.build();
}

inline StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  StudyConfigBuilder b;
  b.read(in);
  return b.build();
}

struct DatasetEstimate {
  std::size_t dataset_index = 0;
  std::string method;
  ParamVector estimate;
  std::optional<std::uint64_t> proposals;
  bool capped = false;
  friend bool operator==(const DatasetEstimate&, const DatasetEstimate&) = default;
};

struct MethodSummary {
  std::string method;
  std::vector<double> bias;
  std::vector<double> mse;
  std::size_t datasets = 0;
  std::optional<double> proposals_mean;
  std::optional<double> proposals_sd;
  std::size_t capped = 0;
  friend bool operator==(const MethodSummary&, const MethodSummary&) = default;
};

struct StudyReport {
  ParamVector truth;
  std::vector<DatasetEstimate> estimates;
  std::vector<MethodSummary> summaries;
  /// Data sets regenerated because their summaries were undefined.
  std::size_t resampled = 0;
  std::vector<std::string> failures;

  const MethodSummary& summary(const std::string& method) const {
    for (const auto& s : summaries) {
      if (s.method == method) return s;
    }
    throw ConfigError("report has no method '" + method + "'");
  }
};

/// Bias, MSE and proposal statistics per method, methods in order of first
/// appearance.
inline std::vector<MethodSummary> aggregate_estimates(const std::vector<DatasetEstimate>& estimates,
                                                      const ParamVector& truth) {
  std::vector<MethodSummary> out;
  for (const auto& e : estimates) {
    if (std::none_of(out.begin(), out.end(), [&](const MethodSummary& s) { return s.method == e.method; })) {
      out.push_back({e.method, {}, {}, 0, std::nullopt, std::nullopt, 0});
    }
  }
  const std::size_t k = truth.size();
  for (auto& s : out) {
    s.bias.assign(k, 0.0);
    s.mse.assign(k, 0.0);
    std::vector<double> proposals;
    for (const auto& e : estimates) {
      if (e.method != s.method) continue;
      if (e.estimate.size() != k) throw DimensionError("aggregate_estimates: estimate dimension mismatch");
      ++s.datasets;
      for (std::size_t i = 0; i < k; ++i) {
        const double err = e.estimate[i] - truth[i];
        s.bias[i] += err;
        s.mse[i] += err * err;
      }
      if (e.proposals) proposals.push_back(static_cast<double>(*e.proposals));
      if (e.capped) ++s.capped;
    }
    for (std::size_t i = 0; i < k; ++i) {
      s.bias[i] /= static_cast<double>(s.datasets);
      s.mse[i] /= static_cast<double>(s.datasets);
    }
    if (!proposals.empty()) {
      double m = 0.0;
      for (double p : proposals) m += p;
      m /= static_cast<double>(proposals.size());
      double ss = 0.0;
      for (double p : proposals) ss += (p - m) * (p - m);
      s.proposals_mean = m;
      s.proposals_sd = proposals.size() > 1 ? std::sqrt(ss / static_cast<double>(proposals.size() - 1)) : 0.0;
    }
  }
  return out;
}

inline RngStream dataset_stream(std::uint64_t master_seed, std::size_t dataset, std::uint64_t attempt) {
  return substream(master_seed, (1ull << 63) + (static_cast<std::uint64_t>(dataset) << 16) + attempt);
}

inline ProposalStreams dataset_proposals(std::uint64_t master_seed, std::size_t dataset) {
  return {master_seed, static_cast<std::uint64_t>(dataset) << 32};
}

inline StudyReport run_sim_study(const StudyConfig& config) {
  const PriorProduct prior = config.prior();
  if (config.truth.size() != dimension(config.model)) throw DimensionError("truth dimension does not match the model");

  struct Slot {
    std::vector<DatasetEstimate> estimates;
    std::vector<std::string> failures;
    std::size_t resampled = 0;
  };
  std::vector<Slot> slots(config.datasets);
  parallel_for(config.datasets, config.workers, [&](std::size_t j) {
    Slot& slot = slots[j];
    std::optional<BivariateProblem> problem;
    std::optional<BivariateDataset> data;
    for (std::uint64_t attempt = 0; attempt < (1u << 16) && !problem; ++attempt) {
      RngStream stream = dataset_stream(config.master_seed, j, attempt);
      data = simulate_model(stream, config.model, config.truth, config.n);
      try {
        problem = make_bivariate_problem(*data, config.model, prior, config.epsilon, config.spearman);
      } catch (const DegenerateError& e) {
        ++slot.resampled;
        slot.failures.push_back("dataset " + std::to_string(j) + ": resampled (" + e.what() + ")");
      }
    }
    if (!problem) {
      slot.failures.push_back("dataset " + std::to_string(j) + ": no usable data set");
      return;
    }
    if (config.model == ModelKind::kBB5) {
      try {
        const MMLEResult m = mmle5(*data);
        slot.estimates.push_back({j, "MMLE", ParamVector(m.alpha_hat.begin(), m.alpha_hat.end()), std::nullopt, false});
      } catch (const std::exception& e) {
        slot.failures.push_back("dataset " + std::to_string(j) + ": MMLE failed (" + e.what() + ")");
      }
    }
    AbcArOptions options;
    options.target_acceptances = config.target_acceptances;
    options.proposal_cap = config.proposal_cap;
    options.workers = 1;
    const auto result = abc_ar(*problem, options, dataset_proposals(config.master_seed, j));
    if (result.accepted.empty()) {
      slot.failures.push_back("dataset " + std::to_string(j) + ": ABC accepted nothing within the cap");
      return;
    }
    slot.estimates.push_back({j, "ABC", posterior_mean(result.accepted), result.proposals_used, result.capped});
  });

  StudyReport report;
  report.truth = config.truth;
  for (auto& slot : slots) {
    for (auto& e : slot.estimates) report.estimates.push_back(std::move(e));
    for (auto& f : slot.failures) report.failures.push_back(std::move(f));
    report.resampled += slot.resampled;
  }
  report.summaries = aggregate_estimates(report.estimates, report.truth);
  return report;
}

namespace detail {

inline std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

/// Splits RFC 4180 CSV into records of fields.
inline std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && in.peek() == '\n') in.get(c);
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw ConfigError("parse_csv: unterminated quoted field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Long-format bias/MSE table: one row per method and parameter.
inline void write_summary_csv(std::ostream& out, const StudyReport& report) {
  out << "method,parameter,truth,bias,mse,n_datasets,proposals_mean,proposals_sd,capped\n";
  for (const auto& s : report.summaries) {
    for (std::size_t i = 0; i < s.bias.size(); ++i) {
      out << detail::csv_field(s.method) << ",alpha" << i + 1 << ',' << detail::csv_number(report.truth[i]) << ','
          << detail::csv_number(s.bias[i]) << ',' << detail::csv_number(s.mse[i]) << ',' << s.datasets << ','
          << (s.proposals_mean ? detail::csv_number(*s.proposals_mean) : "") << ','
          << (s.proposals_sd ? detail::csv_number(*s.proposals_sd) : "") << ',' << s.capped << '\n';
    }
  }
}

/// One row per data set and method; the histogram input.
inline void write_estimates_csv(std::ostream& out, const StudyReport& report) {
  out << "dataset_index,method";
  for (std::size_t i = 0; i < report.truth.size(); ++i) out << ",alpha" << i + 1;
  out << ",proposals,capped\n";
  for (const auto& e : report.estimates) {
    out << e.dataset_index << ',' << detail::csv_field(e.method);
    for (double v : e.estimate) out << ',' << detail::csv_number(v);
    out << ',' << (e.proposals ? std::to_string(*e.proposals) : "") << ',' << (e.capped ? 1 : 0) << '\n';
  }
}

inline std::vector<DatasetEstimate> read_estimates_csv(std::istream& in) {
  const auto rows = parse_csv(in);
  if (rows.empty() || rows[0].size() < 4) throw ConfigError("estimates CSV: missing header");
  const std::size_t k = rows[0].size() - 4;
  std::vector<DatasetEstimate> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != k + 4) throw ConfigError("estimates CSV: row " + std::to_string(r) + " has the wrong width");
    DatasetEstimate e;
    e.dataset_index = detail::parse_count(f[0], "dataset_index", true);
    e.method = f[1];
    for (std::size_t i = 0; i < k; ++i) e.estimate.push_back(detail::parse_double(f[2 + i], "estimate"));
    if (!f[k + 2].empty()) e.proposals = detail::parse_count(f[k + 2], "proposals", true);
    e.capped = f[k + 3] == "1";
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<MethodSummary> read_summary_csv(std::istream& in) {
  const auto rows = parse_csv(in);
  if (rows.empty() || rows[0].size() != 9) throw ConfigError("summary CSV: unexpected header");
  std::vector<MethodSummary> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != 9) throw ConfigError("summary CSV: row " + std::to_string(r) + " has the wrong width");
    if (out.empty() || out.back().method != f[0]) {
      MethodSummary s;
      s.method = f[0];
      s.datasets = detail::parse_count(f[5], "n_datasets", true);
      if (!f[6].empty()) s.proposals_mean = detail::parse_double(f[6], "proposals_mean");
      if (!f[7].empty()) s.proposals_sd = detail::parse_double(f[7], "proposals_sd");
      s.capped = detail::parse_count(f[8], "capped", true);
      out.push_back(std::move(s));
    }
    out.back().bias.push_back(detail::parse_double(f[3], "bias"));
    out.back().mse.push_back(detail::parse_double(f[4], "mse"));
  }
  return out;
}

/// Writes summary.csv and estimates.csv into `directory`.
inline void emit_report(const StudyReport& report, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  auto open = [&](const char* name) {
    std::ofstream f(directory / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (directory / name).string());
    return f;
  };
  {
    auto f = open("summary.csv");
    write_summary_csv(f, report);
  }
  {
    auto f = open("estimates.csv");
    write_estimates_csv(f, report);
  }
}

/// Pairs (z1, z2) as CSV with a header row.
inline void write_dataset_csv(std::ostream& out, const BivariateDataset& data) {
  out << "z1,z2\n";
  for (const auto& o : data) out << detail::csv_number(o.z1) << ',' << detail::csv_number(o.z2) << '\n';
}

inline BivariateDataset read_dataset_csv(std::istream& in) {
  const auto rows = parse_csv(in);
  std::vector<Observation> pairs;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 2) throw ConfigError("dataset CSV: row " + std::to_string(r + 1) + " needs two columns");
    if (r == 0 && detail::lower(detail::trim(f[0])) == "z1") continue;
    pairs.push_back({detail::parse_double(detail::trim(f[0]), "z1"), detail::parse_double(detail::trim(f[1]), "z2")});
  }
  return BivariateDataset(std::move(pairs));
}

}  // namespace bbabc

#endif  // BBABC_STUDY_HPP
