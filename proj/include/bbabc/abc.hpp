#ifndef BBABC_ABC_HPP
#define BBABC_ABC_HPP

// Likelihood-free samplers: accept-reject ABC and random-walk ABC-MH.
//
// Both engines are generic in the prior, the simulated data type and the
// summary type. A proposal is accepted when distance(summary, observed) is
// strictly below epsilon.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bbabc/error.hpp"
#include "bbabc/parallel.hpp"
#include "bbabc/priors.hpp"
#include "bbabc/random.hpp"

namespace bbabc {

/// Anything that can draw a parameter vector and score one.
template <class P>
concept ParameterPrior = requires(const P& prior, RngStream& stream, const ParamVector& x) {
  { prior.sample(stream) } -> std::convertible_to<ParamVector>;
  { prior.log_pdf(x) } -> std::convertible_to<double>;
  { prior.dimension() } -> std::convertible_to<std::size_t>;
};

template <class Data, class Summary, ParameterPrior Prior = PriorProduct>
struct AbcProblem {
  Prior prior;
  std::function<Data(RngStream&, const ParamVector&)> simulate;
  std::function<Summary(const Data&)> summarize;
  std::function<double(const Summary&, const Summary&)> distance;
  Summary observed;
  double epsilon = std::numeric_limits<double>::infinity();
};

/// Proposal i of an accept-reject run uses substream(master_seed, first_index + i).
struct ProposalStreams {
  std::uint64_t master_seed = 0;
  std::uint64_t first_index = 0;
};

struct AbcArOptions {
  std::size_t target_acceptances = 1000;
  std::uint64_t proposal_cap = 15'000'000;
  unsigned workers = 1;
  /// Retain the simulated summary of each accepted proposal.
  bool keep_summaries = false;
};

template <class Summary>
struct AbcResult {
  std::vector<ParamVector> accepted;
  std::vector<Summary> accepted_summaries;
  /// Proposal index (relative to ProposalStreams::first_index) of each acceptance.
  std::vector<std::uint64_t> accepted_indices;
  std::uint64_t proposals_used = 0;
  std::size_t acceptances = 0;
  /// The proposal budget ran out before the target was reached.
  bool capped = false;
  std::chrono::duration<double> wall_time{0.0};
};

namespace detail {

template <class Summary>
struct ProposalOutcome {
  bool accepted = false;
  ParamVector theta;
  std::optional<Summary> summary;
};

template <class Data, class Summary, class Prior>
ProposalOutcome<Summary> evaluate_proposal(const AbcProblem<Data, Summary, Prior>& problem, RngStream stream,
                                           bool keep_summary) {
  ProposalOutcome<Summary> out;
  out.theta = problem.prior.sample(stream);
  try {
    const Data y = problem.simulate(stream, out.theta);
    Summary s = problem.summarize(y);
    const double d = problem.distance(s, problem.observed);
    out.accepted = d < problem.epsilon;
    if (out.accepted && keep_summary) out.summary = std::move(s);
  } catch (const DegenerateError&) {
    // Summaries undefined for this synthetic data set: treated as a rejection.
    out.accepted = false;
  }
  return out;
}

}  // namespace detail

/// Accept-reject ABC.
///
/// Proposals are evaluated in blocks (in parallel when workers > 1) but
/// scanned in index order, and the run stops at the target-th acceptance.
/// The result is therefore identical for every worker count.
template <class Data, class Summary, class Prior>
AbcResult<Summary> abc_ar(const AbcProblem<Data, Summary, Prior>& problem, const AbcArOptions& options,
                          const ProposalStreams& streams) {
  if (options.target_acceptances == 0) throw ConfigError("abc_ar: target acceptances must be positive");
  if (!(problem.epsilon >= 0.0)) throw ConfigError("abc_ar: epsilon must be nonnegative");
  const auto started = std::chrono::steady_clock::now();
  const unsigned workers = resolve_workers(options.workers);
  const std::uint64_t block = std::max<std::uint64_t>(64, 256ull * workers);

  AbcResult<Summary> result;
  std::vector<detail::ProposalOutcome<Summary>> outcomes;
  std::uint64_t next = 0;
  while (result.acceptances < options.target_acceptances && next < options.proposal_cap) {
    const std::uint64_t count = std::min(block, options.proposal_cap - next);
    outcomes.assign(count, {});
    parallel_for(count, workers, [&](std::size_t i) {
      outcomes[i] = detail::evaluate_proposal(problem, substream(streams.master_seed, streams.first_index + next + i),
                                              options.keep_summaries);
    });
    for (std::uint64_t i = 0; i < count; ++i) {
      ++result.proposals_used;
      if (!outcomes[i].accepted) continue;
      result.accepted.push_back(std::move(outcomes[i].theta));
      result.accepted_indices.push_back(next + i);
      if (options.keep_summaries) result.accepted_summaries.push_back(std::move(*outcomes[i].summary));
      if (++result.acceptances == options.target_acceptances) break;
    }
    next += count;
  }
  result.capped = result.acceptances < options.target_acceptances;
  result.wall_time = std::chrono::steady_clock::now() - started;
  return result;
}

struct MhConfig {
  ParamVector initial_state;
  std::vector<double> proposal_sd;
  std::uint64_t iterations = 0;
  double burn_in_fraction = 0.1;
  /// Retain the simulated summary at every accepted move.
  bool keep_summaries = false;
};

template <class Summary>
struct MhResult {
  /// States theta^(1), ..., theta^(iterations + 1); the first is the initial state.
  std::vector<ParamVector> chain;
  std::uint64_t moves = 0;
  std::vector<Summary> move_summaries;
  double burn_in_fraction = 0.1;
  std::chrono::duration<double> wall_time{0.0};

  /// States after discarding the leading burn-in fraction.
  std::vector<ParamVector> retained() const {
    const auto skip = static_cast<std::size_t>(burn_in_fraction * static_cast<double>(chain.size()));
    return {chain.begin() + static_cast<std::ptrdiff_t>(std::min(skip, chain.size() - 1)), chain.end()};
  }
};

/// min{1, prior ratio * indicator}.
inline double mh_acceptance_probability(double log_prior_ratio, bool within_tolerance) noexcept {
  if (!within_tolerance || std::isnan(log_prior_ratio)) return 0.0;
  return log_prior_ratio >= 0.0 ? 1.0 : std::exp(log_prior_ratio);
}

/// Random-walk ABC-MH with independent normal increments.
///
/// The move is accepted with probability min{1, pi(theta') / pi(theta) *
/// 1[rho < eps]}. The prior-ratio coin is tossed before simulating and a
/// failed coin skips the simulation; a proposal outside
/// the prior support is rejected without simulating.
template <class Data, class Summary, class Prior>
MhResult<Summary> abc_mh(const AbcProblem<Data, Summary, Prior>& problem, const MhConfig& config,
                         RngStream& stream) {
  const std::size_t k = problem.prior.dimension();
  if (config.initial_state.size() != k) throw DimensionError("abc_mh: initial state dimension mismatch");
  if (config.proposal_sd.size() != k) throw DimensionError("abc_mh: proposal sd dimension mismatch");
  for (double s : config.proposal_sd) {
    if (!(s > 0.0)) throw ConfigError("abc_mh: proposal standard deviations must be positive");
  }
  if (!(config.burn_in_fraction >= 0.0 && config.burn_in_fraction < 1.0)) {
    throw ConfigError("abc_mh: burn-in fraction must lie in [0, 1)");
  }
  double current_lp = problem.prior.log_pdf(config.initial_state);
  if (!std::isfinite(current_lp)) throw ConfigError("abc_mh: initial state has zero prior density");

  const auto started = std::chrono::steady_clock::now();
  MhResult<Summary> result;
  result.burn_in_fraction = config.burn_in_fraction;
  result.chain.reserve(config.iterations + 1);
  result.chain.push_back(config.initial_state);
  ParamVector current = config.initial_state;
  ParamVector candidate(k);
  for (std::uint64_t m = 0; m < config.iterations; ++m) {
    for (std::size_t i = 0; i < k; ++i) candidate[i] = current[i] + config.proposal_sd[i] * draw_normal(stream);
    const double lp = problem.prior.log_pdf(candidate);
    bool move = false;
    if (std::isfinite(lp)) {
      const double log_ratio = lp - current_lp;
      if (log_ratio >= 0.0 || std::log(stream.uniform()) < log_ratio) {
        try {
          const Data y = problem.simulate(stream, candidate);
          Summary s = problem.summarize(y);
          if (problem.distance(s, problem.observed) < problem.epsilon) {
            move = true;
            if (config.keep_summaries) result.move_summaries.push_back(std::move(s));
          }
        } catch (const DegenerateError&) {
        }
      }
    }
    if (move) {
      current = candidate;
      current_lp = lp;
      ++result.moves;
    }
    result.chain.push_back(current);
  }
  result.wall_time = std::chrono::steady_clock::now() - started;
  return result;
}

/// Componentwise arithmetic mean.
inline ParamVector posterior_mean(const std::vector<ParamVector>& draws) {
  if (draws.empty()) throw DegenerateError("posterior_mean: empty sample");
  ParamVector mean(draws.front().size(), 0.0);
  for (const auto& d : draws) {
    if (d.size() != mean.size()) throw DimensionError("posterior_mean: ragged sample");
    for (std::size_t i = 0; i < d.size(); ++i) mean[i] += d[i];
  }
  for (double& m : mean) m /= static_cast<double>(draws.size());
  return mean;
}

/// Component `index` of every draw.
inline std::vector<double> component(const std::vector<ParamVector>& draws, std::size_t index) {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& d : draws) out.push_back(d.at(index));
  return out;
}

/// Batch-means Monte Carlo standard error of the mean of `chain`.
///
/// Uses `batches` consecutive batches of floor(n / batches) values; a
/// leftover tail shorter than one batch is dropped.
inline double mcse_batch_means(std::span<const double> chain, std::size_t batches) {
  if (batches < 2 || chain.size() < 2 * batches) {
    throw DimensionError("mcse_batch_means: need at least two batches of two values");
  }
  const std::size_t size = chain.size() / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < size; ++i) acc += chain[b * size + i];
    means[b] = acc / static_cast<double>(size);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(batches);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  const double var_of_batch_mean = ss / static_cast<double>(batches - 1);
  return std::sqrt(var_of_batch_mean / static_cast<double>(batches));
}

/// Standard error of the mean of independent draws.
inline double iid_standard_error(std::span<const double> draws) {
  if (draws.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double m = 0.0;
  for (double x : draws) m += x;
  m /= static_cast<double>(draws.size());
  double ss = 0.0;
  for (double x : draws) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(draws.size() - 1) / static_cast<double>(draws.size()));
}

}  // namespace bbabc

#endif  // BBABC_ABC_HPP
