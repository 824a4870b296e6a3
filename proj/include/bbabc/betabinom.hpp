#ifndef BBABC_BETABINOM_HPP
#define BBABC_BETABINOM_HPP

// Bivariate beta-binomial model for paired purchase counts.
//
// Household k has purchase probabilities (p_b, p_e) ~ BB5(alpha) and buys
// bacon X_b ~ Bin(trips, p_b) and eggs X_e ~ Bin(trips, p_e) times,
// conditionally independent. Observed data are the (trips+1) x (trips+1)
// contingency table of (X_b, X_e) counts over all households.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bbabc/abc.hpp"
#include "bbabc/error.hpp"
#include "bbabc/estimation.hpp"
#include "bbabc/model.hpp"
#include "bbabc/priors.hpp"
#include "bbabc/random.hpp"

namespace bbabc {

/// Square table of nonnegative counts: rows index the bacon count l,
/// columns the eggs count j, both in {0, ..., trips}.
class CountTable {
 public:
  CountTable() : CountTable(4) {}
  explicit CountTable(std::int64_t trips) : dim_(static_cast<std::size_t>(trips + 1)) {
    if (trips < 1) throw ParameterError("CountTable: trips must be at least 1");
    cells_.assign(dim_ * dim_, 0);
  }
  CountTable(std::int64_t trips, std::vector<std::int64_t> row_major) : CountTable(trips) {
    if (row_major.size() != cells_.size()) throw DimensionError("CountTable: wrong number of cells");
    for (auto c : row_major) {
      if (c < 0) throw ParameterError("CountTable: counts must be nonnegative");
    }
    cells_ = std::move(row_major);
  }

  std::size_t dim() const noexcept { return dim_; }
  std::int64_t trips() const noexcept { return static_cast<std::int64_t>(dim_) - 1; }
  std::int64_t& at(std::size_t bacon, std::size_t eggs) { return cells_.at(bacon * dim_ + eggs); }
  std::int64_t at(std::size_t bacon, std::size_t eggs) const { return cells_.at(bacon * dim_ + eggs); }
  const std::vector<std::int64_t>& cells() const noexcept { return cells_; }

  std::int64_t total() const noexcept {
    std::int64_t t = 0;
    for (auto c : cells_) t += c;
    return t;
  }
  /// Households per bacon count.
  std::vector<std::int64_t> row_totals() const {
    std::vector<std::int64_t> out(dim_, 0);
    for (std::size_t l = 0; l < dim_; ++l) {
      for (std::size_t j = 0; j < dim_; ++j) out[l] += at(l, j);
    }
    return out;
  }
  /// Households per eggs count.
  std::vector<std::int64_t> column_totals() const {
    std::vector<std::int64_t> out(dim_, 0);
    for (std::size_t l = 0; l < dim_; ++l) {
      for (std::size_t j = 0; j < dim_; ++j) out[j] += at(l, j);
    }
    return out;
  }

  friend bool operator==(const CountTable&, const CountTable&) = default;

 private:
  std::size_t dim_;
  std::vector<std::int64_t> cells_;
};

/// Bacon (rows) by eggs (columns) purchase counts over 4 trips, 548 households.
inline CountTable bacon_eggs_table() {
  return CountTable(4, {254, 115, 42, 13, 6,  //
                        34,  29,  16, 6,  1,  //
                        8,   8,   3,  3,  1,  //
                        0,   0,   4,  1,  1,  //
                        1,   1,   1,  0,  0});
}

/// Reads a whitespace-separated integer grid. '#' starts a comment. A grid
/// with one extra row and column is read as carrying totals, which must match.
inline CountTable parse_count_table(std::istream& in) {
  std::vector<std::vector<std::int64_t>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::int64_t> row;
    std::string token;
    while (ls >> token) {
      try {
        std::size_t used = 0;
        const long long v = std::stoll(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        row.push_back(v);
      } catch (const std::exception&) {
        throw ConfigError("count table: cannot parse '" + token + "' as an integer");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw ConfigError("count table: need at least a 2 x 2 grid");
  for (const auto& r : rows) {
    if (r.size() != rows.size()) throw ConfigError("count table: grid must be square");
  }
  const bool has_totals = [&] {
    // Last column/row equal to the sums of the others.
    const std::size_t n = rows.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
      std::int64_t rs = 0, cs = 0;
      for (std::size_t j = 0; j < n; ++j) {
        rs += rows[i][j];
        cs += rows[j][i];
      }
      if (rs != rows[i][n] || cs != rows[n][i]) return false;
    }
    std::int64_t grand = 0;
    for (std::size_t i = 0; i < n; ++i) grand += rows[i][n];
    return grand == rows[n][n];
  }();
  const std::size_t dim = has_totals ? rows.size() - 1 : rows.size();
  std::vector<std::int64_t> cells;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) cells.push_back(rows[i][j]);
  }
  try {
    return CountTable(static_cast<std::int64_t>(dim) - 1, std::move(cells));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("count table: ") + e.what());
  }
}

inline CountTable load_count_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open count table '" + path + "'");
  return parse_count_table(in);
}

/// Writes the grid with a totals column and row.
inline void write_count_table(std::ostream& out, const CountTable& t) {
  const auto rows = t.row_totals();
  const auto cols = t.column_totals();
  for (std::size_t l = 0; l < t.dim(); ++l) {
    for (std::size_t j = 0; j < t.dim(); ++j) out << std::setw(5) << t.at(l, j);
    out << std::setw(7) << rows[l] << '\n';
  }
  for (auto c : cols) out << std::setw(5) << c;
  out << std::setw(7) << t.total() << '\n';
}

/// Draws one synthetic table under the hierarchical model.
inline CountTable simulate_table(RngStream& stream, const BB5Params& params, std::int64_t households,
                                 std::int64_t trips) {
  if (households < 1) throw ParameterError("simulate_table: households must be positive");
  CountTable table(trips);
  const BB8Params embedded = embed_bb5(params);
  for (std::int64_t k = 0; k < households; ++k) {
    const Observation p = draw_bb8(stream, embedded);
    const auto xb = draw_binomial(stream, trips, p.z1);
    const auto xe = draw_binomial(stream, trips, p.z2);
    ++table.at(static_cast<std::size_t>(xb), static_cast<std::size_t>(xe));
  }
  return table;
}

/// Sum of absolute cell differences.
inline std::int64_t table_distance(const CountTable& a, const CountTable& b) {
  if (a.dim() != b.dim()) throw DimensionError("table_distance: tables differ in size");
  std::int64_t d = 0;
  for (std::size_t i = 0; i < a.cells().size(); ++i) {
    const auto diff = a.cells()[i] - b.cells()[i];
    d += diff < 0 ? -diff : diff;
  }
  return d;
}

/// Complements the eggs axis: out(l, j) = in(l, trips - j).
inline CountTable partial_transpose(const CountTable& t) {
  CountTable out(t.trips());
  const std::size_t last = t.dim() - 1;
  for (std::size_t l = 0; l < t.dim(); ++l) {
    for (std::size_t j = 0; j < t.dim(); ++j) out.at(l, j) = t.at(l, last - j);
  }
  return out;
}

/// Pearson correlation of the household-level (x_b, x_e) pairs.
inline double table_correlation(const CountTable& t) {
  const double n = static_cast<double>(t.total());
  if (!(n > 0.0)) throw DegenerateError("table_correlation: empty table");
  double mb = 0.0, me = 0.0;
  for (std::size_t l = 0; l < t.dim(); ++l) {
    for (std::size_t j = 0; j < t.dim(); ++j) {
      const double w = static_cast<double>(t.at(l, j));
      mb += w * static_cast<double>(l);
      me += w * static_cast<double>(j);
    }
  }
  mb /= n;
  me /= n;
  double sbe = 0.0, sbb = 0.0, see = 0.0;
  for (std::size_t l = 0; l < t.dim(); ++l) {
    for (std::size_t j = 0; j < t.dim(); ++j) {
      const double w = static_cast<double>(t.at(l, j));
      const double db = static_cast<double>(l) - mb;
      const double de = static_cast<double>(j) - me;
      sbe += w * db * de;
      sbb += w * db * db;
      see += w * de * de;
    }
  }
  if (sbb <= 0.0 || see <= 0.0) throw DegenerateError("table_correlation: a margin has no variation");
  return sbe / std::sqrt(sbb * see);
}

/// Cellwise mean of a set of tables.
struct MeanTable {
  std::size_t dim = 0;
  std::vector<double> cells;
  double at(std::size_t bacon, std::size_t eggs) const { return cells.at(bacon * dim + eggs); }
  double total() const {
    double t = 0.0;
    for (double c : cells) t += c;
    return t;
  }
};

inline MeanTable mean_accepted_table(const std::vector<CountTable>& tables) {
  if (tables.empty()) throw DegenerateError("mean_accepted_table: no tables");
  MeanTable out{tables.front().dim(), std::vector<double>(tables.front().cells().size(), 0.0)};
  for (const auto& t : tables) {
    if (t.dim() != out.dim) throw DimensionError("mean_accepted_table: tables differ in size");
    for (std::size_t i = 0; i < out.cells.size(); ++i) out.cells[i] += static_cast<double>(t.cells()[i]);
  }
  for (double& c : out.cells) c /= static_cast<double>(tables.size());
  return out;
}

/// Beta-binomial marginal fits of a table: (alpha_b, beta_b) from the bacon
/// row totals and (alpha_e, beta_e) from the eggs column totals.
struct TableMarginalFit {
  BetaShape bacon;
  BetaShape eggs;
};

inline TableMarginalFit fit_table_marginals(const CountTable& t) {
  return {beta_binomial_mle(t.row_totals(), t.trips()), beta_binomial_mle(t.column_totals(), t.trips())};
}

/// Independent Gamma(m_i^2, 1/m_i) priors: mean m_i, variance 1.
struct EBPriorSpec {
  std::array<double, 5> prior_means{};
  double target_correlation = 0.0;

  PriorProduct prior() const {
    std::vector<ComponentPrior> comps;
    for (double m : prior_means) comps.emplace_back(GammaPrior(m * m, 1.0 / m));
    return PriorProduct(std::move(comps));
  }
};

/// Prior means used for the observed bacon-and-eggs table (correlation near 0.30).
inline EBPriorSpec bacon_eggs_prior() { return {{1.6182, 1.9932, 0.1684, 0.1702, 3.1234}, 0.30}; }
/// Prior means used for the partially transposed table (correlation near -0.30).
inline EBPriorSpec transposed_prior() { return {{0.9173, 1.7502, 0.8462, 1.1421, 0.4852}, -0.30}; }

/// Sarmanov-model fit (alpha_b, beta_b, alpha_e, beta_e, r), for
/// side-by-side reports only.
inline constexpr std::array<double, 5> kSarmanovReference{0.357, 4.46, 0.859, 3.96, 0.430};

struct EBPriorScore {
  /// (m1 + m3 - alpha_b, m4 + m5 - beta_b, m2 + m4 - alpha_e, m3 + m5 - beta_e)
  std::array<double, 4> residuals{};
  double mc_correlation = 0.0;
  double correlation_gap = 0.0;
};

/// How far candidate prior means are from the marginal-fit constraints and
/// the target correlation.
inline EBPriorScore eb_prior_score(const std::array<double, 5>& candidate, const TableMarginalFit& fit,
                                   double target_correlation, RngStream& stream,
                                   std::size_t draws = 1'000'000) {
  for (double m : candidate) {
    if (!(m > 0.0)) throw ParameterError("eb_prior_score: candidate means must be positive");
  }
  EBPriorScore s;
  s.residuals = {candidate[0] + candidate[2] - fit.bacon.a, candidate[3] + candidate[4] - fit.bacon.b,
                 candidate[1] + candidate[3] - fit.eggs.a, candidate[2] + candidate[4] - fit.eggs.b};
  s.mc_correlation = mc_correlation(stream, BB5Params(candidate), draws);
  s.correlation_gap = s.mc_correlation - target_correlation;
  return s;
}

using TableProblem = AbcProblem<CountTable, CountTable>;

/// ABC problem over the table: simulate a full synthetic table, compare
/// cellwise.
inline TableProblem make_table_problem(const CountTable& observed, const EBPriorSpec& prior, double epsilon) {
  const std::int64_t households = observed.total();
  const std::int64_t trips = observed.trips();
  TableProblem p{prior.prior(),
                 [households, trips](RngStream& s, const ParamVector& theta) {
                   return simulate_table(s, BB5Params({theta[0], theta[1], theta[2], theta[3], theta[4]}),
                                         households, trips);
                 },
                 [](const CountTable& t) { return t; },
                 [](const CountTable& a, const CountTable& b) { return static_cast<double>(table_distance(a, b)); },
                 observed,
                 epsilon};
  return p;
}

enum class SamplerVariant { kAcceptReject, kMetropolisHastings };

struct BaconEggsOptions {
  SamplerVariant variant = SamplerVariant::kAcceptReject;
  double epsilon = 100.0;
  std::size_t target_acceptances = 500;
  std::uint64_t proposal_cap = 100'000'000;
  std::uint64_t mh_iterations = 2'000'000;
  std::array<double, 5> proposal_sd{0.10, 0.10, 0.001, 0.001, 0.2};
  double burn_in_fraction = 0.1;
  /// Defaults to the prior means when empty.
  ParamVector mh_initial_state;
  std::uint64_t master_seed = 0;
  unsigned workers = 1;
  std::size_t correlation_draws = 1'000'000;
};

struct ParameterEstimate {
  std::string name;
  double mean = 0.0;
  double mcse = 0.0;
};

struct BaconEggsSummary {
  SamplerVariant variant = SamplerVariant::kAcceptReject;
  /// alpha1..alpha5 then alpha_b, beta_b, alpha_e, beta_e.
  std::vector<ParameterEstimate> estimates;
  /// Correlation of (p_b, p_e) under BB5 at the posterior mean.
  double correlation = 0.0;
  MeanTable mean_table;
  std::uint64_t proposals = 0;
  std::size_t acceptances = 0;
  std::uint64_t moves = 0;
  bool capped = false;
  double seconds = 0.0;
  std::vector<ParamVector> draws;

  double mean_of(const std::string& name) const {
    for (const auto& e : estimates) {
      if (e.name == name) return e.mean;
    }
    throw ConfigError("no estimate named '" + name + "'");
  }
};

namespace detail {

inline std::vector<ParamVector> with_derived(const std::vector<ParamVector>& draws) {
  std::vector<ParamVector> out;
  out.reserve(draws.size());
  for (const auto& a : draws) {
    out.push_back({a[0], a[1], a[2], a[3], a[4], a[0] + a[2], a[3] + a[4], a[1] + a[3], a[2] + a[4]});
  }
  return out;
}

}  // namespace detail

/// Posterior summary of the table model with the AR or MH engine.
inline BaconEggsSummary run_bacon_eggs(const CountTable& observed, const EBPriorSpec& prior,
                                       const BaconEggsOptions& options) {
  if (!(options.epsilon > 0.0)) throw ConfigError("run_bacon_eggs: epsilon must be positive");
  const TableProblem problem = make_table_problem(observed, prior, options.epsilon);
  BaconEggsSummary out;
  out.variant = options.variant;
  std::vector<CountTable> tables;
  bool independent = true;
  if (options.variant == SamplerVariant::kAcceptReject) {
    AbcArOptions ar;
    ar.target_acceptances = options.target_acceptances;
    ar.proposal_cap = options.proposal_cap;
    ar.workers = options.workers;
    ar.keep_summaries = true;
    auto res = abc_ar(problem, ar, ProposalStreams{options.master_seed, 0});
    out.draws = std::move(res.accepted);
    tables = std::move(res.accepted_summaries);
    out.proposals = res.proposals_used;
    out.acceptances = res.acceptances;
    out.capped = res.capped;
    out.seconds = res.wall_time.count();
  } else {
    MhConfig mh;
    mh.initial_state = options.mh_initial_state.empty()
                           ? ParamVector(prior.prior_means.begin(), prior.prior_means.end())
                           : options.mh_initial_state;
    mh.proposal_sd.assign(options.proposal_sd.begin(), options.proposal_sd.end());
    mh.iterations = options.mh_iterations;
    mh.burn_in_fraction = options.burn_in_fraction;
    mh.keep_summaries = true;
    RngStream stream = substream(options.master_seed, 0);
    auto res = abc_mh(problem, mh, stream);
    out.draws = res.retained();
    tables = std::move(res.move_summaries);
    out.proposals = mh.iterations;
    out.moves = res.moves;
    out.acceptances = res.moves;
    out.seconds = res.wall_time.count();
    independent = false;
  }
  if (out.draws.empty()) return out;

  const auto full = detail::with_derived(out.draws);
  static const std::array<const char*, 9> kNames{"alpha1", "alpha2", "alpha3", "alpha4", "alpha5",
                                                 "alpha_b", "beta_b", "alpha_e", "beta_e"};
  const ParamVector means = posterior_mean(full);
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    const auto col = component(full, i);
    double se = std::numeric_limits<double>::quiet_NaN();
    if (independent) {
      se = iid_standard_error(col);
    } else if (col.size() >= 4) {
      const auto batches = std::max<std::size_t>(2, static_cast<std::size_t>(std::sqrt(col.size())));
      se = mcse_batch_means(col, batches);
    }
    out.estimates.push_back({kNames[i], means[i], se});
  }
  RngStream corr_stream = substream(options.master_seed, std::uint64_t{1} << 62);
  out.correlation =
      mc_correlation(corr_stream, BB5Params({means[0], means[1], means[2], means[3], means[4]}),
                     options.correlation_draws);
  if (!tables.empty()) out.mean_table = mean_accepted_table(tables);
  return out;
}

/// CSV with columns parameter, posterior_mean, mcse; the r row leaves mcse empty.
inline void write_posterior_csv(std::ostream& out, const BaconEggsSummary& s) {
  out << "parameter,posterior_mean,mcse\n";
  out << std::setprecision(10);
  for (const auto& e : s.estimates) out << e.name << ',' << e.mean << ',' << e.mcse << '\n';
  out << "r," << s.correlation << ",\n";
}

inline void write_mean_table_csv(std::ostream& out, const MeanTable& t) {
  out << "bacon";
  for (std::size_t j = 0; j < t.dim; ++j) out << ",eggs" << j;
  out << '\n' << std::fixed << std::setprecision(2);
  for (std::size_t l = 0; l < t.dim; ++l) {
    out << l;
    for (std::size_t j = 0; j < t.dim; ++j) out << ',' << t.at(l, j);
    out << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace bbabc

#endif  // BBABC_BETABINOM_HPP
