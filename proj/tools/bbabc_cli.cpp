#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bbabc/bbabc.hpp"

namespace {

using namespace bbabc;

struct CommonFlags {
  std::optional<std::string> model, truth, prior, eps, n, datasets, acceptances, cap, seed, workers, spearman;
  std::optional<std::string> config;
  std::string out;
  std::string data;
};

void add_study_flags(CLI::App* app, CommonFlags& f) {
  app->add_option("--model", f.model, "bb5 or bb8 (inferred from --truth when omitted)");
  app->add_option("--truth", f.truth, "A1..A5 or comma-separated parameter values");
  app->add_option("--prior", f.prior, "G1, G2, U1, U2, gamma(shape,scale), moduniform(mu,p); ';' for per-component");
  app->add_option("--eps", f.eps, "ABC tolerance");
  app->add_option("--n", f.n, "observations per data set");
  app->add_option("--acceptances", f.acceptances, "accept-reject target acceptances");
  app->add_option("--cap", f.cap, "accept-reject proposal cap");
  app->add_option("--seed", f.seed, "master seed (default 0)");
  app->add_option("--workers", f.workers, "worker threads, 0 = all cores");
  app->add_option("--spearman", f.spearman, "ranks (default) or raw");
  app->add_option("--config", f.config, "key=value configuration file; flags override it");
}

StudyConfig resolve_config(const CommonFlags& f) {
  StudyConfigBuilder b;
  if (f.config) {
    std::ifstream in(*f.config);
    if (!in) throw ConfigError("cannot open config file '" + *f.config + "'");
    b.read(in);
  }
  const std::pair<const char*, const std::optional<std::string>*> overrides[] = {
      {"model", &f.model},       {"truth", &f.truth}, {"prior", &f.prior},     {"eps", &f.eps},
      {"n", &f.n},               {"datasets", &f.datasets}, {"acceptances", &f.acceptances},
      {"cap", &f.cap},           {"seed", &f.seed},   {"workers", &f.workers}, {"spearman", &f.spearman}};
  for (const auto& [key, value] : overrides) {
    if (*value) b.set(key, **value);
  }
  return b.build();
}

/// Observed data from --data, otherwise simulated at the configured truth.
BivariateDataset observed_data(const CommonFlags& f, const StudyConfig& c) {
  if (!f.data.empty()) {
    std::ifstream in(f.data);
    if (!in) throw ConfigError("cannot open data file '" + f.data + "'");
    return read_dataset_csv(in);
  }
  RngStream stream = dataset_stream(c.master_seed, 0, 0);
  return simulate_model(stream, c.model, c.truth, c.n);
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_draws_csv(std::ostream& out, const std::vector<ParamVector>& draws, std::size_t k) {
  out << "draw";
  for (std::size_t i = 0; i < k; ++i) out << ",alpha" << i + 1;
  out << '\n';
  for (std::size_t d = 0; d < draws.size(); ++d) {
    out << d;
    for (double v : draws[d]) out << ',' << detail::csv_number(v);
    out << '\n';
  }
}

void print_vector(const char* label, const ParamVector& v) {
  std::printf("%s", label);
  for (double x : v) std::printf(" %.6g", x);
  std::printf("\n");
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(detail::parse_double(detail::trim(item), what));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bivariate beta simulation, MMLE and ABC"};
  app.require_subcommand(1);

  CommonFlags sim_f, mmle_f, ar_f, mh_f, study_f;

  auto* sim = app.add_subcommand("simulate", "draw a bivariate beta sample as z1,z2 CSV");
  add_study_flags(sim, sim_f);
  sim->add_option("--out", sim_f.out, "output CSV (stdout when omitted)");

  auto* mmle = app.add_subcommand("mmle", "modified maximum likelihood estimate of the 5-parameter law");
  add_study_flags(mmle, mmle_f);
  mmle->add_option("--data", mmle_f.data, "z1,z2 CSV; simulated at --truth when omitted");

  auto* ar = app.add_subcommand("abc-ar", "accept-reject ABC posterior sample");
  add_study_flags(ar, ar_f);
  ar->add_option("--data", ar_f.data, "z1,z2 CSV; simulated at --truth when omitted");
  ar->add_option("--out", ar_f.out, "accepted draws CSV");

  auto* mh = app.add_subcommand("abc-mh", "random-walk ABC-MH chain");
  add_study_flags(mh, mh_f);
  mh->add_option("--data", mh_f.data, "z1,z2 CSV; simulated at --truth when omitted");
  mh->add_option("--out", mh_f.out, "chain CSV");
  std::uint64_t mh_iterations = 100'000;
  std::string mh_sd = "0.1";
  std::string mh_init;
  double mh_burn = 0.1;
  mh->add_option("--iterations", mh_iterations, "chain length");
  mh->add_option("--sd", mh_sd, "proposal standard deviation, one value or one per component");
  mh->add_option("--init", mh_init, "initial state (default: prior means)");
  mh->add_option("--burn-in", mh_burn, "leading fraction discarded");

  auto* study = app.add_subcommand("study", "repeated-sampling bias/MSE study");
  add_study_flags(study, study_f);
  study->add_option("--datasets", study_f.datasets, "number of simulated data sets");
  study_f.out = "study_out";
  study->add_option("--out", study_f.out, "output directory for summary.csv and estimates.csv");

  auto* be = app.add_subcommand("bacon-eggs", "bivariate beta-binomial ABC on a purchase-count table");
  std::string be_table, be_variant = "ar", be_means = "observed", be_out;
  bool be_transpose = false;
  BaconEggsOptions be_opt;
  be->add_option("--table", be_table, "count table file (default: built-in bacon and eggs table)");
  be->add_flag("--transpose", be_transpose, "analyse the partially transposed table");
  be->add_option("--variant", be_variant, "ar or mh")->check(CLI::IsMember({"ar", "mh"}));
  be->add_option("--prior-means", be_means, "observed, transposed, or five comma-separated values")
      ->default_str("observed, or transposed with --transpose");
  be->add_option("--eps", be_opt.epsilon, "table distance tolerance");
  be->add_option("--acceptances", be_opt.target_acceptances, "accept-reject target acceptances");
  be->add_option("--cap", be_opt.proposal_cap, "accept-reject proposal cap");
  be->add_option("--iterations", be_opt.mh_iterations, "MH chain length");
  be->add_option("--seed", be_opt.master_seed, "master seed (default 0)");
  be->add_option("--workers", be_opt.workers, "worker threads, 0 = all cores");
  be->add_option("--correlation-draws", be_opt.correlation_draws, "draws for the model correlation");
  be->add_option("--out", be_out, "output directory for posterior.csv and mean_table.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      const StudyConfig c = resolve_config(sim_f);
      RngStream stream = dataset_stream(c.master_seed, 0, 0);
      const BivariateDataset data = simulate_model(stream, c.model, c.truth, c.n);
      if (sim_f.out.empty()) {
        write_dataset_csv(std::cout, data);
      } else {
        auto out = open_output(sim_f.out);
        write_dataset_csv(out, data);
      }
    } else if (mmle->parsed()) {
      const StudyConfig c = resolve_config(mmle_f);
      const MMLEResult r = mmle5(observed_data(mmle_f, c));
      std::printf("quantity,value\n");
      for (std::size_t i = 0; i < 5; ++i) std::printf("alpha%zu,%.17g\n", i + 1, r.alpha_hat[i]);
      std::printf("a_hat,%.17g\nb_hat,%.17g\nc_hat,%.17g\nd_hat,%.17g\n", r.marginals.a_hat, r.marginals.b_hat,
                  r.marginals.c_hat, r.marginals.d_hat);
      std::printf("moment_stat,%.17g\nquadratic_b,%.17g\nquadratic_c,%.17g\ncomplex_roots,%d\n", r.moment_stat,
                  r.quadratic_b, r.quadratic_c, r.complex_roots ? 1 : 0);
      for (std::size_t i = 0; i < 5; ++i) std::printf("clipped%zu,%d\n", i + 1, r.clipped[i] ? 1 : 0);
    } else if (ar->parsed()) {
      const StudyConfig c = resolve_config(ar_f);
      const auto problem = make_bivariate_problem(observed_data(ar_f, c), c.model, c.prior(), c.epsilon, c.spearman);
      AbcArOptions options;
      options.target_acceptances = c.target_acceptances;
      options.proposal_cap = c.proposal_cap;
      options.workers = c.workers;
      const auto r = abc_ar(problem, options, dataset_proposals(c.master_seed, 0));
      std::printf("proposals %llu acceptances %zu capped %d seconds %.3f\n",
                  static_cast<unsigned long long>(r.proposals_used), r.acceptances, r.capped ? 1 : 0,
                  r.wall_time.count());
      if (!r.accepted.empty()) print_vector("posterior_mean", posterior_mean(r.accepted));
      if (!ar_f.out.empty()) {
        auto out = open_output(ar_f.out);
        write_draws_csv(out, r.accepted, dimension(c.model));
      }
    } else if (mh->parsed()) {
      const StudyConfig c = resolve_config(mh_f);
      const auto problem = make_bivariate_problem(observed_data(mh_f, c), c.model, c.prior(), c.epsilon, c.spearman);
      const std::size_t k = dimension(c.model);
      MhConfig config;
      config.iterations = mh_iterations;
      config.burn_in_fraction = mh_burn;
      config.proposal_sd = parse_list(mh_sd, "sd");
      if (config.proposal_sd.size() == 1) config.proposal_sd.assign(k, config.proposal_sd[0]);
      config.initial_state = mh_init.empty() ? problem.prior.means() : parse_list(mh_init, "init");
      RngStream stream = substream(c.master_seed, 0);
      const auto r = abc_mh(problem, config, stream);
      const auto kept = r.retained();
      std::printf("iterations %llu moves %llu seconds %.3f\n", static_cast<unsigned long long>(mh_iterations),
                  static_cast<unsigned long long>(r.moves), r.wall_time.count());
      print_vector("posterior_mean", posterior_mean(kept));
      if (!mh_f.out.empty()) {
        auto out = open_output(mh_f.out);
        write_draws_csv(out, kept, k);
      }
    } else if (study->parsed()) {
      const StudyConfig c = resolve_config(study_f);
      const StudyReport report = run_sim_study(c);
      emit_report(report, study_f.out);
      for (const auto& s : report.summaries) {
        std::printf("%s datasets %zu", s.method.c_str(), s.datasets);
        if (s.proposals_mean) std::printf(" proposals %.1f (%.1f) capped %zu", *s.proposals_mean, *s.proposals_sd, s.capped);
        std::printf("\n");
        print_vector("  bias", s.bias);
        print_vector("  mse ", s.mse);
      }
      for (const auto& f : report.failures) std::fprintf(stderr, "%s\n", f.c_str());
    } else if (be->parsed()) {
      CountTable table = be_table.empty() ? bacon_eggs_table() : load_count_table(be_table);
      if (be_transpose) table = partial_transpose(table);
      EBPriorSpec prior;
      const bool means_given = be->count("--prior-means") > 0;
      if (!means_given) {
        prior = be_transpose ? transposed_prior() : bacon_eggs_prior();
      } else if (be_means == "observed") {
        prior = bacon_eggs_prior();
      } else if (be_means == "transposed") {
        prior = transposed_prior();
      } else {
        const auto v = parse_list(be_means, "prior-means");
        if (v.size() != 5) throw ConfigError("--prior-means needs five values");
        prior.prior_means = {v[0], v[1], v[2], v[3], v[4]};
        prior.target_correlation = 0.0;
      }
      be_opt.variant = be_variant == "mh" ? SamplerVariant::kMetropolisHastings : SamplerVariant::kAcceptReject;
      const BaconEggsSummary s = run_bacon_eggs(table, prior, be_opt);
      std::printf("proposals %llu acceptances %zu capped %d seconds %.1f\n",
                  static_cast<unsigned long long>(s.proposals), s.acceptances, s.capped ? 1 : 0, s.seconds);
      write_posterior_csv(std::cout, s);
      if (!be_out.empty()) {
        std::filesystem::create_directories(be_out);
        auto post = open_output(std::filesystem::path(be_out) / "posterior.csv");
        write_posterior_csv(post, s);
        if (!s.mean_table.cells.empty()) {
          auto mt = open_output(std::filesystem::path(be_out) / "mean_table.csv");
          write_mean_table_csv(mt, s.mean_table);
        }
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
