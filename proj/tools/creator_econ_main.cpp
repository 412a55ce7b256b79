// Command-line driver: `run` executes a configured experiment, `fit` fits a
// regret slope from a summary CSV, `check` runs the full-recommendation
// property checks on an instance.  Exit codes: 0 success, 1 rejected input,
// 2 runtime error.

#include <algorithm>
#include <exception>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "creco/bench.hpp"
#include "creco/common.hpp"
#include "creco/economy.hpp"
#include "creco/fullreco.hpp"

namespace {

int do_run(const std::string& config_path) {
  const creco::ExperimentConfig config = creco::load_config(config_path);
  const std::vector<creco::SummaryRow> rows = creco::run_experiment(config);
  for (const creco::SummaryRow& row : rows) {
    std::cout << "T=" << row.horizon
              << " mean_final_regret=" << creco::format_double(row.mean_final_regret)
              << " std_final_regret=" << creco::format_double(row.std_final_regret)
              << " n_seeds=" << row.n_seeds << "\n";
  }
  std::cout << "wrote " << rows.size() * config.seeds.size()
            << " trace files and summary.csv to " << config.output_dir << "\n";
  return 0;
}

int do_fit(const std::string& summary_path) {
  const std::vector<creco::SummaryRow> rows =
      creco::load_summary_csv(summary_path);
  std::vector<long> horizons;
  horizons.reserve(rows.size());
  for (const creco::SummaryRow& row : rows) horizons.push_back(row.horizon);
  const creco::SlopeFit fit = creco::fit_regret_slope(rows, horizons);
  std::cout << "slope=" << creco::format_double(fit.slope)
            << " intercept=" << creco::format_double(fit.intercept)
            << " r_squared=" << creco::format_double(fit.r_squared)
            << " points=" << fit.points.size() << "\n";
  return 0;
}

void print_check(const char* name, bool pass, double margin) {
  std::cout << "CHECK " << name << " " << (pass ? "pass" : "fail")
            << " margin=" << creco::format_double(margin) << "\n";
}

int do_check(const std::string& instance_path) {
  const creco::EconomyInstance instance = creco::load_instance(instance_path);
  const int dim = instance.dim();

  std::vector<double> closed_alphas;   // includes 1.0, for the dominance grid
  std::vector<double> open_alphas;     // [0,1), for monotonicity
  for (int i = 0; i <= 100; ++i) closed_alphas.push_back(i / 100.0);
  for (int i = 0; i < 100; ++i) open_alphas.push_back(i / 100.0);

  creco::Vec aggregate(dim, 0.0);
  for (const creco::Vec& u : instance.rewards().user_vectors) {
    for (int i = 0; i < dim; ++i) aggregate[i] += u[i];
  }
  std::vector<creco::Vec> embedded;
  embedded.reserve(closed_alphas.size());
  for (const double alpha : closed_alphas) {
    creco::Vec theta(dim);
    for (int i = 0; i < dim; ++i) theta[i] = alpha * aggregate[i];
    embedded.push_back(std::move(theta));
  }

  bool all_pass = true;

  const creco::DominanceResult dominance =
      creco::check_superset_dominance(instance, closed_alphas, embedded);
  print_check("dominance", dominance.feature_dominates,
              dominance.max_feature_utility - dominance.max_return_utility);
  all_pass = all_pass && dominance.feature_dominates;

  const creco::CheckReport embedding =
      creco::embedding_identity_check(instance, closed_alphas);
  print_check("embedding_identity", embedding.pass, embedding.margin);
  all_pass = all_pass && embedding.pass;

  const creco::CheckReport monotonicity =
      creco::monotonicity_check(instance, open_alphas);
  print_check("monotonicity", monotonicity.pass, monotonicity.margin);
  all_pass = all_pass && monotonicity.pass;

  // Deterministic (theta, gamma) pairs with both endpoints inside the ball.
  creco::Rng rng(2024);
  const auto sample_ball_point = [&](creco::Vec& point) {
    do {
      for (int i = 0; i < dim; ++i) {
        point[i] = 2.0 * creco::uniform01(rng) - 1.0;
      }
    } while (creco::norm(point) > 1.0);
  };
  bool alignment_pass = true;
  double alignment_margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < instance.creator_count(); ++k) {
    std::vector<creco::Vec> thetas;
    std::vector<creco::Vec> gammas;
    creco::Vec theta(dim);
    creco::Vec target(dim);
    for (int i = 0; i < 200; ++i) {
      sample_ball_point(theta);
      sample_ball_point(target);
      creco::Vec gamma(dim);
      for (int c = 0; c < dim; ++c) gamma[c] = target[c] - theta[c];
      thetas.push_back(theta);
      gammas.push_back(std::move(gamma));
    }
    const creco::CheckReport report =
        creco::response_alignment_check(instance.creator(k), thetas, gammas);
    alignment_pass = alignment_pass && report.pass;
    alignment_margin = std::min(alignment_margin, report.margin);
  }
  print_check("response_alignment", alignment_pass, alignment_margin);
  all_pass = all_pass && alignment_pass;

  const std::vector<creco::ContinuityDraw> draws =
      creco::sample_continuity_draws(instance, 200, 7);
  const creco::CheckReport continuity =
      creco::continuity_check(instance, draws);
  print_check("continuity", continuity.pass, continuity.margin);
  all_pass = all_pass && continuity.pass;

  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"creator-economy contract and recommendation learning toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string summary_path;
  std::string instance_path;

  CLI::App* run_cmd = app.add_subcommand("run", "run a configured experiment");
  run_cmd->add_option("--config", config_path, "experiment config JSON")
      ->required();

  CLI::App* fit_cmd =
      app.add_subcommand("fit", "fit a regret slope from a summary CSV");
  fit_cmd->add_option("--summary", summary_path, "summary CSV path")
      ->required();

  CLI::App* check_cmd = app.add_subcommand(
      "check", "run full-recommendation property checks on an instance");
  check_cmd->add_option("--instance", instance_path, "instance JSON path")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run_cmd->parsed()) return do_run(config_path);
    if (fit_cmd->parsed()) return do_fit(summary_path);
    return do_check(instance_path);
  } catch (const creco::RejectedInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
