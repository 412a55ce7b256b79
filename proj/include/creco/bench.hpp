#pragma once

// Experiment orchestration: config loading, seed-replicated learner runs with
// CSV emission, and log-log slope fitting of the resulting regret curves.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "creco/common.hpp"
#include "creco/economy.hpp"
#include "creco/environment.hpp"

namespace creco {

enum class Algorithm { Alg1, Alg2, FullReturn, FullFeature };

// Canonical lowercase names: alg1, alg2, full_return, full_feature.
const char* algorithm_name(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& name);

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::Alg1;
  std::string instance_path;
  std::vector<long> horizons;  // sorted ascending, at least 3
  double delta = 0.05;
  std::vector<std::uint64_t> seeds;  // nonempty, distinct
  std::string output_dir;
};

// Parses and validates a JSON config document.  Field names match the
// ExperimentConfig members exactly; delta may be omitted (default 0.05).
// Rejections name the offending field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

struct SummaryRow {
  long horizon = 0;
  double mean_final_regret = 0.0;
  double std_final_regret = 0.0;  // sample standard deviation across seeds
  int n_seeds = 0;
};

// Runs the configured learner for every (horizon, seed) cell, writing one
// trace CSV per cell plus summary.csv into output_dir, and returns the
// summary rows.  Output is deterministic: re-running the same config yields
// byte-identical files.  CREATOR_ECON_THREADS caps parallel cells; unset
// runs sequentially.
std::vector<SummaryRow> run_experiment(const ExperimentConfig& config);

// Name of the per-cell trace file inside output_dir.
std::string trace_file_name(Algorithm algorithm, long horizon,
                            std::uint64_t seed);

std::string summary_csv(std::span<const SummaryRow> rows);
std::vector<SummaryRow> load_summary_csv(const std::string& path);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (ln T, ln mean regret)
};

// Ordinary least squares on (ln T, ln mean_final_regret) over the requested
// horizons.  Needs at least 3 horizons, each present in the summary with
// strictly positive mean regret; rejections name the offending horizon.
SlopeFit fit_regret_slope(std::span<const SummaryRow> summary,
                          std::span<const long> horizons);

}  // namespace creco
