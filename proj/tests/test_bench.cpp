#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "creco/bench.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace creco;
namespace fs = std::filesystem;

namespace {

const char* kSmoothInstanceJson = R"({
  "d": 2,
  "S": 1,
  "users": [[0.6, 0.1]],
  "creators": [
    {"mode": "smooth_interpolation", "anchor_a": [0.2, 0.1],
     "anchor_b": [0.8, 0.2], "cost_center": [0.2, 0.1], "cost_scale": 1.0},
    {"mode": "smooth_interpolation", "anchor_a": [0.1, 0.2],
     "anchor_b": [0.2, 0.8], "cost_center": [0.1, 0.2], "cost_scale": 1.0}
  ]
})";

const char* kPartialQuadInstanceJson = R"({
  "d": 2,
  "S": 1,
  "users": [[0.5, 0.0]],
  "creators": [
    {"mode": "quadratic_best_response", "anchor_a": [0.0, 0.0],
     "anchor_b": [0.0, 0.0], "cost_center": [0.1, 0.0], "cost_scale": 1.0},
    {"mode": "quadratic_best_response", "anchor_a": [0.0, 0.0],
     "anchor_b": [0.0, 0.0], "cost_center": [0.0, 0.1], "cost_scale": 1.0}
  ]
})";

// Unique scratch directory; removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("creco_bench_" + tag + "_" + std::to_string(++counter));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  return path.string();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

std::string valid_config_json(const std::string& instance_path,
                              const std::string& output_dir) {
  return std::string("{\"algorithm\":\"alg1\",\"instance_path\":\"") +
         instance_path + "\",\"horizons\":[50,80,120],\"seeds\":[1,2]," +
         "\"output_dir\":\"" + output_dir + "\"}";
}

void expect_rejection_naming(const std::string& config_text,
                             const std::string& token) {
  try {
    parse_config(config_text);
    FAIL_CHECK("expected rejection mentioning: " << token);
  } catch (const RejectedInput& e) {
    CHECK_MESSAGE(std::string(e.what()).find(token) != std::string::npos,
                  e.what());
  }
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("algorithm names round-trip") {
  for (const Algorithm a : {Algorithm::Alg1, Algorithm::Alg2,
                            Algorithm::FullReturn, Algorithm::FullFeature}) {
    CHECK_EQ(parse_algorithm(algorithm_name(a)), a);
  }
  CHECK_EQ(parse_algorithm("alg1"), Algorithm::Alg1);
  CHECK_EQ(parse_algorithm("full_return"), Algorithm::FullReturn);
  CHECK_THROWS_AS(parse_algorithm("alg3"), RejectedInput);
}

TEST_CASE("minimal config parses with the default confidence level") {
  ScratchDir scratch("config");
  const std::string instance =
      write_file(scratch.path() / "inst.json", kSmoothInstanceJson);
  const ExperimentConfig config =
      parse_config(valid_config_json(instance, (scratch.path() / "out").string()));
  CHECK_EQ(config.algorithm, Algorithm::Alg1);
  CHECK_EQ(config.delta, 0.05);
  CHECK_EQ(config.horizons.size(), 3);
  CHECK_EQ(config.seeds.size(), 2);
}

TEST_CASE("config rejections name the offending field") {
  expect_rejection_naming("[]", "config");
  expect_rejection_naming(
      R"({"algorithm":"alg1","instance_path":"x","horizons":[100],)"
      R"("seeds":[1],"output_dir":"y"})",
      "horizons");
  expect_rejection_naming(
      R"({"algorithm":"alg1","instance_path":"x","horizons":[100,200,300],)"
      R"("seeds":[1,1],"output_dir":"y"})",
      "seeds");
  expect_rejection_naming(
      R"({"algorithm":"alg1","instance_path":"x","horizons":[300,200,100],)"
      R"("seeds":[1],"output_dir":"y"})",
      "horizons");
  expect_rejection_naming(
      R"({"algorithm":"alg1","instance_path":"x","horizons":[100,200,300],)"
      R"("seeds":[1],"output_dir":"y","delta":1.5})",
      "delta");
  expect_rejection_naming(
      R"({"algorithm":"alg9","instance_path":"x","horizons":[100,200,300],)"
      R"("seeds":[1],"output_dir":"y"})",
      "algorithm");
  expect_rejection_naming(
      R"({"algorithm":"alg1","instance_path":"x","horizons":[100,200,300],)"
      R"("seeds":[1],"output_dir":"y","extra":1})",
      "extra");
  expect_rejection_naming(
      R"({"instance_path":"x","horizons":[100,200,300],"seeds":[1],)"
      R"("output_dir":"y"})",
      "algorithm");
  CHECK_THROWS_AS(load_config("/no/such/config.json"), RejectedInput);
}

TEST_CASE("experiments emit one trace per cell plus a summary") {
  ScratchDir scratch("cells");
  const std::string instance =
      write_file(scratch.path() / "inst.json", kSmoothInstanceJson);
  ExperimentConfig config;
  config.algorithm = Algorithm::Alg1;
  config.instance_path = instance;
  config.horizons = {60, 90};
  config.delta = 0.05;
  config.seeds = {1, 2, 3};
  config.output_dir = (scratch.path() / "out").string();
  const std::vector<SummaryRow> rows = run_experiment(config);
  REQUIRE_EQ(rows.size(), 2);
  int traces = 0;
  for (const auto& entry : fs::directory_iterator(config.output_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("trace_", 0) == 0) ++traces;
  }
  CHECK_EQ(traces, 6);
  CHECK(fs::exists(fs::path(config.output_dir) / "summary.csv"));
  for (const SummaryRow& row : rows) {
    CHECK_EQ(row.n_seeds, 3);
    CHECK(std::isfinite(row.mean_final_regret));
    CHECK(row.std_final_regret >= 0.0);
  }
  CHECK(fs::exists(fs::path(config.output_dir) /
                   trace_file_name(Algorithm::Alg1, 60, 1)));
}

TEST_CASE("summary rows average the per-seed trace finals") {
  ScratchDir scratch("avg");
  const std::string instance =
      write_file(scratch.path() / "inst.json", kSmoothInstanceJson);
  ExperimentConfig config;
  config.algorithm = Algorithm::Alg1;
  config.instance_path = instance;
  config.horizons = {70, 110};
  config.delta = 0.05;
  config.seeds = {4, 9, 23};
  config.output_dir = (scratch.path() / "out").string();
  const std::vector<SummaryRow> rows = run_experiment(config);
  for (const SummaryRow& row : rows) {
    double total = 0.0;
    for (const std::uint64_t seed : config.seeds) {
      const std::string text =
          read_file(fs::path(config.output_dir) /
                    trace_file_name(config.algorithm, row.horizon, seed));
      const std::size_t last_comma = text.find_last_of(',');
      const std::size_t line_end = text.find('\n', last_comma);
      total += std::stod(text.substr(last_comma + 1, line_end - last_comma));
    }
    CHECK(std::abs(row.mean_final_regret - total / 3.0) <= 1e-12);
  }
}

TEST_CASE("re-running a config reproduces every byte") {
  ScratchDir scratch("determinism");
  const std::string instance =
      write_file(scratch.path() / "inst.json", kSmoothInstanceJson);
  ExperimentConfig config;
  config.algorithm = Algorithm::Alg2;
  config.instance_path =
      write_file(scratch.path() / "quad.json", R"({
        "d": 1, "S": 1,
        "users": [[0.8]],
        "creators": [
          {"mode": "quadratic_best_response", "anchor_a": [0.0],
           "anchor_b": [0.0], "cost_center": [0.2], "cost_scale": 0.8}
        ]
      })");
  config.horizons = {40, 60};
  config.delta = 0.05;
  config.seeds = {1, 2};
  config.output_dir = (scratch.path() / "first").string();
  run_experiment(config);
  ExperimentConfig rerun = config;
  rerun.output_dir = (scratch.path() / "second").string();
  run_experiment(rerun);
  for (const auto& entry : fs::directory_iterator(config.output_dir)) {
    const std::string name = entry.path().filename().string();
    CHECK_EQ(read_file(entry.path()), read_file(fs::path(rerun.output_dir) / name));
  }
}

TEST_CASE("parallel execution matches sequential output") {
  ScratchDir scratch("threads");
  const std::string instance =
      write_file(scratch.path() / "inst.json", kSmoothInstanceJson);
  ExperimentConfig config;
  config.algorithm = Algorithm::Alg1;
  config.instance_path = instance;
  config.horizons = {50, 70, 90};
  config.delta = 0.05;
  config.seeds = {1, 2};
  config.output_dir = (scratch.path() / "seq").string();
  run_experiment(config);

  setenv("CREATOR_ECON_THREADS", "3", 1);
  ExperimentConfig parallel = config;
  parallel.output_dir = (scratch.path() / "par").string();
  run_experiment(parallel);
  unsetenv("CREATOR_ECON_THREADS");

  for (const auto& entry : fs::directory_iterator(config.output_dir)) {
    const std::string name = entry.path().filename().string();
    CHECK_EQ(read_file(entry.path()),
             read_file(fs::path(parallel.output_dir) / name));
  }
}

TEST_CASE("an invalid thread cap is rejected") {
  ScratchDir scratch("badthreads");
  const std::string instance =
      write_file(scratch.path() / "inst.json", kSmoothInstanceJson);
  ExperimentConfig config;
  config.algorithm = Algorithm::Alg1;
  config.instance_path = instance;
  config.horizons = {50, 70};
  config.delta = 0.05;
  config.seeds = {1};
  config.output_dir = (scratch.path() / "out").string();
  setenv("CREATOR_ECON_THREADS", "zero", 1);
  CHECK_THROWS_AS(run_experiment(config), RejectedInput);
  unsetenv("CREATOR_ECON_THREADS");
}

TEST_CASE("learner preconditions surface with the offending cell") {
  ScratchDir scratch("propagate");
  const std::string instance =
      write_file(scratch.path() / "inst.json", kPartialQuadInstanceJson);
  ExperimentConfig config;
  config.algorithm = Algorithm::FullReturn;
  config.instance_path = instance;
  config.horizons = {50};
  config.delta = 0.05;
  config.seeds = {7};
  config.output_dir = (scratch.path() / "out").string();
  try {
    run_experiment(config);
    FAIL_CHECK("expected the S<K rejection to propagate");
  } catch (const RejectedInput& e) {
    const std::string what = e.what();
    CHECK_MESSAGE(what.find("T=50") != std::string::npos, what);
    CHECK_MESSAGE(what.find("seed=7") != std::string::npos, what);
  }
}

TEST_CASE("summary CSV round-trips through its loader") {
  ScratchDir scratch("roundtrip");
  std::vector<SummaryRow> rows(2);
  rows[0] = {100, 12.5, 0.25, 3};
  rows[1] = {200, 20.0, 0.5, 3};
  const std::string text = summary_csv(rows);
  CHECK(text.rfind("T,mean_final_regret,std_final_regret,n_seeds\n", 0) == 0);
  const std::string path =
      write_file(scratch.path() / "summary.csv", text);
  const std::vector<SummaryRow> loaded = load_summary_csv(path);
  REQUIRE_EQ(loaded.size(), 2);
  CHECK_EQ(loaded[0].horizon, 100);
  CHECK_EQ(loaded[0].mean_final_regret, 12.5);
  CHECK_EQ(loaded[1].std_final_regret, 0.5);
  CHECK_EQ(loaded[1].n_seeds, 3);

  const std::string bad =
      write_file(scratch.path() / "bad.csv", "wrong,header\n1,2\n");
  CHECK_THROWS_AS(load_summary_csv(bad), RejectedInput);
  CHECK_THROWS_AS(load_summary_csv((scratch.path() / "absent.csv").string()),
                  RejectedInput);
}

TEST_CASE("slope fitting recovers exact power laws") {
  const std::vector<long> horizons = {1000, 2000, 5000, 10000};
  std::vector<SummaryRow> summary;
  for (const long T : horizons) {
    SummaryRow row;
    row.horizon = T;
    row.mean_final_regret = std::pow(static_cast<double>(T), 2.0 / 3.0);
    row.n_seeds = 1;
    summary.push_back(row);
  }
  const SlopeFit fit = fit_regret_slope(summary, horizons);
  CHECK(std::abs(fit.slope - 2.0 / 3.0) <= 1e-6);
  CHECK(fit.r_squared >= 1.0 - 1e-9);
  CHECK_EQ(fit.points.size(), horizons.size());

  for (SummaryRow& row : summary)
    row.mean_final_regret = 3.5 * static_cast<double>(row.horizon);
  const SlopeFit linear = fit_regret_slope(summary, horizons);
  CHECK(std::abs(linear.slope - 1.0) <= 1e-9);

  for (SummaryRow& row : summary) row.mean_final_regret = 42.0;
  const SlopeFit flat = fit_regret_slope(summary, horizons);
  CHECK(std::abs(flat.slope) <= 1e-12);
  CHECK_EQ(flat.r_squared, 1.0);
}

TEST_CASE("slope fitting is scale invariant") {
  const std::vector<long> horizons = {500, 1500, 4500};
  std::vector<SummaryRow> summary;
  Rng rng(13);
  for (const long T : horizons) {
    SummaryRow row;
    row.horizon = T;
    row.mean_final_regret =
        std::pow(static_cast<double>(T), 0.7) * (1.0 + 0.2 * uniform01(rng));
    row.n_seeds = 1;
    summary.push_back(row);
  }
  const SlopeFit base = fit_regret_slope(summary, horizons);
  std::vector<SummaryRow> scaled = summary;
  for (SummaryRow& row : scaled) row.mean_final_regret *= 7.25;
  const SlopeFit shifted = fit_regret_slope(scaled, horizons);
  CHECK(std::abs(base.slope - shifted.slope) <= 1e-12);
  CHECK(std::abs(base.r_squared - shifted.r_squared) <= 1e-12);
}

TEST_CASE("slope fitting rejects unusable summaries") {
  std::vector<SummaryRow> summary = {{100, 5.0, 0.0, 1}, {200, 9.0, 0.0, 1}};
  const std::vector<long> two = {100, 200};
  CHECK_THROWS_AS(fit_regret_slope(summary, two), RejectedInput);

  summary.push_back({400, 16.0, 0.0, 1});
  const std::vector<long> missing = {100, 200, 800};
  try {
    fit_regret_slope(summary, missing);
    FAIL_CHECK("expected missing-horizon rejection");
  } catch (const RejectedInput& e) {
    CHECK_MESSAGE(std::string(e.what()).find("800") != std::string::npos,
                  e.what());
  }

  summary[1].mean_final_regret = 0.0;
  const std::vector<long> three = {100, 200, 400};
  try {
    fit_regret_slope(summary, three);
    FAIL_CHECK("expected nonpositive-regret rejection");
  } catch (const RejectedInput& e) {
    CHECK_MESSAGE(std::string(e.what()).find("200") != std::string::npos,
                  e.what());
  }
}

}  // TEST_SUITE
