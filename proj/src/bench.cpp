#include "creco/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string_view>
#include <thread>

#include "creco/fullreco.hpp"
#include "creco/learners.hpp"
#include "json.hpp"

namespace creco {

namespace {

using nlohmann::json;

[[noreturn]] void reject(const std::string& message) {
  throw RejectedInput(message);
}

int thread_cap() {
  const char* raw = std::getenv("CREATOR_ECON_THREADS");
  if (raw == nullptr || *raw == '\0') return 1;
  int value = 0;
  const char* end = raw + std::string_view(raw).size();
  const auto [ptr, ec] = std::from_chars(raw, end, value);
  if (ec != std::errc{} || ptr != end || value < 1) {
    reject("CREATOR_ECON_THREADS must be a positive integer");
  }
  return value;
}

double final_regret(const RegretTrace& trace) {
  if (trace.cumulative_regret_at.empty()) {
    throw std::runtime_error("trace has no checkpoints");
  }
  return trace.cumulative_regret_at.rbegin()->second;
}

LearnerResult run_cell(Algorithm algorithm, const EconomyInstance& instance,
                       long horizon, double delta, std::uint64_t seed) {
  switch (algorithm) {
    case Algorithm::Alg1:
      return run_alg1(instance, horizon, delta, seed);
    case Algorithm::Alg2:
      return run_alg2(instance, horizon, delta, seed);
    case Algorithm::FullReturn:
      return run_full_return_learner(instance, horizon, delta, seed);
    case Algorithm::FullFeature:
      return run_full_feature_learner(instance, horizon, delta, seed,
                                      instance.dim());
  }
  throw std::runtime_error("unknown algorithm");
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(',', start);
    if (end == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, end - start));
    start = end + 1;
  }
}

double parse_csv_double(const std::string& field, const std::string& context) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    reject("summary: malformed " + context + " value '" + field + "'");
  }
  return value;
}

long parse_csv_long(const std::string& field, const std::string& context) {
  long value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    reject("summary: malformed " + context + " value '" + field + "'");
  }
  return value;
}

}  // namespace

const char* algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Alg1:
      return "alg1";
    case Algorithm::Alg2:
      return "alg2";
    case Algorithm::FullReturn:
      return "full_return";
    case Algorithm::FullFeature:
      return "full_feature";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "alg1") return Algorithm::Alg1;
  if (name == "alg2") return Algorithm::Alg2;
  if (name == "full_return") return Algorithm::FullReturn;
  if (name == "full_feature") return Algorithm::FullFeature;
  reject("algorithm must be one of alg1, alg2, full_return, full_feature");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    reject(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) reject("config must be a JSON object");

  ExperimentConfig config;
  const auto require = [&](const char* field) -> const json& {
    if (!doc.contains(field)) {
      reject(std::string(field) + ": missing required field");
    }
    return doc.at(field);
  };

  const json& algorithm = require("algorithm");
  if (!algorithm.is_string()) reject("algorithm: must be a string");
  config.algorithm = parse_algorithm(algorithm.get<std::string>());

  const json& instance_path = require("instance_path");
  if (!instance_path.is_string() || instance_path.get<std::string>().empty()) {
    reject("instance_path: must be a nonempty string");
  }
  config.instance_path = instance_path.get<std::string>();

  const json& horizons = require("horizons");
  if (!horizons.is_array()) reject("horizons: must be an array");
  for (const json& entry : horizons) {
    if (!entry.is_number_integer() || entry.get<long>() < 1) {
      reject("horizons: entries must be positive integers");
    }
    config.horizons.push_back(entry.get<long>());
  }
  if (config.horizons.size() < 3) {
    reject("horizons: need at least 3 horizons for slope fitting");
  }
  for (std::size_t i = 1; i < config.horizons.size(); ++i) {
    if (config.horizons[i] <= config.horizons[i - 1]) {
      reject("horizons: must be sorted ascending without duplicates");
    }
  }

  if (doc.contains("delta")) {
    const json& delta = doc.at("delta");
    if (!delta.is_number()) reject("delta: must be a number");
    config.delta = delta.get<double>();
    if (!(config.delta > 0.0 && config.delta < 1.0)) {
      reject("delta: must lie in (0,1)");
    }
  }

  const json& seeds = require("seeds");
  if (!seeds.is_array() || seeds.empty()) {
    reject("seeds: must be a nonempty array");
  }
  std::set<std::uint64_t> seen;
  for (const json& entry : seeds) {
    if (!entry.is_number_integer() || entry.get<std::int64_t>() < 0) {
      reject("seeds: entries must be nonnegative integers");
    }
    const auto seed = entry.get<std::uint64_t>();
    if (!seen.insert(seed).second) reject("seeds: duplicate seed values");
    config.seeds.push_back(seed);
  }

  const json& output_dir = require("output_dir");
  if (!output_dir.is_string() || output_dir.get<std::string>().empty()) {
    reject("output_dir: must be a nonempty string");
  }
  config.output_dir = output_dir.get<std::string>();

  for (const auto& [key, value] : doc.items()) {
    static const std::set<std::string> known = {
        "algorithm", "instance_path", "horizons",
        "delta",     "seeds",         "output_dir"};
    (void)value;
    if (!known.contains(key)) reject(key + ": unknown config field");
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) reject("cannot read config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::string trace_file_name(Algorithm algorithm, long horizon,
                            std::uint64_t seed) {
  return std::string("trace_") + algorithm_name(algorithm) + "_T" +
         std::to_string(horizon) + "_seed" + std::to_string(seed) + ".csv";
}

std::vector<SummaryRow> run_experiment(const ExperimentConfig& config) {
  const EconomyInstance instance = load_instance(config.instance_path);
  std::error_code dir_error;
  std::filesystem::create_directories(config.output_dir, dir_error);
  if (dir_error) {
    reject("output_dir: cannot create " + config.output_dir + ": " +
           dir_error.message());
  }

  const std::size_t n_horizons = config.horizons.size();
  const std::size_t n_seeds = config.seeds.size();
  struct Cell {
    std::size_t hi;
    std::size_t si;
  };
  std::vector<Cell> cells;
  cells.reserve(n_horizons * n_seeds);
  for (std::size_t hi = 0; hi < n_horizons; ++hi) {
    for (std::size_t si = 0; si < n_seeds; ++si) cells.push_back({hi, si});
  }
  std::vector<std::vector<double>> finals(n_horizons,
                                          std::vector<double>(n_seeds, 0.0));

  const auto execute = [&](const Cell& cell) {
    const long horizon = config.horizons[cell.hi];
    const std::uint64_t seed = config.seeds[cell.si];
    const std::string tag =
        "T=" + std::to_string(horizon) + " seed=" + std::to_string(seed);
    try {
      const LearnerResult result =
          run_cell(config.algorithm, instance, horizon, config.delta, seed);
      finals[cell.hi][cell.si] = final_regret(result.trace);
      const std::filesystem::path out_path =
          std::filesystem::path(config.output_dir) /
          trace_file_name(config.algorithm, horizon, seed);
      std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
      if (!out) {
        throw std::runtime_error("cannot write trace file " +
                                 out_path.string());
      }
      write_trace_csv(out, result.trace);
    } catch (const RejectedInput& e) {
      reject(tag + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error(tag + ": " + e.what());
    }
  };

  const int threads =
      std::min<int>(thread_cap(), static_cast<int>(cells.size()));
  if (threads <= 1) {
    for (const Cell& cell : cells) execute(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    const auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cells.size()) return;
        {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (first_error) return;
        }
        try {
          execute(cells[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::vector<SummaryRow> rows;
  rows.reserve(n_horizons);
  for (std::size_t hi = 0; hi < n_horizons; ++hi) {
    SummaryRow row;
    row.horizon = config.horizons[hi];
    row.n_seeds = static_cast<int>(n_seeds);
    double sum = 0.0;
    for (const double value : finals[hi]) sum += value;
    row.mean_final_regret = sum / static_cast<double>(n_seeds);
    double squares = 0.0;
    for (const double value : finals[hi]) {
      const double diff = value - row.mean_final_regret;
      squares += diff * diff;
    }
    row.std_final_regret =
        n_seeds > 1 ? std::sqrt(squares / static_cast<double>(n_seeds - 1))
                    : 0.0;
    rows.push_back(row);
  }

  const std::filesystem::path summary_path =
      std::filesystem::path(config.output_dir) / "summary.csv";
  std::ofstream out(summary_path, std::ios::binary | std::ios::trunc);
  if (!out) reject("output_dir: cannot write " + summary_path.string());
  out << summary_csv(rows);
  return rows;
}

std::string summary_csv(std::span<const SummaryRow> rows) {
  std::string text = "T,mean_final_regret,std_final_regret,n_seeds\n";
  for (const SummaryRow& row : rows) {
    text += std::to_string(row.horizon);
    text += ',';
    text += format_double(row.mean_final_regret);
    text += ',';
    text += format_double(row.std_final_regret);
    text += ',';
    text += std::to_string(row.n_seeds);
    text += '\n';
  }
  return text;
}

std::vector<SummaryRow> load_summary_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) reject("cannot read summary file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty() ||
      lines[0] != "T,mean_final_regret,std_final_regret,n_seeds") {
    reject("summary: missing or malformed header");
  }
  std::vector<SummaryRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> fields = split_fields(lines[i]);
    if (fields.size() != 4) {
      reject("summary: expected 4 fields on line " + std::to_string(i + 1));
    }
    SummaryRow row;
    row.horizon = parse_csv_long(fields[0], "T");
    row.mean_final_regret = parse_csv_double(fields[1], "mean_final_regret");
    row.std_final_regret = parse_csv_double(fields[2], "std_final_regret");
    row.n_seeds = static_cast<int>(parse_csv_long(fields[3], "n_seeds"));
    rows.push_back(row);
  }
  return rows;
}

SlopeFit fit_regret_slope(std::span<const SummaryRow> summary,
                          std::span<const long> horizons) {
  if (horizons.size() < 3) {
    reject("horizons: need at least 3 horizons for slope fitting");
  }
  SlopeFit fit;
  fit.points.reserve(horizons.size());
  for (const long horizon : horizons) {
    const SummaryRow* row = nullptr;
    for (const SummaryRow& candidate : summary) {
      if (candidate.horizon == horizon) {
        row = &candidate;
        break;
      }
    }
    if (row == nullptr) {
      reject("horizon " + std::to_string(horizon) + " missing from summary");
    }
    if (!(row->mean_final_regret > 0.0)) {
      reject("horizon " + std::to_string(horizon) +
             ": mean regret must be positive for log-log fitting");
    }
    fit.points.emplace_back(std::log(static_cast<double>(horizon)),
                            std::log(row->mean_final_regret));
  }

  const double n = static_cast<double>(fit.points.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& [x, y] : fit.points) {
    mean_x += x;
    mean_y += y;
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [x, y] : fit.points) {
    sxx += (x - mean_x) * (x - mean_x);
    sxy += (x - mean_x) * (y - mean_y);
    syy += (y - mean_y) * (y - mean_y);
  }
  if (!(sxx > 0.0)) reject("horizons: need distinct horizons for slope fitting");
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  if (syy > 0.0) {
    double residual = 0.0;
    for (const auto& [x, y] : fit.points) {
      const double predicted = fit.intercept + fit.slope * x;
      residual += (y - predicted) * (y - predicted);
    }
    fit.r_squared = std::clamp(1.0 - residual / syy, 0.0, 1.0);
  } else {
    fit.r_squared = 1.0;  // constant regret fits a flat line exactly
  }
  return fit;
}

}  // namespace creco
