#include "creco/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "creco/kernels.hpp"

namespace creco {

AlphaGrid build_alpha_grid(long horizon) {
  if (horizon < 1) {
    throw RejectedInput("horizon must be a positive integer");
  }
  const double epsilon = std::pow(static_cast<double>(horizon), -1.0 / 3.0);
  AlphaGrid grid;
  grid.epsilon = epsilon;
  // floor(1/epsilon) with a guard against 1/epsilon landing one ulp below an
  // integer; points regenerated from the count so spacing stays exactly
  // epsilon.
  const long n = std::max<long>(
      1, static_cast<long>(std::floor(1.0 / epsilon + 1e-9)));
  grid.points.reserve(n);
  for (long i = 0; i < n; ++i) grid.points.push_back(i * epsilon);
  return grid;
}

FeatureCovering build_feature_covering(int dim, long horizon) {
  if (dim < 1) throw RejectedInput("dimension must be >= 1");
  if (horizon < 1) throw RejectedInput("horizon must be a positive integer");
  const double epsilon =
      std::pow(static_cast<double>(horizon), -1.0 / (dim + 2));
  FeatureCovering covering;
  covering.epsilon = epsilon;
  if (epsilon >= 1.0) {
    covering.points.push_back(Vec(dim, 0.0));
  } else {
    covering.points =
        ball_lattice(dim, epsilon / std::sqrt(static_cast<double>(dim)));
  }
  return covering;
}

UcbTable::UcbTable(UcbConfig config, std::vector<ContractSpec> contracts)
    : config_(config), contracts_(std::move(contracts)) {
  if (config_.horizon < 1) {
    throw RejectedInput("table horizon must be positive");
  }
  if (!(config_.epsilon > 0.0 && config_.epsilon <= 1.0)) {
    throw RejectedInput("table epsilon must lie in (0,1]");
  }
  if (!(config_.delta > 0.0 && config_.delta < 1.0)) {
    throw RejectedInput("table delta must lie in (0,1)");
  }
  if (config_.users < 1 || config_.creators < 1) {
    throw RejectedInput("table needs at least one user and one creator");
  }
  if (contracts_.empty()) {
    throw RejectedInput("table needs at least one contract");
  }
  for (const ContractSpec& contract : contracts_) validate_contract(contract);
  const std::size_t cells =
      contracts_.size() * config_.users * config_.creators;
  counts_.assign(cells, 0);
  sums_.assign(cells, 0.0);
  beta_ = 2.0 * std::log(static_cast<double>(config_.users) * config_.creators *
                         static_cast<double>(config_.horizon) /
                         (config_.epsilon * config_.delta));
}

double UcbTable::estimate(int contract_index, int user, int creator) const {
  const std::uint32_t n = counts_[key(contract_index, user, creator)];
  if (n == 0) return kUnvisitedEstimate;
  const double cnt = static_cast<double>(n);
  return sums_[key(contract_index, user, creator)] / cnt +
         std::sqrt(beta_ / cnt);
}

void UcbTable::fill_estimates(double* out) const {
  kernels::ucb_fill(counts_.data(), sums_.data(), counts_.size(), beta_,
                    kUnvisitedEstimate, out);
}

void UcbTable::record(const RoundOutcome& outcome, int contract_index) {
  if (contract_index < 0 || contract_index >= contract_count()) {
    throw RejectedInput("contract index out of range");
  }
  if (!contracts_equal(outcome.contract, contracts_[contract_index])) {
    throw RejectedInput(
        "outcome contract does not match the table entry at this index");
  }
  for (const Observation& obs : outcome.observed) {
    if (obs.user < 0 || obs.user >= config_.users || obs.creator < 0 ||
        obs.creator >= config_.creators) {
      throw RejectedInput("observation indices out of range");
    }
    const std::size_t cell = key(contract_index, obs.user, obs.creator);
    ++counts_[cell];
    sums_[cell] += obs.reward;
  }
}

namespace {

// Sum of the S largest row entries (ties resolved toward lower indices,
// which cannot change the sum but keeps the scan deterministic).
double top_s_sum(const double* row, int creators, int slots,
                 std::vector<int>& order) {
  order.resize(creators);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [row](int a, int b) {
    if (row[a] != row[b]) return row[a] > row[b];
    return a < b;
  });
  double total = 0.0;
  for (int s = 0; s < slots; ++s) total += row[order[s]];
  return total;
}

void check_selection_shape(std::size_t candidates, std::size_t estimates,
                           int users, int creators, int slots) {
  if (candidates == 0) throw RejectedInput("candidate set is empty");
  if (users < 1 || creators < 1 || slots < 1 || slots > creators ||
      estimates != candidates * users * creators) {
    throw RejectedInput("estimate matrix shape mismatch");
  }
}

}  // namespace

Selection select_return_from_estimates(std::span<const double> estimates,
                                       std::span<const double> alphas,
                                       int users, int creators, int slots) {
  check_selection_shape(alphas.size(), estimates.size(), users, creators,
                        slots);
  const std::size_t block = static_cast<std::size_t>(users) * creators;
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<int> order;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const double* base = estimates.data() + i * block;
    double total = 0.0;
    for (int j = 0; j < users; ++j) {
      total += top_s_sum(base + static_cast<std::size_t>(j) * creators,
                         creators, slots, order);
    }
    const double score = (1.0 - alphas[i]) * total;
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  Selection selection;
  selection.index = best;
  selection.policy = top_s_policy(
      std::span<const double>(estimates.data() + best * block, block), users,
      creators, slots);
  return selection;
}

Selection select_feature_from_estimates(std::span<const double> estimates,
                                        std::span<const double> payments,
                                        int users, int creators, int slots) {
  check_selection_shape(payments.size(), estimates.size(), users, creators,
                        slots);
  const std::size_t block = static_cast<std::size_t>(users) * creators;
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<int> order;
  for (std::size_t i = 0; i < payments.size(); ++i) {
    const double* base = estimates.data() + i * block;
    double total = 0.0;
    for (int j = 0; j < users; ++j) {
      total += top_s_sum(base + static_cast<std::size_t>(j) * creators,
                         creators, slots, order);
    }
    const double score = total - payments[i];
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  Selection selection;
  selection.index = best;
  selection.policy = top_s_policy(
      std::span<const double>(estimates.data() + best * block, block), users,
      creators, slots);
  return selection;
}

Selection select_return(const UcbTable& table, const AlphaGrid& grid,
                        int slots) {
  if (static_cast<std::size_t>(table.contract_count()) != grid.points.size()) {
    throw RejectedInput("grid size does not match the table");
  }
  const int users = table.config().users;
  const int creators = table.config().creators;
  std::vector<double> estimates(static_cast<std::size_t>(table.contract_count()) *
                                users * creators);
  table.fill_estimates(estimates.data());
  return select_return_from_estimates(estimates, grid.points, users, creators,
                                      slots);
}

Selection select_feature(const UcbTable& table, const FeatureCovering& covering,
                         const std::vector<std::vector<ContentVector>>& contents,
                         int slots) {
  const std::size_t n = covering.points.size();
  if (static_cast<std::size_t>(table.contract_count()) != n) {
    throw RejectedInput("covering size does not match the table");
  }
  if (contents.size() != n) {
    throw RejectedInput("contents cache does not match the covering");
  }
  const int users = table.config().users;
  const int creators = table.config().creators;
  std::vector<double> payments(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (contents[i].size() != static_cast<std::size_t>(creators)) {
      throw RejectedInput("contents cache entry has the wrong creator count");
    }
    const Vec& theta = covering.points[i];
    double paid = 0.0;
    for (int k = 0; k < creators; ++k) {
      paid += kernels::dot(theta.data(), contents[i][k].coords().data(),
                           theta.size());
    }
    payments[i] = paid;
  }
  std::vector<double> estimates(n * users * creators);
  table.fill_estimates(estimates.data());
  return select_feature_from_estimates(estimates, payments, users, creators,
                                       slots);
}

namespace {

// Exploration-phase policy: the first S creators for every user. Any valid
// policy works during the sweep; this one is deterministic.
RecommendationPolicy index_policy(int users, int creators, int slots) {
  RecommendationPolicy policy;
  policy.users = users;
  policy.creators = creators;
  policy.slots = slots;
  policy.assign.assign(static_cast<std::size_t>(users) * creators, 0);
  for (int j = 0; j < users; ++j) {
    for (int k = 0; k < slots; ++k) {
      policy.assign[static_cast<std::size_t>(j) * creators + k] = 1;
    }
  }
  return policy;
}

double assigned_sum(const std::vector<double>& values,
                    const RecommendationPolicy& policy) {
  double total = 0.0;
  for (int j = 0; j < policy.users; ++j) {
    for (int k = 0; k < policy.creators; ++k) {
      if (policy.assigned(j, k)) {
        total += values[static_cast<std::size_t>(j) * policy.creators + k];
      }
    }
  }
  return total;
}

std::vector<double> means_for_contents(const EconomyInstance& instance,
                                       const std::vector<ContentVector>& contents) {
  const int users = instance.user_count();
  const int creators = instance.creator_count();
  std::vector<double> means(static_cast<std::size_t>(users) * creators);
  for (int j = 0; j < users; ++j) {
    for (int k = 0; k < creators; ++k) {
      means[static_cast<std::size_t>(j) * creators + k] =
          mean_reward(instance.rewards(), j, contents[k]);
    }
  }
  return means;
}

}  // namespace

LearnerResult run_alg1_with_grid(const EconomyInstance& instance,
                                 const AlphaGrid& grid, long horizon,
                                 double delta, std::uint64_t seed,
                                 const RoundCallback& on_round) {
  const long sweep = static_cast<long>(grid.points.size());
  if (sweep < 1) throw RejectedInput("alpha grid is empty");
  if (horizon < sweep) {
    throw RejectedInput("horizon shorter than the exploration sweep");
  }
  const int users = instance.user_count();
  const int creators = instance.creator_count();
  const int slots = instance.slots();

  std::vector<ContractSpec> contracts;
  contracts.reserve(sweep);
  for (double alpha : grid.points) contracts.push_back(ReturnContract{alpha});

  // Contents are deterministic per contract, so responses and their mean
  // rewards are evaluated once per grid point.
  std::vector<std::vector<double>> means(sweep);
  for (long i = 0; i < sweep; ++i) {
    std::vector<ContentVector> contents;
    contents.reserve(creators);
    for (const CreatorProfile& creator : instance.creators()) {
      contents.push_back(generate_content(creator, contracts[i]));
    }
    means[i] = means_for_contents(instance, contents);
  }

  std::vector<ContractSpec> family =
      return_grid_candidates(kReturnReferenceFineness);
  family.insert(family.end(), contracts.begin(), contracts.end());
  const double oracle_value = oracle_optimum(instance, family).value;

  UcbTable table(UcbConfig{horizon, grid.epsilon, delta, users, creators},
                 contracts);
  Rng rng(seed);
  const RecommendationPolicy sweep_policy = index_policy(users, creators, slots);

  LearnerResult result;
  result.trajectory.reserve(horizon);
  std::vector<double> utilities;
  utilities.reserve(horizon);
  for (long t = 1; t <= horizon; ++t) {
    int chosen;
    RecommendationPolicy policy;
    if (t <= sweep) {
      chosen = static_cast<int>(t - 1);
      policy = sweep_policy;
    } else {
      Selection selection = select_return(table, grid, slots);
      chosen = selection.index;
      policy = std::move(selection.policy);
    }
    RoundOutcome outcome = run_round(instance, contracts[chosen], policy, rng);
    table.record(outcome, chosen);
    utilities.push_back((1.0 - grid.points[chosen]) *
                        assigned_sum(means[chosen], policy));
    result.trajectory.push_back(std::move(outcome));
    if (on_round) on_round(t, chosen, result.trajectory.back(), table);
  }
  result.trace = make_regret_trace(std::move(utilities), oracle_value);
  return result;
}

LearnerResult run_alg1(const EconomyInstance& instance, long horizon,
                       double delta, std::uint64_t seed,
                       const RoundCallback& on_round) {
  return run_alg1_with_grid(instance, build_alpha_grid(horizon), horizon,
                            delta, seed, on_round);
}

LearnerResult run_alg2_with_covering(const EconomyInstance& instance,
                                     const FeatureCovering& covering,
                                     long horizon, double delta,
                                     std::uint64_t seed,
                                     const RoundCallback& on_round) {
  const long sweep = static_cast<long>(covering.points.size());
  if (sweep < 1) throw RejectedInput("feature covering is empty");
  if (horizon < sweep) {
    throw RejectedInput("horizon shorter than the exploration sweep");
  }
  const int users = instance.user_count();
  const int creators = instance.creator_count();
  const int slots = instance.slots();

  std::vector<ContractSpec> contracts;
  contracts.reserve(sweep);
  for (const Vec& theta : covering.points) {
    contracts.push_back(FeatureContract{theta});
  }

  std::vector<std::vector<ContentVector>> contents(sweep);
  std::vector<std::vector<double>> means(sweep);
  std::vector<double> payments(sweep);
  for (long i = 0; i < sweep; ++i) {
    contents[i].reserve(creators);
    for (const CreatorProfile& creator : instance.creators()) {
      contents[i].push_back(generate_content(creator, contracts[i]));
    }
    means[i] = means_for_contents(instance, contents[i]);
    const Vec& theta = covering.points[i];
    double paid = 0.0;
    for (int k = 0; k < creators; ++k) {
      paid += kernels::dot(theta.data(), contents[i][k].coords().data(),
                           theta.size());
    }
    payments[i] = paid;
  }

  std::vector<ContractSpec> family =
      feature_net_candidates(instance.dim(), kFeatureReferenceSpacing);
  family.insert(family.end(), contracts.begin(), contracts.end());
  const double oracle_value = oracle_optimum(instance, family).value;

  UcbTable table(UcbConfig{horizon, covering.epsilon, delta, users, creators},
                 contracts);
  Rng rng(seed);
  const RecommendationPolicy sweep_policy = index_policy(users, creators, slots);

  LearnerResult result;
  result.trajectory.reserve(horizon);
  std::vector<double> utilities;
  utilities.reserve(horizon);
  for (long t = 1; t <= horizon; ++t) {
    int chosen;
    RecommendationPolicy policy;
    if (t <= sweep) {
      chosen = static_cast<int>(t - 1);
      policy = sweep_policy;
    } else {
      Selection selection = select_feature(table, covering, contents, slots);
      chosen = selection.index;
      policy = std::move(selection.policy);
    }
    RoundOutcome outcome = run_round(instance, contracts[chosen], policy, rng);
    table.record(outcome, chosen);
    utilities.push_back(assigned_sum(means[chosen], policy) -
                        payments[chosen]);
    result.trajectory.push_back(std::move(outcome));
    if (on_round) on_round(t, chosen, result.trajectory.back(), table);
  }
  result.trace = make_regret_trace(std::move(utilities), oracle_value);
  return result;
}

LearnerResult run_alg2(const EconomyInstance& instance, long horizon,
                       double delta, std::uint64_t seed,
                       const RoundCallback& on_round) {
  return run_alg2_with_covering(instance,
                                build_feature_covering(instance.dim(), horizon),
                                horizon, delta, seed, on_round);
}

OptimismCounter::OptimismCounter(const EconomyInstance& instance,
                                 std::span<const ContractSpec> contracts) {
  if (contracts.empty()) {
    throw RejectedInput("optimism counter needs at least one contract");
  }
  users_ = instance.user_count();
  creators_ = instance.creator_count();
  means_.reserve(contracts.size() * users_ * creators_);
  for (const ContractSpec& contract : contracts) {
    std::vector<ContentVector> contents;
    contents.reserve(creators_);
    for (const CreatorProfile& creator : instance.creators()) {
      contents.push_back(generate_content(creator, contract));
    }
    for (int j = 0; j < users_; ++j) {
      for (int k = 0; k < creators_; ++k) {
        means_.push_back(mean_reward(instance.rewards(), j, contents[k]));
      }
    }
  }
}

void OptimismCounter::observe(const UcbTable& table) {
  if (table.config().users != users_ || table.config().creators != creators_ ||
      static_cast<std::size_t>(table.contract_count()) * users_ * creators_ !=
          means_.size()) {
    throw RejectedInput("table shape does not match the optimism counter");
  }
  std::size_t cell = 0;
  for (int ci = 0; ci < table.contract_count(); ++ci) {
    for (int j = 0; j < users_; ++j) {
      for (int k = 0; k < creators_; ++k, ++cell) {
        if (table.count(ci, j, k) == 0) continue;
        ++observations_;
        if (table.estimate(ci, j, k) < means_[cell]) ++violations_;
      }
    }
  }
}

}  // namespace creco
