#include "creco/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "creco/kernels.hpp"

namespace creco {

namespace {

void check_policy_shape(const EconomyInstance& instance,
                        const RecommendationPolicy& policy) {
  if (policy.users != instance.user_count() ||
      policy.creators != instance.creator_count() ||
      policy.slots != instance.slots() || !validate_policy(policy)) {
    throw RejectedInput("policy does not match the instance shape");
  }
}

std::vector<ContentVector> contents_for(const EconomyInstance& instance,
                                        const ContractSpec& contract) {
  std::vector<ContentVector> contents;
  contents.reserve(instance.creators().size());
  for (const CreatorProfile& creator : instance.creators()) {
    contents.push_back(generate_content(creator, contract));
  }
  return contents;
}

// Row-major M x K matrix of mean rewards for fixed contents.
std::vector<double> mean_matrix(const EconomyInstance& instance,
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

RecommendationPolicy top_s_policy(std::span<const double> values, int users,
                                  int creators, int slots) {
  if (users < 1 || creators < 1 || slots < 1 || slots > creators ||
      values.size() != static_cast<std::size_t>(users) * creators) {
    throw RejectedInput("top-S policy needs a consistent M x K value matrix");
  }
  RecommendationPolicy policy;
  policy.users = users;
  policy.creators = creators;
  policy.slots = slots;
  policy.assign.assign(static_cast<std::size_t>(users) * creators, 0);
  std::vector<int> order(creators);
  for (int j = 0; j < users; ++j) {
    const double* row = values.data() + static_cast<std::size_t>(j) * creators;
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [row](int a, int b) {
      if (row[a] != row[b]) return row[a] > row[b];
      return a < b;
    });
    for (int s = 0; s < slots; ++s) {
      policy.assign[static_cast<std::size_t>(j) * creators + order[s]] = 1;
    }
  }
  return policy;
}

RoundOutcome run_round(const EconomyInstance& instance,
                       const ContractSpec& contract,
                       const RecommendationPolicy& policy, Rng& rng) {
  check_policy_shape(instance, policy);
  RoundOutcome out;
  out.contract = contract;
  out.contents = contents_for(instance, contract);
  out.policy = policy;

  const int users = instance.user_count();
  const int creators = instance.creator_count();
  const bool noisy = instance.rewards().bernoulli_noise;
  std::vector<double> creator_total(creators, 0.0);
  out.observed.reserve(static_cast<std::size_t>(users) * instance.slots());
  for (int j = 0; j < users; ++j) {
    for (int k = 0; k < creators; ++k) {
      if (!policy.assigned(j, k)) continue;
      const double mean = mean_reward(instance.rewards(), j, out.contents[k]);
      const double reward = noisy ? (uniform01(rng) < mean ? 1.0 : 0.0) : mean;
      out.observed.push_back(Observation{j, k, reward});
      creator_total[k] += reward;
    }
  }

  out.payments.resize(creators);
  double reward_sum = 0.0;
  double payment_sum = 0.0;
  for (int k = 0; k < creators; ++k) {
    out.payments[k] =
        contract_payment(contract, out.contents[k], creator_total[k]);
    reward_sum += creator_total[k];
    payment_sum += out.payments[k];
  }
  out.realized_platform_utility = reward_sum - payment_sum;
  return out;
}

double expected_utility_return(const EconomyInstance& instance, double alpha,
                               const RecommendationPolicy& policy) {
  check_policy_shape(instance, policy);
  const ContractSpec contract = ReturnContract{alpha};
  const std::vector<ContentVector> contents = contents_for(instance, contract);
  double assigned_mean_sum = 0.0;
  for (int j = 0; j < instance.user_count(); ++j) {
    for (int k = 0; k < instance.creator_count(); ++k) {
      if (policy.assigned(j, k)) {
        assigned_mean_sum += mean_reward(instance.rewards(), j, contents[k]);
      }
    }
  }
  return (1.0 - alpha) * assigned_mean_sum;
}

double expected_utility_feature(const EconomyInstance& instance,
                                const Vec& theta,
                                const RecommendationPolicy& policy) {
  check_policy_shape(instance, policy);
  const ContractSpec contract = FeatureContract{theta};
  const std::vector<ContentVector> contents = contents_for(instance, contract);
  double value = 0.0;
  for (int k = 0; k < instance.creator_count(); ++k) {
    for (int j = 0; j < instance.user_count(); ++j) {
      if (policy.assigned(j, k)) {
        value += mean_reward(instance.rewards(), j, contents[k]);
      }
    }
    value -= kernels::dot(theta.data(), contents[k].coords().data(),
                          theta.size());
  }
  return value;
}

double expected_utility(const EconomyInstance& instance,
                        const ContractSpec& contract,
                        const RecommendationPolicy& policy) {
  if (const auto* ret = std::get_if<ReturnContract>(&contract)) {
    return expected_utility_return(instance, ret->alpha, policy);
  }
  return expected_utility_feature(
      instance, std::get<FeatureContract>(contract).theta, policy);
}

RecommendationPolicy optimal_policy_for_contract(
    const EconomyInstance& instance, const ContractSpec& contract) {
  const std::vector<ContentVector> contents = contents_for(instance, contract);
  const std::vector<double> means = mean_matrix(instance, contents);
  return top_s_policy(std::span<const double>(means), instance.user_count(),
                      instance.creator_count(), instance.slots());
}

OracleResult oracle_optimum(const EconomyInstance& instance,
                            std::span<const ContractSpec> family) {
  if (family.empty()) {
    throw RejectedInput("oracle needs a nonempty contract family");
  }
  OracleResult best;
  bool have_best = false;
  for (const ContractSpec& contract : family) {
    RecommendationPolicy policy = optimal_policy_for_contract(instance, contract);
    const double value = expected_utility(instance, contract, policy);
    if (!have_best || value > best.value) {
      best = OracleResult{contract, std::move(policy), value};
      have_best = true;
    }
  }
  return best;
}

std::vector<ContractSpec> return_grid_candidates(double fineness) {
  if (!(fineness > 0.0) || fineness > 1.0) {
    throw RejectedInput("return grid fineness must lie in (0,1]");
  }
  const long n = static_cast<long>(std::floor(1.0 / fineness + 1e-9));
  std::vector<ContractSpec> out;
  out.reserve(n + 1);
  for (long i = 0; i <= n; ++i) {
    out.push_back(ReturnContract{std::min(i * fineness, 1.0)});
  }
  return out;
}

std::vector<Vec> ball_lattice(int dim, double spacing) {
  if (dim < 1) throw RejectedInput("ball lattice needs dimension >= 1");
  if (!(spacing > 0.0)) {
    throw RejectedInput("ball lattice spacing must be positive");
  }
  const long reach = static_cast<long>(std::floor(1.0 / spacing + 1e-9));
  std::vector<Vec> out;
  Vec point(dim);
  std::vector<long> idx(dim, -reach);
  // Odometer over [-reach, reach]^dim, last coordinate fastest; keeps the
  // point order deterministic.
  while (true) {
    for (int i = 0; i < dim; ++i) point[i] = idx[i] * spacing;
    if (norm(point) <= 1.0 + kBallTolerance) {
      out.push_back(point);
    }
    int pos = dim - 1;
    while (pos >= 0 && idx[pos] == reach) {
      idx[pos] = -reach;
      --pos;
    }
    if (pos < 0) break;
    ++idx[pos];
  }
  return out;
}

std::vector<ContractSpec> feature_net_candidates(int dim, double spacing) {
  std::vector<ContractSpec> out;
  for (Vec& point : ball_lattice(dim, spacing)) {
    out.push_back(FeatureContract{std::move(point)});
  }
  return out;
}

RegretTrace make_regret_trace(std::vector<double> per_round_utilities,
                              double oracle_value) {
  if (per_round_utilities.empty()) {
    throw RejectedInput("regret trace needs at least one round");
  }
  const long total = static_cast<long>(per_round_utilities.size());
  const long step = (total + 9) / 10;
  std::set<long> checkpoints;
  for (long i = 1; i <= 10; ++i) checkpoints.insert(std::min(i * step, total));
  RegretTrace trace;
  trace.oracle_value = oracle_value;
  trace.per_round_expected_utility = std::move(per_round_utilities);
  double running = 0.0;
  for (long t = 1; t <= total; ++t) {
    running += trace.per_round_expected_utility[t - 1];
    if (checkpoints.count(t) != 0) {
      trace.cumulative_regret_at[t] = t * oracle_value - running;
    }
  }
  return trace;
}

RegretTrace build_regret_trace(std::span<const PlayedRound> rounds,
                               const EconomyInstance& instance,
                               double oracle_value) {
  std::vector<double> utilities;
  utilities.reserve(rounds.size());
  for (const PlayedRound& r : rounds) {
    utilities.push_back(expected_utility(instance, r.contract, r.policy));
  }
  return make_regret_trace(std::move(utilities), oracle_value);
}

void write_trace_csv(std::ostream& out, const RegretTrace& trace) {
  out << "round,expected_utility,cumulative_regret\n";
  for (const auto& [round, regret] : trace.cumulative_regret_at) {
    out << round << ','
        << format_double(trace.per_round_expected_utility[round - 1]) << ','
        << format_double(regret) << '\n';
  }
}

std::string trace_csv(const RegretTrace& trace) {
  std::ostringstream out;
  write_trace_csv(out, trace);
  return out.str();
}

}  // namespace creco
