#pragma once

#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "creco/economy.hpp"

// One-round game execution with sampled rewards, exact expected utilities for
// regret accounting, and the brute-force oracle used as the regret baseline.

namespace creco {

struct Observation {
  int user = 0;
  int creator = 0;
  double reward = 0.0;
};

struct RoundOutcome {
  ContractSpec contract;
  std::vector<ContentVector> contents;  // one per creator
  RecommendationPolicy policy;
  std::vector<Observation> observed;  // (user asc, creator asc); M*S entries
  std::vector<double> payments;       // one per creator
  double realized_platform_utility = 0.0;
};

/// Plays one round: creators respond to the contract, each assigned (user,
/// creator) pair yields a reward draw (Bernoulli around the mean, or the mean
/// itself when the model is noiseless), creators are paid per the contract.
/// Draws consume the stream only for assigned pairs, user-major order.
RoundOutcome run_round(const EconomyInstance& instance,
                       const ContractSpec& contract,
                       const RecommendationPolicy& policy, Rng& rng);

/// (1-alpha) * sum of assigned mean rewards at the alpha-responses.
/// Exact expectation; no sampling.
double expected_utility_return(const EconomyInstance& instance, double alpha,
                               const RecommendationPolicy& policy);

/// Sum over creators of (assigned mean rewards - theta . content), contents
/// at the theta-responses. Exact expectation.
double expected_utility_feature(const EconomyInstance& instance,
                                const Vec& theta,
                                const RecommendationPolicy& policy);

double expected_utility(const EconomyInstance& instance,
                        const ContractSpec& contract,
                        const RecommendationPolicy& policy);

/// For each user independently, recommends the S creators with the largest
/// mean reward under this contract; ties go to the lowest creator index.
/// Optimal among all valid policies because the objective is separable.
RecommendationPolicy optimal_policy_for_contract(const EconomyInstance& instance,
                                                 const ContractSpec& contract);

struct OracleResult {
  ContractSpec contract;
  RecommendationPolicy policy;
  double value = 0.0;
};

/// Exhaustively pairs every candidate contract with its optimal policy and
/// returns the maximizer (first candidate wins exact ties). Empty family is
/// rejected.
OracleResult oracle_optimum(const EconomyInstance& instance,
                            std::span<const ContractSpec> family);

/// Return-contract reference family: {0, h, 2h, ..., 1} at spacing h.
std::vector<ContractSpec> return_grid_candidates(double fineness);

/// Feature-contract reference family: axis-aligned lattice at the given
/// per-coordinate spacing, intersected with the unit ball.
std::vector<ContractSpec> feature_net_candidates(int dim, double spacing);

/// Lattice points (i_1,...,i_d) * spacing with norm <= 1 + tolerance, indices
/// enumerated odometer-style (last coordinate fastest). Deterministic order.
std::vector<Vec> ball_lattice(int dim, double spacing);

/// Per-user top-S assignment over an M x K row-major value matrix; ties go to
/// the lowest creator index.
RecommendationPolicy top_s_policy(std::span<const double> values, int users,
                                  int creators, int slots);

struct RegretTrace {
  std::vector<double> per_round_expected_utility;  // index t-1 = round t
  double oracle_value = 0.0;
  std::map<long, double> cumulative_regret_at;  // checkpoint round -> regret
};

/// Builds the trace from per-round exact utilities. Checkpoints are the 10
/// evenly spaced rounds {ceil(T/10), 2 ceil(T/10), ...} clamped to T.
RegretTrace make_regret_trace(std::vector<double> per_round_utilities,
                              double oracle_value);

struct PlayedRound {
  ContractSpec contract;
  RecommendationPolicy policy;
};

/// make_regret_trace over the exact expected utility of each played round.
RegretTrace build_regret_trace(std::span<const PlayedRound> rounds,
                               const EconomyInstance& instance,
                               double oracle_value);

/// CSV with header `round,expected_utility,cumulative_regret`, one row per
/// checkpoint, shortest round-trip number formatting.
std::string trace_csv(const RegretTrace& trace);
void write_trace_csv(std::ostream& out, const RegretTrace& trace);

}  // namespace creco
