#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "creco/economy.hpp"
#include "creco/environment.hpp"

// Online learners for both contract families. Each learner discretizes its
// contract space from the horizon, sweeps the discretization once while
// recording observations, then repeatedly picks the (contract, policy) pair
// maximizing an optimistic utility estimate.

namespace creco {

/// Optimistic value assigned to keys with no observations yet.
inline constexpr double kUnvisitedEstimate = 1.0;

/// Reference-oracle resolutions the regret baseline is measured against.
inline constexpr double kReturnReferenceFineness = 1e-3;
inline constexpr double kFeatureReferenceSpacing = 1e-2;

struct AlphaGrid {
  double epsilon = 1.0;
  std::vector<double> points;  // {0, epsilon, 2 epsilon, ...} inside [0,1)
};

/// epsilon = T^(-1/3); the point count is recomputed as floor(1/epsilon)
/// (with a small guard against downward rounding) and points are regenerated
/// as i * epsilon so spacing stays exact.
AlphaGrid build_alpha_grid(long horizon);

struct FeatureCovering {
  double epsilon = 1.0;
  std::vector<Vec> points;
};

/// epsilon = T^(-1/(d+2)). Points are the axis-aligned lattice of spacing
/// epsilon/sqrt(d) intersected with the unit ball (cells then have diameter
/// <= epsilon, so the lattice is a Euclidean epsilon-net). epsilon >= 1
/// degenerates to the origin alone.
FeatureCovering build_feature_covering(int dim, long horizon);

struct UcbConfig {
  long horizon = 0;     // T
  double epsilon = 0.0; // discretization resolution, in (0,1]
  double delta = 0.0;   // confidence level, in (0,1)
  int users = 0;        // M
  int creators = 0;     // K
};

/// Per (contract index, user, creator) observation counts and reward sums.
/// Estimates are empirical mean plus the bonus sqrt(beta/N) with
/// beta = 2 ln(M K T / (epsilon delta)); unvisited keys estimate
/// kUnvisitedEstimate. Estimates are not clipped at 1.
class UcbTable {
 public:
  UcbTable(UcbConfig config, std::vector<ContractSpec> contracts);

  const UcbConfig& config() const { return config_; }
  double bonus_beta() const { return beta_; }
  int contract_count() const { return static_cast<int>(contracts_.size()); }
  const ContractSpec& contract(int i) const { return contracts_[i]; }

  std::uint32_t count(int contract_index, int user, int creator) const {
    return counts_[key(contract_index, user, creator)];
  }
  double sum(int contract_index, int user, int creator) const {
    return sums_[key(contract_index, user, creator)];
  }
  double estimate(int contract_index, int user, int creator) const;

  /// Writes all contract_count * users * creators estimates, contract-major.
  void fill_estimates(double* out) const;

  /// Folds every observation of the outcome into the table. The outcome's
  /// contract must equal the stored contract at this index.
  void record(const RoundOutcome& outcome, int contract_index);

 private:
  std::size_t key(int contract_index, int user, int creator) const {
    return (static_cast<std::size_t>(contract_index) * config_.users + user) *
               config_.creators +
           creator;
  }

  UcbConfig config_;
  std::vector<ContractSpec> contracts_;
  std::vector<std::uint32_t> counts_;
  std::vector<double> sums_;
  double beta_ = 0.0;
};

struct Selection {
  int index = 0;  // chosen contract index within the grid/covering
  RecommendationPolicy policy;
};

/// Core of the return-contract argmax, on a prebuilt estimate matrix
/// (candidate-major M x K blocks): score(i) = (1 - alpha_i) * sum over users
/// of the top-S estimates. Lowest index wins ties; the returned policy is the
/// winner's per-user top-S assignment.
Selection select_return_from_estimates(std::span<const double> estimates,
                                       std::span<const double> alphas,
                                       int users, int creators, int slots);

/// Feature-contract analogue: score(i) = sum of per-user top-S estimates
/// minus payments[i], where payments[i] is the total contract payout at
/// candidate i's contents.
Selection select_feature_from_estimates(std::span<const double> estimates,
                                        std::span<const double> payments,
                                        int users, int creators, int slots);

Selection select_return(const UcbTable& table, const AlphaGrid& grid,
                        int slots);

/// contents[i] holds the K creator responses to covering point i.
Selection select_feature(const UcbTable& table, const FeatureCovering& covering,
                         const std::vector<std::vector<ContentVector>>& contents,
                         int slots);

/// Observer invoked after each round's table update.
using RoundCallback = std::function<void(
    long round, int contract_index, const RoundOutcome&, const UcbTable&)>;

struct LearnerResult {
  std::vector<RoundOutcome> trajectory;
  RegretTrace trace;
};

/// Return-contract learner: sweeps the alpha grid once (top-S-by-index
/// policy), then plays select_return each round. The regret baseline is the
/// oracle over the reference grid joined with the learner's own grid.
LearnerResult run_alg1(const EconomyInstance& instance, long horizon,
                       double delta, std::uint64_t seed,
                       const RoundCallback& on_round = {});

/// run_alg1 with a caller-supplied grid (the horizon must cover the sweep).
LearnerResult run_alg1_with_grid(const EconomyInstance& instance,
                                 const AlphaGrid& grid, long horizon,
                                 double delta, std::uint64_t seed,
                                 const RoundCallback& on_round = {});

/// Feature-contract learner: visits every covering point once, then plays
/// select_feature each round.
LearnerResult run_alg2(const EconomyInstance& instance, long horizon,
                       double delta, std::uint64_t seed,
                       const RoundCallback& on_round = {});

LearnerResult run_alg2_with_covering(const EconomyInstance& instance,
                                     const FeatureCovering& covering,
                                     long horizon, double delta,
                                     std::uint64_t seed,
                                     const RoundCallback& on_round = {});

/// Tracks how often optimistic estimates fall below the true means they
/// bound. observe() scans every visited key of the table once.
class OptimismCounter {
 public:
  OptimismCounter(const EconomyInstance& instance,
                  std::span<const ContractSpec> contracts);

  void observe(const UcbTable& table);

  long violations() const { return violations_; }
  long observations() const { return observations_; }
  double violation_fraction() const {
    return observations_ == 0
               ? 0.0
               : static_cast<double>(violations_) / observations_;
  }

 private:
  std::vector<double> means_;  // contract-major M x K true means
  int users_ = 0;
  int creators_ = 0;
  long violations_ = 0;
  long observations_ = 0;
};

}  // namespace creco
