#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "creco/economy.hpp"
#include "creco/environment.hpp"
#include "creco/learners.hpp"

// Full-recommendation regime (S = K): every item reaches every user, so the
// recommendation policy is fixed and the game collapses to pure contract
// design. Creators maximize payment minus quadratic cost, which gives
// closed-form responses and exact utility oracles. The check_* operations are
// numeric versions of the structural facts those closed forms satisfy; each
// accepts an optional injected fault so tests can prove they detect breakage.

namespace creco {

/// Per-creator pricing problem against the aggregate preference
/// u-bar = sum_j u_j. Only meaningful in the clip-free regime, where every
/// mean reward equals its raw inner product and the aggregate is linear.
struct BestResponseProblem {
  CreatorProfile creator;
  Vec aggregate_preference;
  std::vector<Vec> user_vectors;
};

/// Requires the creator at this index to be a quadratic responder.
BestResponseProblem make_best_response_problem(const EconomyInstance& instance,
                                               int creator_index);

/// Test instrumentation: CostSignFlip negates the response's pull toward the
/// contract gradient, producing contents that violate the structural properties.
enum class ResponseFault { None, CostSignFlip };

/// proj_ball(b_k + alpha lambda_k u-bar), the payment-minus-cost maximizer
/// under a return contract with a linear aggregate. With no fault injected,
/// rejects responses whose per-user inner products leave [0,1] (the closed
/// form is only the true best response while clipping is inactive).
ContentVector best_response_return(const BestResponseProblem& problem,
                                   double alpha,
                                   ResponseFault fault = ResponseFault::None);

/// proj_ball(b_k + lambda_k theta).
ContentVector best_response_feature(const CreatorProfile& creator,
                                    const Vec& theta,
                                    ResponseFault fault = ResponseFault::None);

/// (1 - alpha) * sum over creators and users of the mean reward at the
/// return best responses. Requires S = K.
double utility_return_full(const EconomyInstance& instance, double alpha,
                           ResponseFault fault = ResponseFault::None);

/// Sum over creators of (total mean reward - theta . content) at the feature
/// best responses. Requires S = K.
double utility_feature_full(const EconomyInstance& instance, const Vec& theta,
                            ResponseFault fault = ResponseFault::None);

struct DominanceResult {
  double max_feature_utility = 0.0;
  double max_return_utility = 0.0;
  bool feature_dominates = false;  // max_u_f >= max_u_r - 1e-9
};

/// Brute-force maxima over both contract grids. theta_grid must contain the
/// embedded contract alpha * u-bar for every alpha in alpha_grid (within
/// 1e-12), and u-bar must lie in the unit ball, otherwise the comparison is
/// rejected: the feature family must actually be a superset for the
/// dominance claim to apply.
DominanceResult check_superset_dominance(const EconomyInstance& instance,
                                         std::span<const double> alpha_grid,
                                         std::span<const Vec> theta_grid);

/// pass iff margin >= -tolerance, where margin is the worst slack observed
/// by the check (+infinity when no pair constrains it).
struct CheckReport {
  bool pass = false;
  double margin = 0.0;
};

/// Verifies that each creator's aggregate mean reward at the return best
/// response is nondecreasing in alpha over consecutive sample pairs. (That
/// aggregate equals u_{r,k}(alpha)/(1-alpha), so this is equivalently the
/// monotonicity of the normalized per-creator utility.) Samples must be
/// sorted and lie in [0,1). Tolerance 1e-9.
CheckReport monotonicity_check(const EconomyInstance& instance,
                               std::span<const double> alpha_samples,
                               ResponseFault fault = ResponseFault::None);

/// Verifies (c*_k(theta+gamma) - c*_k(theta)) . gamma >= 0 for each sampled
/// pair; theta and theta+gamma must lie in the unit ball. Tolerance 1e-9.
CheckReport response_alignment_check(const CreatorProfile& creator,
                                     std::span<const Vec> thetas,
                                     std::span<const Vec> gammas,
                                     ResponseFault fault = ResponseFault::None);

/// One sampled perturbation for the utility-continuity bound: the contract
/// moves from theta by gamma = blend * (u-bar - theta) + perturbation.
struct ContinuityDraw {
  Vec theta;
  double blend = 1.0;       // in (0,1]
  Vec perturbation;         // small additive part of the move
};

/// Draws with theta and theta+gamma inside the ball and inside the
/// nonnegative orthant (the clip-free regime of the acceptance instances).
/// Even-indexed draws carry a zero perturbation, odd-indexed a small one.
/// Requires nonnegative user coordinates and a u-bar inside the ball.
std::vector<ContinuityDraw> sample_continuity_draws(
    const EconomyInstance& instance, int count, std::uint64_t seed);

/// Verifies the per-creator drop bound
///   u_{f,k}(theta) - u_{f,k}(theta+gamma) <= 2 (|gamma| + |perturbation|/blend)
/// over all draws and creators. Tolerance 1e-9.
CheckReport continuity_check(const EconomyInstance& instance,
                             std::span<const ContinuityDraw> draws,
                             ResponseFault fault = ResponseFault::None);

/// Verifies u_f(alpha * u-bar) == u_r(alpha) for each sampled alpha, the
/// identity that makes the embedded return family a special case of the
/// feature family. Tolerance 1e-12.
CheckReport embedding_identity_check(const EconomyInstance& instance,
                                     std::span<const double> alphas);

/// Return-contract learner for the full-recommendation game: alpha grid of
/// resolution T^(-1/3), one optimistic estimate per grid point fed by the
/// aggregated observation (total reward) / (K M). Requires S = K.
LearnerResult run_full_return_learner(const EconomyInstance& instance,
                                      long horizon, double delta,
                                      std::uint64_t seed,
                                      const RoundCallback& on_round = {});

/// Feature-contract analogue over the T^(-1/(d+2)) covering. The dim
/// argument must match the instance dimension. Requires S = K.
LearnerResult run_full_feature_learner(const EconomyInstance& instance,
                                       long horizon, double delta,
                                       std::uint64_t seed, int dim,
                                       const RoundCallback& on_round = {});

}  // namespace creco
