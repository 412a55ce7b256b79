#include "creco/fullreco.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "creco/kernels.hpp"

namespace creco {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec aggregate_of(const EconomyInstance& instance) {
  Vec ubar(instance.dim(), 0.0);
  for (const Vec& u : instance.rewards().user_vectors) {
    for (std::size_t i = 0; i < ubar.size(); ++i) ubar[i] += u[i];
  }
  return ubar;
}

void require_full_recommendation(const EconomyInstance& instance) {
  if (instance.slots() != instance.creator_count()) {
    throw RejectedInput("full-recommendation operations need S = K");
  }
}

void require_quadratic(const CreatorProfile& creator) {
  if (creator.mode != ResponseMode::QuadraticBestResponse) {
    throw RejectedInput("best responses need a quadratic-response creator");
  }
}

double fault_sign(ResponseFault fault) {
  return fault == ResponseFault::CostSignFlip ? -1.0 : 1.0;
}

// Per-creator feature-contract term: total mean reward minus payment at the
// creator's best response.
double creator_feature_term(const EconomyInstance& instance,
                            const CreatorProfile& creator, const Vec& theta,
                            ResponseFault fault) {
  const ContentVector content = best_response_feature(creator, theta, fault);
  double total = 0.0;
  for (int j = 0; j < instance.user_count(); ++j) {
    total += mean_reward(instance.rewards(), j, content);
  }
  return total -
         kernels::dot(theta.data(), content.coords().data(), theta.size());
}

RecommendationPolicy full_policy(int users, int creators) {
  RecommendationPolicy policy;
  policy.users = users;
  policy.creators = creators;
  policy.slots = creators;
  policy.assign.assign(static_cast<std::size_t>(users) * creators, 1);
  return policy;
}

}  // namespace

BestResponseProblem make_best_response_problem(const EconomyInstance& instance,
                                               int creator_index) {
  if (creator_index < 0 || creator_index >= instance.creator_count()) {
    throw RejectedInput("creator index out of range");
  }
  const CreatorProfile& creator = instance.creator(creator_index);
  require_quadratic(creator);
  return BestResponseProblem{creator, aggregate_of(instance),
                             instance.rewards().user_vectors};
}

ContentVector best_response_return(const BestResponseProblem& problem,
                                   double alpha, ResponseFault fault) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw RejectedInput("return contract share must lie in [0,1]");
  }
  require_quadratic(problem.creator);
  const std::size_t dim = problem.creator.cost_center.dim();
  if (problem.aggregate_preference.size() != dim) {
    throw RejectedInput("aggregate preference dimension mismatch");
  }
  const double pull = fault_sign(fault) * alpha * problem.creator.cost_scale;
  Vec target(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    target[i] =
        problem.creator.cost_center[i] + pull * problem.aggregate_preference[i];
  }
  ContentVector response(project_to_unit_ball(std::move(target)));
  if (fault == ResponseFault::None) {
    // The closed form assumed a linear aggregate; verify no user's inner
    // product leaves [0,1], where clipping would have changed the optimum.
    for (const Vec& u : problem.user_vectors) {
      if (u.size() != dim) {
        throw RejectedInput("user vector dimension mismatch");
      }
      const double t =
          kernels::dot(u.data(), response.coords().data(), u.size());
      if (t < -kBallTolerance || t > 1.0 + kBallTolerance) {
        throw RejectedInput("best response leaves the clip-free regime");
      }
    }
  }
  return response;
}

ContentVector best_response_feature(const CreatorProfile& creator,
                                    const Vec& theta, ResponseFault fault) {
  require_quadratic(creator);
  validate_contract(ContractSpec{FeatureContract{theta}});
  const std::size_t dim = creator.cost_center.dim();
  if (theta.size() != dim) {
    throw RejectedInput("feature contract dimension does not match creator");
  }
  const double pull = fault_sign(fault) * creator.cost_scale;
  Vec target(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    target[i] = creator.cost_center[i] + pull * theta[i];
  }
  return ContentVector(project_to_unit_ball(std::move(target)));
}

double utility_return_full(const EconomyInstance& instance, double alpha,
                           ResponseFault fault) {
  require_full_recommendation(instance);
  double total = 0.0;
  for (int k = 0; k < instance.creator_count(); ++k) {
    const BestResponseProblem problem = make_best_response_problem(instance, k);
    const ContentVector content = best_response_return(problem, alpha, fault);
    for (int j = 0; j < instance.user_count(); ++j) {
      total += mean_reward(instance.rewards(), j, content);
    }
  }
  return (1.0 - alpha) * total;
}

double utility_feature_full(const EconomyInstance& instance, const Vec& theta,
                            ResponseFault fault) {
  require_full_recommendation(instance);
  double total = 0.0;
  for (int k = 0; k < instance.creator_count(); ++k) {
    total += creator_feature_term(instance, instance.creator(k), theta, fault);
  }
  return total;
}

DominanceResult check_superset_dominance(const EconomyInstance& instance,
                                         std::span<const double> alpha_grid,
                                         std::span<const Vec> theta_grid) {
  require_full_recommendation(instance);
  if (alpha_grid.empty() || theta_grid.empty()) {
    throw RejectedInput("dominance check needs nonempty contract grids");
  }
  const std::size_t dim = static_cast<std::size_t>(instance.dim());
  for (const Vec& theta : theta_grid) {
    if (theta.size() != dim) {
      throw RejectedInput("theta grid dimension does not match the instance");
    }
  }
  const Vec ubar = aggregate_of(instance);
  if (norm(ubar) > 1.0 + kBallTolerance) {
    throw RejectedInput(
        "aggregate preference must lie in the unit ball for the embedding");
  }
  for (const double alpha : alpha_grid) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw RejectedInput("alpha grid entries must lie in [0,1]");
    }
    bool found = false;
    for (const Vec& theta : theta_grid) {
      double dist2 = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double diff = theta[i] - alpha * ubar[i];
        dist2 += diff * diff;
      }
      if (std::sqrt(dist2) <= 1e-12) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw RejectedInput(
          "theta grid does not contain the embedded return contract");
    }
  }

  DominanceResult out;
  double best_return = -kInf;
  for (const double alpha : alpha_grid) {
    best_return = std::max(best_return, utility_return_full(instance, alpha));
  }
  double best_feature = -kInf;
  for (const Vec& theta : theta_grid) {
    best_feature = std::max(best_feature, utility_feature_full(instance, theta));
  }
  out.max_return_utility = best_return;
  out.max_feature_utility = best_feature;
  out.feature_dominates = best_feature >= best_return - 1e-9;
  return out;
}

CheckReport monotonicity_check(const EconomyInstance& instance,
                               std::span<const double> alpha_samples,
                               ResponseFault fault) {
  if (alpha_samples.empty()) {
    throw RejectedInput("monotonicity check needs alpha samples");
  }
  for (std::size_t i = 0; i < alpha_samples.size(); ++i) {
    if (!(alpha_samples[i] >= 0.0 && alpha_samples[i] < 1.0)) {
      throw RejectedInput("alpha samples must lie in [0,1)");
    }
    if (i > 0 && alpha_samples[i] < alpha_samples[i - 1]) {
      throw RejectedInput("alpha samples must be sorted ascending");
    }
  }
  double margin = kInf;
  for (int k = 0; k < instance.creator_count(); ++k) {
    const BestResponseProblem problem = make_best_response_problem(instance, k);
    double previous = 0.0;
    for (std::size_t i = 0; i < alpha_samples.size(); ++i) {
      const ContentVector content =
          best_response_return(problem, alpha_samples[i], fault);
      double aggregate = 0.0;
      for (int j = 0; j < instance.user_count(); ++j) {
        aggregate += mean_reward(instance.rewards(), j, content);
      }
      if (i > 0) margin = std::min(margin, aggregate - previous);
      previous = aggregate;
    }
  }
  return CheckReport{margin >= -1e-9, margin};
}

CheckReport response_alignment_check(const CreatorProfile& creator,
                                     std::span<const Vec> thetas,
                                     std::span<const Vec> gammas,
                                     ResponseFault fault) {
  require_quadratic(creator);
  if (thetas.empty() || thetas.size() != gammas.size()) {
    throw RejectedInput(
        "alignment check needs matching theta and gamma samples");
  }
  const std::size_t dim = creator.cost_center.dim();
  double margin = kInf;
  Vec shifted(dim);
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const Vec& theta = thetas[i];
    const Vec& gamma = gammas[i];
    if (theta.size() != dim || gamma.size() != dim) {
      throw RejectedInput("alignment sample dimension mismatch");
    }
    for (std::size_t c = 0; c < dim; ++c) shifted[c] = theta[c] + gamma[c];
    if (norm(theta) > 1.0 + kBallTolerance ||
        norm(shifted) > 1.0 + kBallTolerance) {
      throw RejectedInput("alignment samples must stay inside the unit ball");
    }
    const ContentVector base = best_response_feature(creator, theta, fault);
    const ContentVector moved = best_response_feature(creator, shifted, fault);
    double inner = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      inner += (moved[c] - base[c]) * gamma[c];
    }
    margin = std::min(margin, inner);
  }
  return CheckReport{margin >= -1e-9, margin};
}

std::vector<ContinuityDraw> sample_continuity_draws(
    const EconomyInstance& instance, int count, std::uint64_t seed) {
  if (count < 1) throw RejectedInput("draw count must be positive");
  const int dim = instance.dim();
  const Vec ubar = aggregate_of(instance);
  if (norm(ubar) > 1.0 + kBallTolerance) {
    throw RejectedInput(
        "sampler needs the aggregate preference inside the unit ball");
  }
  for (const Vec& u : instance.rewards().user_vectors) {
    for (double x : u) {
      if (x < 0.0) {
        throw RejectedInput(
            "sampler needs nonnegative preference coordinates");
      }
    }
  }
  Rng rng(seed);
  std::vector<ContinuityDraw> draws;
  draws.reserve(count);
  long attempts = 0;
  const long attempt_limit = 1000L * count;
  Vec end(dim);
  while (static_cast<int>(draws.size()) < count) {
    if (++attempts > attempt_limit) {
      throw RejectedInput("could not sample clip-free draws for this instance");
    }
    ContinuityDraw draw;
    draw.theta.resize(dim);
    draw.perturbation.assign(dim, 0.0);
    do {
      for (int i = 0; i < dim; ++i) draw.theta[i] = uniform01(rng);
    } while (norm(draw.theta) > 1.0);
    draw.blend = 1.0 - uniform01(rng);
    if (draws.size() % 2 == 1) {
      for (int i = 0; i < dim; ++i) {
        draw.perturbation[i] = 0.1 * (uniform01(rng) - 0.5);
      }
    }
    bool inside = true;
    for (int i = 0; i < dim; ++i) {
      end[i] = (1.0 - draw.blend) * draw.theta[i] + draw.blend * ubar[i] +
               draw.perturbation[i];
      if (end[i] < 0.0) inside = false;
    }
    if (inside && norm(end) <= 1.0) draws.push_back(std::move(draw));
  }
  return draws;
}

CheckReport continuity_check(const EconomyInstance& instance,
                             std::span<const ContinuityDraw> draws,
                             ResponseFault fault) {
  if (draws.empty()) throw RejectedInput("continuity check needs draws");
  const std::size_t dim = static_cast<std::size_t>(instance.dim());
  const Vec ubar = aggregate_of(instance);
  double margin = kInf;
  Vec gamma(dim);
  Vec end(dim);
  for (const ContinuityDraw& draw : draws) {
    if (draw.theta.size() != dim || draw.perturbation.size() != dim) {
      throw RejectedInput("continuity draw dimension mismatch");
    }
    if (!(draw.blend > 0.0 && draw.blend <= 1.0)) {
      throw RejectedInput("continuity draw blend must lie in (0,1]");
    }
    for (std::size_t i = 0; i < dim; ++i) {
      gamma[i] = draw.blend * (ubar[i] - draw.theta[i]) + draw.perturbation[i];
      end[i] = draw.theta[i] + gamma[i];
    }
    if (norm(draw.theta) > 1.0 + kBallTolerance ||
        norm(end) > 1.0 + kBallTolerance) {
      throw RejectedInput("continuity draw leaves the unit ball");
    }
    const double bound =
        2.0 * (norm(gamma) + norm(draw.perturbation) / draw.blend);
    for (int k = 0; k < instance.creator_count(); ++k) {
      const CreatorProfile& creator = instance.creator(k);
      const double drop =
          creator_feature_term(instance, creator, draw.theta, fault) -
          creator_feature_term(instance, creator, end, fault);
      margin = std::min(margin, bound - drop);
    }
  }
  return CheckReport{margin >= -1e-9, margin};
}

CheckReport embedding_identity_check(const EconomyInstance& instance,
                                     std::span<const double> alphas) {
  require_full_recommendation(instance);
  if (alphas.empty()) {
    throw RejectedInput("embedding check needs alpha samples");
  }
  const Vec ubar = aggregate_of(instance);
  if (norm(ubar) > 1.0 + kBallTolerance) {
    throw RejectedInput(
        "aggregate preference must lie in the unit ball for the embedding");
  }
  double margin = kInf;
  Vec theta(ubar.size());
  for (const double alpha : alphas) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw RejectedInput("alpha samples must lie in [0,1]");
    }
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = alpha * ubar[i];
    const double diff = std::abs(utility_feature_full(instance, theta) -
                                 utility_return_full(instance, alpha));
    margin = std::min(margin, -diff);
  }
  return CheckReport{margin >= -1e-12, margin};
}

LearnerResult run_full_return_learner(const EconomyInstance& instance,
                                      long horizon, double delta,
                                      std::uint64_t seed,
                                      const RoundCallback& on_round) {
  require_full_recommendation(instance);
  const int users = instance.user_count();
  const int creators = instance.creator_count();
  const AlphaGrid grid = build_alpha_grid(horizon);
  const long sweep = static_cast<long>(grid.points.size());
  if (horizon < sweep) {
    throw RejectedInput("horizon shorter than the exploration sweep");
  }

  std::vector<BestResponseProblem> problems;
  problems.reserve(creators);
  for (int k = 0; k < creators; ++k) {
    problems.push_back(make_best_response_problem(instance, k));
  }

  std::vector<ContractSpec> contracts;
  std::vector<std::vector<ContentVector>> contents(sweep);
  std::vector<std::vector<double>> means(sweep);
  std::vector<double> utility(sweep);
  contracts.reserve(sweep);
  for (long i = 0; i < sweep; ++i) {
    const double alpha = grid.points[i];
    contracts.push_back(ReturnContract{alpha});
    contents[i].reserve(creators);
    means[i].resize(static_cast<std::size_t>(users) * creators);
    double total = 0.0;
    for (int k = 0; k < creators; ++k) {
      contents[i].push_back(best_response_return(problems[k], alpha));
      for (int j = 0; j < users; ++j) {
        const double m =
            mean_reward(instance.rewards(), j, contents[i][k]);
        means[i][static_cast<std::size_t>(j) * creators + k] = m;
        total += m;
      }
    }
    utility[i] = (1.0 - alpha) * total;
  }

  double oracle_value = -kInf;
  for (const ContractSpec& candidate :
       return_grid_candidates(kReturnReferenceFineness)) {
    oracle_value =
        std::max(oracle_value,
                 utility_return_full(
                     instance, std::get<ReturnContract>(candidate).alpha));
  }
  for (long i = 0; i < sweep; ++i) {
    oracle_value = std::max(oracle_value, utility[i]);
  }

  UcbTable table(UcbConfig{horizon, grid.epsilon, delta, 1, 1}, contracts);
  const double scale = static_cast<double>(users) * creators;
  const RecommendationPolicy policy = full_policy(users, creators);
  Rng rng(seed);
  const bool noisy = instance.rewards().bernoulli_noise;

  LearnerResult result;
  result.trajectory.reserve(horizon);
  std::vector<double> utilities;
  utilities.reserve(horizon);
  std::vector<double> estimates(sweep);
  std::vector<double> totals(creators);
  for (long t = 1; t <= horizon; ++t) {
    long chosen;
    if (t <= sweep) {
      chosen = t - 1;
    } else {
      table.fill_estimates(estimates.data());
      chosen = 0;
      double best_score = -kInf;
      for (long i = 0; i < sweep; ++i) {
        const double score = (1.0 - grid.points[i]) * scale * estimates[i];
        if (score > best_score) {
          best_score = score;
          chosen = i;
        }
      }
    }

    RoundOutcome outcome;
    outcome.contract = contracts[chosen];
    outcome.contents = contents[chosen];
    outcome.policy = policy;
    std::fill(totals.begin(), totals.end(), 0.0);
    for (int j = 0; j < users; ++j) {
      for (int k = 0; k < creators; ++k) {
        const double mean =
            means[chosen][static_cast<std::size_t>(j) * creators + k];
        const double reward =
            noisy ? (uniform01(rng) < mean ? 1.0 : 0.0) : mean;
        outcome.observed.push_back(Observation{j, k, reward});
        totals[k] += reward;
      }
    }
    outcome.payments.resize(creators);
    double reward_sum = 0.0;
    double payment_sum = 0.0;
    for (int k = 0; k < creators; ++k) {
      outcome.payments[k] = grid.points[chosen] * totals[k];
      reward_sum += totals[k];
      payment_sum += outcome.payments[k];
    }
    outcome.realized_platform_utility = reward_sum - payment_sum;

    RoundOutcome aggregated;
    aggregated.contract = contracts[chosen];
    aggregated.observed.push_back(Observation{0, 0, reward_sum / scale});
    table.record(aggregated, static_cast<int>(chosen));

    utilities.push_back(utility[chosen]);
    result.trajectory.push_back(std::move(outcome));
    if (on_round) {
      on_round(t, static_cast<int>(chosen), result.trajectory.back(), table);
    }
  }
  result.trace = make_regret_trace(std::move(utilities), oracle_value);
  return result;
}

LearnerResult run_full_feature_learner(const EconomyInstance& instance,
                                       long horizon, double delta,
                                       std::uint64_t seed, int dim,
                                       const RoundCallback& on_round) {
  require_full_recommendation(instance);
  if (dim != instance.dim()) {
    throw RejectedInput("dimension argument does not match the instance");
  }
  const int users = instance.user_count();
  const int creators = instance.creator_count();
  const FeatureCovering covering = build_feature_covering(dim, horizon);
  const long sweep = static_cast<long>(covering.points.size());
  if (horizon < sweep) {
    throw RejectedInput("horizon shorter than the exploration sweep");
  }

  std::vector<ContractSpec> contracts;
  std::vector<std::vector<ContentVector>> contents(sweep);
  std::vector<std::vector<double>> means(sweep);
  std::vector<double> payments(sweep);
  std::vector<double> utility(sweep);
  contracts.reserve(sweep);
  for (long i = 0; i < sweep; ++i) {
    const Vec& theta = covering.points[i];
    contracts.push_back(FeatureContract{theta});
    contents[i].reserve(creators);
    means[i].resize(static_cast<std::size_t>(users) * creators);
    double total = 0.0;
    double paid = 0.0;
    for (int k = 0; k < creators; ++k) {
      contents[i].push_back(
          best_response_feature(instance.creator(k), theta));
      for (int j = 0; j < users; ++j) {
        const double m =
            mean_reward(instance.rewards(), j, contents[i][k]);
        means[i][static_cast<std::size_t>(j) * creators + k] = m;
        total += m;
      }
      paid += kernels::dot(theta.data(), contents[i][k].coords().data(),
                           theta.size());
    }
    payments[i] = paid;
    utility[i] = total - paid;
  }

  double oracle_value = -kInf;
  for (const Vec& theta : ball_lattice(dim, kFeatureReferenceSpacing)) {
    oracle_value =
        std::max(oracle_value, utility_feature_full(instance, theta));
  }
  for (long i = 0; i < sweep; ++i) {
    oracle_value = std::max(oracle_value, utility[i]);
  }

  UcbTable table(UcbConfig{horizon, covering.epsilon, delta, 1, 1}, contracts);
  const double scale = static_cast<double>(users) * creators;
  const RecommendationPolicy policy = full_policy(users, creators);
  Rng rng(seed);
  const bool noisy = instance.rewards().bernoulli_noise;

  LearnerResult result;
  result.trajectory.reserve(horizon);
  std::vector<double> utilities;
  utilities.reserve(horizon);
  std::vector<double> estimates(sweep);
  std::vector<double> totals(creators);
  for (long t = 1; t <= horizon; ++t) {
    long chosen;
    if (t <= sweep) {
      chosen = t - 1;
    } else {
      table.fill_estimates(estimates.data());
      chosen = 0;
      double best_score = -kInf;
      for (long i = 0; i < sweep; ++i) {
        const double score = scale * estimates[i] - payments[i];
        if (score > best_score) {
          best_score = score;
          chosen = i;
        }
      }
    }

    RoundOutcome outcome;
    outcome.contract = contracts[chosen];
    outcome.contents = contents[chosen];
    outcome.policy = policy;
    std::fill(totals.begin(), totals.end(), 0.0);
    for (int j = 0; j < users; ++j) {
      for (int k = 0; k < creators; ++k) {
        const double mean =
            means[chosen][static_cast<std::size_t>(j) * creators + k];
        const double reward =
            noisy ? (uniform01(rng) < mean ? 1.0 : 0.0) : mean;
        outcome.observed.push_back(Observation{j, k, reward});
        totals[k] += reward;
      }
    }
    outcome.payments.resize(creators);
    double reward_sum = 0.0;
    double payment_sum = 0.0;
    const Vec& theta = covering.points[chosen];
    for (int k = 0; k < creators; ++k) {
      outcome.payments[k] = kernels::dot(
          theta.data(), contents[chosen][k].coords().data(), theta.size());
      reward_sum += totals[k];
      payment_sum += outcome.payments[k];
    }
    outcome.realized_platform_utility = reward_sum - payment_sum;

    RoundOutcome aggregated;
    aggregated.contract = contracts[chosen];
    aggregated.observed.push_back(Observation{0, 0, reward_sum / scale});
    table.record(aggregated, static_cast<int>(chosen));

    utilities.push_back(utility[chosen]);
    result.trajectory.push_back(std::move(outcome));
    if (on_round) {
      on_round(t, static_cast<int>(chosen), result.trajectory.back(), table);
    }
  }
  result.trace = make_regret_trace(std::move(utilities), oracle_value);
  return result;
}

}  // namespace creco
