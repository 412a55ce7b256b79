#pragma once

// Shared builders for tests: small hand-rolled instances, random instance
// generators, and a brute-force policy optimizer used as an oracle.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "creco/economy.hpp"
#include "creco/environment.hpp"

namespace creco::testing {

inline CreatorProfile smooth_creator(int index, Vec a, Vec b) {
  return CreatorProfile{index, ContentVector(a), ContentVector(std::move(b)),
                        ContentVector(std::move(a)), 1.0,
                        ResponseMode::SmoothInterpolation};
}

inline CreatorProfile quad_creator(int index, Vec center, double scale) {
  return CreatorProfile{index, ContentVector(center), ContentVector(center),
                        ContentVector(std::move(center)), scale,
                        ResponseMode::QuadraticBestResponse};
}

inline EconomyInstance smooth_instance(
    std::vector<std::pair<Vec, Vec>> anchors, std::vector<Vec> users,
    int slots, bool noise = true) {
  std::vector<CreatorProfile> creators;
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    creators.push_back(smooth_creator(static_cast<int>(k),
                                      std::move(anchors[k].first),
                                      std::move(anchors[k].second)));
  }
  RewardModel rewards;
  rewards.user_vectors = std::move(users);
  rewards.bernoulli_noise = noise;
  return EconomyInstance::validated(std::move(creators), std::move(rewards),
                                    slots);
}

inline EconomyInstance quad_instance(
    std::vector<std::pair<Vec, double>> centers_scales, std::vector<Vec> users,
    int slots, bool noise = true) {
  std::vector<CreatorProfile> creators;
  for (std::size_t k = 0; k < centers_scales.size(); ++k) {
    creators.push_back(quad_creator(static_cast<int>(k),
                                    std::move(centers_scales[k].first),
                                    centers_scales[k].second));
  }
  RewardModel rewards;
  rewards.user_vectors = std::move(users);
  rewards.bernoulli_noise = noise;
  return EconomyInstance::validated(std::move(creators), std::move(rewards),
                                    slots);
}

inline double uniform_in(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform point in the unit ball (cube rejection), optionally rescaled.
inline Vec random_ball_vec(Rng& rng, int dim, double max_norm = 1.0) {
  Vec v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = uniform_in(rng, -1.0, 1.0);
  } while (norm(v) > 1.0);
  for (int i = 0; i < dim; ++i) v[i] *= max_norm;
  return v;
}

/// Random interpolating-creator instance; clipping may be active.
inline EconomyInstance random_smooth_instance(Rng& rng) {
  const int dim = 1 + static_cast<int>(rng() % 3);
  const int creators = 1 + static_cast<int>(rng() % 3);
  const int users = 1 + static_cast<int>(rng() % 3);
  const int slots = 1 + static_cast<int>(rng() % creators);
  std::vector<std::pair<Vec, Vec>> anchors;
  for (int k = 0; k < creators; ++k) {
    anchors.emplace_back(random_ball_vec(rng, dim), random_ball_vec(rng, dim));
  }
  std::vector<Vec> user_vectors;
  for (int j = 0; j < users; ++j) {
    user_vectors.push_back(random_ball_vec(rng, dim));
  }
  return smooth_instance(std::move(anchors), std::move(user_vectors), slots);
}

/// Random quadratic-responder instance; clipping may be active.
inline EconomyInstance random_quad_instance(Rng& rng) {
  const int dim = 1 + static_cast<int>(rng() % 3);
  const int creators = 1 + static_cast<int>(rng() % 3);
  const int users = 1 + static_cast<int>(rng() % 3);
  const int slots = 1 + static_cast<int>(rng() % creators);
  std::vector<std::pair<Vec, double>> centers;
  for (int k = 0; k < creators; ++k) {
    centers.emplace_back(random_ball_vec(rng, dim, 0.8),
                         uniform_in(rng, 0.3, 1.5));
  }
  std::vector<Vec> user_vectors;
  for (int j = 0; j < users; ++j) {
    user_vectors.push_back(random_ball_vec(rng, dim));
  }
  return quad_instance(std::move(centers), std::move(user_vectors), slots);
}

/// Random full-recommendation instance in the clip-free regime: nonnegative
/// user coordinates with aggregate norm <= 0.95, strictly positive cost
/// centers, quadratic responders, S = K. Every per-user inner product with
/// any best response stays inside [0,1).
inline EconomyInstance random_clipfree_fullreco_instance(Rng& rng) {
  const int dim = 1 + static_cast<int>(rng() % 3);
  const int creators = 1 + static_cast<int>(rng() % 3);
  const int users = 1 + static_cast<int>(rng() % 3);

  std::vector<Vec> user_vectors(users, Vec(dim));
  Vec aggregate(dim, 0.0);
  for (Vec& u : user_vectors) {
    for (int i = 0; i < dim; ++i) {
      u[i] = uniform_in(rng, 0.05, 1.0);
      aggregate[i] += u[i];
    }
  }
  const double target = uniform_in(rng, 0.5, 0.95);
  const double rescale = target / norm(aggregate);
  for (Vec& u : user_vectors) {
    for (int i = 0; i < dim; ++i) u[i] *= rescale;
  }

  std::vector<std::pair<Vec, double>> centers;
  for (int k = 0; k < creators; ++k) {
    Vec center(dim);
    for (int i = 0; i < dim; ++i) {
      center[i] = uniform_in(rng, 0.05, 0.55 / std::sqrt(dim));
    }
    centers.emplace_back(std::move(center), uniform_in(rng, 0.3, 1.5));
  }
  return quad_instance(std::move(centers), std::move(user_vectors), creators);
}

/// All S-subsets of {0..creators-1} in lexicographic order.
inline std::vector<std::vector<int>> subsets_of_size(int creators, int slots) {
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  const auto recurse = [&](auto&& self, int start) -> void {
    if (static_cast<int>(current.size()) == slots) {
      out.push_back(current);
      return;
    }
    for (int k = start; k < creators; ++k) {
      current.push_back(k);
      self(self, k + 1);
      current.pop_back();
    }
  };
  recurse(recurse, 0);
  return out;
}

/// Brute force over every valid policy (product of per-user S-subsets).
/// First strict maximum in lexicographic order wins, matching the lowest-
/// index tie-breaks of the production path.
inline RecommendationPolicy exhaustive_best_policy(
    const EconomyInstance& instance, const ContractSpec& contract) {
  const int users = instance.user_count();
  const int creators = instance.creator_count();
  const int slots = instance.slots();
  const std::vector<std::vector<int>> subsets =
      subsets_of_size(creators, slots);

  std::vector<std::size_t> pick(users, 0);
  RecommendationPolicy best;
  double best_value = -std::numeric_limits<double>::infinity();
  bool have = false;
  while (true) {
    RecommendationPolicy policy;
    policy.users = users;
    policy.creators = creators;
    policy.slots = slots;
    policy.assign.assign(static_cast<std::size_t>(users) * creators, 0);
    for (int j = 0; j < users; ++j) {
      for (const int k : subsets[pick[j]]) {
        policy.assign[static_cast<std::size_t>(j) * creators + k] = 1;
      }
    }
    const double value = expected_utility(instance, contract, policy);
    if (!have || value > best_value) {
      best = policy;
      best_value = value;
      have = true;
    }
    int pos = users - 1;
    while (pos >= 0 && pick[pos] + 1 == subsets.size()) {
      pick[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++pick[pos];
  }
  return best;
}

inline bool policies_equal(const RecommendationPolicy& a,
                           const RecommendationPolicy& b) {
  return a.users == b.users && a.creators == b.creators &&
         a.slots == b.slots && a.assign == b.assign;
}

}  // namespace creco::testing
