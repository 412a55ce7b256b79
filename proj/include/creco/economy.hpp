#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "creco/common.hpp"

// Ground-truth domain model: contents, contracts, rewards, recommendation
// policies, and the immutable instance bundling them. Everything here is a
// pure function of its arguments; randomness and learning state live in the
// environment and learner modules.

namespace creco {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm(const Vec& v);

/// Euclidean projection onto the unit ball: vectors with norm > 1 are scaled
/// back to the boundary, everything else passes through unchanged.
Vec project_to_unit_ball(Vec v);

/// Point in the d-dimensional unit ball. Construction validates d >= 1,
/// finite coordinates, and norm <= 1 + kBallTolerance.
class ContentVector {
 public:
  explicit ContentVector(Vec coords);

  const Vec& coords() const { return coords_; }
  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }

 private:
  Vec coords_;
};

struct ReturnContract {
  double alpha = 0.0;  // share of realized total reward, in [0,1]
};

struct FeatureContract {
  Vec theta;  // linear payment theta . content, norm <= 1
};

using ContractSpec = std::variant<ReturnContract, FeatureContract>;

/// Throws RejectedInput unless the contract parameters are in range
/// (alpha in [0,1]; theta finite with norm <= 1 + kBallTolerance).
void validate_contract(const ContractSpec& contract);

bool contracts_equal(const ContractSpec& a, const ContractSpec& b);

enum class ResponseMode {
  SmoothInterpolation,    // responds to return contracts along a segment
  QuadraticBestResponse,  // maximizes payment minus quadratic cost
};

struct CreatorProfile {
  int index = 0;  // position within the instance's creator list
  ContentVector anchor_a;
  ContentVector anchor_b;
  ContentVector cost_center;  // b_k: content with zero production cost
  double cost_scale = 1.0;    // lambda_k > 0; cost = |c - b_k|^2 / (2 lambda_k)
  ResponseMode mode = ResponseMode::SmoothInterpolation;
};

struct RewardModel {
  std::vector<Vec> user_vectors;  // one preference vector per user, norm <= 1
  bool bernoulli_noise = true;    // false: rounds observe the mean exactly
};

/// Instance-family Lipschitz bounds, computed once at validation:
///   reward_vs_alpha      mean-reward change per unit alpha (interpolating creators)
///   reward_vs_content    mean-reward change per unit content displacement
///   contract_vs_content  payment change per unit content displacement
///   content_vs_contract  content change per unit theta displacement
struct LipschitzMeta {
  double reward_vs_alpha = 0.0;
  double reward_vs_content = 0.0;
  double contract_vs_content = 0.0;
  double content_vs_contract = 0.0;
};

/// M x K boolean assignment; row j marks the creators recommended to user j.
struct RecommendationPolicy {
  int users = 0;
  int creators = 0;
  int slots = 0;  // S: required true count per row
  std::vector<std::uint8_t> assign;  // row-major users x creators

  bool assigned(int j, int k) const {
    return assign[static_cast<std::size_t>(j) * creators + k] != 0;
  }
};

/// True iff the shape is consistent and every row has exactly `slots` entries
/// set, with 1 <= slots <= creators.
bool validate_policy(const RecommendationPolicy& policy);

class EconomyInstance {
 public:
  /// Validates shape and invariants (consistent dimensions, creator index ==
  /// position, cost_scale > 0, user norms <= 1, 1 <= slots <= K) and derives
  /// the Lipschitz metadata. Throws RejectedInput on violation.
  static EconomyInstance validated(std::vector<CreatorProfile> creators,
                                   RewardModel rewards, int slots);

  int creator_count() const { return static_cast<int>(creators_.size()); }
  int user_count() const {
    return static_cast<int>(rewards_.user_vectors.size());
  }
  int slots() const { return slots_; }
  int dim() const { return dim_; }

  const std::vector<CreatorProfile>& creators() const { return creators_; }
  const CreatorProfile& creator(int k) const { return creators_[k]; }
  const RewardModel& rewards() const { return rewards_; }
  const LipschitzMeta& lipschitz_meta() const { return meta_; }

 private:
  EconomyInstance() = default;

  std::vector<CreatorProfile> creators_;
  RewardModel rewards_;
  int slots_ = 1;
  int dim_ = 0;
  LipschitzMeta meta_;
};

/// Deterministic content response.
///   SmoothInterpolation + Return(alpha):  (1-alpha) anchor_a + alpha anchor_b
///   QuadraticBestResponse + Feature(theta): proj_ball(b_k + lambda_k theta)
/// Any other pairing is rejected (return contracts reach quadratic responders
/// only through the full-recommendation aggregate, a separate module).
ContentVector generate_content(const CreatorProfile& creator,
                               const ContractSpec& contract);

/// clip(u_j . content, 0, 1).
double mean_reward(const RewardModel& model, int user,
                   const ContentVector& content);

/// Return(alpha): alpha * total_reward. Feature(theta): theta . content,
/// ignoring total_reward. total_reward must be >= 0.
double contract_payment(const ContractSpec& contract,
                        const ContentVector& content, double total_reward);

/// Parses the JSON instance format: top-level fields `d`, `S`, `users`,
/// `creators`; each creator record carries `mode` ("smooth_interpolation" or
/// "quadratic_best_response"), `anchor_a`, `anchor_b`, `cost_center`,
/// `cost_scale`. Malformed documents raise RejectedInput naming the field.
EconomyInstance parse_instance(const std::string& json_text);

/// parse_instance applied to the contents of a file.
EconomyInstance load_instance(const std::string& path);

}  // namespace creco
