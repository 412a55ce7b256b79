#include "creco/economy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "creco/kernels.hpp"

namespace creco {

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw RejectedInput("dot product of vectors with different dimensions");
  }
  return kernels::dot(a.data(), b.data(), a.size());
}

double norm(const Vec& v) { return std::sqrt(kernels::dot(v.data(), v.data(), v.size())); }

Vec project_to_unit_ball(Vec v) {
  const double n = norm(v);
  if (n > 1.0) {
    kernels::scale(v.data(), 1.0 / n, v.size(), v.data());
  }
  return v;
}

ContentVector::ContentVector(Vec coords) : coords_(std::move(coords)) {
  if (coords_.empty()) {
    throw RejectedInput("content vector needs dimension >= 1");
  }
  for (double x : coords_) {
    if (!std::isfinite(x)) {
      throw RejectedInput("content vector has a non-finite coordinate");
    }
  }
  if (norm(coords_) > 1.0 + kBallTolerance) {
    throw RejectedInput("content vector lies outside the unit ball");
  }
}

void validate_contract(const ContractSpec& contract) {
  if (const auto* ret = std::get_if<ReturnContract>(&contract)) {
    if (!(ret->alpha >= 0.0 && ret->alpha <= 1.0)) {
      throw RejectedInput("return contract share must lie in [0,1]");
    }
    return;
  }
  const Vec& theta = std::get<FeatureContract>(contract).theta;
  if (theta.empty()) {
    throw RejectedInput("feature contract needs dimension >= 1");
  }
  for (double x : theta) {
    if (!std::isfinite(x)) {
      throw RejectedInput("feature contract has a non-finite coordinate");
    }
  }
  if (norm(theta) > 1.0 + kBallTolerance) {
    throw RejectedInput("feature contract parameter lies outside the unit ball");
  }
}

bool contracts_equal(const ContractSpec& a, const ContractSpec& b) {
  if (a.index() != b.index()) return false;
  if (const auto* ra = std::get_if<ReturnContract>(&a)) {
    return ra->alpha == std::get<ReturnContract>(b).alpha;
  }
  return std::get<FeatureContract>(a).theta == std::get<FeatureContract>(b).theta;
}

bool validate_policy(const RecommendationPolicy& policy) {
  if (policy.users < 1 || policy.creators < 1) return false;
  if (policy.slots < 1 || policy.slots > policy.creators) return false;
  const std::size_t cells =
      static_cast<std::size_t>(policy.users) * policy.creators;
  if (policy.assign.size() != cells) return false;
  for (int j = 0; j < policy.users; ++j) {
    int row = 0;
    for (int k = 0; k < policy.creators; ++k) {
      const std::uint8_t v =
          policy.assign[static_cast<std::size_t>(j) * policy.creators + k];
      if (v > 1) return false;
      row += v;
    }
    if (row != policy.slots) return false;
  }
  return true;
}

EconomyInstance EconomyInstance::validated(std::vector<CreatorProfile> creators,
                                           RewardModel rewards, int slots) {
  if (creators.empty()) throw RejectedInput("instance needs at least one creator");
  if (rewards.user_vectors.empty()) {
    throw RejectedInput("instance needs at least one user");
  }
  const std::size_t dim = creators.front().anchor_a.dim();
  for (std::size_t k = 0; k < creators.size(); ++k) {
    const CreatorProfile& c = creators[k];
    if (c.index != static_cast<int>(k)) {
      throw RejectedInput("creator index must equal its list position");
    }
    if (c.anchor_a.dim() != dim || c.anchor_b.dim() != dim ||
        c.cost_center.dim() != dim) {
      throw RejectedInput("creator vectors must share the instance dimension");
    }
    if (!(c.cost_scale > 0.0) || !std::isfinite(c.cost_scale)) {
      throw RejectedInput("creator cost_scale must be positive and finite");
    }
  }
  for (const Vec& u : rewards.user_vectors) {
    if (u.size() != dim) {
      throw RejectedInput("user vectors must share the instance dimension");
    }
    for (double x : u) {
      if (!std::isfinite(x)) {
        throw RejectedInput("user vector has a non-finite coordinate");
      }
    }
    if (norm(u) > 1.0 + kBallTolerance) {
      throw RejectedInput("user vector lies outside the unit ball");
    }
  }
  if (slots < 1 || slots > static_cast<int>(creators.size())) {
    throw RejectedInput("slots must satisfy 1 <= S <= K");
  }

  double max_user_norm = 0.0;
  for (const Vec& u : rewards.user_vectors) {
    max_user_norm = std::max(max_user_norm, norm(u));
  }
  double max_anchor_span = 0.0;
  double max_cost_scale = 0.0;
  for (const CreatorProfile& c : creators) {
    if (c.mode == ResponseMode::SmoothInterpolation) {
      Vec span(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        span[i] = c.anchor_b[i] - c.anchor_a[i];
      }
      max_anchor_span = std::max(max_anchor_span, norm(span));
    } else {
      max_cost_scale = std::max(max_cost_scale, c.cost_scale);
    }
  }

  EconomyInstance out;
  out.creators_ = std::move(creators);
  out.rewards_ = std::move(rewards);
  out.slots_ = slots;
  out.dim_ = static_cast<int>(dim);
  out.meta_.reward_vs_alpha = max_user_norm * max_anchor_span;
  out.meta_.reward_vs_content = max_user_norm;
  out.meta_.contract_vs_content = 1.0;
  out.meta_.content_vs_contract = max_cost_scale;
  return out;
}

ContentVector generate_content(const CreatorProfile& creator,
                               const ContractSpec& contract) {
  validate_contract(contract);
  const std::size_t dim = creator.anchor_a.dim();
  if (creator.mode == ResponseMode::SmoothInterpolation) {
    const auto* ret = std::get_if<ReturnContract>(&contract);
    if (ret == nullptr) {
      throw RejectedInput(
          "interpolating creators respond to return contracts only");
    }
    Vec out(dim);
    kernels::lerp(creator.anchor_a.coords().data(),
                  creator.anchor_b.coords().data(), ret->alpha, dim,
                  out.data());
    return ContentVector(std::move(out));
  }
  const auto* feat = std::get_if<FeatureContract>(&contract);
  if (feat == nullptr) {
    throw RejectedInput(
        "quadratic-response creators respond to feature contracts here; "
        "return contracts apply only in the full-recommendation model");
  }
  if (feat->theta.size() != dim) {
    throw RejectedInput("feature contract dimension does not match creator");
  }
  Vec target(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    target[i] = creator.cost_center[i] + creator.cost_scale * feat->theta[i];
  }
  return ContentVector(project_to_unit_ball(std::move(target)));
}

double mean_reward(const RewardModel& model, int user,
                   const ContentVector& content) {
  if (user < 0 || user >= static_cast<int>(model.user_vectors.size())) {
    throw RejectedInput("user index out of range");
  }
  const Vec& u = model.user_vectors[user];
  if (u.size() != content.dim()) {
    throw RejectedInput("content dimension does not match user vector");
  }
  return std::clamp(kernels::dot(u.data(), content.coords().data(), u.size()),
                    0.0, 1.0);
}

double contract_payment(const ContractSpec& contract,
                        const ContentVector& content, double total_reward) {
  if (!(total_reward >= 0.0)) {
    throw RejectedInput("total reward must be nonnegative");
  }
  if (const auto* ret = std::get_if<ReturnContract>(&contract)) {
    return ret->alpha * total_reward;
  }
  const Vec& theta = std::get<FeatureContract>(contract).theta;
  if (theta.size() != content.dim()) {
    throw RejectedInput("feature contract dimension does not match content");
  }
  return kernels::dot(theta.data(), content.coords().data(), theta.size());
}

namespace {

using nlohmann::json;

const json& require_field(const json& obj, const char* field) {
  const auto it = obj.find(field);
  if (it == obj.end()) {
    throw RejectedInput(std::string("instance is missing field '") + field +
                        "'");
  }
  return *it;
}

Vec parse_vec(const json& node, const std::string& field, std::size_t dim) {
  if (!node.is_array() || node.size() != dim) {
    throw RejectedInput("field '" + field + "' must be an array of length d");
  }
  Vec out;
  out.reserve(dim);
  for (const auto& x : node) {
    if (!x.is_number()) {
      throw RejectedInput("field '" + field + "' must contain numbers only");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

int parse_positive_int(const json& node, const char* field) {
  if (!node.is_number_integer() || node.get<long long>() < 1) {
    throw RejectedInput(std::string("field '") + field +
                        "' must be a positive integer");
  }
  return static_cast<int>(node.get<long long>());
}

}  // namespace

EconomyInstance parse_instance(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw RejectedInput(std::string("instance is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw RejectedInput("instance document must be a JSON object");
  }
  const int dim = parse_positive_int(require_field(doc, "d"), "d");
  const int slots = parse_positive_int(require_field(doc, "S"), "S");

  const json& users_node = require_field(doc, "users");
  if (!users_node.is_array() || users_node.empty()) {
    throw RejectedInput("field 'users' must be a nonempty array");
  }
  RewardModel rewards;
  for (std::size_t j = 0; j < users_node.size(); ++j) {
    rewards.user_vectors.push_back(
        parse_vec(users_node[j], "users[" + std::to_string(j) + "]", dim));
  }

  const json& creators_node = require_field(doc, "creators");
  if (!creators_node.is_array() || creators_node.empty()) {
    throw RejectedInput("field 'creators' must be a nonempty array");
  }
  std::vector<CreatorProfile> creators;
  for (std::size_t k = 0; k < creators_node.size(); ++k) {
    const json& rec = creators_node[k];
    const std::string where = "creators[" + std::to_string(k) + "]";
    if (!rec.is_object()) {
      throw RejectedInput("field '" + where + "' must be an object");
    }
    const json& mode_node = require_field(rec, "mode");
    if (!mode_node.is_string()) {
      throw RejectedInput("field '" + where + ".mode' must be a string");
    }
    const std::string mode_name = mode_node.get<std::string>();
    ResponseMode mode;
    if (mode_name == "smooth_interpolation") {
      mode = ResponseMode::SmoothInterpolation;
    } else if (mode_name == "quadratic_best_response") {
      mode = ResponseMode::QuadraticBestResponse;
    } else {
      throw RejectedInput("field '" + where +
                          ".mode' must be 'smooth_interpolation' or "
                          "'quadratic_best_response'");
    }
    const json& scale_node = require_field(rec, "cost_scale");
    if (!scale_node.is_number()) {
      throw RejectedInput("field '" + where + ".cost_scale' must be a number");
    }
    try {
      creators.push_back(CreatorProfile{
          static_cast<int>(k),
          ContentVector(
              parse_vec(require_field(rec, "anchor_a"), where + ".anchor_a", dim)),
          ContentVector(
              parse_vec(require_field(rec, "anchor_b"), where + ".anchor_b", dim)),
          ContentVector(parse_vec(require_field(rec, "cost_center"),
                                  where + ".cost_center", dim)),
          scale_node.get<double>(), mode});
    } catch (const RejectedInput& e) {
      throw RejectedInput(where + ": " + e.what());
    }
  }

  return EconomyInstance::validated(std::move(creators), std::move(rewards),
                                    slots);
}

EconomyInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw RejectedInput("cannot read instance file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

}  // namespace creco
