#pragma once

// Combinatorial semi-bandit over categories: every round picks K of N arms and
// observes M quality samples from each chosen arm.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pbt/errors.hpp"
#include "pbt/market.hpp"
#include "pbt/rng.hpp"

namespace pbt {

/// Running mean quality and sample count per category.
class QualityEstimator {
public:
  static constexpr double kOptimisticInit = 1.0;

  explicit QualityEstimator(std::size_t n_categories, double initial_qbar = kOptimisticInit)
      : qbar_(n_categories, initial_qbar), count_(n_categories, 0) {
    if (n_categories == 0) throw ConfigError("estimator needs at least one category");
  }

  std::size_t n_categories() const noexcept { return qbar_.size(); }
  double qbar(CategoryId id) const { return qbar_.at(index(id)); }
  std::uint64_t count(CategoryId id) const { return count_.at(index(id)); }
  std::span<const double> qbars() const noexcept { return qbar_; }

  /// Folds one round of bundles into the chosen categories' means.
  void observe(std::span<const CategoryId> chosen,
               const std::map<CategoryId, std::vector<QualityObservation>>& bundles) {
    if (bundles.size() != chosen.size()) throw KeyMismatchError("bundle keys do not match the selection");
    std::size_t m = 0;
    for (CategoryId id : chosen) {
      auto it = bundles.find(id);
      if (it == bundles.end()) throw KeyMismatchError("no bundle for selected category " + std::to_string(id));
      if (it->second.empty()) throw ConfigError("bundle must hold at least one product");
      if (m == 0) m = it->second.size();
      if (it->second.size() != m) throw ConfigError("all bundles of a round must have the same length");
      index(id);
    }
    for (CategoryId id : chosen) {
      const auto& bundle = bundles.at(id);
      double sum = 0.0;
      for (const auto& o : bundle) sum += o.q;
      const std::size_t i = id - 1;
      const auto n = static_cast<double>(count_[i]);
      qbar_[i] = (qbar_[i] * n + sum) / (n + static_cast<double>(bundle.size()));
      count_[i] += bundle.size();
    }
  }

  friend bool operator==(const QualityEstimator&, const QualityEstimator&) = default;

private:
  std::size_t index(CategoryId id) const {
    if (id == 0 || id > qbar_.size()) throw ConfigError("unknown category id " + std::to_string(id));
    return id - 1;
  }

  std::vector<double> qbar_;
  std::vector<std::uint64_t> count_;
};

/// K distinct category ids chosen at round t, ascending.
struct Selection {
  std::vector<CategoryId> chosen;
  std::size_t t = 1;

  bool contains(CategoryId id) const { return std::binary_search(chosen.begin(), chosen.end(), id); }
  friend bool operator==(const Selection&, const Selection&) = default;
};

/// Value-returning form of QualityEstimator::observe.
inline QualityEstimator update_estimator(QualityEstimator est, const Selection& selection,
                                         const std::map<CategoryId, std::vector<QualityObservation>>& bundles) {
  est.observe(selection.chosen, bundles);
  return est;
}

namespace detail {

inline void check_k(std::size_t k, std::size_t n) {
  if (k == 0) throw ConfigError("K must be >= 1");
  if (k > n) throw ConfigError("K=" + std::to_string(k) + " exceeds N=" + std::to_string(n));
}

/// Ids of the k largest scores; ties go to the smaller id.
inline std::vector<CategoryId> top_k(std::span<const double> scores, std::size_t k) {
  check_k(k, scores.size());
  std::vector<CategoryId> ids(scores.size());
  std::iota(ids.begin(), ids.end(), CategoryId{1});
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(),
                    [&](CategoryId x, CategoryId y) {
                      const double sx = scores[x - 1];
                      const double sy = scores[y - 1];
                      return sx > sy || (sx == sy && x < y);
                    });
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace detail

inline Selection select_greedy(const QualityEstimator& est, std::size_t k, std::size_t t = 1) {
  return {detail::top_k(est.qbars(), k), t};
}

/// Key for the random policy's draws at one round.
struct RandomKey {
  std::uint64_t seed = 0;
  std::size_t t = 1;
};

/// Uniform k-subset of 1..n via a partial Fisher-Yates shuffle.
inline Selection select_random(RandomKey key, std::size_t n, std::size_t k) {
  detail::check_k(k, n);
  std::vector<CategoryId> ids(n);
  std::iota(ids.begin(), ids.end(), CategoryId{1});
  CounterStream draws(hash_key(key.seed, Stream::kRandomPolicy, {key.t}));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + draws.index(n - i);
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return {std::move(ids), key.t};
}

/// Length of the exploration phase, ceil(epsilon * T).
inline std::size_t exploration_rounds(double epsilon, std::size_t horizon) {
  return static_cast<std::size_t>(std::ceil(epsilon * static_cast<double>(horizon)));
}

inline Selection select_eps_first(const QualityEstimator& est, RandomKey key, std::size_t t, std::size_t horizon,
                                  double epsilon, std::size_t k) {
  if (t < 1 || t > horizon) throw ConfigError("round index must satisfy 1 <= t <= T");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0,1]");
  if (t <= exploration_rounds(epsilon, horizon)) return select_random({key.seed, t}, est.n_categories(), k);
  return select_greedy(est, k, t);
}

/// Upper-confidence index qbar + coeff * sqrt(3 ln t / (2 n)); +inf for an unplayed arm.
inline double cucb_index(double qbar, std::uint64_t n, std::size_t t, double coeff = 1.0) {
  if (n == 0) return std::numeric_limits<double>::infinity();
  return qbar + coeff * std::sqrt(3.0 * std::log(static_cast<double>(t)) / (2.0 * static_cast<double>(n)));
}

inline Selection select_cucb(const QualityEstimator& est, std::size_t t, std::size_t k, double coeff = 1.0) {
  if (t < 1) throw ConfigError("round index must be >= 1");
  std::vector<double> index(est.n_categories());
  for (CategoryId id = 1; id <= index.size(); ++id) index[id - 1] = cucb_index(est.qbar(id), est.count(id), t, coeff);
  return {detail::top_k(index, k), t};
}

/// Fixed top-k of the true category means.
inline Selection select_oracle(std::span<const double> true_means, std::size_t k, std::size_t t = 1) {
  return {detail::top_k(true_means, k), t};
}

// ---------------------------------------------------------------------------

enum class PolicyType { kGreedy, kRandom, kEpsFirst, kCucb, kOptimal };

inline constexpr std::array<PolicyType, 5> kAllPolicies{PolicyType::kGreedy, PolicyType::kRandom,
                                                        PolicyType::kEpsFirst, PolicyType::kCucb,
                                                        PolicyType::kOptimal};

inline std::string to_string(PolicyType type) {
  switch (type) {
    case PolicyType::kGreedy: return "greedy";
    case PolicyType::kRandom: return "random";
    case PolicyType::kEpsFirst: return "eps_first";
    case PolicyType::kCucb: return "cucb";
    case PolicyType::kOptimal: return "optimal";
  }
  return "unknown";
}

inline PolicyType parse_policy_type(std::string_view name) {
  for (PolicyType t : kAllPolicies)
    if (to_string(t) == name) return t;
  throw ConfigError("unknown policy type '" + std::string(name) + "'");
}

struct PolicyConfig {
  PolicyType type = PolicyType::kGreedy;
  double epsilon = 0.1;
  double cucb_coeff = 1.0;

  void validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0,1]");
    if (!(cucb_coeff >= 0.0) || !std::isfinite(cucb_coeff)) throw ConfigError("cucb_coeff must be >= 0");
  }

  friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

inline nlohmann::json to_json(const PolicyConfig& c) {
  nlohmann::json j = {{"type", to_string(c.type)}};
  if (c.type == PolicyType::kEpsFirst) j["epsilon"] = c.epsilon;
  if (c.type == PolicyType::kCucb) j["cucb_coeff"] = c.cucb_coeff;
  return j;
}

inline PolicyConfig policy_config_from_json(const nlohmann::json& j) {
  detail::reject_unknown(j, {"type", "epsilon", "cucb_coeff"}, "policy config");
  if (!j.contains("type") || !j.at("type").is_string()) throw ConfigError("policy config needs a string 'type'");
  PolicyConfig c;
  c.type = parse_policy_type(j.at("type").get<std::string>());
  if (j.contains("epsilon")) c.epsilon = detail::get_number(j, "epsilon", "policy config");
  if (j.contains("cucb_coeff")) c.cucb_coeff = detail::get_number(j, "cucb_coeff", "policy config");
  c.validate();
  return c;
}

/// Everything a policy may look at when choosing round t.
struct PolicyContext {
  const QualityEstimator& estimator;
  std::span<const double> true_means;
  std::uint64_t seed = 0;
  std::size_t t = 1;
  std::size_t horizon = 1;
  std::size_t k = 1;
};

inline Selection select(const PolicyConfig& policy, const PolicyContext& ctx) {
  switch (policy.type) {
    case PolicyType::kGreedy: return select_greedy(ctx.estimator, ctx.k, ctx.t);
    case PolicyType::kRandom: return select_random({ctx.seed, ctx.t}, ctx.estimator.n_categories(), ctx.k);
    case PolicyType::kEpsFirst:
      return select_eps_first(ctx.estimator, {ctx.seed, ctx.t}, ctx.t, ctx.horizon, policy.epsilon, ctx.k);
    case PolicyType::kCucb: return select_cucb(ctx.estimator, ctx.t, ctx.k, policy.cucb_coeff);
    case PolicyType::kOptimal: return select_oracle(ctx.true_means, ctx.k, ctx.t);
  }
  throw ConfigError("unhandled policy type");
}

}  // namespace pbt
