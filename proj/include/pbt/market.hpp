#pragma once

// Participants of a bundle trade and their profit functions.
//
// A seller category i supplies entity richness s_i at unit price p and pays a
// quadratic production cost scaled by its estimated quality; the platform buys
// richness S = sum s_i from the sellers and resells it to the consumer at unit
// bundle price p_g; the consumer values the bundle logarithmically in q_mean*S
// plus a linear bonus on prompt-image correlation.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pbt/errors.hpp"
#include "pbt/rng.hpp"

namespace pbt {

/// 1-based category identifier.
using CategoryId = std::size_t;

/// Per-category real values keyed by category id.
using CategoryValues = std::map<CategoryId, double>;

struct QualityObservation {
  double phi = 0.0;
  double sigma = 0.0;
  double q = 0.0;

  static QualityObservation make(double phi, double sigma) {
    if (!(phi >= 0.0 && phi <= 1.0)) throw DomainError("phi outside [0,1]: " + std::to_string(phi));
    if (!(sigma >= 0.0 && sigma <= 1.0)) throw DomainError("sigma outside [0,1]: " + std::to_string(sigma));
    return {phi, sigma, (phi + sigma) / 2.0};
  }

  friend bool operator==(const QualityObservation&, const QualityObservation&) = default;
};

struct CategoryParams {
  double a = 0.1;
  double b = 0.1;
  double c = 0.1;
  std::string label;

  void validate() const {
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("category parameter a must be > 0");
    if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("category parameter b must be >= 0");
    if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("category parameter c must be >= 0");
  }

  friend bool operator==(const CategoryParams&, const CategoryParams&) = default;
};

struct PlatformParams {
  double gamma = 0.1;
  double delta = 0.01;

  void validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("platform parameter gamma must be > 0");
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("platform parameter delta must be >= 0");
  }

  friend bool operator==(const PlatformParams&, const PlatformParams&) = default;
};

struct ConsumerParams {
  double eta = 1.0;
  double omega = 1.0;

  void validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("consumer parameter eta must be > 0");
    if (!(omega > 0.0) || !std::isfinite(omega)) throw ConfigError("consumer parameter omega must be > 0");
  }

  friend bool operator==(const ConsumerParams&, const ConsumerParams&) = default;
};

struct MarketParams {
  std::vector<CategoryParams> categories;
  PlatformParams platform;
  ConsumerParams consumer;

  std::size_t size() const noexcept { return categories.size(); }

  const CategoryParams& category(CategoryId id) const {
    if (id == 0 || id > categories.size()) throw ConfigError("unknown category id " + std::to_string(id));
    return categories[id - 1];
  }
  CategoryParams& category(CategoryId id) {
    return const_cast<CategoryParams&>(std::as_const(*this).category(id));
  }

  void validate() const {
    if (categories.empty()) throw ConfigError("market needs at least one category");
    for (const auto& c : categories) c.validate();
    platform.validate();
    consumer.validate();
  }

  friend bool operator==(const MarketParams&, const MarketParams&) = default;
};

/// The incentive triple: bundle price, prompt price, and richness per selected category.
struct Strategy {
  double p_g = 0.0;
  double p = 0.0;
  CategoryValues richness;

  double total_richness() const {
    double s = 0.0;
    for (const auto& [id, v] : richness) s += v;
    return s;
  }
};

struct ProfitReport {
  CategoryValues per_category;
  double platform = 0.0;
  double consumer = 0.0;

  /// Sum of the selected sellers' profits.
  double sellers() const {
    double s = 0.0;
    for (const auto& [id, v] : per_category) s += v;
    return s;
  }
};

namespace detail {

inline void require_keys(const CategoryValues& values, std::span<const CategoryId> selected, const char* what) {
  bool ok = values.size() == selected.size();
  for (CategoryId id : selected) ok = ok && values.contains(id);
  if (!ok) throw KeyMismatchError(std::string(what) + " keys do not match the selected categories");
}

inline double checked_total_richness(const CategoryValues& richness, std::span<const CategoryId> selected) {
  require_keys(richness, selected, "richness");
  double s = 0.0;
  for (CategoryId id : selected) {
    const double v = richness.at(id);
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("richness must be finite and >= 0");
    s += v;
  }
  return s;
}

}  // namespace detail

/// Production cost (a s^2 + b s) qbar + c phibar of one seller category.
inline double category_cost(const CategoryParams& params, double richness, double qbar, double phibar) {
  if (!(richness >= 0.0)) throw DomainError("richness must be >= 0");
  if (!(qbar > 0.0)) throw DomainError("estimated quality must be > 0");
  return (params.a * richness * richness + params.b * richness) * qbar + params.c * phibar;
}

/// Payment p*s minus production cost; exactly 0 for an unselected category.
inline double category_profit(const CategoryParams& params, double p, double richness, double qbar, double phibar,
                              bool selected) {
  if (!selected) return 0.0;
  return p * richness - category_cost(params, richness, qbar, phibar);
}

/// Resale margin (p_g - p) S minus the bundling cost gamma S^2 + delta S.
inline double platform_profit(const PlatformParams& platform, double p_g, double p, const CategoryValues& richness,
                              std::span<const CategoryId> selected) {
  const double s = detail::checked_total_richness(richness, selected);
  return p_g * s - p * s - (platform.gamma * s * s + platform.delta * s);
}

/// eta ln(1 + qbar_mean S) + omega sum(sigbar) - p_g S.
inline double consumer_profit(const ConsumerParams& consumer, double p_g, const CategoryValues& richness,
                              const CategoryValues& sigbar, double qbar_mean, std::span<const CategoryId> selected) {
  const double s = detail::checked_total_richness(richness, selected);
  detail::require_keys(sigbar, selected, "correlation");
  const double ln_arg = 1.0 + qbar_mean * s;
  if (!(ln_arg > 0.0)) throw DomainError("valuation logarithm argument must be > 0");
  double corr = 0.0;
  for (CategoryId id : selected) corr += sigbar.at(id);
  return consumer.eta * std::log(ln_arg) + consumer.omega * corr - p_g * s;
}

// ---------------------------------------------------------------------------
// Random parameter draws

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  double at(double u) const noexcept { return lo + (hi - lo) * u; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// Ranges for the per-category cost coefficients plus fixed market-wide values.
struct ParamRanges {
  Range a{0.01, 0.5};
  Range b{0.01, 1.0};
  Range c{0.01, 0.5};
  PlatformParams platform{};
  ConsumerParams consumer{};

  void validate() const {
    auto check = [](const Range& r, const char* name, bool strict) {
      if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
        throw ConfigError(std::string("range for ") + name + " must satisfy lo <= hi");
      if (strict ? !(r.lo > 0.0) : !(r.lo >= 0.0))
        throw ConfigError(std::string("range for ") + name + (strict ? " must be > 0" : " must be >= 0"));
    };
    check(a, "a", true);
    check(b, "b", false);
    check(c, "c", false);
    platform.validate();
    consumer.validate();
  }

  friend bool operator==(const ParamRanges&, const ParamRanges&) = default;
};

/// Draws N categories' (a, b, c) uniformly from the ranges. Category i's values
/// depend only on (seed, i), so a smaller market is a prefix of a larger one.
inline MarketParams sample_market_params(std::uint64_t seed, std::size_t n_categories,
                                         const ParamRanges& ranges = {}) {
  ranges.validate();
  if (n_categories == 0) throw ConfigError("market needs at least one category");
  MarketParams out;
  out.categories.reserve(n_categories);
  for (CategoryId id = 1; id <= n_categories; ++id) {
    CounterStream draws(hash_key(seed, Stream::kMarketParams, {id}));
    CategoryParams cp;
    cp.a = ranges.a.at(draws.uniform());
    cp.b = ranges.b.at(draws.uniform());
    cp.c = ranges.c.at(draws.uniform());
    out.categories.push_back(std::move(cp));
  }
  out.platform = ranges.platform;
  out.consumer = ranges.consumer;
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(std::string("unknown field '") + key + "' in " + where);
  }
}

inline double get_number(const nlohmann::json& j, const char* key, const char* where) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "' in " + where);
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("field '") + key + "' in " + where + " must be a number");
  return v.get<double>();
}

}  // namespace detail

inline nlohmann::json to_json(const MarketParams& params) {
  nlohmann::json cats = nlohmann::json::array();
  for (const auto& c : params.categories) {
    nlohmann::json jc = {{"a", c.a}, {"b", c.b}, {"c", c.c}};
    if (!c.label.empty()) jc["label"] = c.label;
    cats.push_back(std::move(jc));
  }
  return {{"categories", std::move(cats)},
          {"platform", {{"gamma", params.platform.gamma}, {"delta", params.platform.delta}}},
          {"consumer", {{"eta", params.consumer.eta}, {"omega", params.consumer.omega}}}};
}

inline MarketParams market_params_from_json(const nlohmann::json& j) {
  detail::reject_unknown(j, {"categories", "platform", "consumer"}, "market params");
  MarketParams out;
  if (!j.contains("categories") || !j.at("categories").is_array())
    throw ConfigError("market params need a 'categories' array");
  for (const auto& jc : j.at("categories")) {
    detail::reject_unknown(jc, {"a", "b", "c", "label"}, "category params");
    CategoryParams c;
    c.a = detail::get_number(jc, "a", "category params");
    c.b = detail::get_number(jc, "b", "category params");
    c.c = detail::get_number(jc, "c", "category params");
    if (jc.contains("label")) {
      if (!jc.at("label").is_string()) throw ConfigError("category label must be a string");
      c.label = jc.at("label").get<std::string>();
    }
    out.categories.push_back(std::move(c));
  }
  if (!j.contains("platform")) throw ConfigError("market params need 'platform'");
  if (!j.contains("consumer")) throw ConfigError("market params need 'consumer'");
  const auto& jp = j.at("platform");
  detail::reject_unknown(jp, {"gamma", "delta"}, "platform params");
  out.platform.gamma = detail::get_number(jp, "gamma", "platform params");
  out.platform.delta = detail::get_number(jp, "delta", "platform params");
  const auto& jq = j.at("consumer");
  detail::reject_unknown(jq, {"eta", "omega"}, "consumer params");
  out.consumer.eta = detail::get_number(jq, "eta", "consumer params");
  out.consumer.omega = detail::get_number(jq, "omega", "consumer params");
  out.validate();
  return out;
}

}  // namespace pbt
