#pragma once

// Three-stage leader-follower pricing game, solved by backward induction.
//
//   stage 3  seller i picks richness s_i given prompt price p
//   stage 2  platform picks p given bundle price p_g, anticipating stage 3
//   stage 1  consumer picks p_g, anticipating stages 2 and 3
//
// Each stage has a closed-form best response. The consumer's objective is not
// globally concave in p_g; substituting U = Theta - p_g * Gamma leaves a
// numerator quadratic in U with roots U1 <= 1/qbar <= U2, and on the branch
// U < 0 the maximizer is U1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pbt/bandit.hpp"
#include "pbt/errors.hpp"
#include "pbt/market.hpp"

namespace pbt {

struct StageAggregates {
  double A = 0.0;          ///< sum 1 / (2 a_i qbar_i)
  double B = 0.0;          ///< sum b_i / (2 a_i)
  double Gamma = 0.0;      ///< A / (2 (1 + gamma A))
  double Theta = 0.0;      ///< (delta A - 2 gamma A B - B) / (2 (1 + gamma A)) + B
  double qbar_mean = 0.0;  ///< mean estimated quality of the selected categories
  double Delta = 0.0;      ///< discriminant of the stage-1 first-order condition
  double Upsilon = 0.0;    ///< Theta - p_g * Gamma at the solution
  double Upsilon1 = 0.0;   ///< smaller root
  double Upsilon2 = 0.0;   ///< larger root
};

/// Seller best response (p - b qbar) / (2 a qbar). Negative values are returned as is.
inline double solve_stage3(const CategoryParams& params, double p, double qbar) {
  if (!(params.a > 0.0)) throw DomainError("stage 3 needs a > 0");
  if (!(qbar > 0.0)) throw DomainError("stage 3 needs qbar > 0");
  return (p - params.b * qbar) / (2.0 * params.a * qbar);
}

/// Platform best response (p_g A - (delta A - 2 gamma A B - B)) / (2 A (1 + gamma A)).
inline double solve_stage2(double A, double B, const PlatformParams& platform, double p_g) {
  if (!(A > 0.0)) throw DomainError("stage 2 needs A > 0");
  if (!(platform.gamma > 0.0)) throw DomainError("stage 2 needs gamma > 0");
  const double gA = platform.gamma * A;
  return (p_g * A - (platform.delta * A - 2.0 * gA * B - B)) / (2.0 * A * (1.0 + gA));
}

/// Compact form of the discriminant, (2 - qbar Theta)^2 + 8 eta Gamma qbar^2.
inline double discriminant_compact(double Theta, double Gamma, double qbar_mean, double eta) {
  const double r = 2.0 - qbar_mean * Theta;
  return r * r + 8.0 * eta * Gamma * qbar_mean * qbar_mean;
}

/// Expanded form, (2 + qbar Theta)^2 - 8 qbar (Theta - eta qbar Gamma).
inline double discriminant_expanded(double Theta, double Gamma, double qbar_mean, double eta) {
  const double r = 2.0 + qbar_mean * Theta;
  return r * r - 8.0 * qbar_mean * (Theta - eta * qbar_mean * Gamma);
}

struct Stage1Solution {
  double p_g = 0.0;
  StageAggregates aggregates;
};

/// Consumer optimum p_g = (3 qbar Theta - 2 + sqrt(Delta)) / (4 qbar Gamma).
/// Throws InfeasibleError when the solution leaves the U < 0 branch or the
/// valuation logarithm at the induced stage-2 price is undefined.
inline Stage1Solution solve_stage1(double A, double B, double qbar_mean, const PlatformParams& platform,
                                   const ConsumerParams& consumer) {
  if (!(A > 0.0)) throw DomainError("stage 1 needs A > 0");
  if (!(platform.gamma > 0.0)) throw DomainError("stage 1 needs gamma > 0");
  if (!(consumer.eta > 0.0)) throw DomainError("stage 1 needs eta > 0");
  if (!(qbar_mean > 0.0)) throw DomainError("stage 1 needs qbar_mean > 0");

  StageAggregates agg;
  agg.A = A;
  agg.B = B;
  agg.qbar_mean = qbar_mean;
  const double denom = 2.0 * (1.0 + platform.gamma * A);
  agg.Gamma = A / denom;
  agg.Theta = (platform.delta * A - 2.0 * platform.gamma * A * B - B) / denom + B;
  agg.Delta = discriminant_expanded(agg.Theta, agg.Gamma, qbar_mean, consumer.eta);
  if (!(agg.Delta >= 0.0)) throw InfeasibleError("stage-1 discriminant is negative");

  const double root = std::sqrt(agg.Delta);
  const double q = qbar_mean;
  agg.Upsilon1 = (2.0 + q * agg.Theta - root) / (4.0 * q);
  agg.Upsilon2 = (2.0 + q * agg.Theta + root) / (4.0 * q);

  Stage1Solution out;
  out.p_g = (3.0 * q * agg.Theta - 2.0 + root) / (4.0 * q * agg.Gamma);
  agg.Upsilon = agg.Theta - out.p_g * agg.Gamma;
  out.aggregates = agg;

  if (!(agg.Upsilon < 0.0))
    throw InfeasibleError("stage-1 solution has Upsilon = " + std::to_string(agg.Upsilon) + " >= 0");
  const double p = solve_stage2(A, B, platform, out.p_g);
  const double ln_arg = 1.0 + q * p * A - q * B;
  if (!(ln_arg > 0.0)) throw InfeasibleError("valuation logarithm argument " + std::to_string(ln_arg) + " <= 0");
  return out;
}

// ---------------------------------------------------------------------------
// Per-round game over the selected categories

/// Frozen inputs of one selected category: post-update quality estimate and bundle means.
struct GameCategory {
  CategoryId id = 0;
  double qbar = 0.0;
  double phibar = 0.0;
  double sigbar = 0.0;
};

/// The state a round's game is played on.
struct GameState {
  std::vector<GameCategory> categories;

  std::vector<CategoryId> ids() const {
    std::vector<CategoryId> out;
    out.reserve(categories.size());
    for (const auto& c : categories) out.push_back(c.id);
    return out;
  }

  double qbar_mean() const {
    double s = 0.0;
    for (const auto& c : categories) s += c.qbar;
    return s / static_cast<double>(categories.size());
  }

  const GameCategory& at(CategoryId id) const {
    for (const auto& c : categories)
      if (c.id == id) return c;
    throw KeyMismatchError("category " + std::to_string(id) + " is not part of the game");
  }

  void validate(const MarketParams& params) const {
    if (categories.empty()) throw ConfigError("the game needs at least one selected category");
    for (const auto& c : categories) {
      params.category(c.id);
      if (!(c.qbar > 0.0)) throw DomainError("selected category " + std::to_string(c.id) + " has qbar <= 0");
    }
  }
};

/// Builds the game state from a selection, the post-update estimator, and the round's bundle means.
inline GameState make_game_state(const Selection& selection, const QualityEstimator& est,
                                 const CategoryValues& phibar, const CategoryValues& sigbar) {
  detail::require_keys(phibar, selection.chosen, "image-quality mean");
  detail::require_keys(sigbar, selection.chosen, "correlation mean");
  GameState state;
  for (CategoryId id : selection.chosen) state.categories.push_back({id, est.qbar(id), phibar.at(id), sigbar.at(id)});
  return state;
}

/// A and B summed over the selected categories only.
inline std::pair<double, double> selected_sums(const GameState& state, const MarketParams& params) {
  double A = 0.0;
  double B = 0.0;
  for (const auto& c : state.categories) {
    const auto& cp = params.category(c.id);
    A += 1.0 / (2.0 * cp.a * c.qbar);
    B += cp.b / (2.0 * cp.a);
  }
  return {A, B};
}

/// Sellers' responses to p, clamped at zero. Ids whose raw response was negative go to `clamped`.
inline Strategy respond_to_prompt_price(const GameState& state, const MarketParams& params, double p_g, double p,
                                        std::vector<CategoryId>* clamped = nullptr) {
  Strategy s{p_g, p, {}};
  for (const auto& c : state.categories) {
    const double raw = solve_stage3(params.category(c.id), p, c.qbar);
    if (raw < 0.0 && clamped) clamped->push_back(c.id);
    s.richness[c.id] = std::max(raw, 0.0);
  }
  return s;
}

/// Platform and sellers' responses to a bundle price.
inline Strategy respond_to_bundle_price(const GameState& state, const MarketParams& params, double p_g,
                                        std::vector<CategoryId>* clamped = nullptr) {
  const auto [A, B] = selected_sums(state, params);
  return respond_to_prompt_price(state, params, p_g, solve_stage2(A, B, params.platform, p_g), clamped);
}

/// All three participants' profits at a strategy.
inline ProfitReport evaluate_profits(const GameState& state, const MarketParams& params, const Strategy& strategy) {
  const auto ids = state.ids();
  ProfitReport r;
  CategoryValues sigbar;
  for (const auto& c : state.categories) {
    const double s = strategy.richness.at(c.id);
    r.per_category[c.id] = category_profit(params.category(c.id), strategy.p, s, c.qbar, c.phibar, true);
    sigbar[c.id] = c.sigbar;
  }
  r.platform = platform_profit(params.platform, strategy.p_g, strategy.p, strategy.richness, ids);
  r.consumer = consumer_profit(params.consumer, strategy.p_g, strategy.richness, sigbar, state.qbar_mean(), ids);
  return r;
}

struct Equilibrium {
  Strategy strategy;
  StageAggregates aggregates;
  ProfitReport profits;
  /// Categories whose raw stage-3 response was negative and was clamped to 0.
  std::vector<CategoryId> clamped;
};

inline Equilibrium solve_equilibrium(const GameState& state, const MarketParams& params) {
  state.validate(params);
  const auto [A, B] = selected_sums(state, params);
  const auto stage1 = solve_stage1(A, B, state.qbar_mean(), params.platform, params.consumer);
  Equilibrium eq;
  eq.aggregates = stage1.aggregates;
  eq.strategy = respond_to_bundle_price(state, params, stage1.p_g, &eq.clamped);
  eq.profits = evaluate_profits(state, params, eq.strategy);
  return eq;
}

inline Equilibrium solve_equilibrium(const Selection& selection, const QualityEstimator& est,
                                     const MarketParams& params, const CategoryValues& phibar,
                                     const CategoryValues& sigbar) {
  return solve_equilibrium(make_game_state(selection, est, phibar, sigbar), params);
}

}  // namespace pbt
