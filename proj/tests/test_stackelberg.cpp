#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "pbt/stackelberg.hpp"

namespace {

pbt::CategoryParams cat(double a, double b, double c = 0.0) {
  pbt::CategoryParams p;
  p.a = a;
  p.b = b;
  p.c = c;
  return p;
}

/// Two identical sellers with a = 0.25, b = 0, qbar = 1, so A = 4 and B = 0.
struct SymmetricPair {
  pbt::MarketParams params;
  pbt::GameState state;

  SymmetricPair() {
    params.categories = {cat(0.25, 0.0, 0.1), cat(0.25, 0.0, 0.1)};
    params.platform = {0.1, 0.01};
    params.consumer = {1.0, 1.0};
    state.categories = {{1, 1.0, 0.6, 0.7}, {2, 1.0, 0.5, 0.8}};
  }
};

/// The same game expressed in terms of the oracle's types.
oracle::Instance to_instance(const pbt::GameState& state, const pbt::MarketParams& params) {
  oracle::Instance inst;
  for (const auto& c : state.categories) {
    const auto& cp = params.category(c.id);
    inst.sellers.push_back({cp.a, cp.b, cp.c, c.qbar, c.phibar, c.sigbar});
  }
  inst.gamma = params.platform.gamma;
  inst.delta = params.platform.delta;
  inst.eta = params.consumer.eta;
  inst.omega = params.consumer.omega;
  return inst;
}

pbt::GameState to_state(const oracle::Instance& inst, pbt::MarketParams& params) {
  pbt::GameState state;
  params = {};
  for (std::size_t i = 0; i < inst.sellers.size(); ++i) {
    const auto& s = inst.sellers[i];
    params.categories.push_back(cat(s.a, s.b, s.c));
    state.categories.push_back({i + 1, s.qbar, s.phibar, s.sigbar});
  }
  params.platform = {inst.gamma, inst.delta};
  params.consumer = {inst.eta, inst.omega};
  return state;
}

TEST(Stage3, WorkedValueAndGrid) {
  EXPECT_NEAR(pbt::solve_stage3(cat(0.25, 0.5), 1.0, 0.8), 1.5, 1e-12);
  double best_s = 0.0, best = -1e300;
  for (int i = 0; i <= 100000; ++i) {
    const double s = 1e-4 * i;
    const double v = 1.0 * s - (0.25 * s * s + 0.5 * s) * 0.8;
    if (v > best) best = v, best_s = s;
  }
  EXPECT_NEAR(best_s, 1.5, 1e-4);
}

TEST(Stage3, SignCases) {
  EXPECT_NEAR(pbt::solve_stage3(cat(0.3, 0.5), 0.5 * 0.7, 0.7), 0.0, 1e-15);
  EXPECT_LT(pbt::solve_stage3(cat(0.3, 0.5), 0.2, 0.7), 0.0);
  EXPECT_THROW(pbt::solve_stage3(cat(0.3, 0.5), 0.2, 0.0), pbt::DomainError);
  auto bad = cat(0.3, 0.5);
  bad.a = 0.0;
  EXPECT_THROW(pbt::solve_stage3(bad, 0.2, 0.5), pbt::DomainError);
}

TEST(Stage2, WorkedValueAndOracle) {
  EXPECT_NEAR(pbt::solve_stage2(4.0, 0.0, {0.1, 0.01}, 1.0), 0.3535714285714286, 1e-9);
  SymmetricPair g;
  const auto inst = to_instance(g.state, g.params);
  EXPECT_NEAR(oracle::platform_response(inst, 1.0), 0.3535714285714286, 1e-6);
}

TEST(Stage2, HalfSplitLimitAndZeroNumerator) {
  EXPECT_NEAR(pbt::solve_stage2(4.0, 0.0, {1e-9, 0.0}, 1.3), 0.65, 1e-8);
  const double A = 3.0, B = 0.7, g = 0.2, d = 0.03;
  const double pg = (d * A - 2 * g * A * B - B) / A;
  EXPECT_NEAR(pbt::solve_stage2(A, B, {g, d}, pg), 0.0, 1e-12);
  EXPECT_THROW(pbt::solve_stage2(0.0, 0.0, {0.1, 0.01}, 1.0), pbt::DomainError);
}

TEST(Stage1, WorkedChain) {
  const auto s = pbt::solve_stage1(4.0, 0.0, 1.0, {0.1, 0.01}, {1.0, 1.0});
  const auto& g = s.aggregates;
  EXPECT_NEAR(g.Gamma, 1.4285714285714286, 1e-9);
  EXPECT_NEAR(g.Theta, 0.014285714285714287, 1e-9);
  EXPECT_NEAR(g.Delta, 15.371632653061225, 1e-9);
  EXPECT_NEAR(s.p_g, 0.3436167903498646, 1e-9);
  EXPECT_NEAR(g.Upsilon, -0.47659541478552087, 1e-9);
  EXPECT_NEAR(g.Upsilon, g.Upsilon1, 1e-12);
  EXPECT_LT(g.Upsilon1, 1.0 / g.qbar_mean);
  EXPECT_LT(1.0 / g.qbar_mean, g.Upsilon2);
  EXPECT_NEAR(s.p_g, (g.Theta - g.Upsilon1) / g.Gamma, 1e-12);
}

TEST(Stage1, OracleAgreesAcrossEta) {
  SymmetricPair g;
  for (double eta : {1.0, 4.0}) {
    g.params.consumer.eta = eta;
    const auto inst = to_instance(g.state, g.params);
    const auto s = pbt::solve_stage1(4.0, 0.0, 1.0, g.params.platform, g.params.consumer);
    const double lo = oracle::min_positive_supply_price(inst) + 1e-9;
    const auto r = pbt::numeric_argmax([&](double pg) { return oracle::consumer_profit(inst, pg); }, lo,
                                       10.0 * (s.p_g + 1.0), 1e-10);
    EXPECT_NEAR(s.p_g, r.x, 1e-6) << "eta=" << eta;
  }
}

TEST(Stage1, InfeasibleWhenUpsilonNonNegative) {
  // One seller: B/A = b qbar, and the solution has Upsilon < 0 only if delta + b qbar < eta qbar.
  pbt::MarketParams params;
  params.categories = {cat(0.2, 1.0)};
  params.platform = {0.1, 0.01};
  params.consumer = {1.0, 1.0};
  pbt::GameState state{{{1, 0.3, 0.5, 0.5}}};
  const auto [A, B] = pbt::selected_sums(state, params);
  EXPECT_THROW(pbt::solve_stage1(A, B, 0.3, params.platform, params.consumer), pbt::InfeasibleError);
  EXPECT_THROW(pbt::solve_equilibrium(state, params), pbt::InfeasibleError);
}

TEST(Stage1, DomainErrors) {
  EXPECT_THROW(pbt::solve_stage1(0.0, 0.0, 1.0, {0.1, 0.01}, {1.0, 1.0}), pbt::DomainError);
  EXPECT_THROW(pbt::solve_stage1(4.0, 0.0, 0.0, {0.1, 0.01}, {1.0, 1.0}), pbt::DomainError);
}

TEST(Discriminant, BothFormsAgree) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double theta = 3.0 * u(gen), gamma = 5.0 * u(gen), q = 0.05 + u(gen), eta = 1 + 9 * u(gen);
    EXPECT_NEAR(pbt::discriminant_compact(theta, gamma, q, eta), pbt::discriminant_expanded(theta, gamma, q, eta),
                1e-9);
  }
}

TEST(Equilibrium, SymmetricPair) {
  SymmetricPair g;
  const auto eq = pbt::solve_equilibrium(g.state, g.params);
  EXPECT_NEAR(eq.strategy.p_g, 0.343617, 1e-6);
  EXPECT_NEAR(eq.strategy.p, 0.119149, 1e-6);
  EXPECT_NEAR(eq.strategy.richness.at(1), 0.238298, 1e-6);
  EXPECT_NEAR(eq.strategy.richness.at(2), 0.238298, 1e-6);
  EXPECT_TRUE(eq.clamped.empty());
  EXPECT_NEAR(eq.aggregates.A, 4.0, 1e-12);
  EXPECT_NEAR(eq.aggregates.B, 0.0, 1e-12);
}

TEST(Equilibrium, ProfitsMatchMarketCore) {
  SymmetricPair g;
  const auto eq = pbt::solve_equilibrium(g.state, g.params);
  const std::vector<pbt::CategoryId> ids{1, 2};
  const auto& s = eq.strategy;
  for (const auto& c : g.state.categories)
    EXPECT_NEAR(eq.profits.per_category.at(c.id),
                pbt::category_profit(g.params.category(c.id), s.p, s.richness.at(c.id), c.qbar, c.phibar, true),
                1e-9);
  EXPECT_NEAR(eq.profits.platform, pbt::platform_profit(g.params.platform, s.p_g, s.p, s.richness, ids), 1e-9);
  EXPECT_NEAR(eq.profits.consumer,
              pbt::consumer_profit(g.params.consumer, s.p_g, s.richness, {{1, 0.7}, {2, 0.8}}, 1.0, ids), 1e-9);
}

TEST(Equilibrium, ClampsNegativeResponse) {
  SymmetricPair g;
  g.params.categories.push_back(cat(0.25, 1.0, 0.1));
  g.state.categories.push_back({3, 0.9, 0.5, 0.5});
  const auto eq = pbt::solve_equilibrium(g.state, g.params);
  ASSERT_LT(eq.strategy.p, 1.0 * 0.9);
  EXPECT_EQ(eq.clamped, (std::vector<pbt::CategoryId>{3}));
  EXPECT_EQ(eq.strategy.richness.at(3), 0.0);
  EXPECT_GT(eq.strategy.richness.at(1), 0.0);
  EXPECT_NEAR(eq.profits.per_category.at(3), -0.1 * 0.5, 1e-12);
}

TEST(Equilibrium, RejectsBadState) {
  SymmetricPair g;
  pbt::GameState empty;
  EXPECT_THROW(pbt::solve_equilibrium(empty, g.params), pbt::ConfigError);
  g.state.categories[0].qbar = 0.0;
  EXPECT_THROW(pbt::solve_equilibrium(g.state, g.params), pbt::DomainError);
}

class RandomInstances : public ::testing::Test {
protected:
  std::mt19937_64 gen{2024};
};

TEST_F(RandomInstances, ClosedFormsMatchOracles) {
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = oracle::random_instance(gen);
    pbt::MarketParams params;
    const auto state = to_state(inst, params);
    const auto [A, B] = pbt::selected_sums(state, params);
    const auto s1 = pbt::solve_stage1(A, B, state.qbar_mean(), params.platform, params.consumer);
    const double p = pbt::solve_stage2(A, B, params.platform, s1.p_g);

    for (std::size_t i = 0; i < inst.sellers.size(); ++i)
      EXPECT_NEAR(pbt::solve_stage3(params.categories[i], p, inst.sellers[i].qbar),
                  oracle::seller_response(inst.sellers[i], p), 1e-3);
    EXPECT_NEAR(p, oracle::platform_response(inst, s1.p_g), 1e-3);

    const double lo = std::max(0.0, oracle::min_positive_supply_price(inst)) + 1e-9;
    const auto r = pbt::numeric_argmax([&](double pg) { return oracle::consumer_profit(inst, pg); }, lo,
                                       10.0 * (s1.p_g + 1.0), 1e-10);
    EXPECT_NEAR(s1.p_g, r.x, 1e-3);
    EXPECT_GE(oracle::consumer_profit(inst, s1.p_g), r.value - 1e-6);
  }
}

TEST_F(RandomInstances, ConcavityAtOptimum) {
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = oracle::random_instance(gen);
    pbt::MarketParams params;
    const auto state = to_state(inst, params);
    const auto [A, B] = pbt::selected_sums(state, params);
    const double pg = pbt::solve_stage1(A, B, state.qbar_mean(), params.platform, params.consumer).p_g;
    const double p = pbt::solve_stage2(A, B, params.platform, pg);
    for (double h : {1e-3, 1e-2, 1e-1}) {
      EXPECT_LT(oracle::platform_profit(inst, pg, p + h), oracle::platform_profit(inst, pg, p));
      EXPECT_LT(oracle::platform_profit(inst, pg, p - h), oracle::platform_profit(inst, pg, p));
      for (std::size_t i = 0; i < inst.sellers.size(); ++i) {
        const auto& x = inst.sellers[i];
        const double s = pbt::solve_stage3(params.categories[i], p, x.qbar);
        if (s <= h) continue;
        EXPECT_LT(oracle::seller_profit(x, p, s + h), oracle::seller_profit(x, p, s));
        EXPECT_LT(oracle::seller_profit(x, p, s - h), oracle::seller_profit(x, p, s));
      }
    }
  }
}

TEST_F(RandomInstances, RootOrderingAndDiscriminant) {
  for (int trial = 0; trial < 1000; ++trial) {
    const auto inst = oracle::random_instance(gen);
    pbt::MarketParams params;
    const auto state = to_state(inst, params);
    const auto [A, B] = pbt::selected_sums(state, params);
    try {
      const auto g = pbt::solve_stage1(A, B, state.qbar_mean(), params.platform, params.consumer).aggregates;
      const double r = 2.0 - g.qbar_mean * g.Theta;
      EXPECT_GT(g.Delta, r * r);
      EXPECT_LE(g.Upsilon1, 1.0 / g.qbar_mean);
      EXPECT_LE(1.0 / g.qbar_mean, g.Upsilon2);
      EXPECT_LT(g.Upsilon, 0.0);
      EXPECT_NEAR(pbt::discriminant_compact(g.Theta, g.Gamma, g.qbar_mean, inst.eta), g.Delta, 1e-9);
    } catch (const pbt::InfeasibleError&) {
      // The U < 0 premise fails on a small fraction of random draws; the acceptance
      // suite counts these on its fixed instance set.
    }
  }
}

TEST_F(RandomInstances, BundlePriceDrivesDownstreamExactly) {
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = oracle::random_instance(gen);
    pbt::MarketParams params;
    const auto state = to_state(inst, params);
    const auto eq = pbt::solve_equilibrium(state, params);
    const double pg = eq.strategy.p_g * 1.1;
    const auto resp = pbt::respond_to_bundle_price(state, params, pg);
    const auto [A, B] = pbt::selected_sums(state, params);
    const double p = pbt::solve_stage2(A, B, params.platform, pg);
    EXPECT_NEAR(resp.p, p, 1e-12);
    for (const auto& c : state.categories)
      EXPECT_NEAR(resp.richness.at(c.id), std::max(0.0, pbt::solve_stage3(params.category(c.id), p, c.qbar)), 1e-12);
  }
}

}  // namespace
