#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pbt/market.hpp"

namespace {

constexpr double kTol = 1e-9;

const std::vector<pbt::CategoryId> kTwo{1, 2};

pbt::CategoryParams cat(double a, double b, double c) {
  pbt::CategoryParams p;
  p.a = a;
  p.b = b;
  p.c = c;
  return p;
}

TEST(QualityObservation, QualityIsMeanOfPhiAndSigma) {
  const auto o = pbt::QualityObservation::make(0.3, 0.9);
  EXPECT_EQ(o.q, (0.3 + 0.9) / 2.0);
  EXPECT_THROW(pbt::QualityObservation::make(1.2, 0.5), pbt::DomainError);
  EXPECT_THROW(pbt::QualityObservation::make(0.5, -0.1), pbt::DomainError);
}

TEST(CategoryCost, WorkedValues) {
  EXPECT_NEAR(pbt::category_cost(cat(0.25, 0.5, 0.1), 1.5, 0.8, 0.7), 1.12, kTol);
  EXPECT_NEAR(pbt::category_cost(cat(0.3, 0.7, 0.2), 0.0, 0.6, 0.0), 0.0, kTol);
  EXPECT_NEAR(pbt::category_cost(cat(0.01, 0.0, 0.0), 1.0, 1.0, 1.0), 0.01, kTol);
}

TEST(CategoryCost, DomainErrors) {
  EXPECT_THROW(pbt::category_cost(cat(0.25, 0.5, 0.1), -0.1, 0.8, 0.7), pbt::DomainError);
  EXPECT_THROW(pbt::category_cost(cat(0.25, 0.5, 0.1), 1.0, 0.0, 0.7), pbt::DomainError);
}

TEST(CategoryProfit, WorkedValues) {
  EXPECT_NEAR(pbt::category_profit(cat(0.25, 0.5, 0.1), 1.0, 1.5, 0.8, 0.7, true), 0.38, kTol);
  EXPECT_EQ(pbt::category_profit(cat(0.25, 0.5, 0.1), 3.0, 2.0, 0.8, 0.7, false), 0.0);
  // p = 0.4, qbar = 0.8 puts the seller's best response at richness 1.
  EXPECT_NEAR(pbt::category_profit(cat(0.25, 0.0, 0.0), 0.4, 1.0, 0.8, 0.0, true), 0.2, kTol);
}

TEST(CategoryProfit, BestResponseBeatsGrid) {
  const auto p = cat(0.25, 0.0, 0.0);
  double best = -1e300;
  double best_s = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double s = 1e-4 * i;
    const double v = pbt::category_profit(p, 0.4, s, 0.8, 0.0, true);
    if (v > best) {
      best = v;
      best_s = s;
    }
  }
  EXPECT_NEAR(best_s, 1.0, 1e-4);
}

TEST(PlatformProfit, WorkedValues) {
  const pbt::PlatformParams plat{0.1, 0.01};
  const pbt::CategoryValues s{{1, 1.5}, {2, 1.5}};
  EXPECT_NEAR(pbt::platform_profit(plat, 1.5, 1.0, s, kTwo), 0.57, kTol);
  EXPECT_NEAR(pbt::platform_profit(plat, 1.2, 1.0, s, kTwo), -0.33, kTol);
  EXPECT_NEAR(pbt::platform_profit(plat, 7.0, 2.0, {{1, 0.0}, {2, 0.0}}, kTwo), 0.0, kTol);
}

TEST(PlatformProfit, KeyMismatch) {
  const pbt::PlatformParams plat{0.1, 0.01};
  EXPECT_THROW(pbt::platform_profit(plat, 1.5, 1.0, {{1, 1.5}, {3, 1.5}}, kTwo), pbt::KeyMismatchError);
  EXPECT_THROW(pbt::platform_profit(plat, 1.5, 1.0, {{1, 1.5}}, kTwo), pbt::KeyMismatchError);
}

TEST(ConsumerProfit, WorkedValues) {
  const pbt::CategoryValues s{{1, 1.5}, {2, 1.5}};
  const pbt::CategoryValues sig{{1, 0.75}, {2, 0.75}};
  EXPECT_NEAR(pbt::consumer_profit({5.0, 1.0}, 1.5, s, sig, 0.8, kTwo), 5.0 * std::log(3.4) - 3.0, kTol);
  EXPECT_NEAR(pbt::consumer_profit({5.0, 1.0}, 1.5, s, sig, 0.8, kTwo), 3.118877158110579, kTol);
  EXPECT_NEAR(pbt::consumer_profit({1.0, 1.0}, 1.5, s, sig, 0.8, kTwo), -1.7762245683778843, kTol);
  EXPECT_NEAR(pbt::consumer_profit({3.0, 2.0}, 9.0, {{1, 0.0}, {2, 0.0}}, {{1, 0.0}, {2, 0.0}}, 0.7, kTwo), 0.0,
              kTol);
}

TEST(ConsumerProfit, Errors) {
  const pbt::CategoryValues s{{1, 1.5}, {2, 1.5}};
  EXPECT_THROW(pbt::consumer_profit({1.0, 1.0}, 1.0, s, {{1, 0.5}}, 0.8, kTwo), pbt::KeyMismatchError);
  EXPECT_THROW(pbt::consumer_profit({1.0, 1.0}, 1.0, s, {{1, 0.5}, {2, 0.5}}, -1.0, kTwo), pbt::DomainError);
}

// Property checks over random valid inputs.
class MarketProperties : public ::testing::Test {
protected:
  std::mt19937_64 gen{7};
  double u(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
};

TEST_F(MarketProperties, CostNondecreasingInRichness) {
  for (int trial = 0; trial < 2000; ++trial) {
    const auto p = cat(u(0.01, 0.5), u(0.0, 1.0), u(0.0, 0.5));
    const double q = u(0.05, 1.0), phi = u(0.0, 1.0);
    const double s = u(0.0, 10.0), ds = u(0.0, 1.0);
    EXPECT_LE(pbt::category_cost(p, s, q, phi), pbt::category_cost(p, s + ds, q, phi) + 1e-12);
  }
}

TEST_F(MarketProperties, PlatformProfitStrictlyConcaveInTotalRichness) {
  for (int trial = 0; trial < 2000; ++trial) {
    const pbt::PlatformParams plat{u(0.1, 1.0), u(0.0, 0.05)};
    const double pg = u(0.0, 3.0), p = u(0.0, 3.0);
    const double s1 = u(0.0, 5.0), h = u(0.01, 2.0);
    auto f = [&](double s) { return pbt::platform_profit(plat, pg, p, {{1, s}}, std::vector<pbt::CategoryId>{1}); };
    EXPECT_GT(f(s1 + h), 0.5 * (f(s1) + f(s1 + 2 * h)));
  }
}

TEST_F(MarketProperties, ValuationNondecreasingInRichnessAndCorrelation) {
  for (int trial = 0; trial < 2000; ++trial) {
    const pbt::ConsumerParams cons{u(1.0, 10.0), u(1.0, 5.0)};
    const double q = u(0.1, 1.0);
    pbt::CategoryValues s{{1, u(0, 3)}, {2, u(0, 3)}};
    pbt::CategoryValues sig{{1, u(0, 1)}, {2, u(0, 1)}};
    const double base = pbt::consumer_profit(cons, 0.0, s, sig, q, kTwo);
    auto s2 = s;
    s2[2] += u(0.0, 1.0);
    auto sig2 = sig;
    sig2[1] += u(0.0, 0.5);
    EXPECT_LE(base, pbt::consumer_profit(cons, 0.0, s2, sig, q, kTwo) + 1e-12);
    EXPECT_LE(base, pbt::consumer_profit(cons, 0.0, s, sig2, q, kTwo) + 1e-12);
  }
}

TEST_F(MarketProperties, TransferMarginInvariantUnderCommonShift) {
  // Adding the same constant to p_g and p leaves the platform's profit unchanged.
  for (int trial = 0; trial < 1000; ++trial) {
    const pbt::PlatformParams plat{u(0.1, 1.0), u(0.0, 0.05)};
    const pbt::CategoryValues s{{1, u(0, 3)}, {2, u(0, 3)}};
    const double pg = u(0, 3), p = u(0, 3), k = u(-1, 1);
    EXPECT_NEAR(pbt::platform_profit(plat, pg, p, s, kTwo), pbt::platform_profit(plat, pg + k, p + k, s, kTwo),
                1e-9);
  }
}

TEST(SampleMarketParams, DefaultRanges) {
  const auto m = pbt::sample_market_params(42, 80);
  ASSERT_EQ(m.size(), 80u);
  for (const auto& c : m.categories) {
    EXPECT_GE(c.a, 0.01);
    EXPECT_LE(c.a, 0.5);
    EXPECT_GE(c.b, 0.01);
    EXPECT_LE(c.b, 1.0);
    EXPECT_GE(c.c, 0.01);
    EXPECT_LE(c.c, 0.5);
  }
  EXPECT_EQ(m.platform, (pbt::PlatformParams{0.1, 0.01}));
  EXPECT_EQ(m.consumer, (pbt::ConsumerParams{1.0, 1.0}));
}

TEST(SampleMarketParams, DegenerateRangeAndDeterminism) {
  pbt::ParamRanges r;
  r.a = {0.2, 0.2};
  const auto m = pbt::sample_market_params(5, 30, r);
  for (const auto& c : m.categories) EXPECT_EQ(c.a, 0.2);
  EXPECT_EQ(pbt::sample_market_params(9, 40), pbt::sample_market_params(9, 40));
  EXPECT_NE(pbt::sample_market_params(9, 40), pbt::sample_market_params(10, 40));
  // Smaller markets are prefixes of larger ones.
  const auto small = pbt::sample_market_params(9, 20);
  const auto large = pbt::sample_market_params(9, 80);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(small.categories[i], large.categories[i]);
}

TEST(SampleMarketParams, InvalidRanges) {
  pbt::ParamRanges r;
  r.b = {0.5, 0.1};
  EXPECT_THROW(pbt::sample_market_params(1, 4, r), pbt::ConfigError);
  r = {};
  r.a = {0.0, 0.1};
  EXPECT_THROW(pbt::sample_market_params(1, 4, r), pbt::ConfigError);
}

TEST(MarketParamsJson, RoundTripAndUnknownFields) {
  auto m = pbt::sample_market_params(3, 5);
  m.categories[2].label = "car";
  const auto j = pbt::to_json(m);
  EXPECT_EQ(pbt::market_params_from_json(j), m);
  EXPECT_EQ(j.at("categories").at(2).at("label"), "car");
  EXPECT_FALSE(j.at("categories").at(0).contains("label"));

  auto bad = j;
  bad["platform"]["zeta"] = 1.0;
  EXPECT_THROW(pbt::market_params_from_json(bad), pbt::ConfigError);
  bad = j;
  bad["categories"][0]["a"] = -1.0;
  EXPECT_THROW(pbt::market_params_from_json(bad), pbt::ConfigError);
  bad = j;
  bad["extra"] = true;
  EXPECT_THROW(pbt::market_params_from_json(bad), pbt::ConfigError);
}

}  // namespace
