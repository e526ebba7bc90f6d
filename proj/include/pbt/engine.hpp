#pragma once

// The online trading loop. Each round: the policy picks K categories, M-product
// bundles are drawn from each, the estimator absorbs them, and the pricing game
// is solved on the post-update estimates with this round's bundle means.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "pbt/bandit.hpp"
#include "pbt/catalog.hpp"
#include "pbt/errors.hpp"
#include "pbt/market.hpp"
#include "pbt/stackelberg.hpp"

namespace pbt {

struct RunConfig {
  std::uint64_t seed = 42;
  std::size_t T = 5000;
  std::size_t N = 80;
  std::size_t K = 4;
  std::size_t M = 4;
  PolicyConfig policy{};
  /// Either explicit parameters or ranges sampled with `seed`.
  std::variant<ParamRanges, MarketParams> params = ParamRanges{};
  /// Either a generation template (n_categories and seed are taken from N and
  /// `seed`) or a pool CSV path.
  std::variant<PoolSpec, std::filesystem::path> pool = PoolSpec{};

  void validate() const {
    if (T < 1) throw ConfigError("T must be >= 1");
    if (N < 1) throw ConfigError("N must be >= 1");
    if (K < 1 || K > N) throw ConfigError("K must satisfy 1 <= K <= N");
    if (M < 1) throw ConfigError("M must be >= 1");
    policy.validate();
    if (const auto* mp = std::get_if<MarketParams>(&params)) {
      mp->validate();
      if (mp->size() != N) throw ConfigError("market params list " + std::to_string(mp->size()) +
                                             " categories but N = " + std::to_string(N));
    } else {
      std::get<ParamRanges>(params).validate();
    }
  }
};

/// Market and pool shared by every run with the same (seed, N, params, pool) inputs.
struct RunInputs {
  MarketParams params;
  std::shared_ptr<const PromptPool> pool;
};

inline MarketParams resolve_params(const RunConfig& config) {
  if (const auto* mp = std::get_if<MarketParams>(&config.params)) return *mp;
  return sample_market_params(config.seed, config.N, std::get<ParamRanges>(config.params));
}

inline PoolSpec pool_spec_for(const RunConfig& config) {
  PoolSpec spec = std::get<PoolSpec>(config.pool);
  spec.n_categories = config.N;
  spec.seed = config.seed;
  return spec;
}

inline std::shared_ptr<const PromptPool> resolve_pool(const RunConfig& config) {
  std::shared_ptr<const PromptPool> pool;
  if (const auto* path = std::get_if<std::filesystem::path>(&config.pool)) {
    pool = std::make_shared<const PromptPool>(load_pool(*path));
  } else {
    pool = std::make_shared<const PromptPool>(generate_pool(pool_spec_for(config)));
  }
  if (pool->n_categories() != config.N)
    throw ConfigError("pool has " + std::to_string(pool->n_categories()) + " categories but N = " +
                      std::to_string(config.N));
  return pool;
}

inline RunInputs resolve_inputs(const RunConfig& config) {
  config.validate();
  return {resolve_params(config), resolve_pool(config)};
}

struct IterationRecord {
  std::size_t t = 0;
  std::vector<CategoryId> chosen;
  CategoryValues phibar;
  CategoryValues sigbar;
  /// Post-update estimates of the chosen categories.
  CategoryValues qbar;
  Strategy strategy;
  ProfitReport profits;
  /// Quality sum of this round's bundles.
  double revenue = 0.0;
  double revenue_cum = 0.0;
  double poc_cum = 0.0;
  double pop_cum = 0.0;
  double pos_cum = 0.0;
  std::vector<CategoryId> clamped;
  bool infeasible = false;

  double poc() const { return profits.consumer; }
  double pop() const { return profits.platform; }
  double pos() const { return profits.sellers(); }
};

struct RunRecord {
  RunConfig config;
  MarketParams params;
  std::vector<double> true_means;
  std::vector<IterationRecord> iterations;
  QualityEstimator estimator{1};

  double revenue_cum() const { return iterations.empty() ? 0.0 : iterations.back().revenue_cum; }
  double poc_cum() const { return iterations.empty() ? 0.0 : iterations.back().poc_cum; }
  double pop_cum() const { return iterations.empty() ? 0.0 : iterations.back().pop_cum; }
  double pos_cum() const { return iterations.empty() ? 0.0 : iterations.back().pos_cum; }

  std::size_t infeasible_count() const {
    return static_cast<std::size_t>(
        std::count_if(iterations.begin(), iterations.end(), [](const auto& r) { return r.infeasible; }));
  }
  std::size_t clamped_count() const {
    std::size_t n = 0;
    for (const auto& r : iterations) n += r.clamped.size();
    return n;
  }
};

/// Runs one trajectory on already-resolved inputs.
inline RunRecord run(const RunConfig& config, const RunInputs& inputs) {
  config.validate();
  if (!inputs.pool || inputs.pool->n_categories() != config.N || inputs.params.size() != config.N)
    throw ConfigError("run inputs do not match N");
  const PromptPool& pool = *inputs.pool;

  RunRecord record;
  record.config = config;
  record.params = inputs.params;
  record.true_means = pool.true_means();
  record.iterations.reserve(config.T);
  QualityEstimator est(config.N);

  double revenue_cum = 0.0;
  double poc_cum = 0.0;
  double pop_cum = 0.0;
  double pos_cum = 0.0;

  for (std::size_t t = 1; t <= config.T; ++t) {
    const Selection selection =
        select(config.policy, PolicyContext{est, record.true_means, config.seed, t, config.T, config.K});

    IterationRecord rec;
    rec.t = t;
    rec.chosen = selection.chosen;

    std::map<CategoryId, std::vector<QualityObservation>> bundles;
    for (CategoryId id : selection.chosen) {
      auto bundle = draw_bundle(pool, id, config.M, {config.seed, t});
      double phi = 0.0;
      double sigma = 0.0;
      for (const auto& o : bundle) {
        phi += o.phi;
        sigma += o.sigma;
        rec.revenue += o.q;
      }
      rec.phibar[id] = phi / static_cast<double>(config.M);
      rec.sigbar[id] = sigma / static_cast<double>(config.M);
      bundles.emplace(id, std::move(bundle));
    }

    est.observe(selection.chosen, bundles);
    for (CategoryId id : selection.chosen) rec.qbar[id] = est.qbar(id);

    try {
      auto eq = solve_equilibrium(selection, est, inputs.params, rec.phibar, rec.sigbar);
      rec.strategy = std::move(eq.strategy);
      rec.profits = std::move(eq.profits);
      rec.clamped = std::move(eq.clamped);
    } catch (const InfeasibleError&) {
      rec.infeasible = true;
      rec.strategy = Strategy{};
      rec.profits = ProfitReport{};
      for (CategoryId id : selection.chosen) rec.profits.per_category[id] = 0.0;
    }

    revenue_cum += rec.revenue;
    poc_cum += rec.poc();
    pop_cum += rec.pop();
    pos_cum += rec.pos();
    rec.revenue_cum = revenue_cum;
    rec.poc_cum = poc_cum;
    rec.pop_cum = pop_cum;
    rec.pos_cum = pos_cum;
    record.iterations.push_back(std::move(rec));
  }
  record.estimator = std::move(est);
  return record;
}

inline RunRecord run(const RunConfig& config) { return run(config, resolve_inputs(config)); }

// ---------------------------------------------------------------------------
// Differences against the oracle policy

/// Cumulative profit series of one run, indexed by t - 1.
struct CumulativeSeries {
  std::vector<double> poc;
  std::vector<double> pop;
  std::vector<double> pos;

  std::size_t size() const noexcept { return pos.size(); }
};

inline CumulativeSeries cumulative_series(const RunRecord& record) {
  CumulativeSeries s;
  for (const auto& r : record.iterations) {
    s.poc.push_back(r.poc_cum);
    s.pop.push_back(r.pop_cum);
    s.pos.push_back(r.pos_cum);
  }
  return s;
}

/// Per-round optimal-minus-algorithm cumulative profits.
struct DeltaSeries {
  std::vector<double> poc;
  std::vector<double> pop;
  std::vector<double> pos;
};

inline DeltaSeries delta_series(const CumulativeSeries& alg, const CumulativeSeries& optimal) {
  if (alg.size() != optimal.size() || alg.poc.size() != alg.size() || optimal.poc.size() != optimal.size())
    throw ConfigError("delta metrics need runs of equal length");
  DeltaSeries d;
  for (std::size_t i = 0; i < alg.size(); ++i) {
    d.poc.push_back(optimal.poc[i] - alg.poc[i]);
    d.pop.push_back(optimal.pop[i] - alg.pop[i]);
    d.pos.push_back(optimal.pos[i] - alg.pos[i]);
  }
  return d;
}

inline DeltaSeries delta_metrics(const RunRecord& alg, const RunRecord& optimal) {
  const auto& a = alg.config;
  const auto& o = optimal.config;
  if (a.T != o.T || a.seed != o.seed || a.N != o.N || a.M != o.M)
    throw ConfigError("delta metrics need runs with the same T, N, M and seed");
  if (!(alg.params == optimal.params)) throw ConfigError("delta metrics need runs with the same market params");
  if (alg.true_means != optimal.true_means) throw ConfigError("delta metrics need runs on the same pool");
  return delta_series(cumulative_series(alg), cumulative_series(optimal));
}

// ---------------------------------------------------------------------------

/// Calls fn(i) for i in [0, n) on up to `threads` workers. The first exception is rethrown.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

/// Independent runs, results in input order regardless of scheduling.
inline std::vector<RunRecord> run_many(const std::vector<RunConfig>& configs, std::size_t threads = 0) {
  std::vector<RunRecord> out(configs.size());
  parallel_for(configs.size(), [&](std::size_t i) { out[i] = run(configs[i]); }, threads);
  return out;
}

}  // namespace pbt
