#pragma once

// Experiment configuration, sweeps, and the CSV / JSON artifacts the command
// line tool reads and writes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pbt/bandit.hpp"
#include "pbt/catalog.hpp"
#include "pbt/engine.hpp"
#include "pbt/errors.hpp"
#include "pbt/market.hpp"
#include "pbt/stackelberg.hpp"
#include "pbt/text.hpp"

namespace pbt {

enum class SweepAxis { kT, kN, kK, kSoC, kSoP, kSoS, kGamma, kA };

inline std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kT: return "T";
    case SweepAxis::kN: return "N";
    case SweepAxis::kK: return "K";
    case SweepAxis::kSoC: return "SoC";
    case SweepAxis::kSoP: return "SoP";
    case SweepAxis::kSoS: return "SoS_i";
    case SweepAxis::kGamma: return "gamma";
    case SweepAxis::kA: return "a_i";
  }
  return "unknown";
}

inline SweepAxis parse_sweep_axis(std::string_view name) {
  for (auto a : {SweepAxis::kT, SweepAxis::kN, SweepAxis::kK, SweepAxis::kSoC, SweepAxis::kSoP, SweepAxis::kSoS,
                 SweepAxis::kGamma, SweepAxis::kA})
    if (to_string(a) == name) return a;
  throw ConfigError("unknown sweep axis '" + std::string(name) + "'");
}

inline bool is_run_axis(SweepAxis axis) {
  return axis == SweepAxis::kT || axis == SweepAxis::kN || axis == SweepAxis::kK;
}

struct SweepSpec {
  SweepAxis axis = SweepAxis::kT;
  /// Strictly increasing. Empty for sensitivity axes means the default bracket.
  std::vector<double> values;
  RunConfig base;
  std::size_t fixed_iteration = 100;
  std::vector<std::uint64_t> seeds{42};
  /// Category whose richness or cost coefficient is swept (SoS_i, a_i).
  std::optional<CategoryId> category;

  void validate() const {
    base.validate();
    if (is_run_axis(axis) && values.empty()) throw ConfigError("sweep needs a nonempty 'values' list");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (!(values[i] > values[i - 1])) throw ConfigError("sweep values must be strictly increasing");
    if (is_run_axis(axis)) {
      for (double v : values)
        if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("T, N, K sweep values must be positive integers");
    }
    if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
    if (fixed_iteration < 1) throw ConfigError("fixed_iteration must be >= 1");
  }
};

/// The union of run and sweep fields accepted in a config file.
struct ExperimentConfig {
  RunConfig run;
  std::optional<SweepAxis> axis;
  std::vector<double> values;
  std::size_t fixed_iteration = 100;
  std::vector<std::uint64_t> seeds{42};
  std::optional<CategoryId> category;

  SweepSpec sweep_spec() const {
    if (!axis) throw ConfigError("config needs an 'axis'");
    SweepSpec s;
    s.axis = *axis;
    s.values = values;
    s.base = run;
    s.fixed_iteration = fixed_iteration;
    s.seeds = seeds;
    s.category = category;
    return s;
  }
};

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline std::size_t get_count(const nlohmann::json& j, const char* key, const char* where) {
  const auto& v = j.at(key);
  if (!v.is_number_unsigned()) throw ConfigError(std::string("field '") + key + "' in " + where +
                                                 " must be a nonnegative integer");
  return v.get<std::size_t>();
}

inline Range get_range(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(std::string("range '") + key + "' must be [lo, hi]");
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace detail

inline nlohmann::json to_json(const ParamRanges& r) {
  return {{"a", {r.a.lo, r.a.hi}},
          {"b", {r.b.lo, r.b.hi}},
          {"c", {r.c.lo, r.c.hi}},
          {"gamma", r.platform.gamma},
          {"delta", r.platform.delta},
          {"eta", r.consumer.eta},
          {"omega", r.consumer.omega}};
}

inline ParamRanges param_ranges_from_json(const nlohmann::json& j) {
  detail::reject_unknown(j, {"a", "b", "c", "gamma", "delta", "eta", "omega"}, "parameter ranges");
  ParamRanges r;
  if (j.contains("a")) r.a = detail::get_range(j, "a");
  if (j.contains("b")) r.b = detail::get_range(j, "b");
  if (j.contains("c")) r.c = detail::get_range(j, "c");
  if (j.contains("gamma")) r.platform.gamma = detail::get_number(j, "gamma", "parameter ranges");
  if (j.contains("delta")) r.platform.delta = detail::get_number(j, "delta", "parameter ranges");
  if (j.contains("eta")) r.consumer.eta = detail::get_number(j, "eta", "parameter ranges");
  if (j.contains("omega")) r.consumer.omega = detail::get_number(j, "omega", "parameter ranges");
  r.validate();
  return r;
}

inline nlohmann::json to_json(const PoolSpec& s) {
  nlohmann::json bounds = nlohmann::json::array();
  for (const auto& b : s.resolved_bounds()) bounds.push_back({{"first", b.first}, {"last", b.last}, {"mean", b.mean}});
  return {{"n_categories", s.n_categories}, {"per_category", s.per_category}, {"class_bounds", bounds},
          {"jitter", s.jitter},             {"concentration", s.concentration}, {"seed", s.seed}};
}

inline PoolSpec pool_spec_from_json(const nlohmann::json& j) {
  detail::reject_unknown(j, {"n_categories", "per_category", "class_bounds", "jitter", "concentration", "seed"},
                         "pool spec");
  PoolSpec s;
  if (j.contains("n_categories")) s.n_categories = detail::get_count(j, "n_categories", "pool spec");
  if (j.contains("per_category")) s.per_category = detail::get_count(j, "per_category", "pool spec");
  if (j.contains("jitter")) s.jitter = detail::get_number(j, "jitter", "pool spec");
  if (j.contains("concentration")) s.concentration = detail::get_number(j, "concentration", "pool spec");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("pool seed must be a nonnegative integer");
    s.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("class_bounds")) {
    if (!j.at("class_bounds").is_array()) throw ConfigError("class_bounds must be an array");
    for (const auto& jb : j.at("class_bounds")) {
      detail::reject_unknown(jb, {"first", "last", "mean"}, "class bound");
      s.class_bounds.push_back({detail::get_count(jb, "first", "class bound"),
                                detail::get_count(jb, "last", "class bound"),
                                detail::get_number(jb, "mean", "class bound")});
    }
  }
  return s;
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j = {{"seed", c.seed}, {"T", c.T}, {"N", c.N}, {"K", c.K}, {"M", c.M}, {"policy", to_json(c.policy)}};
  if (const auto* mp = std::get_if<MarketParams>(&c.params))
    j["params"] = to_json(*mp);
  else
    j["params"] = to_json(std::get<ParamRanges>(c.params));
  if (const auto* path = std::get_if<std::filesystem::path>(&c.pool)) {
    j["pool"] = path->string();
  } else {
    auto jp = to_json(std::get<PoolSpec>(c.pool));
    jp.erase("n_categories");
    jp.erase("seed");
    jp.erase("class_bounds");
    if (!std::get<PoolSpec>(c.pool).class_bounds.empty()) jp["class_bounds"] = to_json(pool_spec_for(c))["class_bounds"];
    j["pool"] = std::move(jp);
  }
  return j;
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  detail::reject_unknown(j,
                         {"seed", "T", "N", "K", "M", "policy", "params", "pool", "axis", "values", "fixed_iteration",
                          "seeds", "category"},
                         "config");
  ExperimentConfig e;
  auto& r = e.run;
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
    r.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("T")) r.T = detail::get_count(j, "T", "config");
  if (j.contains("N")) r.N = detail::get_count(j, "N", "config");
  if (j.contains("K")) r.K = detail::get_count(j, "K", "config");
  if (j.contains("M")) r.M = detail::get_count(j, "M", "config");
  if (j.contains("policy")) r.policy = policy_config_from_json(j.at("policy"));
  if (j.contains("params")) {
    const auto& jp = j.at("params");
    if (jp.is_object() && jp.contains("categories"))
      r.params = market_params_from_json(jp);
    else
      r.params = param_ranges_from_json(jp);
  }
  if (j.contains("pool")) {
    const auto& jp = j.at("pool");
    if (jp.is_string()) {
      r.pool = std::filesystem::path(jp.get<std::string>());
    } else {
      PoolSpec s = pool_spec_from_json(jp);
      if (jp.contains("n_categories") && !j.contains("N")) r.N = s.n_categories;
      if (jp.contains("seed") && !j.contains("seed")) r.seed = s.seed;
      if (jp.contains("n_categories") && s.n_categories != r.N)
        throw ConfigError("pool n_categories disagrees with N");
      if (jp.contains("seed") && s.seed != r.seed) throw ConfigError("pool seed disagrees with seed");
      r.pool = s;
    }
  }
  if (j.contains("axis")) {
    if (!j.at("axis").is_string()) throw ConfigError("axis must be a string");
    e.axis = parse_sweep_axis(j.at("axis").get<std::string>());
  }
  if (j.contains("values")) {
    if (!j.at("values").is_array()) throw ConfigError("values must be an array");
    for (const auto& v : j.at("values")) {
      if (!v.is_number()) throw ConfigError("values must be numbers");
      e.values.push_back(v.get<double>());
    }
  }
  if (j.contains("fixed_iteration")) e.fixed_iteration = detail::get_count(j, "fixed_iteration", "config");
  if (j.contains("seeds")) {
    if (!j.at("seeds").is_array()) throw ConfigError("seeds must be an array");
    e.seeds.clear();
    for (const auto& v : j.at("seeds")) {
      if (!v.is_number_unsigned()) throw ConfigError("seeds must be nonnegative integers");
      e.seeds.push_back(v.get<std::uint64_t>());
    }
  }
  if (j.contains("category")) e.category = detail::get_count(j, "category", "config");
  return e;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("config not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Generic CSV table (header + rows), used to re-read everything we write.

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ParseError(0, "missing column '" + std::string(name) + "'");
  }
};

inline CsvTable read_csv_table(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      for (auto f : text::split(line, ',')) table.header.emplace_back(f);
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> row;
    for (auto f : text::split(line, ',')) row.emplace_back(f);
    if (row.size() != table.header.size())
      throw ParseError(lineno, "expected " + std::to_string(table.header.size()) + " fields, got " +
                                   std::to_string(row.size()));
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw ParseError(0, "no records");
  return table;
}

inline CsvTable read_csv_table(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("file not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  return read_csv_table(in);
}

inline double csv_number(const CsvTable& table, std::size_t row, std::size_t col) {
  const auto v = text::parse_double(table.rows.at(row).at(col));
  if (!v) throw ParseError(row + 2, "column '" + table.header.at(col) + "' is not a number");
  return *v;
}

// ---------------------------------------------------------------------------
// Run record artifacts

inline constexpr std::string_view kRunHeader = "t,chosen,p_g,p,sos,poc,pop,pos,revenue_cum,warnings";

inline std::string warnings_field(const IterationRecord& r) {
  std::vector<std::string> flags;
  for (CategoryId id : r.clamped) flags.push_back("clamped:" + std::to_string(id));
  if (r.infeasible) flags.emplace_back("infeasible");
  return text::join(flags, ';', [](const std::string& s) { return s; });
}

inline void write_run_csv(const RunRecord& record, std::ostream& out) {
  out << kRunHeader << '\n';
  for (const auto& r : record.iterations) {
    out << r.t << ',' << text::join(r.chosen, ';', [](CategoryId id) { return std::to_string(id); }) << ','
        << text::format_csv(r.strategy.p_g) << ',' << text::format_csv(r.strategy.p) << ','
        << text::join(r.chosen, ';',
                      [&](CategoryId id) {
                        auto it = r.strategy.richness.find(id);
                        return text::format_csv(it == r.strategy.richness.end() ? 0.0 : it->second);
                      })
        << ',' << text::format_csv(r.poc()) << ',' << text::format_csv(r.pop()) << ','
        << text::format_csv(r.pos()) << ',' << text::format_csv(r.revenue_cum) << ',' << warnings_field(r) << '\n';
  }
}

inline nlohmann::json run_summary(const RunRecord& record) {
  return {{"config", to_json(record.config)},
          {"params", to_json(record.params)},
          {"iterations", record.iterations.size()},
          {"revenue_cum", record.revenue_cum()},
          {"poc_cum", record.poc_cum()},
          {"pop_cum", record.pop_cum()},
          {"pos_cum", record.pos_cum()},
          {"clamped_count", record.clamped_count()},
          {"infeasible_count", record.infeasible_count()}};
}

/// Sidecar path for a run CSV: `x.csv` -> `x.summary.json`.
inline std::filesystem::path summary_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".summary.json");
  return p;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

inline void save_run(const RunRecord& record, const std::filesystem::path& csv_path) {
  std::ostringstream csv;
  write_run_csv(record, csv);
  write_text_file(csv_path, csv.str());
  write_text_file(summary_path(csv_path), run_summary(record).dump(2) + "\n");
}

/// Cumulative profit series rebuilt from a run CSV's per-round columns.
inline CumulativeSeries read_run_series(const std::filesystem::path& csv_path) {
  const auto table = read_csv_table(csv_path);
  const std::size_t poc = table.column("poc");
  const std::size_t pop = table.column("pop");
  const std::size_t pos = table.column("pos");
  const std::size_t t = table.column("t");
  CumulativeSeries s;
  double a = 0.0, b = 0.0, c = 0.0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (csv_number(table, i, t) != static_cast<double>(i + 1)) throw ParseError(i + 2, "rounds must be 1..T in order");
    a += csv_number(table, i, poc);
    b += csv_number(table, i, pop);
    c += csv_number(table, i, pos);
    s.poc.push_back(a);
    s.pop.push_back(b);
    s.pos.push_back(c);
  }
  return s;
}

/// Rejects a pairing whose summaries disagree on seed, T, N, M, params or pool.
inline void check_pairable(const nlohmann::json& alg, const nlohmann::json& optimal) {
  const auto& a = alg.at("config");
  const auto& o = optimal.at("config");
  for (const char* key : {"seed", "T", "N", "M", "pool"})
    if (a.at(key) != o.at(key)) throw ConfigError(std::string("runs differ in '") + key + "'");
  if (alg.at("params") != optimal.at("params")) throw ConfigError("runs differ in market params");
}

inline constexpr std::string_view kDeltaHeader = "t,delta_poc,delta_pop,delta_pos";

inline void write_delta_csv(const DeltaSeries& d, std::ostream& out) {
  out << kDeltaHeader << '\n';
  for (std::size_t i = 0; i < d.pos.size(); ++i)
    out << i + 1 << ',' << text::format_csv(d.poc[i]) << ',' << text::format_csv(d.pop[i]) << ','
        << text::format_csv(d.pos[i]) << '\n';
}

// ---------------------------------------------------------------------------
// T / N / K sweeps

struct SweepRow {
  double axis_value = 0.0;
  std::uint64_t seed = 0;
  PolicyType policy = PolicyType::kGreedy;
  double revenue_cum = 0.0;
  double delta_poc = 0.0;
  double delta_pop = 0.0;
  double delta_pos = 0.0;
  std::string status = "ok";
};

inline RunConfig with_axis_value(RunConfig config, SweepAxis axis, double value) {
  const auto v = static_cast<std::size_t>(value);
  switch (axis) {
    case SweepAxis::kT: config.T = v; break;
    case SweepAxis::kN:
      config.N = v;
      if (std::holds_alternative<MarketParams>(config.params))
        throw ConfigError("an N sweep needs sampled params, not an explicit market");
      if (std::holds_alternative<std::filesystem::path>(config.pool))
        throw ConfigError("an N sweep needs a generated pool, not a pool file");
      break;
    case SweepAxis::kK: config.K = v; break;
    default: throw ConfigError("axis " + to_string(axis) + " is not a run sweep");
  }
  return config;
}

/// Every policy against the oracle, for each (axis value, seed). Rows are
/// ordered by (axis value, seed, policy) independent of scheduling.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::size_t threads = 0,
                                       const std::function<void(std::size_t, std::size_t)>& progress = {}) {
  spec.validate();
  if (!is_run_axis(spec.axis)) throw ConfigError("sweep axis must be T, N or K");
  const std::size_t n_policies = kAllPolicies.size();
  const std::size_t n_cells = spec.values.size() * spec.seeds.size();
  std::vector<SweepRow> rows(n_cells * n_policies);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  parallel_for(
      n_cells,
      [&](std::size_t cell) {
        const double value = spec.values[cell / spec.seeds.size()];
        const std::uint64_t seed = spec.seeds[cell % spec.seeds.size()];
        for (std::size_t p = 0; p < n_policies; ++p) {
          auto& row = rows[cell * n_policies + p];
          row.axis_value = value;
          row.seed = seed;
          row.policy = kAllPolicies[p];
        }
        try {
          RunConfig base = with_axis_value(spec.base, spec.axis, value);
          base.seed = seed;
          const RunInputs inputs = resolve_inputs(base);
          RunConfig opt_config = base;
          opt_config.policy.type = PolicyType::kOptimal;
          const RunRecord optimal = run(opt_config, inputs);
          for (std::size_t p = 0; p < n_policies; ++p) {
            auto& row = rows[cell * n_policies + p];
            RunConfig c = base;
            c.policy.type = kAllPolicies[p];
            const RunRecord rec = c.policy.type == PolicyType::kOptimal ? optimal : run(c, inputs);
            const auto d = delta_metrics(rec, optimal);
            row.revenue_cum = rec.revenue_cum();
            row.delta_poc = d.poc.back();
            row.delta_pop = d.pop.back();
            row.delta_pos = d.pos.back();
            if (rec.infeasible_count() > 0) row.status = "infeasible:" + std::to_string(rec.infeasible_count());
          }
        } catch (const Error&) {
          for (std::size_t p = 0; p < n_policies; ++p) rows[cell * n_policies + p].status = std::string("error");
        }
        if (progress) {
          std::lock_guard lock(progress_mutex);
          progress(++done, n_cells);
        }
      },
      threads);
  return rows;
}

inline constexpr std::string_view kSweepHeader =
    "axis_value,seed,policy,revenue_cum,delta_poc,delta_pop,delta_pos,status";

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << kSweepHeader << '\n';
  for (const auto& r : rows)
    out << text::format_csv(r.axis_value) << ',' << r.seed << ',' << to_string(r.policy) << ','
        << text::format_csv(r.revenue_cum) << ',' << text::format_csv(r.delta_poc) << ','
        << text::format_csv(r.delta_pop) << ',' << text::format_csv(r.delta_pos) << ',' << r.status << '\n';
}

// ---------------------------------------------------------------------------
// Sensitivity at a frozen round

/// A round's game state and equilibrium, taken from a completed base run.
struct FrozenRound {
  std::size_t t = 0;
  GameState state;
  MarketParams params;
  Equilibrium equilibrium;
};

inline FrozenRound freeze_round(const RunConfig& base, std::size_t t) {
  if (t < 1 || t > base.T) throw ConfigError("fixed_iteration must lie in 1..T");
  RunConfig c = base;
  const RunRecord record = run(c);
  const auto& it = record.iterations.at(t - 1);
  FrozenRound f;
  f.t = t;
  f.params = record.params;
  for (CategoryId id : it.chosen) f.state.categories.push_back({id, it.qbar.at(id), it.phibar.at(id), it.sigbar.at(id)});
  f.equilibrium = solve_equilibrium(f.state, f.params);
  return f;
}

struct SensitivityRow {
  double axis_value = 0.0;
  Strategy strategy;
  ProfitReport profits;
  std::size_t clamped = 0;
  std::string status = "ok";
};

/// Default swept category: the selected one with the largest equilibrium richness.
inline CategoryId default_sweep_category(const FrozenRound& f) {
  CategoryId best = f.state.categories.front().id;
  double best_s = -1.0;
  for (const auto& [id, s] : f.equilibrium.strategy.richness)
    if (s > best_s) {
      best_s = s;
      best = id;
    }
  return best;
}

/// 21 points spanning +-50% around `center`.
inline std::vector<double> default_bracket(double center) {
  if (!(center > 0.0) || !std::isfinite(center))
    throw ConfigError("cannot bracket a non-positive center; supply 'values'");
  std::vector<double> v;
  for (int i = 0; i <= 20; ++i) v.push_back(center * (0.5 + 0.05 * i));
  return v;
}

inline std::vector<SensitivityRow> run_sensitivity(const SweepSpec& spec, const FrozenRound& frozen) {
  if (is_run_axis(spec.axis)) throw ConfigError("sensitivity axis must be SoC, SoP, SoS_i, gamma or a_i");
  const auto& eq = frozen.equilibrium;
  const CategoryId category = spec.category.value_or(default_sweep_category(frozen));
  if (spec.axis == SweepAxis::kSoS || spec.axis == SweepAxis::kA) frozen.state.at(category);

  std::vector<double> values = spec.values;
  if (values.empty()) {
    switch (spec.axis) {
      case SweepAxis::kSoC: values = default_bracket(eq.strategy.p_g); break;
      case SweepAxis::kSoP: values = default_bracket(eq.strategy.p); break;
      case SweepAxis::kSoS: values = default_bracket(eq.strategy.richness.at(category)); break;
      case SweepAxis::kGamma: values = default_bracket(frozen.params.platform.gamma); break;
      case SweepAxis::kA: values = default_bracket(frozen.params.category(category).a); break;
      default: break;
    }
  }

  std::vector<SensitivityRow> rows;
  for (double v : values) {
    SensitivityRow row;
    row.axis_value = v;
    try {
      std::vector<CategoryId> clamped;
      MarketParams params = frozen.params;
      switch (spec.axis) {
        case SweepAxis::kSoC:
          row.strategy = respond_to_bundle_price(frozen.state, params, v, &clamped);
          break;
        case SweepAxis::kSoP:
          row.strategy = respond_to_prompt_price(frozen.state, params, eq.strategy.p_g, v, &clamped);
          break;
        case SweepAxis::kSoS:
          if (!(v >= 0.0)) throw DomainError("richness must be >= 0");
          row.strategy = eq.strategy;
          row.strategy.richness[category] = v;
          clamped = eq.clamped;
          std::erase(clamped, category);
          break;
        case SweepAxis::kGamma:
        case SweepAxis::kA: {
          if (spec.axis == SweepAxis::kGamma)
            params.platform.gamma = v;
          else
            params.category(category).a = v;
          params.validate();
          auto re = solve_equilibrium(frozen.state, params);
          row.strategy = std::move(re.strategy);
          clamped = std::move(re.clamped);
          break;
        }
        default: break;
      }
      row.profits = evaluate_profits(frozen.state, params, row.strategy);
      row.clamped = clamped.size();
    } catch (const Error&) {
      row.status = "infeasible";
      row.strategy = Strategy{};
      row.profits = ProfitReport{};
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_sensitivity_csv(const std::vector<SensitivityRow>& rows, const FrozenRound& frozen,
                                  std::ostream& out) {
  const auto ids = frozen.state.ids();
  out << "axis_value,soc,sop";
  for (CategoryId id : ids) out << ",sos_" << id;
  out << ",poc,pop,pos";
  for (CategoryId id : ids) out << ",profit_" << id;
  out << ",clamped,status\n";
  auto value_or_zero = [](const CategoryValues& m, CategoryId id) {
    auto it = m.find(id);
    return it == m.end() ? 0.0 : it->second;
  };
  for (const auto& r : rows) {
    out << text::format_csv(r.axis_value) << ',' << text::format_csv(r.strategy.p_g) << ','
        << text::format_csv(r.strategy.p);
    for (CategoryId id : ids) out << ',' << text::format_csv(value_or_zero(r.strategy.richness, id));
    out << ',' << text::format_csv(r.profits.consumer) << ',' << text::format_csv(r.profits.platform) << ','
        << text::format_csv(r.profits.sellers());
    for (CategoryId id : ids) out << ',' << text::format_csv(value_or_zero(r.profits.per_category, id));
    out << ',' << r.clamped << ',' << r.status << '\n';
  }
}

}  // namespace pbt
