// Command-line front end: pool generation, single runs, delta metrics, and sweeps.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pbt/catalog.hpp"
#include "pbt/engine.hpp"
#include "pbt/errors.hpp"
#include "pbt/experiments.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
  std::optional<std::size_t> T, N, K, M;
  std::string out;
  std::size_t threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& o, const std::string& out_help) {
  cmd->add_option("--config", o.config, "JSON config file");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--policy", o.policy, "greedy | random | eps_first | cucb | optimal");
  cmd->add_option("--T", o.T, "Number of rounds");
  cmd->add_option("--N", o.N, "Number of categories");
  cmd->add_option("--K", o.K, "Categories selected per round");
  cmd->add_option("--M", o.M, "Products per bundle");
  cmd->add_option("--out", o.out, out_help)->required();
}

pbt::ExperimentConfig load_config(const CommonOptions& o) {
  pbt::ExperimentConfig e;
  if (!o.config.empty()) e = pbt::experiment_config_from_json(pbt::read_json_file(o.config));
  auto& r = e.run;
  if (o.seed) r.seed = *o.seed;
  if (o.policy) r.policy.type = pbt::parse_policy_type(*o.policy);
  if (o.T) r.T = *o.T;
  if (o.N) r.N = *o.N;
  if (o.K) r.K = *o.K;
  if (o.M) r.M = *o.M;
  r.validate();
  return e;
}

std::string to_text(const auto& writer) {
  std::ostringstream s;
  writer(s);
  return s.str();
}

int cmd_generate_pool(const CommonOptions& o) {
  const auto e = load_config(o);
  if (std::holds_alternative<std::filesystem::path>(e.run.pool))
    throw pbt::ConfigError("generate-pool needs a pool spec, not a pool path");
  const auto pool = pbt::generate_pool(pbt::pool_spec_for(e.run));
  const std::filesystem::path out(o.out);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  pbt::save_pool(pool, out);
  std::cerr << "wrote " << pool.n_categories() << " categories to " << out.string() << '\n';
  return 0;
}

int cmd_run(const CommonOptions& o) {
  const auto e = load_config(o);
  const auto record = pbt::run(e.run);
  const auto csv = std::filesystem::path(o.out) / ("run_" + pbt::to_string(e.run.policy.type) + ".csv");
  pbt::save_run(record, csv);
  std::cerr << "wrote " << record.iterations.size() << " rounds to " << csv.string() << " (infeasible "
            << record.infeasible_count() << ", clamped " << record.clamped_count() << ")\n";
  return 0;
}

int cmd_delta(const std::string& alg, const std::string& optimal, const std::string& out) {
  const auto alg_summary = pbt::summary_path(alg);
  const auto opt_summary = pbt::summary_path(optimal);
  if (std::filesystem::exists(alg_summary) && std::filesystem::exists(opt_summary))
    pbt::check_pairable(pbt::read_json_file(alg_summary), pbt::read_json_file(opt_summary));
  const auto d = pbt::delta_series(pbt::read_run_series(alg), pbt::read_run_series(optimal));
  pbt::write_text_file(out, to_text([&](std::ostream& s) { pbt::write_delta_csv(d, s); }));
  return 0;
}

int cmd_sweep(const CommonOptions& o) {
  const auto e = load_config(o);
  const auto spec = e.sweep_spec();
  const auto rows = pbt::run_sweep(spec, o.threads, [](std::size_t done, std::size_t total) {
    std::cerr << "sweep: " << done << "/" << total << " cells\n";
  });
  pbt::write_text_file(o.out, to_text([&](std::ostream& s) { pbt::write_sweep_csv(rows, s); }));
  return 0;
}

int cmd_sensitivity(const CommonOptions& o) {
  const auto e = load_config(o);
  auto spec = e.sweep_spec();
  if (pbt::is_run_axis(spec.axis)) throw pbt::ConfigError("sensitivity axis must be SoC, SoP, SoS_i, gamma or a_i");
  spec.validate();
  const auto frozen = pbt::freeze_round(spec.base, spec.fixed_iteration);
  const auto rows = pbt::run_sensitivity(spec, frozen);
  pbt::write_text_file(o.out, to_text([&](std::ostream& s) { pbt::write_sensitivity_csv(rows, frozen, s); }));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prompt bundle trading simulator"};
  app.require_subcommand(1);

  CommonOptions pool_opts, run_opts, sweep_opts, sens_opts;
  auto* gen = app.add_subcommand("generate-pool", "Synthesize a prompt pool CSV");
  add_common(gen, pool_opts, "Output pool CSV");
  auto* run = app.add_subcommand("run", "Run one trajectory");
  add_common(run, run_opts, "Output directory");
  auto* sweep = app.add_subcommand("sweep", "Sweep T, N or K over all policies");
  add_common(sweep, sweep_opts, "Output CSV");
  sweep->add_option("--threads", sweep_opts.threads, "Worker threads (0 = hardware)");
  auto* sens = app.add_subcommand("sensitivity", "Strategy and parameter sensitivity at a frozen round");
  add_common(sens, sens_opts, "Output CSV");

  std::string delta_alg, delta_opt, delta_out, delta_config;
  auto* delta = app.add_subcommand("delta", "Optimal-minus-algorithm cumulative profits");
  delta->add_option("--config", delta_config, "Unused; accepted for symmetry");
  delta->add_option("--alg", delta_alg, "Run CSV of the compared policy")->required();
  delta->add_option("--optimal", delta_opt, "Run CSV of the optimal policy")->required();
  delta->add_option("--out", delta_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) return cmd_generate_pool(pool_opts);
    if (*run) return cmd_run(run_opts);
    if (*delta) return cmd_delta(delta_alg, delta_opt, delta_out);
    if (*sweep) return cmd_sweep(sweep_opts);
    if (*sens) return cmd_sensitivity(sens_opts);
  } catch (const pbt::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const pbt::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const pbt::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
