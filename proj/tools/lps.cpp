// Experiment runner for the local packet-scheduling and routing workbench.
//
//   lps run      --config cfg.json [--seed N] [--out DIR] ...
//   lps gen      --kind tree-demand --n 16 --pairs 8 --seed 3 --out DIR
//   lps verify   --config cfg.json            (hash verdicts for an instance)
//   lps certify  --config cfg.json            (certified-seed search)
//   lps estimate --config cfg.json            (not-good rate, Wilson interval)
//   lps bench    --config cfg.json
//
// Exit status is 0 iff the run finished with every asserted invariant held.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lps/lps.hpp"

namespace {

struct CommonFlags {
  std::string config_file;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  unsigned threads = 0;
  std::uint64_t knob_l = 0;
  std::uint64_t knob_k = 0;
  bool have_seed = false, have_trials = false, have_threads = false;
  bool csv = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_file, "experiment config file (JSON)");
  cmd->add_option("--out", flags.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", flags.seed, "master seed (overrides config)")
      ->each([&](const std::string&) { flags.have_seed = true; });
  cmd->add_option("--trials", flags.trials, "trial count (overrides config)")
      ->each([&](const std::string&) { flags.have_trials = true; });
  cmd->add_option("--threads", flags.threads, "worker threads (overrides config)")
      ->each([&](const std::string&) { flags.have_threads = true; });
  cmd->add_option("--knob-l", flags.knob_l, "override the small-step count l");
  cmd->add_option("--knob-k", flags.knob_k, "override the hash-function count k");
  cmd->add_flag("--csv", flags.csv, "also write the step trace as CSV");
}

lps::ExperimentConfig load_config(const CommonFlags& flags, const std::string& default_mode) {
  lps::ExperimentConfig cfg;
  if (!flags.config_file.empty())
    cfg = lps::config_from_json(lps::load_json_file(flags.config_file));
  else
    cfg.mode = default_mode;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (flags.have_seed) cfg.master_seed = flags.seed;
  if (flags.have_trials) cfg.trials = flags.trials;
  if (flags.have_threads) cfg.threads = flags.threads;
  if (flags.knob_l > 0) cfg.params.knobs.l_override = flags.knob_l;
  if (flags.knob_k > 0) cfg.params.knobs.k_override = flags.knob_k;
  if (flags.csv) cfg.csv_trace = true;
  return cfg;
}

int run_and_print(lps::ExperimentConfig cfg) {
  const lps::json report = lps::run_experiment(cfg);
  std::cout << report.dump(2) << '\n';
  return report.at("invariants").at("violations").get<std::uint64_t>() == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"local packet-scheduling and routing workbench"};
  app.require_subcommand(1);

  CommonFlags run_flags, verify_flags, certify_flags, estimate_flags, bench_flags, gen_flags;

  auto* run_cmd = app.add_subcommand("run", "run a configured experiment");
  add_common(run_cmd, run_flags);

  auto* gen_cmd = app.add_subcommand("gen", "generate instance/graph/demand files");
  add_common(gen_cmd, gen_flags);
  std::string gen_kind = "random-paths";
  lps::GenSpec gen_spec;
  gen_cmd->add_option("--kind", gen_kind,
                      "random-paths | hotspot | signal-plus-noise | grid-demand | tree-demand");
  gen_cmd->add_option("--n", gen_spec.n, "node / machine count");
  gen_cmd->add_option("--jobs", gen_spec.jobs, "job count");
  gen_cmd->add_option("--pairs", gen_spec.jobs, "demand pair count (alias of --jobs)");
  gen_cmd->add_option("--len", gen_spec.len, "sequence length knob");
  gen_cmd->add_option("--beta", gen_spec.beta, "noise level (signal-plus-noise)");
  gen_cmd->add_option("--extra-edges", gen_spec.extra_edges, "extra edges beyond a tree");
  gen_cmd->add_option("--side", gen_spec.side, "grid side length");

  auto* verify_cmd = app.add_subcommand("verify", "hash-goodness verdicts for an instance");
  add_common(verify_cmd, verify_flags);
  auto* certify_cmd = app.add_subcommand("certify", "search for a certified master seed");
  add_common(certify_cmd, certify_flags);
  auto* estimate_cmd = app.add_subcommand("estimate", "estimate the not-good probability");
  add_common(estimate_cmd, estimate_flags);
  auto* bench_cmd = app.add_subcommand("bench", "engine throughput on an instance");
  add_common(bench_cmd, bench_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return run_and_print(load_config(run_flags, "schedule"));
    if (gen_cmd->parsed()) {
      lps::ExperimentConfig cfg = load_config(gen_flags, "gen");
      cfg.mode = "gen";
      if (gen_cmd->count("--kind") || cfg.gen.kind.empty()) cfg.gen.kind = gen_kind;
      if (gen_cmd->count("--n")) cfg.gen.n = gen_spec.n;
      if (gen_cmd->count("--jobs") || gen_cmd->count("--pairs")) cfg.gen.jobs = gen_spec.jobs;
      if (gen_cmd->count("--len")) cfg.gen.len = gen_spec.len;
      if (gen_cmd->count("--beta")) cfg.gen.beta = gen_spec.beta;
      if (gen_cmd->count("--extra-edges")) cfg.gen.extra_edges = gen_spec.extra_edges;
      if (gen_cmd->count("--side")) cfg.gen.side = gen_spec.side;
      if (gen_flags.have_seed) cfg.gen.seed = gen_flags.seed;
      return run_and_print(std::move(cfg));
    }
    if (verify_cmd->parsed()) {
      auto cfg = load_config(verify_flags, "verify-hash");
      cfg.mode = "verify-hash";
      return run_and_print(std::move(cfg));
    }
    if (certify_cmd->parsed()) {
      auto cfg = load_config(certify_flags, "certify-seed");
      cfg.mode = "certify-seed";
      return run_and_print(std::move(cfg));
    }
    if (estimate_cmd->parsed()) {
      auto cfg = load_config(estimate_flags, "estimate");
      cfg.mode = "estimate";
      return run_and_print(std::move(cfg));
    }
    if (bench_cmd->parsed()) {
      auto cfg = load_config(bench_flags, "bench");
      cfg.mode = "bench";
      return run_and_print(std::move(cfg));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
