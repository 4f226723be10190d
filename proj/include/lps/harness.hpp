#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "lps/adversary.hpp"
#include "lps/io.hpp"
#include "lps/routing.hpp"
#include "lps/schedulers.hpp"
#include "lps/verification.hpp"

// Reproducible experiment runner: a config fully determines a run and is
// echoed into every report for replay.

namespace lps {

struct EstimateResult {
  std::uint64_t trials = 0;
  std::uint64_t not_good = 0;
  std::uint64_t unknown = 0;
  double rate = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
};

// 95% Wilson score interval.
inline std::pair<double, double> wilson_interval(std::uint64_t hits, std::uint64_t n,
                                                 double z = 1.959963985) {
  if (n == 0) return {0.0, 1.0};
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  const double zz = z * z / static_cast<double>(n);
  const double center = (p + zz / 2.0) / (1.0 + zz);
  const double half =
      z * std::sqrt(p * (1.0 - p) / static_cast<double>(n) + zz / (4.0 * static_cast<double>(n))) /
      (1.0 + zz);
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

inline constexpr std::uint64_t kEstimateStreamTag = 0xe57;

// Samples `trials` hash functions and counts the ones that are not good
// for the job set. Trials fan out across threads and reduce in trial-index
// order, so the result is independent of the thread count.
inline EstimateResult estimate_failure_probability(const std::vector<JobSpec>& jobs,
                                                   std::uint64_t L, std::uint64_t l,
                                                   std::uint64_t trials, std::uint64_t seed,
                                                   unsigned threads = 1,
                                                   std::uint64_t oracle_budget = 2000000) {
  require(trials >= 1, "trials must be positive");
  EstimateResult result;
  result.trials = trials;
  std::vector<std::uint8_t> verdicts(trials);  // 0 good, 1 bad, 2 unknown

  auto worker = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) {
      const HashFamily h(derive_subseed(seed, kEstimateStreamTag, i), L);
      const auto r = is_good_hash(jobs, h, l, oracle_budget);
      verdicts[i] = r.verdict == HashVerdict::good ? 0 : r.verdict == HashVerdict::bad ? 1 : 2;
    }
  };

  const unsigned nthreads = std::max(1u, threads);
  if (nthreads == 1 || trials < 2 * nthreads) {
    worker(0, trials);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (trials + nthreads - 1) / nthreads;
    for (unsigned w = 0; w < nthreads; ++w) {
      const std::uint64_t begin = w * chunk;
      if (begin >= trials) break;
      pool.emplace_back(worker, begin, std::min(trials, begin + chunk));
    }
    for (auto& th : pool) th.join();
  }

  for (std::uint64_t i = 0; i < trials; ++i) {
    if (verdicts[i] == 1) ++result.not_good;
    if (verdicts[i] == 2) ++result.unknown;
  }
  result.rate = static_cast<double>(result.not_good) / static_cast<double>(trials);
  std::tie(result.wilson_low, result.wilson_high) = wilson_interval(result.not_good, trials);
  return result;
}

// ----- Certified seeds.

// All multisets of domain sequences of the given size, identifiers 1..size
// in listed order.
inline std::vector<std::vector<JobSpec>> enumerate_supported_jobsets(const DomainSet& domain,
                                                                     std::size_t size) {
  std::vector<std::vector<JobSpec>> out;
  std::vector<std::size_t> choice(size, 0);
  while (true) {
    std::vector<JobSpec> jobs;
    jobs.reserve(size);
    for (std::size_t i = 0; i < size; ++i)
      jobs.push_back({static_cast<JobInd>(i + 1), domain.sequences[choice[i]]});
    out.push_back(std::move(jobs));
    std::size_t i = size;
    while (i > 0 && choice[i - 1] == domain.sequences.size() - 1) --i;
    if (i == 0) break;
    const std::size_t v = choice[i - 1] + 1;
    for (std::size_t j = i - 1; j < size; ++j) choice[j] = v;
  }
  return out;
}

struct CertifyResult {
  bool found = false;
  std::uint64_t master_seed = 0;
  std::uint64_t seeds_tried = 0;
  std::uint64_t job_sets_checked = 0;
  bool exhaustive = false;
  // Best coverage over tried seeds when no seed passed.
  std::uint64_t best_passed = 0;
  std::uint64_t best_seed = 0;
};

// Searches master seeds whose per-scale hash sets contain a good member
// for every enumerated (or sampled) domain-supported job set up to size
// s_max, checked at the first sufficient scale of the doubling schedule.
inline CertifyResult certify_seed(const DomainSet& domain, std::uint64_t machine_count,
                                  const SchedulerParams& sp, std::size_t s_max,
                                  std::uint64_t trials, std::uint64_t search_budget,
                                  std::uint64_t base_seed = 1,
                                  std::uint64_t oracle_budget = 2000000) {
  require(search_budget > 0, "seed search budget must be positive");
  require(s_max >= 1, "s_max must be positive");
  require(!domain.sequences.empty(), "domain must be non-empty");

  const DerivedParams dp =
      derive_params(std::max<std::uint64_t>(machine_count, 2), sp.c, sp.b, sp.knobs);

  // Enumerate exhaustively while the count stays within `trials`, else
  // sample `trials` job sets from the seed stream.
  std::vector<std::vector<JobSpec>> job_sets;
  bool exhaustive = true;
  double total = 0;
  for (std::size_t s = 1; s <= s_max; ++s)
    total += std::pow(static_cast<double>(domain.sequences.size()), static_cast<double>(s));
  if (total <= static_cast<double>(trials)) {
    for (std::size_t s = 1; s <= s_max; ++s) {
      auto sets = enumerate_supported_jobsets(domain, s);
      job_sets.insert(job_sets.end(), sets.begin(), sets.end());
    }
  } else {
    exhaustive = false;
    SplitMix64 rng(derive_subseed(base_seed, 0xce17, 0));
    for (std::uint64_t i = 0; i < trials; ++i) {
      const std::size_t s = 1 + rng.next() % s_max;
      std::vector<JobSpec> jobs;
      for (std::size_t j = 0; j < s; ++j)
        jobs.push_back({static_cast<JobInd>(j + 1),
                        domain.sequences[rng.next() % domain.sequences.size()]});
      job_sets.push_back(std::move(jobs));
    }
  }

  CertifyResult result;
  result.exhaustive = exhaustive;
  result.job_sets_checked = job_sets.size();

  for (std::uint64_t attempt = 0; attempt < search_budget; ++attempt) {
    const std::uint64_t candidate = base_seed + attempt;
    ++result.seeds_tried;
    std::uint64_t passed = 0;
    bool ok = true;
    for (const auto& jobs : job_sets) {
      const std::uint64_t need = congestion(jobs) + dilation(jobs);
      const std::uint64_t L = std::max<std::uint64_t>(4, next_pow2(std::max<std::uint64_t>(need, 1)));
      const HashSet hs = sample_hash_set(candidate, dp.k, L, scale_index_for(L));
      bool any_good = false;
      for (const auto& member : hs.members)
        if (is_good_hash(jobs, member, dp.l, oracle_budget).verdict == HashVerdict::good) {
          any_good = true;
          break;
        }
      if (!any_good) {
        ok = false;
        break;
      }
      ++passed;
    }
    if (passed > result.best_passed || result.seeds_tried == 1) {
      result.best_passed = passed;
      result.best_seed = candidate;
    }
    if (ok) {
      result.found = true;
      result.master_seed = candidate;
      return result;
    }
  }
  return result;
}

inline json certificate_json(const CertifyResult& r, const SchedulerParams& sp,
                             std::uint64_t machine_count, std::size_t s_max,
                             std::size_t domain_size) {
  json j;
  j["master_seed"] = r.master_seed;
  j["c"] = sp.c;
  j["b"] = sp.b;
  j["knobs"] = to_json(sp.knobs);
  j["provenance"] = {{"machines", machine_count},
                     {"domain_size", domain_size},
                     {"s_max", s_max},
                     {"job_sets_checked", r.job_sets_checked},
                     {"coverage", r.exhaustive ? "exhaustive" : "sampled"},
                     {"seeds_tried", r.seeds_tried}};
  return j;
}

// ----- Instance generation.

struct GenSpec {
  std::string kind;  // random-paths | hotspot | signal-plus-noise | grid-demand | tree-demand
  std::uint64_t seed = 1;
  std::uint64_t n = 8;           // nodes (graph kinds)
  std::uint64_t jobs = 4;        // job/path/pair count
  std::uint64_t len = 3;         // sequence length knob
  std::uint64_t beta = 2;        // signal-plus-noise
  std::uint64_t extra_edges = 2; // random-paths
  std::uint64_t side = 4;        // grid side
};

namespace detail {

inline ReciprocalGraph random_connected_graph(std::uint64_t n, std::uint64_t extra,
                                              SplitMix64& rng) {
  ReciprocalGraph g(static_cast<NodeId>(n));
  for (NodeId v = 1; v < n; ++v)
    g.add_edge(static_cast<NodeId>(rng.next() % v), v);  // random attachment tree
  std::set<std::pair<NodeId, NodeId>> present;
  for (EdgeId e = 0; e < g.edge_count(); e += 2)
    present.insert({std::min(g.from(e), g.to(e)), std::max(g.from(e), g.to(e))});
  std::uint64_t added = 0, attempts = 0;
  while (added < extra && attempts < 50 * (extra + 1)) {
    ++attempts;
    const NodeId u = static_cast<NodeId>(rng.next() % n);
    const NodeId v = static_cast<NodeId>(rng.next() % n);
    if (u == v) continue;
    if (!present.insert({std::min(u, v), std::max(u, v)}).second) continue;
    g.add_edge(u, v);
    ++added;
  }
  return g;
}

inline ReciprocalGraph random_tree(std::uint64_t n, SplitMix64& rng) {
  return random_connected_graph(n, 0, rng);
}

// Loop-erased random walk of at least one edge.
inline Path random_simple_path(const ReciprocalGraph& g, SplitMix64& rng,
                               std::uint64_t max_len) {
  while (true) {
    const NodeId start = static_cast<NodeId>(rng.next() % g.node_count());
    std::vector<NodeId> nodes{start};
    std::vector<EdgeId> edges;
    NodeId at = start;
    const std::uint64_t want = 1 + rng.next() % max_len;
    for (std::uint64_t step = 0; step < 4 * want && edges.size() < want; ++step) {
      const auto& out = g.out_edges(at);
      if (out.empty()) break;
      const EdgeId e = out[rng.next() % out.size()];
      const NodeId to = g.to(e);
      auto seen = std::find(nodes.begin(), nodes.end(), to);
      if (seen != nodes.end()) {  // erase the loop
        const std::size_t keep = static_cast<std::size_t>(seen - nodes.begin());
        nodes.resize(keep + 1);
        edges.resize(keep);
      } else {
        nodes.push_back(to);
        edges.push_back(e);
      }
      at = to;
    }
    if (!edges.empty()) return Path{edges};
  }
}

}  // namespace detail

struct GeneratedFiles {
  Instance instance;
  ReciprocalGraph graph;
  Demand demand;
  json manifest;
  bool has_graph = false;
  bool has_demand = false;
};

inline GeneratedFiles gen_instance(const GenSpec& spec) {
  require(spec.n >= 2 && spec.n <= 4096, "node count outside the polynomial guard");
  require(spec.jobs >= 1 && spec.jobs <= 65536, "job count outside the polynomial guard");
  require(spec.len >= 1 && spec.len <= 256, "sequence length outside the polynomial guard");
  GeneratedFiles out;
  SplitMix64 rng(derive_subseed(spec.seed, 0x6e4, 0));
  out.manifest["kind"] = spec.kind;
  out.manifest["seed"] = spec.seed;

  if (spec.kind == "random-paths") {
    out.graph = detail::random_connected_graph(spec.n, spec.extra_edges, rng);
    out.has_graph = true;
    std::set<Sequence> seqs;
    for (std::uint64_t i = 0; i < spec.jobs; ++i) {
      const Path p = detail::random_simple_path(out.graph, rng, spec.len);
      out.demand.pairs.push_back({out.graph.from(p.edges.front()), out.graph.to(p.edges.back())});
      out.instance.jobs.push_back({i + 1, path_to_sequence(p)});
      seqs.insert(out.instance.jobs.back().seq);
    }
    out.has_demand = true;
    out.instance.machines = out.graph.edge_count();
    out.instance.domain.sequences.assign(seqs.begin(), seqs.end());
  } else if (spec.kind == "hotspot") {
    const std::uint64_t machines = std::max<std::uint64_t>(spec.n, 2);
    std::set<Sequence> seqs;
    for (std::uint64_t i = 0; i < spec.jobs; ++i) {
      Sequence seq;
      for (std::uint64_t p = 0; p < spec.len; ++p)
        seq.push_back(static_cast<MachineId>(rng.next() % machines));
      seq[rng.next() % spec.len] = 0;  // every job passes the hotspot machine
      out.instance.jobs.push_back({i + 1, seq});
      seqs.insert(seq);
    }
    out.instance.machines = machines;
    out.instance.domain.sequences.assign(seqs.begin(), seqs.end());
    out.manifest["hotspot_machine"] = 0;
  } else if (spec.kind == "signal-plus-noise") {
    require(spec.beta >= 1, "beta must be at least 1");
    // Signal jobs on disjoint machines; noise pads the set with beta-1
    // copies of the first signal job under fresh identifiers.
    std::set<Sequence> seqs;
    for (std::uint64_t i = 0; i < spec.jobs; ++i) {
      Sequence seq;
      for (std::uint64_t p = 0; p < spec.len; ++p)
        seq.push_back(static_cast<MachineId>(i * spec.len + p));
      out.instance.jobs.push_back({i + 1, seq});
      seqs.insert(seq);
    }
    const Sequence noise_seq = out.instance.jobs.front().seq;
    const std::uint64_t copies = (spec.beta - 1) * spec.jobs;
    for (std::uint64_t i = 0; i < copies; ++i)
      out.instance.jobs.push_back({spec.jobs + i + 1, noise_seq});
    out.instance.machines = spec.jobs * spec.len;
    out.instance.domain.sequences.assign(seqs.begin(), seqs.end());
    std::vector<JobSpec> signal(out.instance.jobs.begin(),
                                out.instance.jobs.begin() + spec.jobs);
    out.manifest["signal_size"] = spec.jobs;
    out.manifest["beta"] = spec.beta;
    out.manifest["signal_congestion"] = congestion(signal);
    out.manifest["signal_dilation"] = dilation(signal);
  } else if (spec.kind == "grid-demand") {
    const std::uint64_t side = std::max<std::uint64_t>(spec.side, 2);
    out.graph = ReciprocalGraph(static_cast<NodeId>(side * side));
    for (std::uint64_t r = 0; r < side; ++r)
      for (std::uint64_t c = 0; c < side; ++c) {
        const NodeId v = static_cast<NodeId>(r * side + c);
        if (c + 1 < side) out.graph.add_edge(v, v + 1);
        if (r + 1 < side) out.graph.add_edge(v, static_cast<NodeId>(v + side));
      }
    out.has_graph = true;
    // Permutation demand: a random derangement-style pairing.
    std::vector<NodeId> nodes(side * side);
    std::iota(nodes.begin(), nodes.end(), 0);
    std::vector<NodeId> targets = nodes;
    for (std::size_t i = targets.size(); i > 1; --i)
      std::swap(targets[i - 1], targets[rng.next() % i]);
    const std::uint64_t k = std::min<std::uint64_t>(spec.jobs, nodes.size());
    for (std::uint64_t i = 0; i < k; ++i)
      if (nodes[i] != targets[i]) out.demand.pairs.push_back({nodes[i], targets[i]});
    out.has_demand = true;
  } else if (spec.kind == "tree-demand") {
    out.graph = detail::random_tree(spec.n, rng);
    out.has_graph = true;
    std::set<std::pair<NodeId, NodeId>> used;
    std::uint64_t attempts = 0;
    while (out.demand.pairs.size() < spec.jobs && attempts < 100 * (spec.jobs + 1)) {
      ++attempts;
      const NodeId s = static_cast<NodeId>(rng.next() % spec.n);
      const NodeId t = static_cast<NodeId>(rng.next() % spec.n);
      if (s == t) continue;
      if (used.insert({s, t}).second) out.demand.pairs.push_back({s, t});
    }
    out.has_demand = true;
  } else {
    throw ValidationError("unknown generator kind: " + spec.kind);
  }

  if (!out.instance.jobs.empty()) {
    out.manifest["congestion"] = congestion(out.instance.jobs);
    out.manifest["dilation"] = dilation(out.instance.jobs);
    out.manifest["job_count"] = out.instance.jobs.size();
  }
  if (out.has_demand) out.manifest["pair_count"] = out.demand.pairs.size();
  return out;
}

inline void write_generated(const GeneratedFiles& files, const std::string& dir) {
  std::filesystem::create_directories(dir);
  if (!files.instance.jobs.empty())
    write_json_file(dir + "/instance.json", to_json(files.instance));
  if (files.has_graph) write_json_file(dir + "/graph.json", to_json(files.graph));
  if (files.has_demand) write_json_file(dir + "/demand.json", to_json(files.demand));
  write_json_file(dir + "/manifest.json", files.manifest);
}

// ----- Experiment configs and the runner.

struct ExperimentConfig {
  std::string mode = "schedule";
  std::string instance_file;
  std::string graph_file;
  std::string demand_file;
  std::string path_set_file;
  std::string path_set_kind = "file";  // file | tree | ksp
  std::uint64_t alpha = 2;             // ksp sparsity
  std::string router_kind = "direct";  // direct | wrapper
  SchedulerParams params;
  AdversaryStrategy adversary;
  std::uint64_t master_seed = 1;
  std::uint64_t trials = 1000;
  unsigned threads = 1;
  std::uint64_t estimate_L = 8;
  std::uint64_t estimate_l = 1;
  std::size_t certify_s_max = 2;
  std::uint64_t certify_budget = 64;
  std::optional<std::uint64_t> router_reps;
  std::optional<std::uint64_t> router_l_sweep_max;
  std::string out_dir = "out";
  bool csv_trace = false;
  GenSpec gen;
};

inline json to_json(const ExperimentConfig& cfg) {
  json j;
  j["mode"] = cfg.mode;
  if (!cfg.instance_file.empty()) j["instance"] = cfg.instance_file;
  if (!cfg.graph_file.empty()) j["graph"] = cfg.graph_file;
  if (!cfg.demand_file.empty()) j["demand"] = cfg.demand_file;
  if (!cfg.path_set_file.empty()) j["path_set"] = cfg.path_set_file;
  j["path_set_kind"] = cfg.path_set_kind;
  j["alpha"] = cfg.alpha;
  j["router_kind"] = cfg.router_kind;
  j["params"] = {{"c", cfg.params.c},
                 {"b", cfg.params.b},
                 {"knobs", to_json(cfg.params.knobs)},
                 {"tie_break", cfg.params.tie_break == TieBreak::lowest_ind ? "lowest" : "highest"},
                 {"reps_rule", cfg.params.reps_rule == RepsRule::proof ? "proof" : "pseudocode"}};
  if (cfg.params.beta > 0) j["params"]["beta"] = cfg.params.beta;
  if (cfg.params.t_bound > 0) j["params"]["T"] = cfg.params.t_bound;
  j["adversary"] = to_json(cfg.adversary);
  j["master_seed"] = cfg.master_seed;
  j["trials"] = cfg.trials;
  j["threads"] = cfg.threads;
  j["estimate"] = {{"L", cfg.estimate_L}, {"l", cfg.estimate_l}};
  j["certify"] = {{"s_max", cfg.certify_s_max}, {"search_budget", cfg.certify_budget}};
  if (cfg.router_reps) j["router_reps"] = *cfg.router_reps;
  if (cfg.router_l_sweep_max) j["router_l_sweep_max"] = *cfg.router_l_sweep_max;
  j["out"] = cfg.out_dir;
  j["csv_trace"] = cfg.csv_trace;
  if (cfg.mode == "gen")
    j["gen"] = {{"kind", cfg.gen.kind},   {"seed", cfg.gen.seed},
                {"n", cfg.gen.n},         {"jobs", cfg.gen.jobs},
                {"len", cfg.gen.len},     {"beta", cfg.gen.beta},
                {"extra_edges", cfg.gen.extra_edges}, {"side", cfg.gen.side}};
  return j;
}

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.mode = j.value("mode", "schedule");
  cfg.instance_file = j.value("instance", "");
  cfg.graph_file = j.value("graph", "");
  cfg.demand_file = j.value("demand", "");
  cfg.path_set_file = j.value("path_set", "");
  cfg.path_set_kind = j.value("path_set_kind", "file");
  cfg.alpha = j.value("alpha", std::uint64_t{2});
  cfg.router_kind = j.value("router_kind", "direct");
  if (j.contains("params")) {
    const auto& p = j.at("params");
    cfg.params.c = p.value("c", 2u);
    cfg.params.b = p.value("b", 1u);
    if (p.contains("knobs")) cfg.params.knobs = knobs_from_json(p.at("knobs"));
    cfg.params.tie_break =
        p.value("tie_break", "lowest") == "highest" ? TieBreak::highest_ind : TieBreak::lowest_ind;
    cfg.params.reps_rule =
        p.value("reps_rule", "proof") == "pseudocode" ? RepsRule::pseudocode : RepsRule::proof;
    cfg.params.beta = p.value("beta", 0.0);
    cfg.params.t_bound = p.value("T", std::uint64_t{0});
  }
  if (j.contains("adversary")) cfg.adversary = adversary_from_json(j.at("adversary"));
  cfg.master_seed = j.value("master_seed", std::uint64_t{1});
  cfg.trials = j.value("trials", std::uint64_t{1000});
  cfg.threads = j.value("threads", 1u);
  if (j.contains("estimate")) {
    cfg.estimate_L = j.at("estimate").value("L", std::uint64_t{8});
    cfg.estimate_l = j.at("estimate").value("l", std::uint64_t{1});
  }
  if (j.contains("certify")) {
    cfg.certify_s_max = j.at("certify").value("s_max", std::size_t{2});
    cfg.certify_budget = j.at("certify").value("search_budget", std::uint64_t{64});
  }
  if (j.contains("router_reps")) cfg.router_reps = j.at("router_reps").get<std::uint64_t>();
  if (j.contains("router_l_sweep_max"))
    cfg.router_l_sweep_max = j.at("router_l_sweep_max").get<std::uint64_t>();
  cfg.out_dir = j.value("out", "out");
  cfg.csv_trace = j.value("csv_trace", false);
  if (j.contains("gen")) {
    const auto& g = j.at("gen");
    cfg.gen.kind = g.value("kind", "random-paths");
    cfg.gen.seed = g.value("seed", std::uint64_t{1});
    cfg.gen.n = g.value("n", std::uint64_t{8});
    cfg.gen.jobs = g.value("jobs", std::uint64_t{4});
    cfg.gen.len = g.value("len", std::uint64_t{3});
    cfg.gen.beta = g.value("beta", std::uint64_t{2});
    cfg.gen.extra_edges = g.value("extra_edges", std::uint64_t{2});
    cfg.gen.side = g.value("side", std::uint64_t{4});
  }
  return cfg;
}

namespace detail {

inline json scheduling_results(const SimTrace& trace, const std::vector<JobSpec>& jobs,
                               const SchedulerParams& sp, std::uint64_t machine_count) {
  const auto summary = summarize(trace, jobs.size());
  const auto bounds = opt_bounds_jobs(jobs);
  const std::uint64_t m = std::max<std::uint64_t>(machine_count, 2);
  const DerivedParams dp = derive_params(m, sp.c, sp.b, sp.knobs);
  const DerivedParams defaults = derive_params(m, sp.c, sp.b, ScaleKnobs{});
  json r;
  r["summary"] = to_json(summary);
  // Effective constants next to the formula defaults, labeled, so no
  // number is read out of regime.
  r["summary"]["params_used"] = {
      {"l", dp.l},
      {"k", dp.k},
      {"theory_preconditions_violated", dp.theory_preconditions_violated},
      {"regime", sp.knobs.is_default() ? "default-constants" : "knob-reduced"},
      {"default_formula", {{"l", defaults.l}, {"k", defaults.k}}}};
  r["opt_bounds"] = {{"lower", bounds.lower}, {"upper", bounds.upper}};
  if (bounds.upper > 0 && summary.completed == summary.total && summary.total > 0)
    r["completion_over_c_plus_d"] =
        static_cast<double>(summary.completion_step) / static_cast<double>(bounds.upper);
  json completed = json::array();
  for (const auto& [job, step] : trace.completions)
    completed.push_back({{"job", job}, {"step", step}});
  r["completions"] = std::move(completed);
  return r;
}

inline PathSet path_set_for_config(const ExperimentConfig& cfg, const ReciprocalGraph& g) {
  if (cfg.path_set_kind == "tree") return build_tree_path_set(g);
  if (cfg.path_set_kind == "ksp") return build_ksp_path_set(g, cfg.alpha);
  if (cfg.path_set_kind == "file") {
    if (cfg.path_set_file.empty()) throw ValidationError("path_set file not given");
    return load_path_set(cfg.path_set_file);
  }
  throw ValidationError("unknown path_set_kind: " + cfg.path_set_kind);
}

inline void validate_or_throw_instance(const Instance& inst, unsigned c) {
  const auto report = validate_instance(inst.jobs, inst.domain, inst.machines, c);
  if (!report.ok()) {
    std::string msg = "instance rejected:";
    for (const auto& v : report.violations) msg += "\n  " + v;
    throw ValidationError(msg);
  }
}

inline void require_file(const std::string& path, const std::string& what) {
  if (path.empty() || !std::filesystem::exists(path))
    throw ValidationError(what + " not found: " + path);
}

}  // namespace detail

inline std::string effective_out_dir(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("LPS_OUT_DIR"); env != nullptr && *env != '\0')
    return env;
  return cfg.out_dir;
}

// Executes the configured mode and returns the report. Writes report.json
// (and events.csv on request) under the output directory.
inline json run_experiment(const ExperimentConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  json report;
  report["config"] = to_json(cfg);
  std::uint64_t invariant_checks = 0;

  SimTrace trace_for_csv;
  bool have_trace = false;

  if (cfg.mode == "schedule" || cfg.mode == "schedule-greedy" || cfg.mode == "schedule-noisy") {
    detail::require_file(cfg.instance_file, "instance");
    const Instance inst = load_instance(cfg.instance_file);
    SchedulerParams sp = cfg.params;
    sp.record_events = true;
    SimTrace trace;
    if (cfg.mode == "schedule") {
      trace = run_stateless_scheduler(inst.jobs, inst.domain, inst.machines, sp,
                                      cfg.master_seed);
    } else if (cfg.mode == "schedule-greedy") {
      trace = run_greedy_scheduler(inst.jobs, inst.domain, inst.machines, sp, cfg.master_seed,
                                   make_adversary(cfg.adversary));
    } else {
      trace = run_noisy_scheduler(inst.jobs, inst.domain, inst.machines, sp, cfg.master_seed);
    }
    report["results"] = detail::scheduling_results(trace, inst.jobs, sp, inst.machines);
    invariant_checks = trace.invariant_checks;
    trace_for_csv = std::move(trace);
    have_trace = true;
  } else if (cfg.mode == "route") {
    detail::require_file(cfg.graph_file, "graph");
    detail::require_file(cfg.demand_file, "demand");
    const ReciprocalGraph g = load_graph(cfg.graph_file);
    const Demand demand = load_demand(cfg.demand_file);
    std::vector<PacketSpec> packets;
    for (std::size_t i = 0; i < demand.pairs.size(); ++i)
      packets.push_back({demand.pairs[i].first, demand.pairs[i].second,
                         static_cast<JobInd>(i + 1)});
    RouterParams rp;
    rp.c = cfg.params.c;
    rp.b = cfg.params.b;
    rp.knobs = cfg.params.knobs;
    rp.router_reps_override = cfg.router_reps;
    rp.l_sweep_max = cfg.router_l_sweep_max;
    rp.tie_break = cfg.params.tie_break;
    rp.record_events = cfg.csv_trace;

    RouterResult rr;
    if (cfg.router_kind == "wrapper") {
      PathSetProvider provider =
          cfg.path_set_kind == "tree"
              ? tree_path_provider()
              : cfg.path_set_kind == "ksp"
                    ? ksp_path_provider(cfg.alpha)
                    : PathSetProvider([&](const ReciprocalGraph&,
                                          const std::vector<std::pair<NodeId, NodeId>>&) {
                        return detail::path_set_for_config(cfg, g);
                      });
      RouteResult res = route(g, packets, cfg.master_seed, provider, rp);
      rr = std::move(res.router);
    } else {
      const PathSet ps = detail::path_set_for_config(cfg, g);
      rr = semi_obl_router(g, packets, ps, cfg.master_seed, rp);
    }
    const auto summary = summarize(rr.trace, packets.size());
    json results;
    results["summary"] = to_json(summary);
    results["delivered"] = rr.delivered_count();
    try {
      const auto bounds = opt_bounds_demand(g, demand, 20000);
      results["opt_bounds"] = {{"lower", bounds.lower},
                               {"upper", bounds.upper},
                               {"exact", bounds.exact}};
      if (bounds.upper > 0 && rr.delivered_count() == packets.size() && !packets.empty())
        results["completion_over_opt_upper"] =
            static_cast<double>(summary.completion_step) / static_cast<double>(bounds.upper);
    } catch (const ValidationError&) {
      results["opt_bounds"] = nullptr;  // disconnected pair; router already rejected it
    }
    json per_packet = json::array();
    for (std::size_t i = 0; i < packets.size(); ++i)
      per_packet.push_back({{"ind", packets[i].ind},
                            {"delivered", rr.delivered[i] != 0},
                            {"scale", rr.delivered_at_scale[i]}});
    results["packets"] = std::move(per_packet);
    json phases = json::array();
    for (const auto& ph : rr.phases)
      phases.push_back({{"L", ph.L},
                        {"rep", ph.rep},
                        {"path_index", ph.path_index},
                        {"delivered", ph.delivered}});
    results["phases"] = std::move(phases);
    report["results"] = std::move(results);
    invariant_checks = rr.trace.invariant_checks;
    trace_for_csv = std::move(rr.trace);
    have_trace = true;
  } else if (cfg.mode == "verify-hash") {
    detail::require_file(cfg.instance_file, "instance");
    const Instance inst = load_instance(cfg.instance_file);
    detail::validate_or_throw_instance(inst, cfg.params.c);
    const std::uint64_t L = cfg.estimate_L;
    const std::uint64_t l = cfg.estimate_l;
    const DerivedParams dp =
        derive_params(std::max<std::uint64_t>(inst.machines, 2), cfg.params.c, cfg.params.b,
                      cfg.params.knobs);
    const HashSet hs = sample_hash_set(cfg.master_seed, dp.k, L, scale_index_for(L));
    json verdicts = json::array();
    for (std::size_t m = 0; m < hs.size(); ++m) {
      const auto r = is_good_hash(inst.jobs, hs.members[m], l);
      json v{{"member", m}, {"verdict", to_string(r.verdict)}};
      if (r.witness) {
        json buckets = json::array();
        for (const auto& [key, members] : r.witness->buckets) {
          json b{{"T", key.first}, {"machine", key.second}, {"pairs", json::array()}};
          for (const auto& [j, i] : members)
            b["pairs"].push_back({{"job", inst.jobs[j].ind}, {"pos", i}});
          buckets.push_back(std::move(b));
        }
        v["witness"] = std::move(buckets);
      }
      verdicts.push_back(std::move(v));
    }
    report["results"] = {{"L", L}, {"l", l}, {"k", dp.k}, {"verdicts", std::move(verdicts)}};
  } else if (cfg.mode == "estimate") {
    detail::require_file(cfg.instance_file, "instance");
    const Instance inst = load_instance(cfg.instance_file);
    detail::validate_or_throw_instance(inst, cfg.params.c);
    const auto est = estimate_failure_probability(inst.jobs, cfg.estimate_L, cfg.estimate_l,
                                                  cfg.trials, cfg.master_seed, cfg.threads);
    report["results"] = {{"trials", est.trials},
                         {"not_good", est.not_good},
                         {"unknown", est.unknown},
                         {"rate", est.rate},
                         {"wilson_low", est.wilson_low},
                         {"wilson_high", est.wilson_high}};
  } else if (cfg.mode == "certify-seed") {
    detail::require_file(cfg.instance_file, "instance");
    const Instance inst = load_instance(cfg.instance_file);
    const auto res = certify_seed(inst.domain, inst.machines, cfg.params, cfg.certify_s_max,
                                  cfg.trials, cfg.certify_budget, cfg.master_seed);
    report["results"] = {{"found", res.found},
                         {"seeds_tried", res.seeds_tried},
                         {"job_sets_checked", res.job_sets_checked},
                         {"coverage", res.exhaustive ? "exhaustive" : "sampled"},
                         {"best_passed", res.best_passed}};
    if (res.found) {
      report["results"]["certificate"] = certificate_json(
          res, cfg.params, inst.machines, cfg.certify_s_max, inst.domain.sequences.size());
    }
  } else if (cfg.mode == "gen") {
    const GeneratedFiles files = gen_instance(cfg.gen);
    write_generated(files, effective_out_dir(cfg));
    report["results"] = {{"manifest", files.manifest}};
  } else if (cfg.mode == "bench") {
    detail::require_file(cfg.instance_file, "instance");
    const Instance inst = load_instance(cfg.instance_file);
    SchedulerParams sp = cfg.params;
    sp.record_events = false;
    const auto t0 = std::chrono::steady_clock::now();
    SimTrace trace =
        run_stateless_scheduler(inst.jobs, inst.domain, inst.machines, sp, cfg.master_seed);
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    report["results"] = {
        {"total_steps", trace.total_steps},
        {"steps_per_second", secs > 0 ? static_cast<double>(trace.total_steps) / secs : 0.0},
        {"completed", trace.completions.size()}};
  } else {
    throw ValidationError("unknown mode: " + cfg.mode);
  }

  report["invariants"] = {{"checks", invariant_checks}, {"violations", 0}};
  const auto finished = std::chrono::steady_clock::now();
  report["wall_time_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(finished - started).count();

  const std::string dir = effective_out_dir(cfg);
  std::filesystem::create_directories(dir);
  write_json_file(dir + "/report.json", report);
  if (cfg.csv_trace && have_trace) {
    std::ofstream csv(dir + "/events.csv");
    csv << event_csv_header() << '\n';
    for (const auto& ev : trace_for_csv.events) csv << to_csv(ev) << '\n';
    std::ofstream jsonl(dir + "/events.jsonl");
    write_trace_jsonl(jsonl, trace_for_csv);
  }
  return report;
}

}  // namespace lps
