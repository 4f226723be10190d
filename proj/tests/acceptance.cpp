// Acceptance suite: one pass/fail line per criterion, exit status equals
// the number of failed criteria. Quantitative checks run at knob-reduced
// constants; frozen thresholds are spelled out inline.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lps/lps.hpp"

using namespace lps;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

DomainSet domain_of(const std::vector<JobSpec>& jobs) {
  DomainSet d;
  std::set<Sequence> seqs;
  for (const auto& j : jobs) seqs.insert(j.seq);
  d.sequences.assign(seqs.begin(), seqs.end());
  return d;
}

std::vector<JobSpec> random_jobs(SplitMix64& rng, std::size_t count, MachineId machines,
                                 std::size_t max_len) {
  std::vector<JobSpec> jobs;
  for (std::size_t i = 0; i < count; ++i) {
    Sequence seq(1 + rng.next() % max_len);
    for (auto& m : seq) m = static_cast<MachineId>(rng.next() % machines);
    jobs.push_back({i + 1, seq});
  }
  return jobs;
}

ReciprocalGraph random_tree(NodeId n, SplitMix64& rng) {
  ReciprocalGraph g(n);
  for (NodeId v = 1; v < n; ++v) g.add_edge(static_cast<NodeId>(rng.next() % v), v);
  return g;
}

std::vector<PacketSpec> random_zero_one_demand(const ReciprocalGraph& g, std::size_t want,
                                               SplitMix64& rng) {
  std::vector<PacketSpec> packets;
  std::set<std::pair<NodeId, NodeId>> used;
  std::size_t attempts = 0;
  while (packets.size() < want && attempts < 50 * (want + 1)) {
    ++attempts;
    const NodeId s = static_cast<NodeId>(rng.next() % g.node_count());
    const NodeId t = static_cast<NodeId>(rng.next() % g.node_count());
    if (s == t || !used.insert({s, t}).second) continue;
    packets.push_back({s, t, packets.size() + 1});
  }
  return packets;
}

// ---------------------------------------------------------------------------
// 1. Drop invariant: no live job behind schedule, over randomized greedy
//    runs against every adversary kind.

Outcome criterion_drop_invariant() {
  Outcome out;
  SplitMix64 rng(0xacce971);
  SchedulerParams sp;
  sp.c = 2;
  sp.knobs.k_override = 2;
  sp.knobs.reps_override = 2;
  sp.check_invariants = true;
  sp.record_events = false;
  std::uint64_t runs = 0, checks = 0, drops = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const MachineId machines = 5 + rng.next() % 2;
    const auto jobs = random_jobs(rng, 1 + rng.next() % 20, machines, 4);
    const auto domain = domain_of(jobs);
    sp.knobs.l_override = 1 + rng.next() % 2;

    AdversaryStrategy strategy;
    switch (trial % 4) {
      case 0: strategy.kind = AdversaryKind::none; break;
      case 1: {
        strategy.kind = AdversaryKind::scripted;
        PushScript pushes;  // legal by construction: jobs start at position 0
        for (const auto& j : jobs)
          if (rng.next() % 2) pushes[j.ind] = rng.next() % (j.seq.size() + 1);
        strategy.script[0] = std::move(pushes);
        break;
      }
      case 2:
        strategy.kind = AdversaryKind::random_push;
        strategy.rate = 0.2;
        strategy.seed = rng.next();
        break;
      case 3:
        strategy.kind = AdversaryKind::rush_to_hotspot;
        strategy.hotspot = static_cast<MachineId>(rng.next() % machines);
        break;
    }
    try {
      SimTrace trace = run_greedy_scheduler(jobs, domain, machines, sp, rng.next(),
                                            make_adversary(strategy));
      checks += trace.invariant_checks;
      drops += trace.drop_count;
      ++runs;
    } catch (const ContractViolation& e) {
      out.fail("violation in run " + std::to_string(trial) + ": " + e.what());
      return out;
    }
  }
  if (drops == 0) out.fail("no run ever dropped a bucket: the invariant went unexercised");
  out.note(std::to_string(runs) + " runs, " + std::to_string(checks) + " per-step checks, " +
           std::to_string(drops) + " eliminations, 0 violations");
  return out;
}

// ---------------------------------------------------------------------------
// 2. Equivalence of the stateless and greedy engines under a no-push
//    adversary: identical completion sets and steps.

Outcome criterion_equivalence() {
  Outcome out;
  SplitMix64 rng(0xacce972);
  SchedulerParams sp;
  sp.c = 2;
  sp.knobs.k_override = 2;
  sp.knobs.reps_override = 2;
  sp.record_events = false;
  for (int trial = 0; trial < 500; ++trial) {
    const MachineId machines = 3 + rng.next() % 3;
    const auto jobs = random_jobs(rng, 1 + rng.next() % 8, machines, 4);
    const auto domain = domain_of(jobs);
    sp.knobs.l_override = 1 + rng.next() % 2;
    const std::uint64_t seed = rng.next();
    const SimTrace stateless = run_stateless_scheduler(jobs, domain, machines, sp, seed);
    const SimTrace greedy = run_greedy_scheduler(jobs, domain, machines, sp, seed, nullptr);
    if (stateless.completions != greedy.completions) {
      out.fail("completion mismatch in trial " + std::to_string(trial));
      return out;
    }
  }
  out.note("500 instances, exact match");
  return out;
}

// ---------------------------------------------------------------------------
// 3. Oracle coupling, exhaustively over all L^|J| hash assignments:
//    a good verdict certifies >= ceil(|J|/2) completions within 2*L*l.

Outcome criterion_oracle_coupling() {
  Outcome out;
  // Every multiset of sequences over two machines with length <= 2, for
  // |J| in {2, 3, 4}: all tiny instance shapes up to machine relabeling.
  const std::vector<Sequence> shapes{{0}, {1}, {0, 0}, {1, 1}, {0, 1}, {1, 0}};
  std::vector<std::vector<JobSpec>> instances;
  for (std::size_t size = 2; size <= 4; ++size) {
    std::vector<std::size_t> choice(size, 0);
    while (true) {
      std::vector<JobSpec> jobs;
      for (std::size_t i = 0; i < size; ++i) jobs.push_back({i + 1, shapes[choice[i]]});
      instances.push_back(std::move(jobs));
      std::size_t i = size;
      while (i > 0 && choice[i - 1] == shapes.size() - 1) --i;
      if (i == 0) break;
      const std::size_t v = choice[i - 1] + 1;
      for (std::size_t j = i - 1; j < size; ++j) choice[j] = v;
    }
  }
  // A few wider-universe shapes on three machines.
  instances.push_back({{1, {0, 1}}, {2, {2, 1}}, {3, {1, 2}}, {4, {0, 2}}});
  SplitMix64 rng(0xacce973);
  for (int extra = 0; extra < 3; ++extra)
    instances.push_back(random_jobs(rng, 2 + rng.next() % 3, 3, 2));

  std::uint64_t certified = 0, bad_seen = 0, assignments = 0;
  for (const auto& jobs : instances) {
    MachineId machines = 0;
    for (const auto& j : jobs)
      for (MachineId m : j.seq) machines = std::max<MachineId>(machines, m + 1);
    for (std::uint64_t L : {2ull, 4ull, 8ull}) {
      if (L < dilation(jobs)) continue;  // the certifier needs L >= D(J)
      for (std::uint64_t l : {1ull, 2ull}) {
        std::vector<std::uint64_t> h(jobs.size(), 0);
        while (true) {
          ++assignments;
          const auto verdict = is_good_hash(jobs, h, L, l);
          if (verdict.verdict == HashVerdict::unknown) {
            out.fail("oracle budget exhausted on a tiny instance");
            return out;
          }
          if (verdict.verdict == HashVerdict::bad) ++bad_seen;
          if (verdict.verdict == HashVerdict::good) {
            JobShopEngine engine(jobs, machines);
            SimTrace trace;
            trace.record_events = false;
            engine.run_weak_call({L, l, false}, h, nullptr, trace);
            if (2 * engine.completed_count() < jobs.size()) {
              std::ostringstream why;
              why << "good verdict but only " << engine.completed_count() << "/" << jobs.size()
                  << " completed (L=" << L << ", l=" << l << ")";
              out.fail(why.str());
              return out;
            }
            ++certified;
          }
          std::size_t i = 0;
          while (i < h.size() && ++h[i] == L) h[i++] = 0;
          if (i == h.size()) break;
        }
      }
    }
  }
  out.note(std::to_string(instances.size()) + " instances, " + std::to_string(assignments) +
           " hash assignments, " + std::to_string(certified) + " good verdicts certified, " +
           std::to_string(bad_seen) + " bad, 0 counterexamples");
  return out;
}

// ---------------------------------------------------------------------------
// 4. Probability bound on the forced-collision fixture, plus the
//    exp(-|J| ln l / 8) bound at formula-default parameters.

Outcome criterion_probability_bound() {
  Outcome out;
  const std::vector<JobSpec> jobs{{1, {0}}, {2, {0}}};

  // Exact enumeration over all L^2 hash pairs at L = 8, l = 1.
  const std::uint64_t L = 8;
  std::uint64_t bad = 0;
  for (std::uint64_t h1 = 0; h1 < L; ++h1)
    for (std::uint64_t h2 = 0; h2 < L; ++h2)
      if (is_good_hash(jobs, std::vector<std::uint64_t>{h1, h2}, L, 1).verdict ==
          HashVerdict::bad)
        ++bad;
  const double exact = static_cast<double>(bad) / static_cast<double>(L * L);
  if (bad != L) out.fail("exact enumeration expected 8/64 collisions");

  const auto est = estimate_failure_probability(jobs, L, 1, 10000, 0xacce974);
  if (est.wilson_low > exact || est.wilson_high < exact) {
    std::ostringstream why;
    why << "exact rate " << exact << " outside Wilson interval [" << est.wilson_low << ", "
        << est.wilson_high << "]";
    out.fail(why.str());
  }

  // Formula-default small-step count at |M| = 32, c = b = 1: l = 419.
  // The analytic bound exp(-|J| ln l / 8) must dominate the observed rate.
  const auto params = derive_params(32, 1, 1);
  const auto at_formula = estimate_failure_probability(jobs, 4, params.l, 10000, 0xacce975);
  const double bound = std::exp(-2.0 * std::log(static_cast<double>(params.l)) / 8.0);
  const double sigma = std::sqrt(bound * (1.0 - bound) / 10000.0);
  if (at_formula.rate > bound + 3 * sigma) {
    std::ostringstream why;
    why << "observed " << at_formula.rate << " above bound " << bound << " + 3 sigma";
    out.fail(why.str());
  }
  std::ostringstream note;
  note << "collision fixture rate " << est.rate << " vs exact " << exact
       << "; formula-l rate " << at_formula.rate << " <= " << bound << " + 3s";
  out.note(note.str());
  return out;
}

// ---------------------------------------------------------------------------
// 5. Noisy quarter-guarantee on signal-plus-noise instances with seeds
//    certified good for the signal.

Outcome criterion_noisy_quarter() {
  Outcome out;
  std::uint64_t instances = 0, subsets_checked = 0;
  const std::uint64_t l = 1, k = 3;
  for (std::uint64_t signal_size : {4ull, 8ull}) {
    for (std::uint64_t beta : {2ull, 4ull, 8ull}) {
      for (std::uint64_t variant = 0; variant < 17; ++variant) {
        GenSpec spec;
        spec.kind = "signal-plus-noise";
        spec.jobs = signal_size;
        spec.beta = beta;
        spec.len = 2;
        spec.seed = 100 + variant;
        const auto files = gen_instance(spec);
        const auto& all_jobs = files.instance.jobs;
        const std::vector<JobSpec> signal(all_jobs.begin(), all_jobs.begin() + signal_size);
        const std::uint64_t T = congestion(signal) + dilation(signal);
        const std::uint64_t Lrun = next_pow2(T);

        // Certify: find a master seed whose sampled set has a member good
        // for the signal, and remember that member's index.
        std::uint64_t seed = 0;
        std::size_t good_member = 0;
        bool found = false;
        for (std::uint64_t attempt = 0; attempt < 64 && !found; ++attempt) {
          const std::uint64_t candidate = 1000 + 131 * variant + attempt;
          const HashSet hs = sample_hash_set(candidate, k, Lrun, 0);
          for (std::size_t m = 0; m < hs.size(); ++m)
            if (is_good_hash(signal, hs.members[m], l).verdict == HashVerdict::good) {
              seed = candidate;
              good_member = m;
              found = true;
              break;
            }
        }
        if (!found) {
          out.fail("no certified seed found for a signal instance");
          return out;
        }

        SchedulerParams sp;
        sp.c = 2;
        sp.knobs.l_override = l;
        sp.knobs.k_override = k;
        sp.beta = static_cast<double>(beta);
        sp.t_bound = T;
        sp.record_events = false;
        const SimTrace trace = run_noisy_scheduler(all_jobs, files.instance.domain,
                                                   files.instance.machines, sp, seed);

        // Completions within 2*L*l' steps of the certified call's end.
        const std::uint64_t l_scaled = 4 * beta * l;
        const std::uint64_t window = (good_member + 1) * 2 * Lrun * l_scaled;
        std::set<JobInd> done;
        for (const auto& [job, step] : trace.completions)
          if (step <= window) done.insert(job);

        // With T = C(S) + D(S) tight, the (beta, T)-good subsets are
        // exactly: all signal jobs except the first, plus one member of
        // the first job's copy group.
        std::vector<std::vector<JobInd>> good_subsets;
        std::vector<JobInd> base;
        for (std::uint64_t i = 1; i < signal_size; ++i) base.push_back(all_jobs[i].ind);
        for (const auto& job : all_jobs)
          if (job.seq == all_jobs[0].seq) {
            auto subset = base;
            subset.push_back(job.ind);
            good_subsets.push_back(std::move(subset));
          }
        // On the beta = 2, |S| = 4 combination, cross-check the closed-form
        // family against an exhaustive subset scan.
        if (variant == 0 && beta == 2 && signal_size == 4) {
          std::set<std::set<JobInd>> family;
          for (const auto& subset : good_subsets)
            family.insert(std::set<JobInd>(subset.begin(), subset.end()));
          for (std::uint32_t mask = 1; mask < (1u << all_jobs.size()); ++mask) {
            std::vector<JobSpec> members;
            std::set<JobInd> ids;
            for (std::size_t i = 0; i < all_jobs.size(); ++i)
              if (mask & (1u << i)) {
                members.push_back(all_jobs[i]);
                ids.insert(all_jobs[i].ind);
              }
            const bool good = beta * members.size() >= all_jobs.size() &&
                              congestion(members) + dilation(members) <= T;
            if (good != (family.count(ids) > 0)) {
              out.fail("closed-form good-subset family diverged from the exhaustive scan");
              return out;
            }
          }
        }
        for (const auto& subset : good_subsets) {
          std::vector<JobSpec> members;
          for (JobInd ind : subset) members.push_back(all_jobs[ind - 1]);
          const bool large = beta * subset.size() >= all_jobs.size();
          const bool cheap = congestion(members) + dilation(members) <= T;
          if (!large || !cheap) {
            out.fail("enumerated subset is not (beta,T)-good");
            return out;
          }
          std::size_t completed = 0;
          for (JobInd ind : subset) completed += done.count(ind);
          ++subsets_checked;
          if (4 * completed < subset.size()) {
            std::ostringstream why;
            why << "subset with " << completed << "/" << subset.size()
                << " completed (|S|=" << signal_size << ", beta=" << beta << ")";
            out.fail(why.str());
            return out;
          }
        }
        ++instances;
      }
    }
  }
  out.note(std::to_string(instances) + " instances, " + std::to_string(subsets_checked) +
           " good subsets, 0 failures");
  return out;
}

// ---------------------------------------------------------------------------
// 6. Return semantics: endpoints after 4*L*l'*k steps, and the forward
//    phase matching the weak subroutine on the edge-machine reduction.

Outcome criterion_return_semantics() {
  Outcome out;
  SplitMix64 rng(0xacce976);
  std::uint64_t runs = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const NodeId n = 4 + rng.next() % 13;
    const ReciprocalGraph g = random_tree(n, rng);
    const PathSet ps = build_tree_path_set(g);
    const auto packets = random_zero_one_demand(g, 1 + rng.next() % 6, rng);
    if (packets.empty()) continue;

    std::vector<std::optional<Path>> paths;
    std::vector<JobSpec> jobs;
    for (const auto& x : packets) {
      const Path& p = ps.find(x.source, x.sink)->front();
      paths.push_back(p);
      jobs.push_back({x.ind, path_to_sequence(p)});
    }
    std::vector<JobSpec> reduction = jobs;
    const std::uint64_t T = congestion(jobs) + dilation(jobs);
    const std::uint64_t L = next_pow2(T);
    const std::uint64_t l_scaled = 8;  // beta = 2 alpha = 2, l = 1
    const std::uint64_t k = 2;

    RoutingEngine routing(g, packets);
    routing.assign_paths(paths);
    JobShopEngine scheduling(reduction, g.edge_count());
    SimTrace routing_trace, scheduling_trace;
    routing_trace.record_events = false;
    scheduling_trace.record_events = false;

    for (std::uint64_t j = 0; j < k; ++j) {
      std::vector<std::uint64_t> h;
      const HashFamily member(derive_subseed(0xacce976 + trial, 0, j), L);
      for (const auto& x : packets)
        h.push_back(member.hash_path(*paths[x.ind - 1]));
      routing.run_weak_return_call(L, l_scaled, h, routing_trace);
      scheduling.run_weak_call({L, l_scaled, false}, h, nullptr, scheduling_trace);
      for (std::size_t i = 0; i < packets.size(); ++i)
        if (static_cast<bool>(routing.delivered()[i]) != scheduling.job_complete(i)) {
          out.fail("forward-phase delivered set diverged from the reduction");
          return out;
        }
    }
    if (routing_trace.total_steps != k * 4 * L * l_scaled) {
      out.fail("step accounting diverged");
      return out;
    }
    for (std::size_t i = 0; i < packets.size(); ++i) {
      const NodeId at = routing.positions()[i];
      const NodeId want = routing.delivered()[i] ? packets[i].sink : packets[i].source;
      if (at != want) {
        out.fail("packet finished away from its path endpoint");
        return out;
      }
    }
    ++runs;
  }
  out.note(std::to_string(runs) + " runs, endpoints and reduction matches exact");
  return out;
}

// ---------------------------------------------------------------------------
// 7 and 8. The tree sweep: full delivery within the frozen budget curve,
// and baseline comparisons on the same instances.

// Frozen regression budget for completion_step / (C(S) + D(S)) on trees:
// b(n) = kBudgetA * log2(n)^3. Calibrated once over the fixed sweep below
// (measured max ratio / log2(n)^3 = 0.467) and frozen with headroom.
constexpr double kBudgetA = 1.0;

struct SweepRow {
  NodeId n = 0;
  std::size_t packets = 0;
  std::uint64_t c_plus_d = 0;
  std::uint64_t c_times_d = 0;
  std::uint64_t router_completion = 0;
  std::uint64_t fifo_completion = 0;
  std::uint64_t random_delay_completion = 0;
  double ratio = 0.0;
  bool delivered_all = false;
};

std::vector<SweepRow> run_tree_sweep() {
  std::vector<SweepRow> rows;
  SplitMix64 rng(0xacce977);
  RouterParams rp;
  rp.c = 2;
  rp.knobs.l_override = 1;
  rp.knobs.k_override = 1;
  rp.router_reps_override = 2;
  rp.l_sweep_max = 1 << 16;
  rp.record_events = false;

  for (NodeId n : {8, 16, 32, 48, 64}) {
    for (int variant = 0; variant < 6; ++variant) {
      const ReciprocalGraph g = random_tree(n, rng);
      const PathSet ps = build_tree_path_set(g);
      const std::size_t want = n / 2 + rng.next() % (3 * std::size_t{n} / 2);
      const auto packets = random_zero_one_demand(g, want, rng);
      if (packets.empty()) continue;

      std::vector<JobSpec> jobs;
      for (const auto& x : packets)
        jobs.push_back({x.ind, path_to_sequence(ps.find(x.source, x.sink)->front())});
      const std::uint64_t c = congestion(jobs);
      const std::uint64_t d = dilation(jobs);

      SweepRow row;
      row.n = n;
      row.packets = packets.size();
      row.c_plus_d = c + d;
      row.c_times_d = c * d;

      const RouterResult rr = semi_obl_router(g, packets, ps, rng.next(), rp);
      row.delivered_all = rr.delivered_count() == packets.size();
      row.router_completion = rr.trace.completion_step();
      row.ratio = static_cast<double>(row.router_completion) / static_cast<double>(c + d);

      SimTrace fifo = fifo_greedy_baseline(jobs, g.edge_count());
      row.fifo_completion = fifo.completion_step();
      SimTrace delay = random_delay_baseline(jobs, g.edge_count(), next_pow2(c + d), 2,
                                             rng.next());
      row.random_delay_completion = delay.completion_step();
      rows.push_back(row);
    }
  }
  return rows;
}

Outcome criterion_tree_routing(const std::vector<SweepRow>& rows) {
  Outcome out;
  double worst_ratio = 0.0;
  for (const auto& row : rows) {
    if (!row.delivered_all) {
      out.fail("undelivered packets on an n=" + std::to_string(row.n) + " tree");
      return out;
    }
    const double logn = std::log2(static_cast<double>(row.n));
    const double budget = kBudgetA * logn * logn * logn;
    worst_ratio = std::max(worst_ratio, row.ratio / (logn * logn * logn));
    if (row.ratio > budget) {
      std::ostringstream why;
      why << "ratio " << row.ratio << " above budget " << budget << " at n=" << row.n;
      out.fail(why.str());
      return out;
    }
  }
  std::ostringstream note;
  note << rows.size() << " instances, 100% delivery, max ratio/log^3 = " << worst_ratio
       << " (budget constant " << kBudgetA << ")";
  out.note(note.str());
  return out;
}

Outcome criterion_baseline_dominance(const std::vector<SweepRow>& rows) {
  Outcome out;
  double worst_delay_ratio = 0.0;
  std::size_t router_over = 0;
  std::string example;
  for (const auto& row : rows) {
    if (row.fifo_completion > row.c_times_d) {
      out.fail("work-conserving baseline exceeded its C*D bound");
      return out;
    }
    if (row.router_completion > row.c_times_d) {
      ++router_over;
      if (example.empty()) {
        std::ostringstream why;
        why << "e.g. n=" << row.n << ": router " << row.router_completion << " vs C*D "
            << row.c_times_d << " (C+D=" << row.c_plus_d << ")";
        example = why.str();
      }
    }
    worst_delay_ratio =
        std::max(worst_delay_ratio, static_cast<double>(row.random_delay_completion) /
                                        static_cast<double>(row.c_plus_d));
  }
  if (router_over > 0) {
    // The router cannot move a packet faster than one edge per large step
    // of l' = 8*l small steps, so its completion is at least ~8*(C+D) on
    // these trees while C*D stays below that floor; the asserted direction
    // only flips once C and D are both large, beyond workbench scale.
    std::ostringstream why;
    why << "router completion exceeded the C*D bound on " << router_over << "/" << rows.size()
        << " instances (" << example << "); pacing floor 4*L*l' with l' = 8 exceeds C*D"
        << " whenever C*D < ~8*(C+D), which holds on every desk-scale tree instance";
    out.fail(why.str());
  }
  std::ostringstream note;
  note << "work-conserving baseline within C*D on all " << rows.size()
       << " instances; random-delay completion <= " << worst_delay_ratio
       << " * (C+D) (reported, not asserted)";
  out.note(note.str());
  return out;
}

// ---------------------------------------------------------------------------
// 9. Determinism: byte-identical reports (modulo timing) across two
//    processes and across thread-count settings, for 20 fixed configs.

std::string normalized_report(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) return "<missing>";
  json report;
  in >> report;
  report.erase("wall_time_ms");
  if (report.contains("config") && report["config"].contains("threads"))
    report["config"].erase("threads");
  return report.dump(2);
}

Outcome criterion_determinism() {
  Outcome out;
  const auto dir = std::filesystem::temp_directory_path() / "lps_acceptance_det";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string cli = LPS_CLI_PATH;

  // Fixtures.
  for (const auto& [name, kind, n, jobs, seed] :
       std::vector<std::tuple<std::string, std::string, int, int, int>>{
           {"sched_a", "random-paths", 8, 5, 3},
           {"sched_b", "hotspot", 5, 6, 4},
           {"noise_a", "signal-plus-noise", 4, 4, 5},
           {"tree_a", "tree-demand", 12, 6, 6},
           {"tree_b", "tree-demand", 16, 8, 7}}) {
    GenSpec spec;
    spec.kind = kind;
    spec.n = n;
    spec.jobs = jobs;
    spec.seed = seed;
    if (kind == "signal-plus-noise") spec.beta = 4;
    write_generated(gen_instance(spec), (dir / name).string());
  }

  std::vector<json> configs;
  for (int i = 0; i < 5; ++i) {
    json c;
    c["mode"] = "schedule";
    c["instance"] = (dir / (i % 2 ? "sched_b" : "sched_a") / "instance.json").string();
    c["params"] = {{"c", 2}, {"knobs", {{"l", 1 + i % 2}, {"k", 2}, {"reps", 2}}}};
    c["master_seed"] = 10 + i;
    configs.push_back(c);
  }
  for (int i = 0; i < 4; ++i) {
    json c;
    c["mode"] = "schedule-greedy";
    c["instance"] = (dir / "sched_a" / "instance.json").string();
    c["params"] = {{"c", 2}, {"knobs", {{"l", 1}, {"k", 2}, {"reps", 2}}}};
    c["adversary"] =
        i % 2 ? json{{"kind", "random-push"}, {"rate", 0.2}, {"seed", 7 + i}}
              : json{{"kind", "rush-to-hotspot"}, {"machine", 0}};
    c["master_seed"] = 20 + i;
    configs.push_back(c);
  }
  for (int i = 0; i < 3; ++i) {
    json c;
    c["mode"] = "schedule-noisy";
    c["instance"] = (dir / "noise_a" / "instance.json").string();
    c["params"] = {{"c", 2},
                   {"beta", 4.0},
                   {"T", 3},
                   {"knobs", {{"l", 1}, {"k", 2}}}};
    c["master_seed"] = 30 + i;
    configs.push_back(c);
  }
  for (int i = 0; i < 4; ++i) {
    json c;
    c["mode"] = "route";
    c["graph"] = (dir / (i % 2 ? "tree_b" : "tree_a") / "graph.json").string();
    c["demand"] = (dir / (i % 2 ? "tree_b" : "tree_a") / "demand.json").string();
    c["path_set_kind"] = "tree";
    c["router_kind"] = i < 2 ? "direct" : "wrapper";
    c["params"] = {{"c", 2}, {"knobs", {{"l", 1}, {"k", 1}}}};
    c["router_reps"] = 2;
    c["router_l_sweep_max"] = 4096;
    c["master_seed"] = 40 + i;
    configs.push_back(c);
  }
  for (int i = 0; i < 2; ++i) {
    json c;
    c["mode"] = "estimate";
    c["instance"] = (dir / "sched_b" / "instance.json").string();
    c["estimate"] = {{"L", 8}, {"l", 1}};
    c["trials"] = 4000;
    c["threads"] = i == 0 ? 1 : 4;  // thread-count settings must agree
    c["master_seed"] = 50;
    configs.push_back(c);
  }
  {
    json c;
    c["mode"] = "verify-hash";
    c["instance"] = (dir / "sched_a" / "instance.json").string();
    c["estimate"] = {{"L", 8}, {"l", 1}};
    c["params"] = {{"c", 2}, {"knobs", {{"k", 3}}}};
    c["master_seed"] = 60;
    configs.push_back(c);
    json cc;
    cc["mode"] = "certify-seed";
    cc["instance"] = (dir / "sched_b" / "instance.json").string();
    cc["params"] = {{"c", 2}, {"knobs", {{"l", 1}, {"k", 3}}}};
    cc["certify"] = {{"s_max", 2}, {"search_budget", 32}};
    cc["trials"] = 500;
    cc["master_seed"] = 70;
    configs.push_back(cc);
  }

  if (configs.size() != 20) {
    out.fail("expected 20 fixed configs, have " + std::to_string(configs.size()));
    return out;
  }

  std::string first_estimate_report;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto cfg_file = dir / ("config_" + std::to_string(i) + ".json");
    std::ofstream(cfg_file) << configs[i].dump(2);
    const auto out_a = dir / ("out_a_" + std::to_string(i));
    const auto out_b = dir / ("out_b_" + std::to_string(i));
    for (const auto& out_dir : {out_a, out_b}) {
      std::ostringstream cmd;
      cmd << "LPS_OUT_DIR=" << out_dir << " " << cli << " run --config " << cfg_file
          << " > /dev/null 2>&1";
      if (std::system(cmd.str().c_str()) != 0) {
        out.fail("CLI run failed for config " + std::to_string(i));
        return out;
      }
    }
    const std::string a = normalized_report(out_a / "report.json");
    const std::string b = normalized_report(out_b / "report.json");
    if (a != b || a == "<missing>") {
      out.fail("report mismatch across processes for config " + std::to_string(i));
      return out;
    }
    // The two estimate configs differ only in thread count.
    if (configs[i]["mode"] == "estimate") {
      if (first_estimate_report.empty())
        first_estimate_report = a;
      else if (first_estimate_report != a) {
        out.fail("estimate reports differ across thread counts");
        return out;
      }
    }
  }
  out.note("20 configs, two processes each, thread counts 1 and 4, byte-identical");
  std::filesystem::remove_all(dir);
  return out;
}

}  // namespace

int main() {
  using Criterion = std::pair<std::string, std::function<Outcome()>>;
  const auto sweep = run_tree_sweep();

  const std::vector<Criterion> criteria{
      {"1. drop invariant (live jobs never behind schedule)", criterion_drop_invariant},
      {"2. stateless/greedy equivalence under no-push adversaries", criterion_equivalence},
      {"3. oracle-engine coupling over exhaustive hash assignments", criterion_oracle_coupling},
      {"4. not-good probability matches exact rate and analytic bound", criterion_probability_bound},
      {"5. noisy quarter-guarantee on certified signal-plus-noise", criterion_noisy_quarter},
      {"6. return semantics and forward-phase reduction match", criterion_return_semantics},
      {"7. tree routing delivers fully within the budget curve",
       [&] { return criterion_tree_routing(sweep); }},
      {"8. baseline dominance on the tree sweep",
       [&] { return criterion_baseline_dominance(sweep); }},
      {"9. deterministic reports across processes and threads", criterion_determinism},
  };

  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto started = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
    std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << name;
    if (!outcome.detail.empty()) std::cout << " -- " << outcome.detail;
    std::cout << " (" << secs.count() << "s)\n";
    if (!outcome.pass) ++failures;
  }
  return failures;
}
