#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "lps/common.hpp"
#include "lps/core.hpp"
#include "lps/hashing.hpp"
#include "lps/trace.hpp"

// The simulation engine for the job-shop model and the scheduling
// algorithms built on the weak subroutines: per machine and step, gather
// the on-schedule bucket Q for the current large step T = floor(t / l),
// work on one job when 0 < |Q| <= l, clear the bucket at large-step
// boundaries when |Q| > l.

namespace lps {

enum class TieBreak { lowest_ind, highest_ind };

// Read-only snapshot handed to greedy adversaries before each step.
struct AdversaryView {
  const std::vector<JobSpec>& jobs;
  const std::vector<std::size_t>& positions;
  const std::vector<std::uint8_t>& states;
};

// Per-step pushes: job identifier -> non-negative advance.
using PushScript = std::map<JobInd, std::uint64_t>;
using AdversaryFn = std::function<PushScript(const AdversaryView&, std::uint64_t step)>;

struct WeakCallParams {
  std::uint64_t L = 4;
  std::uint64_t l = 1;  // small steps per large step; also the bucket threshold
  bool greedy = false;
  TieBreak tie_break = TieBreak::lowest_ind;
  bool check_invariants = true;
};

// Holds job positions and the 1-bit states across weak subroutine calls;
// the full schedulers re-run the subroutine on whatever positions remain.
class JobShopEngine {
 public:
  JobShopEngine(std::vector<JobSpec> jobs, std::uint64_t machine_count,
                std::vector<std::size_t> initial_positions = {})
      : jobs_(std::move(jobs)), queues_(machine_count) {
    pos_.resize(jobs_.size(), 0);
    state_.resize(jobs_.size(), 0);
    if (!initial_positions.empty()) {
      require(initial_positions.size() == jobs_.size(),
              "initial positions must cover every job");
      for (std::size_t i = 0; i < jobs_.size(); ++i) {
        require(initial_positions[i] <= jobs_[i].seq.size(),
                "initial position past end of sequence");
        pos_[i] = initial_positions[i];
      }
    }
    for (std::size_t i = 0; i < jobs_.size(); ++i) {
      by_ind_.emplace(jobs_[i].ind, i);
      if (pos_[i] < jobs_[i].seq.size())
        queues_[jobs_[i].seq[pos_[i]]].push_back(static_cast<std::uint32_t>(i));
      else
        ++completed_;
    }
  }

  const std::vector<JobSpec>& jobs() const { return jobs_; }
  const std::vector<std::size_t>& positions() const { return pos_; }
  const std::vector<std::uint8_t>& states() const { return state_; }
  std::size_t completed_count() const { return completed_; }
  bool job_complete(std::size_t i) const { return pos_[i] == jobs_[i].seq.size(); }

  // One weak subroutine call: exactly 2*L*l time steps appended to `trace`.
  // `h_values[i]` is h(job i) in [0, L); `adversary` may be empty.
  void run_weak_call(const WeakCallParams& wp, const std::vector<std::uint64_t>& h_values,
                     const AdversaryFn& adversary, SimTrace& trace) {
    require(h_values.size() == jobs_.size(), "one hash value per job");
    const std::uint64_t call_steps = 2 * wp.L * wp.l;
    std::vector<std::uint32_t> bucket;
    std::vector<std::pair<MachineId, std::uint32_t>> work;

    for (std::uint64_t t = 0; t < call_steps; ++t) {
      const std::uint64_t g = trace.total_steps;
      const std::uint64_t T = t / wp.l;
      const bool boundary = (t % wp.l == 0);

      if (boundary && can_skip_rest_of_call(wp, h_values, adversary, T, t)) {
        trace.total_steps += call_steps - t;
        return;
      }

      if (adversary) {
        AdversaryView view{jobs_, pos_, state_};
        apply_push_script(adversary(view, g), g, trace);
      }
      if (wp.greedy && t == 0)
        for (std::size_t i = 0; i < jobs_.size(); ++i)
          if (!job_complete(i)) state_[i] = 0;

      if (wp.greedy && wp.check_invariants) check_live_not_behind(h_values, T, g, trace);

      work.clear();
      for (MachineId m = 0; m < queues_.size(); ++m) {
        if (queues_[m].empty()) continue;
        bucket.clear();
        for (std::uint32_t i : queues_[m]) {
          if (wp.greedy && state_[i] != 0) continue;
          if (h_values[i] + pos_[i] == T) bucket.push_back(i);
        }
        if (boundary && bucket.size() > wp.l) {
          std::sort(bucket.begin(), bucket.end(),
                    [&](std::uint32_t a, std::uint32_t b) { return jobs_[a].ind < jobs_[b].ind; });
          for (std::uint32_t i : bucket) {
            if (wp.greedy) state_[i] = 1;
            trace.add({g, m, wp.greedy ? EventKind::eliminate : EventKind::drop,
                       jobs_[i].ind, static_cast<std::uint32_t>(pos_[i])});
          }
        } else if (!bucket.empty() && bucket.size() <= wp.l) {
          work.emplace_back(m, select(bucket, wp.tie_break));
        }
      }

      // All selections act on the step's initial queue state.
      for (auto [m, i] : work) {
        trace.add({g, m, EventKind::work, jobs_[i].ind, static_cast<std::uint32_t>(pos_[i])});
        advance(i, 1, g + 1, trace);
      }
      trace.total_steps = g + 1;
    }
    if (wp.greedy && wp.check_invariants)
      check_live_not_behind(h_values, 2 * wp.L, trace.total_steps, trace);
  }

 private:
  std::uint32_t select(const std::vector<std::uint32_t>& bucket, TieBreak tb) const {
    std::uint32_t best = bucket.front();
    for (std::uint32_t i : bucket) {
      const bool better = tb == TieBreak::lowest_ind ? jobs_[i].ind < jobs_[best].ind
                                                     : jobs_[i].ind > jobs_[best].ind;
      if (better) best = i;
    }
    return best;
  }

  // A live job is never behind schedule.
  void check_live_not_behind(const std::vector<std::uint64_t>& h_values, std::uint64_t T,
                             std::uint64_t g, SimTrace& trace) {
    for (std::size_t i = 0; i < jobs_.size(); ++i) {
      if (job_complete(i) || state_[i] != 0) continue;
      ++trace.invariant_checks;
      if (h_values[i] + pos_[i] < T)
        throw ContractViolation("live job " + std::to_string(jobs_[i].ind) +
                                " behind schedule at step " + std::to_string(g));
    }
  }

  // Nothing can happen for the rest of the call: every job is complete, or
  // (without an adversary) every incomplete job can never be on schedule
  // again. Only consulted at large-step boundaries.
  bool can_skip_rest_of_call(const WeakCallParams& wp, const std::vector<std::uint64_t>& h_values,
                             const AdversaryFn& adversary, std::uint64_t T,
                             std::uint64_t t) const {
    if (completed_ == jobs_.size() && !adversary) return true;
    if (adversary) return false;
    // State bits are stale until the reset inside step 0.
    if (wp.greedy && t == 0) return false;
    for (std::size_t i = 0; i < jobs_.size(); ++i) {
      if (job_complete(i)) continue;
      if (wp.greedy && state_[i] != 0) continue;
      if (h_values[i] + pos_[i] >= T) return false;
      if (wp.greedy) return false;  // live job behind schedule: let the checker fire
    }
    return true;
  }

  void apply_push_script(const PushScript& script, std::uint64_t g, SimTrace& trace) {
    for (const auto& [ind, amount] : script) {
      auto it = by_ind_.find(ind);
      if (it == by_ind_.end())
        throw ContractViolation("push for unknown job " + std::to_string(ind));
      if (amount == 0) continue;
      const std::size_t i = it->second;
      if (pos_[i] + amount > jobs_[i].seq.size())
        throw ContractViolation("push moves job " + std::to_string(ind) +
                                " past end of sequence");
      trace.add({g, next_machine(i), EventKind::push, ind,
                 static_cast<std::uint32_t>(pos_[i] + amount)});
      advance(i, amount, g, trace);
    }
  }

  MachineId next_machine(std::size_t i) const {
    return job_complete(i) ? 0 : jobs_[i].seq[pos_[i]];
  }

  void advance(std::size_t i, std::uint64_t by, std::uint64_t completion_step,
               SimTrace& trace) {
    const MachineId old_m = jobs_[i].seq[pos_[i]];
    auto& q = queues_[old_m];
    q.erase(std::find(q.begin(), q.end(), static_cast<std::uint32_t>(i)));
    pos_[i] += by;
    if (job_complete(i)) {
      ++completed_;
      trace.add({completion_step, old_m, EventKind::complete, jobs_[i].ind,
                 static_cast<std::uint32_t>(pos_[i])});
    } else {
      queues_[jobs_[i].seq[pos_[i]]].push_back(static_cast<std::uint32_t>(i));
    }
  }

  std::vector<JobSpec> jobs_;
  std::vector<std::size_t> pos_;
  std::vector<std::uint8_t> state_;
  std::vector<std::vector<std::uint32_t>> queues_;  // machine -> job indices
  std::unordered_map<JobInd, std::size_t> by_ind_;
  std::size_t completed_ = 0;
};

enum class RepsRule { proof, pseudocode };

struct SchedulerParams {
  unsigned c = 2;
  unsigned b = 1;
  ScaleKnobs knobs;
  TieBreak tie_break = TieBreak::lowest_ind;
  RepsRule reps_rule = RepsRule::proof;
  bool check_invariants = true;
  bool record_events = true;
  // Noisy scheduling only.
  double beta = 0.0;
  std::uint64_t t_bound = 0;
};

// Bucket threshold and pacing for noisy runs: l' = ceil(4 * beta * l).
inline std::uint64_t noisy_scaled_l(double beta, std::uint64_t l) {
  require(beta > 1.0, "noise level must exceed 1");
  return static_cast<std::uint64_t>(std::ceil(4.0 * beta * static_cast<double>(l)));
}

// Number of half-completions iterated per scale. The pseudocode uses
// c*ceil(log2 |M|) + 1; its correctness argument uses the larger
// c*ceil(log2 |M|^c) + 1, which is the default here.
inline std::uint64_t scheduler_repetitions(std::uint64_t m_size, unsigned c, RepsRule rule) {
  if (rule == RepsRule::pseudocode) return c * std::uint64_t{ceil_log2(m_size)} + 1;
  return c * std::uint64_t{ceil_log2(pow_saturating(m_size, c))} + 1;
}

// Scales are indexed from L = 4 so that hash-set draws are reproducible
// from (seed, L) alone.
inline std::uint64_t scale_index_for(std::uint64_t L) { return ceil_log2(L) - 2; }

namespace detail {

// Jobs whose starting position is already the end of their sequence are
// complete at step 0.
inline void record_initial_completions(const JobShopEngine& engine, SimTrace& trace) {
  for (std::size_t i = 0; i < engine.jobs().size(); ++i)
    if (engine.job_complete(i))
      trace.add({0, 0, EventKind::complete, engine.jobs()[i].ind,
                 static_cast<std::uint32_t>(engine.jobs()[i].seq.size())});
}

inline void validate_or_throw(const std::vector<JobSpec>& jobs, const DomainSet& domain,
                              std::uint64_t machine_count, unsigned c) {
  auto report = validate_instance(jobs, domain, machine_count, c);
  if (!report.ok()) {
    std::string msg = "instance rejected:";
    for (const auto& v : report.violations) msg += "\n  " + v;
    throw ValidationError(msg);
  }
}

template <typename RunScale>
void doubling_sweep(std::uint64_t m_size, const SchedulerParams& sp, RunScale&& run_scale) {
  std::uint64_t l_max = next_pow2(2 * pow_saturating(m_size, sp.c));
  if (sp.knobs.l_max_override) l_max = std::min(l_max, next_pow2(*sp.knobs.l_max_override));
  l_max = std::max<std::uint64_t>(l_max, 4);  // the scale set starts at L = 4
  for (std::uint64_t L = 4; L <= l_max; L *= 2) run_scale(L);
}

}  // namespace detail

// Full stateless scheduling: doubling L, per scale a fresh hash set, the
// weak subroutine iterated reps * k times.
inline SimTrace run_stateless_scheduler(const std::vector<JobSpec>& jobs,
                                        const DomainSet& domain, std::uint64_t machine_count,
                                        const SchedulerParams& sp, std::uint64_t master_seed,
                                        std::vector<std::size_t> initial_positions = {}) {
  detail::validate_or_throw(jobs, domain, machine_count, sp.c);
  const DerivedParams dp = derive_params(std::max<std::uint64_t>(machine_count, 2), sp.c,
                                         sp.b, sp.knobs);
  const std::uint64_t reps = sp.knobs.reps_override
                                 ? *sp.knobs.reps_override
                                 : scheduler_repetitions(machine_count, sp.c, sp.reps_rule);
  JobShopEngine engine(jobs, machine_count, std::move(initial_positions));
  SimTrace trace;
  trace.record_events = sp.record_events;
  detail::record_initial_completions(engine, trace);
  WeakCallParams wp{4, dp.l, false, sp.tie_break, sp.check_invariants};

  detail::doubling_sweep(machine_count, sp, [&](std::uint64_t L) {
    const HashSet hs = sample_hash_set(master_seed, dp.k, L, scale_index_for(L));
    std::vector<std::vector<std::uint64_t>> h_values(hs.size());
    for (std::size_t j = 0; j < hs.size(); ++j) {
      h_values[j].reserve(jobs.size());
      for (const auto& job : engine.jobs()) h_values[j].push_back(hs.members[j].hash_job(job));
    }
    wp.L = L;
    for (std::uint64_t rep = 0; rep < reps; ++rep)
      for (std::size_t j = 0; j < hs.size(); ++j)
        engine.run_weak_call(wp, h_values[j], nullptr, trace);
  });
  return trace;
}

// Greedy-enabled variant: 1-bit states, bucket clears become eliminations,
// and an adversary may advance jobs before every step.
inline SimTrace run_greedy_scheduler(const std::vector<JobSpec>& jobs, const DomainSet& domain,
                                     std::uint64_t machine_count, const SchedulerParams& sp,
                                     std::uint64_t master_seed, const AdversaryFn& adversary,
                                     std::vector<std::size_t> initial_positions = {}) {
  detail::validate_or_throw(jobs, domain, machine_count, sp.c);
  const DerivedParams dp = derive_params(std::max<std::uint64_t>(machine_count, 2), sp.c,
                                         sp.b, sp.knobs);
  const std::uint64_t reps = sp.knobs.reps_override
                                 ? *sp.knobs.reps_override
                                 : scheduler_repetitions(machine_count, sp.c, sp.reps_rule);
  JobShopEngine engine(jobs, machine_count, std::move(initial_positions));
  SimTrace trace;
  trace.record_events = sp.record_events;
  detail::record_initial_completions(engine, trace);
  WeakCallParams wp{4, dp.l, true, sp.tie_break, sp.check_invariants};

  detail::doubling_sweep(machine_count, sp, [&](std::uint64_t L) {
    const HashSet hs = sample_hash_set(master_seed, dp.k, L, scale_index_for(L));
    std::vector<std::vector<std::uint64_t>> h_values(hs.size());
    for (std::size_t j = 0; j < hs.size(); ++j) {
      h_values[j].reserve(jobs.size());
      for (const auto& job : engine.jobs()) h_values[j].push_back(hs.members[j].hash_job(job));
    }
    wp.L = L;
    for (std::uint64_t rep = 0; rep < reps; ++rep)
      for (std::size_t j = 0; j < hs.size(); ++j)
        engine.run_weak_call(wp, h_values[j], adversary, trace);
  });
  return trace;
}

// Noisy scheduling: a single scale L = next power of two at least T, the
// bucket threshold scaled to l' = 4*beta*l, k weak calls back to back.
inline SimTrace run_noisy_scheduler(const std::vector<JobSpec>& jobs, const DomainSet& domain,
                                    std::uint64_t machine_count, const SchedulerParams& sp,
                                    std::uint64_t master_seed,
                                    std::vector<std::size_t> initial_positions = {}) {
  require(sp.beta > 1.0, "noisy scheduling needs beta > 1");
  require(sp.t_bound >= 1, "noisy scheduling needs T >= 1");
  detail::validate_or_throw(jobs, domain, machine_count, sp.c);
  const DerivedParams dp = derive_params(std::max<std::uint64_t>(machine_count, 2), sp.c,
                                         sp.b, sp.knobs);
  const std::uint64_t L = next_pow2(sp.t_bound);
  const std::uint64_t l_scaled = noisy_scaled_l(sp.beta, dp.l);

  JobShopEngine engine(jobs, machine_count, std::move(initial_positions));
  SimTrace trace;
  trace.record_events = sp.record_events;
  detail::record_initial_completions(engine, trace);
  WeakCallParams wp{L, l_scaled, false, sp.tie_break, sp.check_invariants};

  const HashSet hs = sample_hash_set(master_seed, dp.k, L, 0);
  std::vector<std::uint64_t> h_values(jobs.size());
  for (std::size_t j = 0; j < hs.size(); ++j) {
    for (std::size_t i = 0; i < engine.jobs().size(); ++i)
      h_values[i] = hs.members[j].hash_job(engine.jobs()[i]);
    engine.run_weak_call(wp, h_values, nullptr, trace);
  }
  return trace;
}

}  // namespace lps
