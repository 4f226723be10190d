#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lps/common.hpp"
#include "lps/core.hpp"
#include "lps/hashing.hpp"
#include "lps/schedulers.hpp"

// Greedy-push adversaries and the adaptive job-set adversary that picks a
// hard instance after seeing the random bits.

namespace lps {

enum class AdversaryKind { none, scripted, random_push, rush_to_hotspot };

struct AdversaryStrategy {
  AdversaryKind kind = AdversaryKind::none;
  std::map<std::uint64_t, PushScript> script;  // scripted: step -> pushes
  double rate = 0.0;                           // random_push: per-job probability
  std::uint64_t seed = 0;                      // random_push
  MachineId hotspot = 0;                       // rush_to_hotspot
};

inline const char* to_string(AdversaryKind k) {
  switch (k) {
    case AdversaryKind::none: return "none";
    case AdversaryKind::scripted: return "scripted";
    case AdversaryKind::random_push: return "random-push";
    case AdversaryKind::rush_to_hotspot: return "rush-to-hotspot";
  }
  return "?";
}

// Computes a legal push script for one step. Scripted entries are checked
// against the view; an illegal entry names the offending job.
inline PushScript apply_pushes(const AdversaryView& view, const AdversaryStrategy& strategy,
                               std::uint64_t step) {
  PushScript out;
  switch (strategy.kind) {
    case AdversaryKind::none:
      break;
    case AdversaryKind::scripted: {
      auto it = strategy.script.find(step);
      if (it == strategy.script.end()) break;
      for (const auto& [ind, amount] : it->second) {
        bool found = false;
        for (std::size_t i = 0; i < view.jobs.size(); ++i) {
          if (view.jobs[i].ind != ind) continue;
          found = true;
          if (view.positions[i] + amount > view.jobs[i].seq.size())
            throw ContractViolation("scripted push at step " + std::to_string(step) +
                                    " moves job " + std::to_string(ind) +
                                    " past end of sequence");
        }
        if (!found)
          throw ContractViolation("scripted push at step " + std::to_string(step) +
                                  " names unknown job " + std::to_string(ind));
        if (amount > 0) out[ind] = amount;
      }
      break;
    }
    case AdversaryKind::random_push: {
      if (strategy.rate <= 0.0) break;
      SplitMix64 rng(derive_subseed(strategy.seed, step, 0));
      for (std::size_t i = 0; i < view.jobs.size(); ++i) {
        const std::size_t len = view.jobs[i].seq.size();
        if (view.positions[i] >= len) continue;
        const double u = static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
        if (u < strategy.rate) out[view.jobs[i].ind] = 1;
      }
      break;
    }
    case AdversaryKind::rush_to_hotspot: {
      for (std::size_t i = 0; i < view.jobs.size(); ++i) {
        const auto& seq = view.jobs[i].seq;
        for (std::size_t p = view.positions[i]; p < seq.size(); ++p) {
          if (seq[p] == strategy.hotspot) {
            if (p > view.positions[i]) out[view.jobs[i].ind] = p - view.positions[i];
            break;
          }
        }
      }
      break;
    }
  }
  return out;
}

inline AdversaryFn make_adversary(AdversaryStrategy strategy) {
  if (strategy.kind == AdversaryKind::none) return nullptr;
  return [strategy = std::move(strategy)](const AdversaryView& view, std::uint64_t step) {
    return apply_pushes(view, strategy, step);
  };
}

struct WorstJobSetResult {
  std::vector<JobSpec> jobs;
  double completed_fraction = 1.0;
  bool exhaustive = false;
  std::uint64_t evaluations = 0;
  std::vector<std::string> search_trace;
};

namespace detail {

// Fraction completed after running the weak stateless subroutine once per
// hash set member, positions persisting between calls.
inline double weak_completed_fraction(const std::vector<JobSpec>& jobs, const HashSet& hs,
                                      std::uint64_t l) {
  if (jobs.empty()) return 1.0;
  std::uint64_t machine_count = 0;
  for (const auto& j : jobs)
    for (MachineId m : j.seq) machine_count = std::max<std::uint64_t>(machine_count, m + 1);
  JobShopEngine engine(jobs, machine_count);
  SimTrace trace;
  trace.record_events = false;
  for (const auto& h : hs.members) {
    WeakCallParams wp{h.L, l, false, TieBreak::lowest_ind, false};
    std::vector<std::uint64_t> h_values;
    h_values.reserve(jobs.size());
    for (const auto& j : engine.jobs()) h_values.push_back(h.hash_job(j));
    engine.run_weak_call(wp, h_values, nullptr, trace);
  }
  return static_cast<double>(engine.completed_count()) / static_cast<double>(jobs.size());
}

inline std::vector<JobSpec> jobs_from_choice(const DomainSet& domain,
                                             const std::vector<std::size_t>& choice) {
  std::vector<JobSpec> jobs;
  jobs.reserve(choice.size());
  for (std::size_t i = 0; i < choice.size(); ++i)
    jobs.push_back({static_cast<JobInd>(i + 1), domain.sequences[choice[i]]});
  return jobs;
}

}  // namespace detail

// Adaptive adversary: the domain-supported job set of size `size` (ids
// assigned 1..size) minimizing the completed fraction under a fixed hash
// set. Exhausts all sequence multisets when |domain|^size fits the budget,
// otherwise runs a seeded local search and flags the result heuristic.
inline WorstJobSetResult search_worst_jobset(const DomainSet& domain, const HashSet& hash_set,
                                             std::uint64_t l, std::size_t size,
                                             std::uint64_t budget, std::uint64_t seed = 0) {
  require(budget > 0, "search budget must be positive");
  require(!domain.sequences.empty(), "domain must be non-empty");
  require(size >= 1, "job set size must be positive");
  WorstJobSetResult best;

  auto consider = [&](const std::vector<std::size_t>& choice) {
    auto jobs = detail::jobs_from_choice(domain, choice);
    const double frac = detail::weak_completed_fraction(jobs, hash_set, l);
    ++best.evaluations;
    if (frac < best.completed_fraction || best.jobs.empty()) {
      best.completed_fraction = frac;
      best.jobs = std::move(jobs);
    }
    return frac;
  };

  const std::uint64_t space = pow_saturating(domain.sequences.size(), size);
  if (space <= budget) {
    // Multisets: non-decreasing index vectors.
    std::vector<std::size_t> choice(size, 0);
    while (true) {
      consider(choice);
      std::size_t i = size;
      while (i > 0 && choice[i - 1] == domain.sequences.size() - 1) --i;
      if (i == 0) break;
      const std::size_t v = choice[i - 1] + 1;
      for (std::size_t j = i - 1; j < size; ++j) choice[j] = v;
    }
    best.exhaustive = true;
    best.search_trace.push_back("exhaustive over " + std::to_string(best.evaluations) +
                                " multisets");
    return best;
  }

  // Hill climbing over single-position replacements.
  SplitMix64 rng(derive_subseed(seed, 0x5ead, 0));
  std::vector<std::size_t> current(size);
  for (auto& c : current) c = rng.next() % domain.sequences.size();
  std::sort(current.begin(), current.end());
  double current_frac = consider(current);
  best.search_trace.push_back("start fraction " + std::to_string(current_frac));
  bool improved = true;
  while (improved && best.evaluations < budget) {
    improved = false;
    for (std::size_t p = 0; p < size && best.evaluations < budget; ++p) {
      for (std::size_t v = 0; v < domain.sequences.size() && best.evaluations < budget; ++v) {
        if (v == current[p]) continue;
        auto candidate = current;
        candidate[p] = v;
        std::sort(candidate.begin(), candidate.end());
        const double frac = consider(candidate);
        if (frac < current_frac) {
          current = candidate;
          current_frac = frac;
          improved = true;
          best.search_trace.push_back("improved to " + std::to_string(frac));
        }
      }
    }
  }
  best.search_trace.push_back("heuristic: budget " + std::to_string(budget) + ", evaluated " +
                              std::to_string(best.evaluations));
  return best;
}

}  // namespace lps
