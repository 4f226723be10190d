#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lps/common.hpp"
#include "lps/core.hpp"
#include "lps/hashing.hpp"
#include "lps/trace.hpp"

// Independent oracles for the combinatorial claims: exact bad-pattern
// search, drop-soundness replay, naive baselines, and completion bounds.

namespace lps {

// Family of disjoint buckets B(T,m) of (job index, sequence position)
// pairs; valid when every nonempty bucket exceeds l and the total exceeds
// |J|/2. It occurs under h when h(j) + i == T throughout.
struct BadPattern {
  std::map<std::pair<std::uint64_t, MachineId>,
           std::vector<std::pair<std::size_t, std::size_t>>>
      buckets;

  std::size_t total() const {
    std::size_t s = 0;
    for (const auto& [key, members] : buckets) s += members.size();
    return s;
  }
};

inline bool validate_bad_pattern(const BadPattern& pattern, const std::vector<JobSpec>& jobs,
                                 const std::vector<std::uint64_t>& h_values, std::uint64_t L,
                                 std::uint64_t l, std::string* why = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  std::set<std::size_t> used_jobs;
  std::size_t total = 0;
  for (const auto& [key, members] : pattern.buckets) {
    const auto [T, m] = key;
    if (T >= 2 * L) return fail("bucket large step out of range");
    if (members.empty()) continue;
    if (members.size() <= l) return fail("nonempty bucket not larger than l");
    if (members.size() > jobs.size()) return fail("bucket larger than |J|");
    for (const auto& [j, i] : members) {
      if (j >= jobs.size() || i >= jobs[j].seq.size()) return fail("pair out of range");
      if (jobs[j].seq[i] != m) return fail("pair not at bucket machine");
      if (h_values[j] + i != T) return fail("bucket does not occur: virt mismatch");
      if (!used_jobs.insert(j).second) return fail("job appears twice");
    }
    total += members.size();
  }
  if (2 * total <= jobs.size()) return fail("total does not exceed |J|/2");
  return true;
}

enum class HashVerdict { good, bad, unknown };

inline const char* to_string(HashVerdict v) {
  switch (v) {
    case HashVerdict::good: return "good";
    case HashVerdict::bad: return "bad";
    case HashVerdict::unknown: return "unknown";
  }
  return "?";
}

struct GoodHashResult {
  HashVerdict verdict = HashVerdict::unknown;
  std::optional<BadPattern> witness;
  std::uint64_t nodes_explored = 0;
};

namespace detail {

struct BadPatternSearch {
  BadPatternSearch(const std::vector<JobSpec>& jobs_in, std::uint64_t l_in,
                   std::uint64_t budget_in)
      : jobs(jobs_in), l(l_in), budget(budget_in) {}

  const std::vector<JobSpec>& jobs;
  std::uint64_t l;
  std::uint64_t budget;
  std::uint64_t nodes = 0;
  bool exhausted = false;

  // A job's possible placements. Each (j, i) pair lives in exactly one
  // bucket, forced by T = h(j) + i and m = seq(j)_i.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> options;  // job -> (bucket id, i)
  std::vector<std::uint64_t> bucket_count;
  std::vector<std::pair<std::uint64_t, MachineId>> bucket_key;
  std::vector<std::size_t> chosen;  // job -> option index or npos
  std::size_t assigned = 0;

  static constexpr std::size_t kNone = ~std::size_t{0};

  bool search(std::size_t job, std::size_t eligible_left, BadPattern* out) {
    if (++nodes > budget) {
      exhausted = true;
      return false;
    }
    if (job == jobs.size()) return check_leaf(out);
    // Even assigning every remaining eligible job cannot reach |J|/2.
    if (2 * (assigned + eligible_left) <= jobs.size()) return false;
    const std::size_t left = eligible_left - (options[job].empty() ? 0 : 1);
    for (std::size_t oi = 0; oi < options[job].size(); ++oi) {
      chosen[job] = oi;
      ++bucket_count[options[job][oi].first];
      ++assigned;
      if (search(job + 1, left, out)) return true;
      --assigned;
      --bucket_count[options[job][oi].first];
    }
    chosen[job] = kNone;
    return search(job + 1, left, out);
  }

  bool check_leaf(BadPattern* out) {
    if (2 * assigned <= jobs.size()) return false;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (chosen[j] == kNone) continue;
      if (bucket_count[options[j][chosen[j]].first] <= l) return false;
    }
    if (out) {
      out->buckets.clear();
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (chosen[j] == kNone) continue;
        const auto [bucket, i] = options[j][chosen[j]];
        out->buckets[bucket_key[bucket]].push_back({j, i});
      }
    }
    return true;
  }
};

}  // namespace detail

// Decides whether any bad pattern occurs for (J, h, L, l) by exhaustive
// bucket assignment. Exact on small instances; returns unknown (never a
// wrong verdict) when the node budget runs out.
inline GoodHashResult is_good_hash(const std::vector<JobSpec>& jobs,
                                   const std::vector<std::uint64_t>& h_values, std::uint64_t L,
                                   std::uint64_t l, std::uint64_t budget = 2000000) {
  require(h_values.size() == jobs.size(), "one hash value per job");
  GoodHashResult result;

  // Collect candidate buckets; only buckets that can exceed l matter.
  std::map<std::pair<std::uint64_t, MachineId>,
           std::vector<std::pair<std::size_t, std::size_t>>>
      candidates;
  for (std::size_t j = 0; j < jobs.size(); ++j)
    for (std::size_t i = 0; i < jobs[j].seq.size(); ++i) {
      const std::uint64_t T = h_values[j] + i;
      if (T < 2 * L) candidates[{T, jobs[j].seq[i]}].push_back({j, i});
    }

  detail::BadPatternSearch search(jobs, l, budget);
  search.options.resize(jobs.size());
  std::set<std::size_t> eligible_jobs;
  for (const auto& [key, members] : candidates) {
    if (members.size() <= l) continue;
    const std::size_t bucket = search.bucket_key.size();
    search.bucket_key.push_back(key);
    search.bucket_count.push_back(0);
    for (const auto& [j, i] : members) {
      search.options[j].push_back({bucket, i});
      eligible_jobs.insert(j);
    }
  }

  if (2 * eligible_jobs.size() <= jobs.size()) {
    result.verdict = HashVerdict::good;
    result.nodes_explored = 0;
    return result;
  }

  search.chosen.assign(jobs.size(), detail::BadPatternSearch::kNone);
  BadPattern witness;
  const bool found = search.search(0, eligible_jobs.size(), &witness);
  result.nodes_explored = search.nodes;
  if (found) {
    result.verdict = HashVerdict::bad;
    result.witness = std::move(witness);
  } else {
    result.verdict = search.exhausted ? HashVerdict::unknown : HashVerdict::good;
  }
  return result;
}

inline GoodHashResult is_good_hash(const std::vector<JobSpec>& jobs, const HashFamily& h,
                                   std::uint64_t l, std::uint64_t budget = 2000000) {
  std::vector<std::uint64_t> h_values;
  h_values.reserve(jobs.size());
  for (const auto& j : jobs) h_values.push_back(h.hash_job(j));
  return is_good_hash(jobs, h_values, h.L, l, budget);
}

struct DropSoundnessReport {
  bool ok = true;
  std::vector<std::string> messages;
  std::size_t dropped = 0;
  std::optional<BadPattern> reconstructed;  // set when drops exceeded |J|/2
};

// Replays the drop/eliminate events of a weak-run trace and confirms they
// form an occurring bad pattern whenever more than half the jobs dropped.
inline DropSoundnessReport certify_drop_soundness(const SimTrace& trace,
                                                  const std::vector<JobSpec>& jobs,
                                                  const std::vector<std::uint64_t>& h_values,
                                                  std::uint64_t L, std::uint64_t l) {
  DropSoundnessReport report;
  auto fail = [&](const std::string& msg) {
    report.ok = false;
    report.messages.push_back(msg);
  };
  std::map<JobInd, std::size_t> index_of;
  for (std::size_t j = 0; j < jobs.size(); ++j) index_of[jobs[j].ind] = j;

  BadPattern pattern;
  std::set<std::size_t> dropped_jobs;
  for (const auto& ev : trace.events) {
    if (ev.kind != EventKind::drop && ev.kind != EventKind::eliminate) continue;
    auto it = index_of.find(ev.job);
    if (it == index_of.end()) {
      fail("drop event for unknown job at step " + std::to_string(ev.t));
      return report;
    }
    const std::size_t j = it->second;
    if (ev.t % l != 0) {
      fail("drop off large-step boundary at step " + std::to_string(ev.t));
      return report;
    }
    const std::uint64_t T = ev.t / l;
    if (T >= 2 * L) {
      fail("drop beyond the subroutine window at step " + std::to_string(ev.t));
      return report;
    }
    if (h_values[j] + ev.pos != T) {
      fail("dropped bucket did not occur: virt mismatch at step " + std::to_string(ev.t));
      return report;
    }
    if (jobs[j].seq.size() <= ev.pos || jobs[j].seq[ev.pos] != ev.machine) {
      fail("job dropped at a machine it is not at, step " + std::to_string(ev.t));
      return report;
    }
    if (!dropped_jobs.insert(j).second) {
      fail("job " + std::to_string(ev.job) + " dropped more than once");
      return report;
    }
    pattern.buckets[{T, ev.machine}].push_back({j, ev.pos});
  }
  report.dropped = dropped_jobs.size();

  for (const auto& [key, members] : pattern.buckets)
    if (!members.empty() && members.size() <= l) {
      fail("dropped bucket of size " + std::to_string(members.size()) +
           " not above threshold " + std::to_string(l));
      return report;
    }

  if (2 * report.dropped > jobs.size()) {
    std::string why;
    if (!validate_bad_pattern(pattern, jobs, h_values, L, l, &why)) {
      fail("reconstructed pattern invalid: " + why);
      return report;
    }
    report.reconstructed = std::move(pattern);
  }
  return report;
}

// Standard random-delay scheduling, large-step paced: job j sleeps until
// large step h(j), then advances one machine per large step; machines work
// up to l queued jobs per large step in FIFO order. Completions are
// recorded at large-step ends, so a lone job finishes at (h + len) * l.
inline SimTrace random_delay_baseline(const std::vector<JobSpec>& jobs,
                                      std::uint64_t machine_count, std::uint64_t L,
                                      std::uint64_t l, std::uint64_t seed) {
  require(L >= 1, "L must be positive");
  require(l >= 1, "l must be positive");
  SimTrace trace;
  std::vector<std::uint64_t> delay(jobs.size());
  SplitMix64 rng(seed);
  for (auto& d : delay) d = rng.next() % L;

  std::vector<std::size_t> pos(jobs.size(), 0);
  std::vector<std::deque<std::size_t>> queue(machine_count);
  std::vector<std::size_t> order(jobs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return jobs[a].ind < jobs[b].ind; });
  std::size_t completed = 0;
  for (std::size_t i : order)
    if (jobs[i].seq.empty())
      ++completed;
    else
      queue[jobs[i].seq[0]].push_back(i);

  const std::uint64_t cap = L + dilation(jobs) * (congestion(jobs) + 1) + 1;
  for (std::uint64_t T = 0; completed < jobs.size() && T <= cap; ++T) {
    std::vector<std::size_t> moved;
    for (MachineId m = 0; m < machine_count; ++m) {
      std::uint64_t slot = 0;
      std::deque<std::size_t> keep;
      while (!queue[m].empty() && slot < l) {
        const std::size_t i = queue[m].front();
        queue[m].pop_front();
        if (delay[i] > T) {
          keep.push_back(i);
          continue;
        }
        trace.add({T * l + slot, m, EventKind::work, jobs[i].ind,
                   static_cast<std::uint32_t>(pos[i])});
        ++slot;
        ++pos[i];
        if (pos[i] == jobs[i].seq.size()) {
          ++completed;
          trace.add({(T + 1) * l, m, EventKind::complete, jobs[i].ind,
                     static_cast<std::uint32_t>(pos[i])});
        } else {
          moved.push_back(i);
        }
      }
      while (!keep.empty()) {
        queue[m].push_front(keep.back());
        keep.pop_back();
      }
    }
    for (std::size_t i : moved) queue[jobs[i].seq[pos[i]]].push_back(i);
    trace.total_steps = (T + 1) * l;
  }
  require(completed == jobs.size(), "random-delay baseline failed to finish within cap");
  return trace;
}

// Work-conserving baseline: every machine works its lowest-identifier
// queued job each step. Completion never exceeds C(J) * D(J).
inline SimTrace fifo_greedy_baseline(const std::vector<JobSpec>& jobs,
                                     std::uint64_t machine_count) {
  SimTrace trace;
  std::vector<std::size_t> pos(jobs.size(), 0);
  std::vector<std::vector<std::size_t>> queue(machine_count);
  std::size_t completed = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (jobs[i].seq.empty())
      ++completed;
    else
      queue[jobs[i].seq[0]].push_back(i);

  const std::uint64_t cap = congestion(jobs) * dilation(jobs);
  std::uint64_t t = 0;
  while (completed < jobs.size()) {
    if (t >= cap)
      throw ContractViolation("work-conserving schedule exceeded the C*D bound");
    std::vector<std::size_t> moved;
    for (MachineId m = 0; m < machine_count; ++m) {
      if (queue[m].empty()) continue;
      auto it = std::min_element(queue[m].begin(), queue[m].end(),
                                 [&](std::size_t a, std::size_t b) {
                                   return jobs[a].ind < jobs[b].ind;
                                 });
      const std::size_t i = *it;
      queue[m].erase(it);
      trace.add({t, m, EventKind::work, jobs[i].ind, static_cast<std::uint32_t>(pos[i])});
      ++pos[i];
      if (pos[i] == jobs[i].seq.size()) {
        ++completed;
        trace.add({t + 1, m, EventKind::complete, jobs[i].ind,
                   static_cast<std::uint32_t>(pos[i])});
      } else {
        moved.push_back(i);
      }
    }
    for (std::size_t i : moved) queue[jobs[i].seq[pos[i]]].push_back(i);
    trace.total_steps = ++t;
  }
  return trace;
}

struct OptBounds {
  std::uint64_t lower = 0;
  std::uint64_t upper = 0;
  bool exact = false;  // demand-level bounds: exact enumeration finished
};

// For a fixed job or path set: max(C, D) lower, C + D upper.
inline OptBounds opt_bounds_jobs(const std::vector<JobSpec>& jobs) {
  const std::uint64_t c = congestion(jobs);
  const std::uint64_t d = dilation(jobs);
  return {std::max(c, d), c + d, true};
}

namespace detail {

inline void enumerate_simple_paths(const ReciprocalGraph& g, NodeId at, NodeId target,
                                   std::vector<EdgeId>& stack, std::vector<bool>& visited,
                                   std::vector<Path>& out, std::size_t cap) {
  if (out.size() >= cap) return;
  if (at == target) {
    out.push_back(Path{stack});
    return;
  }
  for (EdgeId e : g.out_edges(at)) {
    const NodeId next = g.to(e);
    if (visited[next]) continue;
    visited[next] = true;
    stack.push_back(e);
    enumerate_simple_paths(g, next, target, stack, visited, out, cap);
    stack.pop_back();
    visited[next] = false;
  }
}

}  // namespace detail

// All node-simple paths from s to t, lexicographic by edge choice order.
inline std::vector<Path> all_simple_paths(const ReciprocalGraph& g, NodeId s, NodeId t,
                                          std::size_t cap = 100000) {
  std::vector<Path> out;
  std::vector<EdgeId> stack;
  std::vector<bool> visited(g.node_count(), false);
  visited[s] = true;
  detail::enumerate_simple_paths(g, s, t, stack, visited, out, cap);
  return out;
}

// Demand-level OPT proxy: exact min over node-simple path combinations of
// C + D when the product fits the budget, otherwise shortest-path bounds
// flagged inexact.
inline OptBounds opt_bounds_demand(const ReciprocalGraph& g, const Demand& demand,
                                   std::uint64_t budget = 1000000) {
  if (demand.pairs.empty()) return {0, 0, true};

  std::vector<std::vector<Path>> options;
  double combos = 1.0;
  for (auto [s, t] : demand.pairs) {
    auto paths = all_simple_paths(g, s, t, budget);
    if (paths.empty()) throw ValidationError("demanded pair has no connecting path");
    std::sort(paths.begin(), paths.end(), [](const Path& a, const Path& b) {
      return a.length() != b.length() ? a.length() < b.length() : a < b;
    });
    combos *= static_cast<double>(paths.size());
    options.push_back(std::move(paths));
  }

  // Shortest-path selection always bounds the optimum from above.
  std::uint64_t lower_dist = 0;
  std::vector<JobSpec> shortest;
  for (std::size_t i = 0; i < options.size(); ++i) {
    lower_dist = std::max<std::uint64_t>(lower_dist, options[i].front().length());
    shortest.push_back({static_cast<JobInd>(i + 1), path_to_sequence(options[i].front())});
  }
  const std::uint64_t fallback_upper = congestion(shortest) + dilation(shortest);

  if (combos > static_cast<double>(budget))
    return {lower_dist, fallback_upper, false};

  std::uint64_t best = fallback_upper;
  std::map<EdgeId, std::uint64_t> load;
  std::uint64_t max_len = 0;

  std::function<void(std::size_t, std::uint64_t)> dfs = [&](std::size_t pair,
                                                            std::uint64_t cur_c) {
    if (cur_c + std::max(max_len, lower_dist) >= best) return;  // cannot improve
    if (pair == options.size()) {
      best = std::min(best, cur_c + max_len);
      return;
    }
    for (const Path& p : options[pair]) {
      std::uint64_t new_c = cur_c;
      for (EdgeId e : p.edges) new_c = std::max(new_c, ++load[e]);
      const std::uint64_t saved_len = max_len;
      max_len = std::max<std::uint64_t>(max_len, p.length());
      dfs(pair + 1, new_c);
      max_len = saved_len;
      for (EdgeId e : p.edges) --load[e];
    }
  };
  dfs(0, 0);
  return {best, best, true};
}

}  // namespace lps
