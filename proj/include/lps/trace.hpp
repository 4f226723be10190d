#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lps/common.hpp"
#include "lps/core.hpp"

namespace lps {

// Event vocabulary shared by the scheduling and routing engines.
//   work      machine worked a job for one step
//   forward   edge carried a packet (routing; machine field is the edge id)
//   drop      an over-threshold bucket was cleared (stateless realization)
//   eliminate a job's 1-bit state flipped to 1 (greedy realization of drop)
//   push      adversary advanced a job
//   complete  job finished / packet delivered
enum class EventKind { work, forward, drop, eliminate, push, complete };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::work: return "work";
    case EventKind::forward: return "forward";
    case EventKind::drop: return "drop";
    case EventKind::eliminate: return "eliminate";
    case EventKind::push: return "push";
    case EventKind::complete: return "complete";
  }
  return "?";
}

struct Event {
  std::uint64_t t = 0;
  MachineId machine = 0;
  EventKind kind = EventKind::work;
  JobInd job = 0;
  std::uint32_t pos = 0;

  bool operator==(const Event&) const = default;
};

// Completion accounting: a job worked at step t is complete from t+1; a job
// completed by an adversary push at step t is complete at t (pushes precede
// the step's work).
struct SimTrace {
  bool record_events = true;
  std::vector<Event> events;
  std::map<JobInd, std::uint64_t> completions;  // job -> completion step
  std::uint64_t total_steps = 0;
  std::uint64_t work_count = 0;
  std::uint64_t drop_count = 0;  // drop + eliminate events
  std::uint64_t push_count = 0;
  std::uint64_t invariant_checks = 0;

  void add(const Event& ev) {
    switch (ev.kind) {
      case EventKind::work: ++work_count; break;
      case EventKind::drop:
      case EventKind::eliminate: ++drop_count; break;
      case EventKind::push: ++push_count; break;
      case EventKind::complete:
        completions.emplace(ev.job, ev.t);
        break;
      default: break;
    }
    if (record_events) events.push_back(ev);
  }

  std::size_t completed() const { return completions.size(); }

  // Step of the last completion, if any completed.
  std::uint64_t completion_step() const {
    std::uint64_t last = 0;
    for (const auto& [job, step] : completions) last = std::max(last, step);
    return last;
  }

  bool all_complete(std::size_t total_jobs) const {
    return completions.size() == total_jobs;
  }
};

struct TraceSummary {
  std::uint64_t completed = 0;
  std::uint64_t total = 0;
  std::uint64_t completion_step = 0;  // 0 when nothing completed
  std::uint64_t total_steps = 0;
  std::uint64_t drops = 0;
};

inline TraceSummary summarize(const SimTrace& trace, std::size_t total_jobs) {
  TraceSummary s;
  s.completed = trace.completions.size();
  s.total = total_jobs;
  s.completion_step = trace.completion_step();
  s.total_steps = trace.total_steps;
  s.drops = trace.drop_count;
  return s;
}

}  // namespace lps
