#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lps/common.hpp"

// Job-shop model with unit-sized jobs, and the reciprocal-graph routing
// model it emulates (edges = machines, packets = jobs, paths = sequences).

namespace lps {

using MachineId = std::uint32_t;
using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;
using JobInd = std::uint64_t;

using Sequence = std::vector<MachineId>;

// A unit-sized job: a unique identifier and the ordered machines that must
// work on it.
struct JobSpec {
  JobInd ind = 0;
  Sequence seq;

  std::size_t length() const { return seq.size(); }
  bool operator==(const JobSpec&) const = default;
};

// Mutable per-job run state. pos indexes the next machine in seq (== len
// when complete); state is the 1-bit elimination flag of the greedy model.
struct JobState {
  std::size_t pos = 0;
  std::uint8_t state = 0;
};

// The polynomial-size universe of sequences job sets are drawn from.
struct DomainSet {
  std::vector<Sequence> sequences;

  bool contains(const Sequence& s) const {
    return std::find(sequences.begin(), sequences.end(), s) != sequences.end();
  }
  std::size_t size() const { return sequences.size(); }
};

// C(J): max over machines of total occurrences across all job sequences.
inline std::uint64_t congestion(const std::vector<JobSpec>& jobs) {
  std::unordered_map<MachineId, std::uint64_t> load;
  for (const auto& j : jobs)
    for (MachineId m : j.seq) ++load[m];
  std::uint64_t c = 0;
  for (const auto& [m, cnt] : load) c = std::max(c, cnt);
  return c;
}

// D(J): length of the longest job sequence.
inline std::uint64_t dilation(const std::vector<JobSpec>& jobs) {
  std::uint64_t d = 0;
  for (const auto& j : jobs) d = std::max<std::uint64_t>(d, j.seq.size());
  return d;
}

// Directed graph where every edge has a paired reverse edge. Edges are added
// in reciprocal pairs; ids 2i and 2i+1 are mutual reverses.
class ReciprocalGraph {
 public:
  ReciprocalGraph() = default;
  explicit ReciprocalGraph(NodeId n) : n_(n) {}

  // Adds the pair u->v, v->u; returns the id of the u->v edge.
  EdgeId add_edge(NodeId u, NodeId v) {
    require(u < n_ && v < n_, "edge endpoint out of range");
    from_.push_back(u);
    to_.push_back(v);
    from_.push_back(v);
    to_.push_back(u);
    EdgeId e = static_cast<EdgeId>(from_.size() - 2);
    out_[u].push_back(e);
    out_[v].push_back(e + 1);
    return e;
  }

  NodeId node_count() const { return n_; }
  std::size_t edge_count() const { return from_.size(); }

  NodeId from(EdgeId e) const { return from_[e]; }
  NodeId to(EdgeId e) const { return to_[e]; }
  static EdgeId rev(EdgeId e) { return e ^ 1; }

  const std::vector<EdgeId>& out_edges(NodeId v) const {
    static const std::vector<EdgeId> kEmpty;
    auto it = out_.find(v);
    return it == out_.end() ? kEmpty : it->second;
  }

 private:
  NodeId n_ = 0;
  std::vector<NodeId> from_;
  std::vector<NodeId> to_;
  std::unordered_map<NodeId, std::vector<EdgeId>> out_;
};

// A path is an adjacent run of directed edges.
struct Path {
  std::vector<EdgeId> edges;

  std::size_t length() const { return edges.size(); }
  bool empty() const { return edges.empty(); }
  bool operator==(const Path&) const = default;
  auto operator<=>(const Path&) const = default;

  bool is_adjacent(const ReciprocalGraph& g) const {
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
      if (g.to(edges[i]) != g.from(edges[i + 1])) return false;
    return true;
  }

  bool is_edge_simple() const {
    std::set<EdgeId> seen(edges.begin(), edges.end());
    return seen.size() == edges.size();
  }

  // Node sequence visited, length()+1 entries (empty path -> empty).
  std::vector<NodeId> nodes(const ReciprocalGraph& g) const {
    std::vector<NodeId> ns;
    if (edges.empty()) return ns;
    ns.reserve(edges.size() + 1);
    ns.push_back(g.from(edges.front()));
    for (EdgeId e : edges) ns.push_back(g.to(e));
    return ns;
  }

  bool is_node_simple(const ReciprocalGraph& g) const {
    auto ns = nodes(g);
    std::set<NodeId> seen(ns.begin(), ns.end());
    return seen.size() == ns.size();
  }
};

// Emulation of packet scheduling in the job-shop model: each directed edge
// is a distinct machine, so machine ids are edge ids.
inline Sequence path_to_sequence(const Path& p) {
  return Sequence(p.edges.begin(), p.edges.end());
}

struct PacketSpec {
  NodeId source = 0;
  NodeId sink = 0;
  JobInd ind = 0;
};

struct Demand {
  std::vector<std::pair<NodeId, NodeId>> pairs;

  bool is_zero_one() const {
    auto sorted = pairs;
    std::sort(sorted.begin(), sorted.end());
    return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
  }

  bool is_permutation() const {
    std::set<NodeId> sources, sinks;
    for (auto [s, t] : pairs) {
      if (!sources.insert(s).second) return false;
      if (!sinks.insert(t).second) return false;
    }
    return true;
  }
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Accepts iff the job set is domain-supported, identifiers are unique and
// within the polynomial bound, and |J| <= |M|^c. Collects every violation.
inline ValidationReport validate_instance(const std::vector<JobSpec>& jobs,
                                          const DomainSet& domain,
                                          std::uint64_t machine_count,
                                          unsigned c = 2) {
  ValidationReport report;
  const std::uint64_t bound = pow_saturating(machine_count, c);
  std::unordered_set<JobInd> seen;
  if (jobs.size() > bound)
    report.violations.push_back("job set larger than |M|^c = " + std::to_string(bound));
  for (const auto& j : jobs) {
    const std::string tag = "job " + std::to_string(j.ind) + ": ";
    if (j.ind == 0 || j.ind > bound)
      report.violations.push_back(tag + "identifier outside [1, |M|^c]");
    if (!seen.insert(j.ind).second)
      report.violations.push_back(tag + "duplicate identifier");
    for (MachineId m : j.seq)
      if (m >= machine_count) {
        report.violations.push_back(tag + "machine id " + std::to_string(m) +
                                    " out of range");
        break;
      }
    if (!domain.contains(j.seq))
      report.violations.push_back(tag + "unsupported sequence");
  }
  return report;
}

}  // namespace lps
