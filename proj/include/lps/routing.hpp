#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "lps/common.hpp"
#include "lps/core.hpp"
#include "lps/hashing.hpp"
#include "lps/schedulers.hpp"
#include "lps/trace.hpp"

// Routing-model algorithms: the weak scheduling subroutine with return,
// its noisy wrapper, the semi-obliviously-assisted router, and the
// virtual-graph wrapper that lifts arbitrary demands to {0,1}-demands.

namespace lps {

// Per-pair candidate path lists; alpha-sparse when no list exceeds alpha.
struct PathSet {
  std::map<std::pair<NodeId, NodeId>, std::vector<Path>> entries;

  std::size_t alpha() const {
    std::size_t a = 0;
    for (const auto& [pair, paths] : entries) a = std::max(a, paths.size());
    return a;
  }

  const std::vector<Path>* find(NodeId s, NodeId t) const {
    auto it = entries.find({s, t});
    return it == entries.end() ? nullptr : &it->second;
  }

  std::vector<Path> union_paths() const {
    std::vector<Path> all;
    for (const auto& [pair, paths] : entries)
      all.insert(all.end(), paths.begin(), paths.end());
    return all;
  }

  void validate(const ReciprocalGraph& g) const {
    for (const auto& [pair, paths] : entries)
      for (const Path& p : paths) {
        require(!p.empty(), "path set entries must have at least one edge");
        require(p.is_adjacent(g), "path set entry is not edge-adjacent");
        require(p.is_node_simple(g), "path set entry is not node-simple");
        require(g.from(p.edges.front()) == pair.first && g.to(p.edges.back()) == pair.second,
                "path set entry endpoints do not match its pair");
      }
  }
};

// Packet positions and delivery flags persist across subroutine calls;
// paths are re-assignable between calls (they are computable quantities,
// not packet state).
class RoutingEngine {
 public:
  RoutingEngine(const ReciprocalGraph& g, std::vector<PacketSpec> packets,
                std::vector<NodeId> start_positions = {})
      : g_(g), packets_(std::move(packets)) {
    std::set<JobInd> ids;
    for (const auto& x : packets_)
      require(ids.insert(x.ind).second, "packet identifiers must be unique");
    pos_.reserve(packets_.size());
    if (start_positions.empty()) {
      for (const auto& x : packets_) pos_.push_back(x.source);
    } else {
      require(start_positions.size() == packets_.size(),
              "one start position per packet");
      pos_ = std::move(start_positions);
    }
    delivered_.resize(packets_.size());
    for (std::size_t i = 0; i < packets_.size(); ++i)
      delivered_[i] = pos_[i] == packets_[i].sink;
    paths_.resize(packets_.size());
    index_.resize(packets_.size(), 0);
  }

  const std::vector<PacketSpec>& packets() const { return packets_; }
  const std::vector<NodeId>& positions() const { return pos_; }
  const std::vector<std::uint8_t>& delivered() const { return delivered_; }
  std::size_t delivered_count() const {
    std::size_t n = 0;
    for (auto d : delivered_) n += d;
    return n;
  }

  // Paths must be node-simple source->sink paths; packets must sit at the
  // first or last node of their path. nullopt packets sit the call out.
  void assign_paths(std::vector<std::optional<Path>> paths) {
    require(paths.size() == packets_.size(), "one (optional) path per packet");
    std::set<Path> seen;
    for (std::size_t i = 0; i < packets_.size(); ++i) {
      if (!paths[i]) continue;
      const Path& p = *paths[i];
      require(!p.empty(), "assigned path must have at least one edge");
      require(p.is_adjacent(g_), "assigned path is not edge-adjacent");
      require(p.is_node_simple(g_), "assigned path is not node-simple");
      require(g_.from(p.edges.front()) == packets_[i].source,
              "assigned path does not start at the packet source");
      require(g_.to(p.edges.back()) == packets_[i].sink,
              "assigned path does not end at the packet sink");
      require(seen.insert(p).second, "two packets evaluate to the same path");
      if (pos_[i] == packets_[i].source && !delivered_[i]) {
        index_[i] = 0;
      } else if (pos_[i] == packets_[i].sink) {
        index_[i] = p.length();
      } else {
        throw ContractViolation("packet " + std::to_string(packets_[i].ind) +
                                " is not at an endpoint of its path");
      }
    }
    paths_ = std::move(paths);
  }

  // One 4*L*l-step call: 2*L*l forward steps mirroring the stateless weak
  // subroutine per edge, then 2*L*l steps rolling large steps back in
  // reverse order so every undelivered packet returns to its source.
  void run_weak_return_call(std::uint64_t L, std::uint64_t l,
                            const std::vector<std::uint64_t>& h_values, SimTrace& trace,
                            TieBreak tie_break = TieBreak::lowest_ind,
                            bool check_invariants = true) {
    require(h_values.size() == packets_.size(), "one hash value per packet");
    const std::uint64_t half = 2 * L * l;
    std::map<EdgeId, std::vector<std::size_t>> buckets;

    for (std::uint64_t t = 0; t < half; ++t) {
      const std::uint64_t g = trace.total_steps;
      const std::uint64_t T = t / l;
      const bool boundary = (t % l == 0);
      if (boundary && forward_phase_dead(h_values, T)) {
        trace.total_steps += half - t;
        break;
      }
      buckets.clear();
      for (std::size_t i = 0; i < packets_.size(); ++i) {
        if (!active(i) || delivered_[i]) continue;
        if (h_values[i] + index_[i] == T) buckets[paths_[i]->edges[index_[i]]].push_back(i);
      }
      for (auto& [e, members] : buckets) {
        if (boundary && members.size() > l) {
          std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            return packets_[a].ind < packets_[b].ind;
          });
          for (std::size_t i : members)
            trace.add({g, e, EventKind::drop, packets_[i].ind,
                       static_cast<std::uint32_t>(index_[i])});
        } else if (members.size() <= l) {
          const std::size_t i = select(members, tie_break);
          ++index_[i];
          pos_[i] = g_.to(e);
          trace.add({g, e, EventKind::forward, packets_[i].ind,
                     static_cast<std::uint32_t>(index_[i])});
          if (index_[i] == paths_[i]->length()) {
            delivered_[i] = 1;
            trace.add({g + 1, e, EventKind::complete, packets_[i].ind,
                       static_cast<std::uint32_t>(index_[i])});
          }
        }
      }
      trace.total_steps = g + 1;
    }

    for (std::uint64_t t = half; t < 2 * half; ++t) {
      const std::uint64_t g = trace.total_steps;
      const std::uint64_t T = (2 * half - 1 - t) / l;
      if (t % l == 0 && return_phase_dead()) {
        trace.total_steps += 2 * half - t;
        break;
      }
      buckets.clear();
      for (std::size_t i = 0; i < packets_.size(); ++i) {
        if (!active(i) || delivered_[i] || index_[i] == 0) continue;
        if (h_values[i] + index_[i] - 1 == T)
          buckets[ReciprocalGraph::rev(paths_[i]->edges[index_[i] - 1])].push_back(i);
      }
      for (auto& [e, members] : buckets) {
        const std::size_t i = select(members, tie_break);
        --index_[i];
        pos_[i] = g_.to(e);
        trace.add({g, e, EventKind::forward, packets_[i].ind,
                   static_cast<std::uint32_t>(index_[i])});
      }
      trace.total_steps = g + 1;
    }

    if (check_invariants) {
      for (std::size_t i = 0; i < packets_.size(); ++i) {
        if (!active(i)) continue;
        ++trace.invariant_checks;
        if (delivered_[i] ? pos_[i] != packets_[i].sink
                          : pos_[i] != packets_[i].source)
          throw ContractViolation("packet " + std::to_string(packets_[i].ind) +
                                  " did not finish at a path endpoint");
      }
    }
  }

 private:
  bool active(std::size_t i) const { return paths_[i].has_value(); }

  bool forward_phase_dead(const std::vector<std::uint64_t>& h_values, std::uint64_t T) const {
    for (std::size_t i = 0; i < packets_.size(); ++i) {
      if (!active(i) || delivered_[i]) continue;
      if (h_values[i] + index_[i] >= T) return false;
    }
    return true;
  }

  bool return_phase_dead() const {
    for (std::size_t i = 0; i < packets_.size(); ++i)
      if (active(i) && !delivered_[i] && index_[i] != 0) return false;
    return true;
  }

  std::size_t select(const std::vector<std::size_t>& members, TieBreak tb) const {
    std::size_t best = members.front();
    for (std::size_t i : members) {
      const bool better = tb == TieBreak::lowest_ind ? packets_[i].ind < packets_[best].ind
                                                     : packets_[i].ind > packets_[best].ind;
      if (better) best = i;
    }
    return best;
  }

  const ReciprocalGraph& g_;
  std::vector<PacketSpec> packets_;
  std::vector<NodeId> pos_;
  std::vector<std::uint8_t> delivered_;
  std::vector<std::optional<Path>> paths_;
  std::vector<std::size_t> index_;  // node index of pos_ on the assigned path
};

struct RouterParams {
  unsigned c = 2;
  unsigned b = 1;
  ScaleKnobs knobs;
  std::optional<std::uint64_t> router_reps_override;  // replaces 18*ceil(log2 n)+1
  std::optional<std::uint64_t> l_sweep_max;           // replaces the n^10 sweep bound
  TieBreak tie_break = TieBreak::lowest_ind;
  bool check_invariants = true;
  bool record_events = false;
};

// Full noisy run on a fixed assignment: k fresh hash draws, one weak
// return call of 4*L*l' steps each, L the minimum power of two at least T
// and l' = 4*beta*l.
inline SimTrace run_return_noisy_scheduler(const ReciprocalGraph& g,
                                           const std::vector<PacketSpec>& packets,
                                           const std::vector<Path>& assigned, double beta,
                                           const std::vector<Path>& domain_paths,
                                           std::uint64_t t_bound, std::uint64_t master_seed,
                                           const RouterParams& rp,
                                           std::vector<NodeId> start_positions = {},
                                           std::vector<std::uint8_t>* delivered_out = nullptr) {
  require(beta > 1.0, "noisy scheduling needs beta > 1");
  require(t_bound >= 1, "noisy scheduling needs T >= 1");
  require(assigned.size() == packets.size(), "one path per packet");
  for (const Path& p : assigned)
    if (std::find(domain_paths.begin(), domain_paths.end(), p) == domain_paths.end())
      throw ValidationError("assigned path is not in the domain path set");

  const DerivedParams dp =
      derive_params(std::max<std::uint64_t>(g.node_count(), 2), rp.c, rp.b, rp.knobs);
  const std::uint64_t L = next_pow2(t_bound);
  const std::uint64_t l_scaled = noisy_scaled_l(beta, dp.l);

  RoutingEngine engine(g, packets, std::move(start_positions));
  std::vector<std::optional<Path>> paths(assigned.begin(), assigned.end());
  engine.assign_paths(std::move(paths));

  SimTrace trace;
  trace.record_events = rp.record_events;
  for (std::size_t i = 0; i < packets.size(); ++i)
    if (engine.delivered()[i])
      trace.add({0, 0, EventKind::complete, packets[i].ind,
                 static_cast<std::uint32_t>(assigned[i].length())});

  const HashSet hs = sample_hash_set(master_seed, dp.k, L, 0);
  std::vector<std::uint64_t> h_values(packets.size());
  for (const auto& member : hs.members) {
    for (std::size_t i = 0; i < packets.size(); ++i)
      h_values[i] = member.hash_path(assigned[i]);
    engine.run_weak_return_call(L, l_scaled, h_values, trace, rp.tie_break,
                                rp.check_invariants);
  }
  if (delivered_out) *delivered_out = std::vector<std::uint8_t>(engine.delivered());
  return trace;
}

struct PhaseStat {
  std::uint64_t L = 0;
  std::uint64_t rep = 0;
  std::uint64_t path_index = 0;  // 1-based candidate index
  std::uint64_t delivered = 0;   // deliveries during this phase
};

struct RouterResult {
  SimTrace trace;
  std::vector<std::uint8_t> delivered;
  std::vector<std::uint64_t> delivered_at_scale;  // L at delivery, 0 if undelivered
  std::vector<PhaseStat> phases;
  std::size_t delivered_count() const {
    std::size_t n = 0;
    for (auto d : delivered) n += d;
    return n;
  }
};

// The semi-obliviously-assisted router: sweep L upward, and per scale try
// every candidate index on the packets whose pair is still undelivered.
// Delivered packets leave the remaining demand between phases.
inline RouterResult semi_obl_router(const ReciprocalGraph& g,
                                    const std::vector<PacketSpec>& packets, const PathSet& ps,
                                    std::uint64_t master_seed, const RouterParams& rp) {
  ps.validate(g);
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (const auto& x : packets) {
    require(pairs.insert({x.source, x.sink}).second,
            "demand induced by the packets is not a {0,1}-demand");
    if (x.source != x.sink) {
      const auto* candidates = ps.find(x.source, x.sink);
      if (candidates == nullptr || candidates->empty())
        throw ValidationError("demanded pair has no candidate path");
    }
  }

  const std::uint64_t n = g.node_count();
  const DerivedParams dp = derive_params(std::max<std::uint64_t>(n, 2), rp.c, rp.b, rp.knobs);
  const std::size_t alpha = std::max<std::size_t>(ps.alpha(), 1);
  const double beta = 2.0 * static_cast<double>(alpha);
  const std::uint64_t l_scaled = noisy_scaled_l(beta, dp.l);
  const std::uint64_t reps =
      rp.router_reps_override ? *rp.router_reps_override : 18 * std::uint64_t{ceil_log2(n)} + 1;
  const std::uint64_t sweep_max =
      rp.l_sweep_max ? *rp.l_sweep_max : pow_saturating(std::max<std::uint64_t>(n, 2), 10);

  RoutingEngine engine(g, packets);
  RouterResult result;
  result.trace.record_events = rp.record_events;
  result.delivered_at_scale.assign(packets.size(), 0);
  for (std::size_t i = 0; i < packets.size(); ++i)
    if (engine.delivered()[i])  // source == sink packets are born delivered
      result.trace.add({0, 0, EventKind::complete, packets[i].ind, 0});

  std::vector<std::uint64_t> h_values(packets.size());
  std::uint64_t call_counter = 0;

  for (std::uint64_t L = 4; L <= sweep_max;) {
    for (std::uint64_t rep = 0; rep < reps; ++rep) {
      for (std::size_t j = 1; j <= alpha; ++j) {
        const std::uint64_t call_steps =
            mul_saturating(dp.k, mul_saturating(4 * L, l_scaled));
        if (engine.delivered_count() == packets.size()) {
          result.trace.total_steps = add_saturating(result.trace.total_steps, call_steps);
          ++call_counter;
          continue;
        }
        std::vector<std::optional<Path>> assignment(packets.size());
        std::vector<const Path*> phase_paths(packets.size(), nullptr);
        bool any_active = false;
        for (std::size_t i = 0; i < packets.size(); ++i) {
          if (engine.delivered()[i]) continue;
          const auto* candidates = ps.find(packets[i].source, packets[i].sink);
          if (candidates != nullptr && candidates->size() >= j) {
            assignment[i] = (*candidates)[j - 1];
            phase_paths[i] = &(*candidates)[j - 1];
            any_active = true;
          }
        }
        const std::size_t before = engine.delivered_count();
        if (!any_active) {
          result.trace.total_steps = add_saturating(result.trace.total_steps, call_steps);
        } else {
          engine.assign_paths(std::move(assignment));
          const HashSet hs = sample_hash_set(master_seed, dp.k, L, call_counter);
          for (const auto& member : hs.members) {
            for (std::size_t i = 0; i < packets.size(); ++i)
              h_values[i] = phase_paths[i] ? member.hash_path(*phase_paths[i]) : 0;
            engine.run_weak_return_call(L, l_scaled, h_values, result.trace, rp.tie_break,
                                        rp.check_invariants);
          }
        }
        ++call_counter;
        const std::size_t after = engine.delivered_count();
        require(after >= before, "remaining demand grew between phases");
        for (std::size_t i = 0; i < packets.size(); ++i)
          if (engine.delivered()[i] && result.delivered_at_scale[i] == 0 &&
              packets[i].source != packets[i].sink)
            result.delivered_at_scale[i] = L;
        if (after != before) result.phases.push_back({L, rep, j, after - before});
      }
    }
    if (L > sweep_max / 2) break;
    L *= 2;
  }
  result.delivered = engine.delivered();
  return result;
}

// ----- Path-set constructions standing in for the semi-oblivious selection.

namespace detail {

// BFS tree from s; out-edges scanned in ascending id for determinism.
inline std::vector<EdgeId> bfs_parents(const ReciprocalGraph& g, NodeId s) {
  constexpr EdgeId kNoEdge = ~EdgeId{0};
  std::vector<EdgeId> parent_edge(g.node_count(), kNoEdge);
  std::vector<bool> seen(g.node_count(), false);
  seen[s] = true;
  std::queue<NodeId> frontier;
  frontier.push(s);
  while (!frontier.empty()) {
    const NodeId v = frontier.front();
    frontier.pop();
    auto edges = g.out_edges(v);
    std::sort(edges.begin(), edges.end());
    for (EdgeId e : edges) {
      const NodeId u = g.to(e);
      if (seen[u]) continue;
      seen[u] = true;
      parent_edge[u] = e;
      frontier.push(u);
    }
  }
  return parent_edge;
}

inline std::optional<Path> bfs_path(const ReciprocalGraph& g, NodeId s, NodeId t) {
  constexpr EdgeId kNoEdge = ~EdgeId{0};
  auto parent = bfs_parents(g, s);
  if (t != s && parent[t] == kNoEdge) return std::nullopt;
  Path p;
  for (NodeId v = t; v != s;) {
    p.edges.push_back(parent[v]);
    v = g.from(parent[v]);
  }
  std::reverse(p.edges.begin(), p.edges.end());
  return p;
}

}  // namespace detail

inline bool is_tree(const ReciprocalGraph& g) {
  if (g.node_count() == 0) return false;
  if (g.edge_count() != 2 * (std::size_t{g.node_count()} - 1)) return false;
  auto parent = detail::bfs_parents(g, 0);
  for (NodeId v = 1; v < g.node_count(); ++v)
    if (parent[v] == ~EdgeId{0}) return false;
  return true;
}

// On a tree every ordered pair has a unique simple path: a 1-sparse path
// set covering all pairs.
inline PathSet build_tree_path_set(const ReciprocalGraph& g) {
  require(is_tree(g), "tree path set needs a connected acyclic graph");
  PathSet ps;
  for (NodeId s = 0; s < g.node_count(); ++s) {
    auto parent = detail::bfs_parents(g, s);
    for (NodeId t = 0; t < g.node_count(); ++t) {
      if (s == t) continue;
      Path p;
      for (NodeId v = t; v != s;) {
        p.edges.push_back(parent[v]);
        v = g.from(parent[v]);
      }
      std::reverse(p.edges.begin(), p.edges.end());
      ps.entries[{s, t}].push_back(std::move(p));
    }
  }
  return ps;
}

// Yen-style k shortest node-simple paths per ordered pair, unit lengths.
inline std::vector<Path> k_shortest_paths(const ReciprocalGraph& g, NodeId s, NodeId t,
                                          std::size_t k) {
  std::vector<Path> found;
  auto first = detail::bfs_path(g, s, t);
  if (!first) return found;
  found.push_back(std::move(*first));
  std::set<Path> candidates;

  auto shortest_avoiding = [&](NodeId from, const std::set<EdgeId>& banned_edges,
                               const std::set<NodeId>& banned_nodes) -> std::optional<Path> {
    constexpr EdgeId kNoEdge = ~EdgeId{0};
    std::vector<EdgeId> parent(g.node_count(), kNoEdge);
    std::vector<bool> seen(g.node_count(), false);
    seen[from] = true;
    std::queue<NodeId> frontier;
    frontier.push(from);
    while (!frontier.empty()) {
      const NodeId v = frontier.front();
      frontier.pop();
      auto edges = g.out_edges(v);
      std::sort(edges.begin(), edges.end());
      for (EdgeId e : edges) {
        if (banned_edges.count(e)) continue;
        const NodeId u = g.to(e);
        if (seen[u] || banned_nodes.count(u)) continue;
        seen[u] = true;
        parent[u] = e;
        frontier.push(u);
      }
    }
    if (!seen[t]) return std::nullopt;
    Path p;
    for (NodeId v = t; v != from;) {
      p.edges.push_back(parent[v]);
      v = g.from(parent[v]);
    }
    std::reverse(p.edges.begin(), p.edges.end());
    return p;
  };

  while (found.size() < k) {
    const Path& last = found.back();
    const auto last_nodes = last.nodes(g);
    for (std::size_t spur = 0; spur < last.length(); ++spur) {
      std::set<EdgeId> banned_edges;
      std::set<NodeId> banned_nodes;
      for (const Path& p : found) {
        if (p.length() <= spur) continue;
        if (std::equal(p.edges.begin(), p.edges.begin() + spur, last.edges.begin()))
          banned_edges.insert(p.edges[spur]);
      }
      for (std::size_t i = 0; i < spur; ++i) banned_nodes.insert(last_nodes[i]);
      auto tail = shortest_avoiding(last_nodes[spur], banned_edges, banned_nodes);
      if (!tail) continue;
      Path candidate;
      candidate.edges.assign(last.edges.begin(), last.edges.begin() + spur);
      candidate.edges.insert(candidate.edges.end(), tail->edges.begin(), tail->edges.end());
      if (std::find(found.begin(), found.end(), candidate) == found.end())
        candidates.insert(std::move(candidate));
    }
    if (candidates.empty()) break;
    auto best = std::min_element(candidates.begin(), candidates.end(),
                                 [](const Path& a, const Path& b) {
                                   return a.length() != b.length() ? a.length() < b.length()
                                                                   : a < b;
                                 });
    found.push_back(*best);
    candidates.erase(best);
  }
  return found;
}

inline PathSet build_ksp_path_set(const ReciprocalGraph& g, std::size_t alpha) {
  require(alpha >= 1, "sparsity must be at least 1");
  PathSet ps;
  for (NodeId s = 0; s < g.node_count(); ++s)
    for (NodeId t = 0; t < g.node_count(); ++t) {
      if (s == t) continue;
      auto paths = k_shortest_paths(g, s, t, alpha);
      if (!paths.empty()) ps.entries[{s, t}] = std::move(paths);
    }
  return ps;
}

// ----- The virtual-graph wrapper.

using PathSetProvider =
    std::function<PathSet(const ReciprocalGraph&, const std::vector<std::pair<NodeId, NodeId>>&)>;

// Base graph plus one leaf per demanded (sink, identifier) pair.
// Conceptually every node carries n^c leaves; only the ones a packet
// actually targets are materialized, which is behaviourally identical.
struct VirtualGraph {
  ReciprocalGraph lifted;
  NodeId base_nodes = 0;
  std::map<std::pair<NodeId, JobInd>, NodeId> leaf_of;

  NodeId base_of(NodeId v) const {
    return v < base_nodes ? v : leaves.at(v - base_nodes).first;
  }
  std::vector<std::pair<NodeId, JobInd>> leaves;  // leaf order, id - base_nodes
};

inline VirtualGraph make_virtual_graph(const ReciprocalGraph& g,
                                       const std::vector<PacketSpec>& packets) {
  VirtualGraph vg;
  vg.base_nodes = g.node_count();
  std::set<std::pair<NodeId, JobInd>> targets;
  for (const auto& x : packets) targets.insert({x.sink, x.ind});

  vg.lifted = ReciprocalGraph(static_cast<NodeId>(g.node_count() + targets.size()));
  for (EdgeId e = 0; e < g.edge_count(); e += 2) vg.lifted.add_edge(g.from(e), g.to(e));
  NodeId next = g.node_count();
  for (const auto& target : targets) {
    vg.lifted.add_edge(target.first, next);
    vg.leaf_of[target] = next;
    vg.leaves.push_back(target);
    ++next;
  }
  return vg;
}

struct RouteResult {
  RouterResult router;
  VirtualGraph virtual_graph;
  std::vector<PacketSpec> lifted_packets;

  // Projection back to the base graph: delivery at the leaf is delivery of
  // the original packet at its sink.
  std::size_t delivered_count() const { return router.delivered_count(); }
};

inline RouteResult route(const ReciprocalGraph& g, const std::vector<PacketSpec>& packets,
                         std::uint64_t master_seed, const PathSetProvider& provider,
                         const RouterParams& rp) {
  const std::uint64_t id_bound = pow_saturating(std::max<std::uint64_t>(g.node_count(), 2), rp.c);
  std::set<JobInd> ids;
  for (const auto& x : packets) {
    require(x.ind >= 1 && x.ind <= id_bound, "packet identifier outside [1, n^c]");
    require(ids.insert(x.ind).second, "packet identifiers must be unique");
    require(x.source < g.node_count() && x.sink < g.node_count(), "packet endpoint off graph");
  }

  RouteResult result;
  result.virtual_graph = make_virtual_graph(g, packets);
  result.lifted_packets.reserve(packets.size());
  std::vector<std::pair<NodeId, NodeId>> lifted_pairs;
  for (const auto& x : packets) {
    const NodeId leaf = result.virtual_graph.leaf_of.at({x.sink, x.ind});
    result.lifted_packets.push_back({x.source, leaf, x.ind});
    lifted_pairs.push_back({x.source, leaf});
  }

  PathSet lifted_ps;
  try {
    lifted_ps = provider(result.virtual_graph.lifted, lifted_pairs);
  } catch (const std::exception& e) {
    throw ValidationError(std::string("path-set provider failed: ") + e.what());
  }
  for (const auto& pair : lifted_pairs) {
    const auto* candidates = lifted_ps.find(pair.first, pair.second);
    if (candidates == nullptr || candidates->empty())
      throw ValidationError("provider returned no path for a demanded pair");
  }

  result.router = semi_obl_router(result.virtual_graph.lifted, result.lifted_packets,
                                  lifted_ps, master_seed, rp);
  return result;
}

// Provider wrapping the unique-tree-path construction, restricted to the
// demanded pairs.
inline PathSetProvider tree_path_provider() {
  return [](const ReciprocalGraph& g, const std::vector<std::pair<NodeId, NodeId>>& pairs) {
    require(is_tree(g), "tree path provider needs a tree");
    PathSet ps;
    std::map<NodeId, std::vector<EdgeId>> parents;
    for (const auto& [s, t] : pairs) {
      if (s == t) continue;
      auto it = parents.find(s);
      if (it == parents.end()) it = parents.emplace(s, detail::bfs_parents(g, s)).first;
      Path p;
      for (NodeId v = t; v != s;) {
        p.edges.push_back(it->second[v]);
        v = g.from(it->second[v]);
      }
      std::reverse(p.edges.begin(), p.edges.end());
      ps.entries[{s, t}].push_back(std::move(p));
    }
    return ps;
  };
}

inline PathSetProvider ksp_path_provider(std::size_t alpha) {
  return [alpha](const ReciprocalGraph& g,
                 const std::vector<std::pair<NodeId, NodeId>>& pairs) {
    PathSet ps;
    for (const auto& [s, t] : pairs) {
      if (s == t) continue;
      auto paths = k_shortest_paths(g, s, t, alpha);
      if (!paths.empty()) ps.entries[{s, t}] = std::move(paths);
    }
    return ps;
  };
}

}  // namespace lps
