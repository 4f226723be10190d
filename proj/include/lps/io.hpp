#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lps/adversary.hpp"
#include "lps/common.hpp"
#include "lps/core.hpp"
#include "lps/routing.hpp"
#include "lps/trace.hpp"

// Structured-text file formats:
//   instance  {"machines": n, "domain": [[id...]...], "jobs": [{"ind", "seq"}...]}
//   graph     {"n": n, "edges": [[u, v]...]}         (reciprocal pairs implied)
//   demand    {"pairs": [[s, t]...]}
//   path set  {"alpha": a, "entries": [{"s", "t", "paths": [[edge id...]...]}...]}
//   script    {"steps": [{"t": t, "pushes": [{"job", "amount"}...]}...]}
//   seed      {"master_seed", "c", "b", "knobs", "provenance"}

namespace lps {

using json = nlohmann::json;

struct Instance {
  std::uint64_t machines = 0;
  DomainSet domain;
  std::vector<JobSpec> jobs;
};

inline json to_json(const Instance& inst) {
  json j;
  j["machines"] = inst.machines;
  j["domain"] = json::array();
  for (const auto& seq : inst.domain.sequences) j["domain"].push_back(seq);
  j["jobs"] = json::array();
  for (const auto& job : inst.jobs) j["jobs"].push_back({{"ind", job.ind}, {"seq", job.seq}});
  return j;
}

inline Instance instance_from_json(const json& j) {
  Instance inst;
  inst.machines = j.at("machines").get<std::uint64_t>();
  for (const auto& seq : j.at("domain"))
    inst.domain.sequences.push_back(seq.get<Sequence>());
  for (const auto& job : j.at("jobs"))
    inst.jobs.push_back({job.at("ind").get<JobInd>(), job.at("seq").get<Sequence>()});
  return inst;
}

inline json to_json(const ReciprocalGraph& g) {
  json j;
  j["n"] = g.node_count();
  j["edges"] = json::array();
  for (EdgeId e = 0; e < g.edge_count(); e += 2)
    j["edges"].push_back({g.from(e), g.to(e)});
  return j;
}

inline ReciprocalGraph graph_from_json(const json& j) {
  ReciprocalGraph g(j.at("n").get<NodeId>());
  for (const auto& edge : j.at("edges"))
    g.add_edge(edge.at(0).get<NodeId>(), edge.at(1).get<NodeId>());
  return g;
}

inline json to_json(const Demand& d) {
  json j;
  j["pairs"] = json::array();
  for (auto [s, t] : d.pairs) j["pairs"].push_back({s, t});
  return j;
}

inline Demand demand_from_json(const json& j) {
  Demand d;
  for (const auto& pair : j.at("pairs"))
    d.pairs.push_back({pair.at(0).get<NodeId>(), pair.at(1).get<NodeId>()});
  return d;
}

inline json to_json(const PathSet& ps) {
  json j;
  j["alpha"] = ps.alpha();
  j["entries"] = json::array();
  for (const auto& [pair, paths] : ps.entries) {
    json entry;
    entry["s"] = pair.first;
    entry["t"] = pair.second;
    entry["paths"] = json::array();
    for (const Path& p : paths) entry["paths"].push_back(p.edges);
    j["entries"].push_back(std::move(entry));
  }
  return j;
}

inline PathSet path_set_from_json(const json& j) {
  PathSet ps;
  for (const auto& entry : j.at("entries")) {
    const NodeId s = entry.at("s").get<NodeId>();
    const NodeId t = entry.at("t").get<NodeId>();
    for (const auto& edges : entry.at("paths"))
      ps.entries[{s, t}].push_back(Path{edges.get<std::vector<EdgeId>>()});
  }
  return ps;
}

inline json to_json(const AdversaryStrategy& strategy) {
  json j;
  j["kind"] = to_string(strategy.kind);
  switch (strategy.kind) {
    case AdversaryKind::scripted: {
      j["steps"] = json::array();
      for (const auto& [t, pushes] : strategy.script) {
        json step;
        step["t"] = t;
        step["pushes"] = json::array();
        for (const auto& [job, amount] : pushes)
          step["pushes"].push_back({{"job", job}, {"amount", amount}});
        j["steps"].push_back(std::move(step));
      }
      break;
    }
    case AdversaryKind::random_push:
      j["rate"] = strategy.rate;
      j["seed"] = strategy.seed;
      break;
    case AdversaryKind::rush_to_hotspot:
      j["machine"] = strategy.hotspot;
      break;
    case AdversaryKind::none:
      break;
  }
  return j;
}

inline AdversaryStrategy adversary_from_json(const json& j) {
  AdversaryStrategy strategy;
  const std::string kind = j.value("kind", "none");
  if (kind == "none") {
    strategy.kind = AdversaryKind::none;
  } else if (kind == "scripted") {
    strategy.kind = AdversaryKind::scripted;
    for (const auto& step : j.at("steps")) {
      PushScript pushes;
      for (const auto& push : step.at("pushes"))
        pushes[push.at("job").get<JobInd>()] = push.at("amount").get<std::uint64_t>();
      strategy.script[step.at("t").get<std::uint64_t>()] = std::move(pushes);
    }
  } else if (kind == "random-push") {
    strategy.kind = AdversaryKind::random_push;
    strategy.rate = j.at("rate").get<double>();
    strategy.seed = j.value("seed", std::uint64_t{0});
  } else if (kind == "rush-to-hotspot") {
    strategy.kind = AdversaryKind::rush_to_hotspot;
    strategy.hotspot = j.at("machine").get<MachineId>();
  } else {
    throw ValidationError("unknown adversary kind: " + kind);
  }
  return strategy;
}

inline json to_json(const ScaleKnobs& knobs) {
  json j;
  j["l_factor"] = knobs.l_factor;
  j["k_factor"] = knobs.k_factor;
  if (knobs.l_override) j["l"] = *knobs.l_override;
  if (knobs.k_override) j["k"] = *knobs.k_override;
  if (knobs.reps_override) j["reps"] = *knobs.reps_override;
  if (knobs.l_max_override) j["l_max"] = *knobs.l_max_override;
  return j;
}

inline ScaleKnobs knobs_from_json(const json& j) {
  ScaleKnobs knobs;
  knobs.l_factor = j.value("l_factor", 150.0);
  knobs.k_factor = j.value("k_factor", 8.0);
  if (j.contains("l")) knobs.l_override = j.at("l").get<std::uint64_t>();
  if (j.contains("k")) knobs.k_override = j.at("k").get<std::uint64_t>();
  if (j.contains("reps")) knobs.reps_override = j.at("reps").get<std::uint64_t>();
  if (j.contains("l_max")) knobs.l_max_override = j.at("l_max").get<std::uint64_t>();
  return knobs;
}

inline json to_json(const TraceSummary& s) {
  return json{{"completed", s.completed},
              {"total", s.total},
              {"completion_step", s.completion_step},
              {"total_steps", s.total_steps},
              {"drops", s.drops}};
}

inline std::string event_csv_header() { return "t,machine,kind,job,pos"; }

inline std::string to_csv(const Event& ev) {
  std::ostringstream os;
  os << ev.t << ',' << ev.machine << ',' << to_string(ev.kind) << ',' << ev.job << ','
     << ev.pos;
  return os.str();
}

inline json to_json(const Event& ev) {
  return json{{"t", ev.t},
              {"machine", ev.machine},
              {"kind", to_string(ev.kind)},
              {"job", ev.job},
              {"pos", ev.pos}};
}

// Line-delimited event records.
inline void write_trace_jsonl(std::ostream& os, const SimTrace& trace) {
  for (const auto& ev : trace.events) os << to_json(ev).dump() << '\n';
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << j.dump(2) << '\n';
}

inline Instance load_instance(const std::string& path) {
  return instance_from_json(load_json_file(path));
}
inline ReciprocalGraph load_graph(const std::string& path) {
  return graph_from_json(load_json_file(path));
}
inline Demand load_demand(const std::string& path) {
  return demand_from_json(load_json_file(path));
}
inline PathSet load_path_set(const std::string& path) {
  return path_set_from_json(load_json_file(path));
}
inline void save_path_set(const std::string& path, const PathSet& ps) {
  write_json_file(path, to_json(ps));
}

}  // namespace lps
