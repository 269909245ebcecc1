#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsst/adversary.hpp"
#include "dsst/compress.hpp"
#include "dsst/graph.hpp"
#include "dsst/model.hpp"
#include "dsst/sim.hpp"
#include "dsst/tracker.hpp"
#include "dsst/types.hpp"

namespace dsst {

// Scenario document problem: syntax, an unknown key, a missing field, or a
// type mismatch.  The message carries the JSON path of the offender.
struct ConfigError : Error {
  using Error::Error;
};

enum class CompressionMode { kIdentity, kGiven, kDesign };

// In-memory form of a scenario document.  Node ids are 0-based here and
// 1-based in the document.
struct ScenarioConfig {
  int version = 1;
  std::optional<Matrix> a;             // discrete-time A
  std::optional<Matrix> a_continuous;  // continuous-time A, discretized with tau
  double tau = 0.0;
  Matrix c;

  int p = 0;
  std::vector<CommGraph::Edge> edges;

  int s = 0;
  AttackPlan attack;

  CompressionMode mode = CompressionMode::kIdentity;
  std::optional<Matrix> d;  // given mode
  std::uint64_t design_seed = 0;
  int design_max_tries = 8;

  std::optional<TrackerGains> gains;  // nullopt = auto
  double epsilon = 1e-6;

  long horizon = 0;
  Vector x0;
  std::uint64_t seed = 0;
  int decode_cadence = 1;

  std::string trace_path = "trace.csv";
  std::string summary_path = "summary.json";
};

namespace cfg {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
  throw ConfigError("config error at " + path + ": " + msg);
}

inline void check_object(const json& node, const std::string& path,
                         const std::set<std::string>& known,
                         const std::set<std::string>& required) {
  if (!node.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : node.items())
    if (!known.count(key)) fail(path + "." + key, "unknown key");
  for (const std::string& key : required)
    if (!node.contains(key)) fail(path, "missing required key '" + key + "'");
}

inline double parse_number(const json& node, const std::string& path) {
  if (!node.is_number()) fail(path, "expected a number");
  return node.get<double>();
}

inline long parse_integer(const json& node, const std::string& path) {
  if (!node.is_number_integer()) fail(path, "expected an integer");
  return node.get<long>();
}

inline std::uint64_t parse_seed(const json& node, const std::string& path) {
  if (node.is_number_unsigned()) return node.get<std::uint64_t>();
  if (node.is_number_integer()) {
    const long long value = node.get<long long>();
    if (value < 0) fail(path, "seed must be nonnegative");
    return static_cast<std::uint64_t>(value);
  }
  fail(path, "expected an integer");
}

inline Vector parse_vector(const json& node, const std::string& path) {
  if (!node.is_array()) fail(path, "expected an array of numbers");
  Vector v(node.size());
  for (std::size_t i = 0; i < node.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = parse_number(node[i], path + "[" + std::to_string(i) + "]");
  return v;
}

// Row-major nested arrays.
inline Matrix parse_matrix(const json& node, const std::string& path) {
  if (!node.is_array() || node.empty()) fail(path, "expected a non-empty array of rows");
  const std::size_t cols = node[0].is_array() ? node[0].size() : 0;
  if (cols == 0) fail(path, "expected rows to be non-empty arrays");
  Matrix m(node.size(), cols);
  for (std::size_t r = 0; r < node.size(); ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    if (!node[r].is_array() || node[r].size() != cols) fail(row_path, "ragged row");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_number(node[r][c], row_path + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline ordered_json emit_matrix(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

inline ordered_json emit_vector(const Vector& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

inline int parse_node_id(const json& node, const std::string& path, int p) {
  const long id = parse_integer(node, path);
  if (id < 1 || id > p) fail(path, "node id out of range 1.." + std::to_string(p));
  return static_cast<int>(id - 1);
}

inline AttackPlan parse_attack(const json& node, const std::string& path, int p) {
  if (!node.is_array()) fail(path, "expected an array of attack entries");
  AttackPlan plan;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string entry_path = path + "[" + std::to_string(i) + "]";
    const json& entry = node[i];
    if (!entry.is_object() || !entry.contains("kind"))
      fail(entry_path, "expected {node, kind, ...}");
    const std::string kind = entry["kind"].is_string() ? entry["kind"].get<std::string>() : "";
    NodeAttack attack;
    if (kind == "consistent_fake_state") {
      check_object(entry, entry_path, {"node", "kind", "x0"}, {"node", "kind", "x0"});
      attack.kind = ConsistentFakeState{parse_vector(entry["x0"], entry_path + ".x0")};
    } else if (kind == "companion_drift") {
      check_object(entry, entry_path, {"node", "kind", "e0"}, {"node", "kind", "e0"});
      attack.kind = CompanionDrift{parse_vector(entry["e0"], entry_path + ".e0")};
    } else if (kind == "jump") {
      check_object(entry, entry_path, {"node", "kind", "t0", "offset"},
                   {"node", "kind", "t0", "offset"});
      attack.kind = JumpAttack{parse_integer(entry["t0"], entry_path + ".t0"),
                               parse_number(entry["offset"], entry_path + ".offset")};
    } else {
      fail(entry_path + ".kind",
           "unknown kind (expected consistent_fake_state, companion_drift, or jump)");
    }
    attack.node = parse_node_id(entry["node"], entry_path + ".node", p);
    plan.attacks.push_back(std::move(attack));
  }
  return plan;
}

inline ordered_json emit_attack(const AttackPlan& plan) {
  ordered_json arr = ordered_json::array();
  for (const NodeAttack& attack : plan.attacks) {
    ordered_json entry;
    entry["node"] = attack.node + 1;
    if (const auto* fake = std::get_if<ConsistentFakeState>(&attack.kind)) {
      entry["kind"] = "consistent_fake_state";
      entry["x0"] = emit_vector(fake->fake_x0);
    } else if (const auto* drift = std::get_if<CompanionDrift>(&attack.kind)) {
      entry["kind"] = "companion_drift";
      entry["e0"] = emit_vector(drift->seed);
    } else if (const auto* jump = std::get_if<JumpAttack>(&attack.kind)) {
      entry["kind"] = "jump";
      entry["t0"] = jump->t0;
      entry["offset"] = jump->offset;
    }
    arr.push_back(entry);
  }
  return arr;
}

inline void parse_system_section(const json& system, ScenarioConfig& config) {
  if (system.contains("continuous")) {
    check_object(system, "$.system", {"continuous", "C"}, {"continuous", "C"});
    check_object(system["continuous"], "$.system.continuous", {"A", "tau"}, {"A", "tau"});
    config.a_continuous = parse_matrix(system["continuous"]["A"], "$.system.continuous.A");
    config.tau = parse_number(system["continuous"]["tau"], "$.system.continuous.tau");
    if (!(config.tau > 0.0)) fail("$.system.continuous.tau", "sampling period must be positive");
  } else {
    check_object(system, "$.system", {"A", "C"}, {"A", "C"});
    config.a = parse_matrix(system["A"], "$.system.A");
  }
  config.c = parse_matrix(system["C"], "$.system.C");
}

inline void parse_compression_section(const json& compression, ScenarioConfig& config) {
  check_object(compression, "$.compression", {"mode", "D", "seed", "max_tries"}, {"mode"});
  const std::string mode =
      compression["mode"].is_string() ? compression["mode"].get<std::string>() : "";
  if (mode == "identity") {
    check_object(compression, "$.compression", {"mode"}, {"mode"});
    config.mode = CompressionMode::kIdentity;
  } else if (mode == "given") {
    check_object(compression, "$.compression", {"mode", "D"}, {"mode", "D"});
    config.mode = CompressionMode::kGiven;
    config.d = parse_matrix(compression["D"], "$.compression.D");
  } else if (mode == "design") {
    check_object(compression, "$.compression", {"mode", "seed", "max_tries"}, {"mode"});
    config.mode = CompressionMode::kDesign;
    if (compression.contains("seed"))
      config.design_seed = parse_seed(compression["seed"], "$.compression.seed");
    if (compression.contains("max_tries")) {
      config.design_max_tries =
          static_cast<int>(parse_integer(compression["max_tries"], "$.compression.max_tries"));
      if (config.design_max_tries < 1) fail("$.compression.max_tries", "must be >= 1");
    }
  } else {
    fail("$.compression.mode", "expected identity, given, or design");
  }
}

}  // namespace cfg

inline ScenarioConfig parse_scenario_config(const nlohmann::json& doc) {
  using cfg::check_object;
  using cfg::fail;
  ScenarioConfig config;
  check_object(doc, "$",
               {"version", "system", "graph", "security", "compression", "tracker", "run",
                "output"},
               {"version", "system", "graph", "security", "compression", "run"});
  if (!doc["version"].is_number_integer() || doc["version"].get<int>() != 1)
    fail("$.version", "unsupported version (expected 1)");

  cfg::parse_system_section(doc["system"], config);

  const nlohmann::json& graph = doc["graph"];
  check_object(graph, "$.graph", {"p", "edges"}, {"p", "edges"});
  config.p = static_cast<int>(cfg::parse_integer(graph["p"], "$.graph.p"));
  if (config.p < 1) fail("$.graph.p", "node count must be >= 1");
  if (!graph["edges"].is_array()) fail("$.graph.edges", "expected an array of [i, j, weight]");
  for (std::size_t k = 0; k < graph["edges"].size(); ++k) {
    const std::string edge_path = "$.graph.edges[" + std::to_string(k) + "]";
    const nlohmann::json& e = graph["edges"][k];
    if (!e.is_array() || e.size() != 3) fail(edge_path, "expected [i, j, weight]");
    CommGraph::Edge edge;
    edge.i = cfg::parse_node_id(e[0], edge_path + "[0]", config.p);
    edge.j = cfg::parse_node_id(e[1], edge_path + "[1]", config.p);
    edge.weight = cfg::parse_number(e[2], edge_path + "[2]");
    config.edges.push_back(edge);
  }

  const nlohmann::json& security = doc["security"];
  check_object(security, "$.security", {"s", "attack"}, {"s"});
  config.s = static_cast<int>(cfg::parse_integer(security["s"], "$.security.s"));
  if (config.s < 0) fail("$.security.s", "sparsity must be nonnegative");
  if (security.contains("attack"))
    config.attack = cfg::parse_attack(security["attack"], "$.security.attack", config.p);

  cfg::parse_compression_section(doc["compression"], config);

  if (doc.contains("tracker")) {
    const nlohmann::json& tracker = doc["tracker"];
    check_object(tracker, "$.tracker", {"gains", "epsilon"}, {});
    if (tracker.contains("gains")) {
      if (tracker["gains"].is_string()) {
        if (tracker["gains"].get<std::string>() != "auto")
          fail("$.tracker.gains", "expected \"auto\" or {k_p, k_i}");
      } else {
        check_object(tracker["gains"], "$.tracker.gains", {"k_p", "k_i"}, {"k_p", "k_i"});
        config.gains =
            TrackerGains{cfg::parse_number(tracker["gains"]["k_p"], "$.tracker.gains.k_p"),
                         cfg::parse_number(tracker["gains"]["k_i"], "$.tracker.gains.k_i")};
      }
    }
    if (tracker.contains("epsilon")) {
      config.epsilon = cfg::parse_number(tracker["epsilon"], "$.tracker.epsilon");
      if (!(config.epsilon > 0.0)) fail("$.tracker.epsilon", "tolerance must be positive");
    }
  }

  const nlohmann::json& run = doc["run"];
  check_object(run, "$.run", {"T", "x0", "seed", "decode_cadence"}, {"T", "x0"});
  config.horizon = cfg::parse_integer(run["T"], "$.run.T");
  if (config.horizon < 0) fail("$.run.T", "horizon must be nonnegative");
  config.x0 = cfg::parse_vector(run["x0"], "$.run.x0");
  if (run.contains("seed")) config.seed = cfg::parse_seed(run["seed"], "$.run.seed");
  if (run.contains("decode_cadence")) {
    config.decode_cadence =
        static_cast<int>(cfg::parse_integer(run["decode_cadence"], "$.run.decode_cadence"));
    if (config.decode_cadence < 1) fail("$.run.decode_cadence", "must be >= 1");
  }

  if (doc.contains("output")) {
    const nlohmann::json& output = doc["output"];
    check_object(output, "$.output", {"trace", "summary"}, {});
    if (output.contains("trace")) {
      if (!output["trace"].is_string()) fail("$.output.trace", "expected a path string");
      config.trace_path = output["trace"].get<std::string>();
    }
    if (output.contains("summary")) {
      if (!output["summary"].is_string()) fail("$.output.summary", "expected a path string");
      config.summary_path = output["summary"].get<std::string>();
    }
  }
  return config;
}

inline ScenarioConfig parse_scenario_config(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw ConfigError(std::string("config parse error: ") + err.what());
  }
  return parse_scenario_config(doc);
}

// Canonical form: every section explicit, keys in schema order, defaults
// materialized.  parse(emit(parse(x))) == parse(x).
inline std::string emit_scenario_config(const ScenarioConfig& config) {
  cfg::ordered_json doc;
  doc["version"] = config.version;
  cfg::ordered_json system;
  if (config.a_continuous) {
    cfg::ordered_json continuous;
    continuous["A"] = cfg::emit_matrix(*config.a_continuous);
    continuous["tau"] = config.tau;
    system["continuous"] = continuous;
  } else {
    system["A"] = cfg::emit_matrix(*config.a);
  }
  system["C"] = cfg::emit_matrix(config.c);
  doc["system"] = system;

  cfg::ordered_json graph;
  graph["p"] = config.p;
  cfg::ordered_json edges = cfg::ordered_json::array();
  for (const CommGraph::Edge& e : config.edges)
    edges.push_back(cfg::ordered_json::array({e.i + 1, e.j + 1, e.weight}));
  graph["edges"] = edges;
  doc["graph"] = graph;

  cfg::ordered_json security;
  security["s"] = config.s;
  security["attack"] = cfg::emit_attack(config.attack);
  doc["security"] = security;

  cfg::ordered_json compression;
  switch (config.mode) {
    case CompressionMode::kIdentity:
      compression["mode"] = "identity";
      break;
    case CompressionMode::kGiven:
      compression["mode"] = "given";
      compression["D"] = cfg::emit_matrix(*config.d);
      break;
    case CompressionMode::kDesign:
      compression["mode"] = "design";
      compression["seed"] = config.design_seed;
      compression["max_tries"] = config.design_max_tries;
      break;
  }
  doc["compression"] = compression;

  cfg::ordered_json tracker;
  if (config.gains) {
    cfg::ordered_json gains;
    gains["k_p"] = config.gains->k_p;
    gains["k_i"] = config.gains->k_i;
    tracker["gains"] = gains;
  } else {
    tracker["gains"] = "auto";
  }
  tracker["epsilon"] = config.epsilon;
  doc["tracker"] = tracker;

  cfg::ordered_json run;
  run["T"] = config.horizon;
  run["x0"] = cfg::emit_vector(config.x0);
  run["seed"] = config.seed;
  run["decode_cadence"] = config.decode_cadence;
  doc["run"] = run;

  cfg::ordered_json output;
  output["trace"] = config.trace_path;
  output["summary"] = config.summary_path;
  doc["output"] = output;
  return doc.dump(2) + "\n";
}

// Materializes the runnable scenario.  Compression is certified here only in
// design mode; identity/given matrices are packaged as-is and judged by the
// scenario validators, so forced runs of failing instances stay possible.
inline Scenario build_scenario(const ScenarioConfig& config) {
  Matrix a = config.a_continuous ? discretize(*config.a_continuous, config.tau) : *config.a;
  LtiSystem sys(std::move(a), config.c);
  CommGraph graph(config.p, config.edges);
  if (config.p != sys.p())
    throw ConfigError("config error at $.graph.p: node count " + std::to_string(config.p) +
                      " does not match the " + std::to_string(sys.p()) + " sensor rows of C");
  CompressionMatrix compression;
  switch (config.mode) {
    case CompressionMode::kIdentity:
      compression = uncertified_compression(sys, Matrix::Identity(sys.p(), sys.p()), config.s);
      break;
    case CompressionMode::kGiven:
      if (config.d->cols() != sys.p())
        throw ConfigError("config error at $.compression.D: expected " +
                          std::to_string(sys.p()) + " columns");
      compression = uncertified_compression(sys, *config.d, config.s);
      break;
    case CompressionMode::kDesign:
      compression =
          design_compression(sys, config.s, config.design_seed, config.design_max_tries);
      break;
  }
  if (config.x0.size() != sys.n())
    throw ConfigError("config error at $.run.x0: expected " + std::to_string(sys.n()) +
                      " entries");
  return Scenario{std::move(sys),
                  std::move(graph),
                  std::move(compression),
                  config.s,
                  config.x0,
                  config.attack,
                  config.horizon,
                  config.gains,
                  config.epsilon,
                  config.seed,
                  config.decode_cadence,
                  false};
}

// Input document of the decode subcommand: system, sparsity budget,
// compression, and the tracked estimate w (v*n entries).
struct DecodeInput {
  std::optional<Matrix> a;
  std::optional<Matrix> a_continuous;
  double tau = 0.0;
  Matrix c;
  int s = 0;
  CompressionMode mode = CompressionMode::kIdentity;
  std::optional<Matrix> d;
  std::uint64_t design_seed = 0;
  int design_max_tries = 8;
  Vector w;
};

inline DecodeInput parse_decode_input(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw ConfigError(std::string("config parse error: ") + err.what());
  }
  cfg::check_object(doc, "$", {"version", "system", "security", "compression", "w"},
                    {"version", "system", "security", "compression", "w"});
  if (!doc["version"].is_number_integer() || doc["version"].get<int>() != 1)
    cfg::fail("$.version", "unsupported version (expected 1)");
  ScenarioConfig scratch;
  cfg::parse_system_section(doc["system"], scratch);
  cfg::check_object(doc["security"], "$.security", {"s"}, {"s"});
  const long s = cfg::parse_integer(doc["security"]["s"], "$.security.s");
  if (s < 0) cfg::fail("$.security.s", "sparsity must be nonnegative");
  cfg::parse_compression_section(doc["compression"], scratch);
  DecodeInput input;
  input.a = scratch.a;
  input.a_continuous = scratch.a_continuous;
  input.tau = scratch.tau;
  input.c = scratch.c;
  input.s = static_cast<int>(s);
  input.mode = scratch.mode;
  input.d = scratch.d;
  input.design_seed = scratch.design_seed;
  input.design_max_tries = scratch.design_max_tries;
  input.w = cfg::parse_vector(doc["w"], "$.w");
  return input;
}

}  // namespace dsst
