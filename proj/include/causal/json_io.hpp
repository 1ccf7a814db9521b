#pragma once

#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <vector>

#include "causal/dataset.hpp"
#include "causal/discovery.hpp"
#include "causal/error.hpp"
#include "causal/graph.hpp"
#include "causal/longitudinal.hpp"
#include "causal/measurement.hpp"
#include "causal/scm.hpp"

namespace causal {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json parse_json_text(const std::string& text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::parse_error, "malformed JSON");
  return j;
}

inline void expect_object(const Json& j, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::parse_error, where + " must be an object");
}

inline void expect_keys(const Json& j, const std::set<std::string>& allowed,
                        const std::set<std::string>& required, const std::string& where) {
  expect_object(j, where);
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) fail(ErrorCode::parse_error, where + ": unknown key '" + key + "'");
  for (const auto& key : required)
    if (!j.contains(key)) fail(ErrorCode::parse_error, where + ": missing key '" + key + "'");
}

inline std::string as_string(const Json& j, const std::string& where) {
  if (!j.is_string()) fail(ErrorCode::parse_error, where + " must be a string");
  return j.get<std::string>();
}

inline int as_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(ErrorCode::parse_error, where + " must be an integer");
  return j.get<int>();
}

inline double as_number(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(ErrorCode::parse_error, where + " must be a number");
  return j.get<double>();
}

inline std::vector<std::string> as_string_array(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(ErrorCode::parse_error, where + " must be an array");
  std::vector<std::string> out;
  for (const auto& item : j) out.push_back(as_string(item, where + " entry"));
  return out;
}

inline std::vector<double> as_number_array(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(ErrorCode::parse_error, where + " must be an array");
  std::vector<double> out;
  for (const auto& item : j) out.push_back(as_number(item, where + " entry"));
  return out;
}

}  // namespace detail

// ---- graphs ----------------------------------------------------------------

inline Graph parse_graph(const std::string& text) {
  Json j = detail::parse_json_text(text);
  detail::expect_keys(j, {"nodes", "edges"}, {"nodes", "edges"}, "graph");
  if (!j["nodes"].is_array()) fail(ErrorCode::parse_error, "graph nodes must be an array");
  if (!j["edges"].is_array()) fail(ErrorCode::parse_error, "graph edges must be an array");
  std::vector<Variable> vars;
  for (const auto& n : j["nodes"]) {
    detail::expect_keys(n, {"name", "kind"}, {"name"}, "node");
    Variable v;
    v.name = detail::as_string(n["name"], "node name");
    v.kind = VarKind::observed;
    if (n.contains("kind")) {
      std::string kind = detail::as_string(n["kind"], "node kind");
      if (kind == "observed")
        v.kind = VarKind::observed;
      else if (kind == "unobserved")
        v.kind = VarKind::unobserved;
      else
        fail(ErrorCode::parse_error, "node kind must be observed or unobserved");
    }
    vars.push_back(v);
  }
  std::vector<Edge> edges;
  for (const auto& e : j["edges"]) {
    detail::expect_object(e, "edge");
    if (!e.contains("kind")) fail(ErrorCode::parse_error, "edge is missing its kind");
    std::string kind = detail::as_string(e["kind"], "edge kind");
    if (kind == "directed") {
      detail::expect_keys(e, {"kind", "from", "to"}, {"kind", "from", "to"}, "directed edge");
      edges.push_back(directed(detail::as_string(e["from"], "edge from"),
                               detail::as_string(e["to"], "edge to")));
    } else if (kind == "bidirected") {
      detail::expect_keys(e, {"kind", "between"}, {"kind", "between"}, "bidirected edge");
      std::vector<std::string> ends = detail::as_string_array(e["between"], "edge between");
      if (ends.size() != 2)
        fail(ErrorCode::parse_error, "bidirected edge needs exactly two endpoints");
      edges.push_back(bidirected(ends[0], ends[1]));
    } else {
      fail(ErrorCode::parse_error, "edge kind must be directed or bidirected");
    }
  }
  return Graph::build(vars, edges);
}

inline Json graph_to_json(const Graph& g) {
  Json nodes = Json::array();
  for (const auto& v : g.variables())
    nodes.push_back({{"name", v.name},
                     {"kind", v.kind == VarKind::observed ? "observed" : "unobserved"}});
  Json edges = Json::array();
  for (const auto& e : g.edges()) {
    if (e.kind == EdgeKind::directed)
      edges.push_back({{"kind", "directed"}, {"from", e.from}, {"to", e.to}});
    else
      edges.push_back({{"kind", "bidirected"}, {"between", Json::array({e.from, e.to})}});
  }
  return Json{{"nodes", nodes}, {"edges", edges}};
}

inline Json cpdag_to_json(const Cpdag& c) {
  Json nodes = Json::array();
  for (const auto& n : c.nodes) nodes.push_back({{"name", n}, {"kind", "observed"}});
  Json edges = Json::array();
  for (const auto& [from, to] : c.directed)
    edges.push_back({{"kind", "directed"}, {"from", from}, {"to", to}});
  for (const auto& [a, b] : c.undirected)
    edges.push_back({{"kind", "undirected"}, {"between", Json::array({a, b})}});
  return Json{{"nodes", nodes}, {"edges", edges}};
}

// ---- structural models -----------------------------------------------------

inline StructuralModel parse_scm(const std::string& text) {
  Json j = detail::parse_json_text(text);
  detail::expect_keys(j, {"variables", "observed"}, {"variables", "observed"}, "model");
  if (!j["variables"].is_array()) fail(ErrorCode::parse_error, "model variables must be an array");
  std::vector<Mechanism> mechanisms;
  for (const auto& v : j["variables"]) {
    detail::expect_keys(v, {"name", "domain", "parents", "cpt"},
                        {"name", "domain", "parents", "cpt"}, "variable");
    Mechanism m;
    m.name = detail::as_string(v["name"], "variable name");
    m.domain = detail::as_int(v["domain"], "variable domain");
    m.parents = detail::as_string_array(v["parents"], "variable parents");
    m.cpt = detail::as_number_array(v["cpt"], "variable cpt");
    mechanisms.push_back(std::move(m));
  }
  std::vector<std::string> obs = detail::as_string_array(j["observed"], "observed");
  return StructuralModel::build(std::move(mechanisms),
                                std::set<std::string>(obs.begin(), obs.end()));
}

inline Json scm_to_json(const StructuralModel& m) {
  Json vars = Json::array();
  for (const auto& mech : m.mechanisms())
    vars.push_back({{"name", mech.name},
                    {"domain", mech.domain},
                    {"parents", mech.parents},
                    {"cpt", mech.cpt}});
  Json obs = Json::array();
  for (const auto& name : m.observed()) obs.push_back(name);
  return Json{{"variables", vars}, {"observed", obs}};
}

// ---- dataset schemas -------------------------------------------------------

inline Schema parse_schema(const std::string& text) {
  Json j = detail::parse_json_text(text);
  detail::expect_object(j, "schema");
  Schema schema;
  for (const auto& [name, spec] : j.items()) {
    detail::expect_keys(spec, {"type", "levels"}, {"type"}, "schema entry " + name);
    std::string type = detail::as_string(spec["type"], "schema type");
    if (type == "categorical") {
      if (!spec.contains("levels"))
        fail(ErrorCode::parse_error, "categorical schema entry needs levels");
      schema.emplace(name, categorical(detail::as_int(spec["levels"], "levels")));
    } else if (type == "continuous") {
      if (spec.contains("levels"))
        fail(ErrorCode::parse_error, "continuous schema entry must not give levels");
      schema.emplace(name, continuous());
    } else {
      fail(ErrorCode::parse_error, "schema type must be categorical or continuous");
    }
  }
  return schema;
}

// ---- misclassification matrices --------------------------------------------

inline MisclassificationMatrix parse_misclassification(const std::string& text) {
  Json j = detail::parse_json_text(text);
  detail::expect_keys(j, {"proxy_levels", "true_levels", "columns"},
                      {"proxy_levels", "true_levels", "columns"}, "misclassification");
  int proxy = detail::as_int(j["proxy_levels"], "proxy_levels");
  int truth = detail::as_int(j["true_levels"], "true_levels");
  if (!j["columns"].is_array()) fail(ErrorCode::parse_error, "columns must be an array");
  std::vector<std::vector<double>> columns;
  for (const auto& col : j["columns"])
    columns.push_back(detail::as_number_array(col, "column"));
  return MisclassificationMatrix::build(proxy, truth, columns);
}

// ---- policies --------------------------------------------------------------

inline PolicySpec parse_policy(const std::string& text) {
  Json j = detail::parse_json_text(text);
  if (!j.is_array()) fail(ErrorCode::parse_error, "policy must be an array of phases");
  PolicySpec policy;
  for (const auto& ph : j) {
    detail::expect_keys(ph, {"action", "given", "table"}, {"action", "given", "table"},
                        "policy phase");
    PolicyPhase phase;
    phase.action = detail::as_string(ph["action"], "policy action");
    phase.given = detail::as_string_array(ph["given"], "policy given");
    detail::expect_object(ph["table"], "policy table");
    for (const auto& [key, probs] : ph["table"].items()) {
      std::vector<int> levels;
      if (!key.empty() || !phase.given.empty()) {
        std::size_t start = 0;
        while (true) {
          std::size_t comma = key.find(',', start);
          std::string part = key.substr(start, comma == std::string::npos ? comma : comma - start);
          try {
            std::size_t used = 0;
            int v = std::stoi(part, &used);
            if (used != part.size()) throw std::invalid_argument(part);
            levels.push_back(v);
          } catch (const std::exception&) {
            fail(ErrorCode::parse_error, "policy table key must be comma-separated levels");
          }
          if (comma == std::string::npos) break;
          start = comma + 1;
        }
      }
      phase.table.emplace(std::move(levels), detail::as_number_array(probs, "policy row"));
    }
    policy.push_back(std::move(phase));
  }
  return policy;
}

}  // namespace causal
