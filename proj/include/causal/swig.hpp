#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "causal/error.hpp"
#include "causal/graph.hpp"

namespace causal {

/**
 * Single-world intervention graph. Each intervened variable is split into a
 * random part (keeps its name and every incoming edge) and a fixed part named
 * by the intervention's value label (inherits every outgoing directed edge).
 * Descendants of intervened variables carry decorated display labels listing
 * the value labels they inherit. Fixed parts are constants: association never
 * flows through them, so separation queries reduce to the base graph with the
 * intervened variables' outgoing edges removed.
 */
struct Swig {
  Graph base;
  std::map<std::string, std::string> interventions;  // variable -> value label
  Graph split;                                       // random + fixed nodes
  std::map<std::string, std::string> labels;         // variable -> display label
  std::set<std::string> fixed_nodes;                 // value-label node names
  Graph random_view;                                 // base minus out-edges of intervened

  const std::string& label_of(const std::string& name) const {
    auto it = labels.find(name);
    return it == labels.end() ? name : it->second;
  }

  bool d_separated(const std::set<std::string>& x, const std::set<std::string>& y,
                   const std::set<std::string>& z) const {
    return random_view.d_separated(x, y, z);
  }
};

inline Swig construct_swig(const Graph& g, const std::map<std::string, std::string>& interventions) {
  Swig s;
  s.base = g;
  s.interventions = interventions;
  std::set<std::string> intervened;
  for (const auto& [name, label] : interventions) {
    if (!g.is_observed(name))
      fail(ErrorCode::intervening_on_unobserved, "cannot intervene on unobserved " + name);
    if (label.empty()) fail(ErrorCode::duplicate_name, "empty value label for " + name);
    intervened.insert(name);
  }

  // decorated labels: value labels inherited from intervened strict ancestors,
  // listed in topological order of the intervened variables
  std::vector<std::string> topo = g.topological_order();
  std::map<std::string, std::size_t> topo_pos;
  for (std::size_t i = 0; i < topo.size(); ++i) topo_pos[topo[i]] = i;
  std::vector<std::string> ordered_interventions;
  for (const auto& name : topo)
    if (intervened.count(name)) ordered_interventions.push_back(name);

  for (const auto& v : g.variables()) {
    std::set<std::string> anc = g.ancestors({v.name});
    anc.erase(v.name);
    std::string inherited;
    for (const auto& a : ordered_interventions)
      if (anc.count(a)) {
        if (!inherited.empty()) inherited += ",";
        inherited += interventions.at(a);
      }
    if (!inherited.empty()) s.labels[v.name] = v.name + "(" + inherited + ")";
  }

  // split graph: random parts keep incoming (directed and bidirected) edges,
  // fixed parts take over the outgoing directed edges
  std::vector<Variable> vars = g.variables();
  for (const auto& name : ordered_interventions)
    vars.push_back(Variable{interventions.at(name), VarKind::observed});
  std::vector<Edge> edges;
  for (const auto& e : g.edges()) {
    if (e.kind == EdgeKind::directed && intervened.count(e.from))
      edges.push_back(directed(interventions.at(e.from), e.to));
    else
      edges.push_back(e);
  }
  s.split = Graph::build(std::move(vars), std::move(edges));
  for (const auto& name : ordered_interventions) s.fixed_nodes.insert(interventions.at(name));
  s.random_view = g.without_out_edges(intervened);
  return s;
}

}  // namespace causal
