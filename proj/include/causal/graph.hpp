#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <deque>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "causal/error.hpp"

namespace causal {

enum class VarKind { observed, unobserved };

struct Variable {
  std::string name;
  VarKind kind = VarKind::observed;
  friend bool operator==(const Variable&, const Variable&) = default;
};

enum class EdgeKind { directed, bidirected };

/** Directed edge from->to, or bidirected link (stored with from < to). */
struct Edge {
  EdgeKind kind = EdgeKind::directed;
  std::string from;
  std::string to;
  friend bool operator==(const Edge&, const Edge&) = default;
};

inline Edge directed(std::string from, std::string to) {
  return Edge{EdgeKind::directed, std::move(from), std::move(to)};
}
inline Edge bidirected(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return Edge{EdgeKind::bidirected, std::move(a), std::move(b)};
}

/**
 * Immutable mixed graph: directed edges plus bidirected links whose endpoints
 * both carry arrowheads. Construction validates names, rejects self loops,
 * duplicate edges and directed cycles. Variables and edges are held in a
 * canonical sorted order, so equal graphs compare equal structurally.
 */
class Graph {
 public:
  Graph() = default;

  static Graph build(std::vector<Variable> vars, std::vector<Edge> edges) {
    Graph g;
    std::sort(vars.begin(), vars.end(),
              [](const Variable& a, const Variable& b) { return a.name < b.name; });
    for (const auto& v : vars) {
      if (v.name.empty()) fail(ErrorCode::duplicate_name, "variable with empty name");
      if (!g.index_.emplace(v.name, g.vars_.size()).second)
        fail(ErrorCode::duplicate_name, "duplicate variable name: " + v.name);
      g.vars_.push_back(v);
    }
    const std::size_t n = g.vars_.size();
    g.parents_.resize(n);
    g.children_.resize(n);
    g.siblings_.resize(n);
    for (auto& e : edges) {
      if (e.kind == EdgeKind::bidirected && e.to < e.from) std::swap(e.from, e.to);
      auto fi = g.index_.find(e.from);
      auto ti = g.index_.find(e.to);
      if (fi == g.index_.end() || ti == g.index_.end())
        fail(ErrorCode::dangling_edge,
             "edge endpoint not declared: " + e.from + (e.kind == EdgeKind::directed ? " -> " : " <-> ") + e.to);
      if (e.from == e.to) fail(ErrorCode::self_loop, "self loop on " + e.from);
    }
    std::sort(edges.begin(), edges.end(), edge_less);
    for (std::size_t i = 1; i < edges.size(); ++i)
      if (edges[i] == edges[i - 1])
        fail(ErrorCode::duplicate_name, "duplicate edge: " + edges[i].from + " / " + edges[i].to);
    g.edges_ = std::move(edges);
    for (const auto& e : g.edges_) {
      std::size_t f = g.index_.at(e.from), t = g.index_.at(e.to);
      if (e.kind == EdgeKind::directed) {
        g.children_[f].push_back(t);
        g.parents_[t].push_back(f);
      } else {
        g.siblings_[f].push_back(t);
        g.siblings_[t].push_back(f);
      }
    }
    for (auto& adj : g.parents_) std::sort(adj.begin(), adj.end());
    for (auto& adj : g.children_) std::sort(adj.begin(), adj.end());
    for (auto& adj : g.siblings_) std::sort(adj.begin(), adj.end());
    g.check_acyclic();
    return g;
  }

  std::size_t size() const { return vars_.size(); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Edge>& edges() const { return edges_; }

  bool has_variable(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) fail(ErrorCode::unknown_variable, "unknown variable: " + name);
    return it->second;
  }

  const std::string& name_of(std::size_t i) const { return vars_[i].name; }
  VarKind kind_of(const std::string& name) const { return vars_[index_of(name)].kind; }
  bool is_observed(const std::string& name) const { return kind_of(name) == VarKind::observed; }

  std::vector<std::string> observed_variables() const {
    std::vector<std::string> out;
    for (const auto& v : vars_)
      if (v.kind == VarKind::observed) out.push_back(v.name);
    return out;
  }

  std::set<std::string> parents_of(const std::string& name) const {
    return names_of(parents_[index_of(name)]);
  }
  std::set<std::string> children_of(const std::string& name) const {
    return names_of(children_[index_of(name)]);
  }
  std::set<std::string> siblings_of(const std::string& name) const {
    return names_of(siblings_[index_of(name)]);
  }

  /** True if a directed or bidirected edge joins a and b (either direction). */
  bool adjacent(const std::string& a, const std::string& b) const {
    std::size_t ia = index_of(a), ib = index_of(b);
    return std::binary_search(children_[ia].begin(), children_[ia].end(), ib) ||
           std::binary_search(parents_[ia].begin(), parents_[ia].end(), ib) ||
           std::binary_search(siblings_[ia].begin(), siblings_[ia].end(), ib);
  }

  bool has_directed_edge(const std::string& from, const std::string& to) const {
    std::size_t f = index_of(from), t = index_of(to);
    return std::binary_search(children_[f].begin(), children_[f].end(), t);
  }

  /** Reflexive ancestor set under directed edges only. */
  std::set<std::string> ancestors(const std::set<std::string>& seed) const {
    return closure(seed, parents_);
  }

  /** Reflexive descendant set under directed edges only. */
  std::set<std::string> descendants(const std::set<std::string>& seed) const {
    return closure(seed, children_);
  }

  /** Unique order with lexicographic tie-break among simultaneously ready nodes. */
  std::vector<std::string> topological_order() const {
    std::vector<std::size_t> indeg(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) indeg[i] = parents_[i].size();
    // vars_ is name-sorted, so a min-heap over indices breaks ties lexicographically
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (indeg[i] == 0) ready.push(i);
    std::vector<std::string> order;
    order.reserve(vars_.size());
    while (!ready.empty()) {
      std::size_t v = ready.top();
      ready.pop();
      order.push_back(vars_[v].name);
      for (std::size_t c : children_[v])
        if (--indeg[c] == 0) ready.push(c);
    }
    if (order.size() != vars_.size()) fail(ErrorCode::cycle_detected, "directed cycle present");
    return order;
  }

  /**
   * m-separation: X and Y are separated given Z when every path is blocked.
   * A collider (arrowheads into it from both path neighbours) is open iff it
   * or one of its directed descendants lies in Z; any other interior node
   * blocks iff it lies in Z. Bidirected edges carry arrowheads at both ends.
   */
  bool d_separated(const std::set<std::string>& x, const std::set<std::string>& y,
                   const std::set<std::string>& z) const {
    if (x.empty() || y.empty())
      fail(ErrorCode::unknown_variable, "d-separation query requires non-empty endpoint sets");
    auto xf = flags(x), yf = flags(y), zf = flags(z);
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      int c = (xf[i] ? 1 : 0) + (yf[i] ? 1 : 0) + (zf[i] ? 1 : 0);
      if (c > 1) fail(ErrorCode::overlapping_sets, "query sets overlap at " + vars_[i].name);
    }
    // collider openers: nodes with some directed descendant in Z (reflexive)
    std::vector<char> opens(vars_.size(), 0);
    {
      std::deque<std::size_t> q;
      for (std::size_t i = 0; i < vars_.size(); ++i)
        if (zf[i]) {
          opens[i] = 1;
          q.push_back(i);
        }
      while (!q.empty()) {
        std::size_t v = q.front();
        q.pop_front();
        for (std::size_t p : parents_[v])
          if (!opens[p]) {
            opens[p] = 1;
            q.push_back(p);
          }
      }
    }
    // reachability over (node, arrived-with-arrowhead?) states
    enum { tail = 0, head = 1 };
    std::vector<std::array<char, 2>> seen(vars_.size(), {0, 0});
    std::deque<std::pair<std::size_t, int>> q;
    auto visit = [&](std::size_t node, int mark) {
      if (!seen[node][mark]) {
        seen[node][mark] = 1;
        q.emplace_back(node, mark);
      }
    };
    for (const auto& name : x) {
      std::size_t ix = index_of(name);
      for (std::size_t c : children_[ix]) visit(c, head);
      for (std::size_t p : parents_[ix]) visit(p, tail);
      for (std::size_t s : siblings_[ix]) visit(s, head);
    }
    while (!q.empty()) {
      auto [v, mark_in] = q.front();
      q.pop_front();
      if (yf[v]) return false;
      // leave v along each incident edge; traversal legality depends on
      // whether v acts as a collider between the two edges
      auto step = [&](int mark_at_v, std::size_t w, int mark_at_w) {
        bool collider = (mark_in == head) && (mark_at_v == head);
        if (collider ? opens[v] : !zf[v]) visit(w, mark_at_w);
      };
      for (std::size_t c : children_[v]) step(tail, c, head);
      for (std::size_t p : parents_[v]) step(head, p, tail);
      for (std::size_t s : siblings_[v]) step(head, s, head);
    }
    return true;
  }

  /** Copy with directed edges leaving any member of `sources` removed. */
  Graph without_out_edges(const std::set<std::string>& sources) const {
    for (const auto& s : sources) index_of(s);
    std::vector<Edge> kept;
    for (const auto& e : edges_)
      if (!(e.kind == EdgeKind::directed && sources.count(e.from))) kept.push_back(e);
    return build(vars_, kept);
  }

  bool has_bidirected_edges() const {
    return std::any_of(edges_.begin(), edges_.end(),
                       [](const Edge& e) { return e.kind == EdgeKind::bidirected; });
  }

  bool has_unobserved_variables() const {
    return std::any_of(vars_.begin(), vars_.end(),
                       [](const Variable& v) { return v.kind == VarKind::unobserved; });
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.vars_ == b.vars_ && a.edges_ == b.edges_;
  }

 private:
  static bool edge_less(const Edge& a, const Edge& b) {
    return std::tie(a.kind, a.from, a.to) < std::tie(b.kind, b.from, b.to);
  }

  std::set<std::string> names_of(const std::vector<std::size_t>& ids) const {
    std::set<std::string> out;
    for (std::size_t i : ids) out.insert(vars_[i].name);
    return out;
  }

  std::vector<char> flags(const std::set<std::string>& names) const {
    std::vector<char> f(vars_.size(), 0);
    for (const auto& n : names) f[index_of(n)] = 1;
    return f;
  }

  std::set<std::string> closure(const std::set<std::string>& seed,
                                const std::vector<std::vector<std::size_t>>& next) const {
    std::deque<std::size_t> q;
    std::vector<char> seen(vars_.size(), 0);
    for (const auto& n : seed) {
      std::size_t i = index_of(n);
      if (!seen[i]) {
        seen[i] = 1;
        q.push_back(i);
      }
    }
    while (!q.empty()) {
      std::size_t v = q.front();
      q.pop_front();
      for (std::size_t u : next[v])
        if (!seen[u]) {
          seen[u] = 1;
          q.push_back(u);
        }
    }
    std::set<std::string> out;
    for (std::size_t i = 0; i < seen.size(); ++i)
      if (seen[i]) out.insert(vars_[i].name);
    return out;
  }

  void check_acyclic() const {
    std::vector<std::size_t> indeg(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) indeg[i] = parents_[i].size();
    std::deque<std::size_t> q;
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (indeg[i] == 0) q.push_back(i);
    std::size_t seen = 0;
    while (!q.empty()) {
      std::size_t v = q.front();
      q.pop_front();
      ++seen;
      for (std::size_t c : children_[v])
        if (--indeg[c] == 0) q.push_back(c);
    }
    if (seen != vars_.size()) fail(ErrorCode::cycle_detected, "directed cycle present");
  }

  std::vector<Variable> vars_;
  std::vector<Edge> edges_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::vector<std::size_t>> siblings_;
};

}  // namespace causal
