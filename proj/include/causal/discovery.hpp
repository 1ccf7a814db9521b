#pragma once

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "causal/dataset.hpp"
#include "causal/error.hpp"
#include "causal/graph.hpp"

namespace causal {

/**
 * Partially directed acyclic graph: the output class of structure search.
 * Undirected edges are stored with endpoints in lexicographic order.
 */
struct Cpdag {
  std::vector<std::string> nodes;  // sorted
  std::set<std::pair<std::string, std::string>> directed;
  std::set<std::pair<std::string, std::string>> undirected;

  bool operator==(const Cpdag& other) const = default;

  bool adjacent(const std::string& a, const std::string& b) const {
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    return undirected.count(key) != 0 || directed.count({a, b}) != 0 ||
           directed.count({b, a}) != 0;
  }
};

/** One conditional-independence decision, kept for reporting. */
struct CiDecision {
  std::string x;
  std::string y;
  std::set<std::string> z;
  double p_value = std::numeric_limits<double>::quiet_NaN();
  bool independent = false;
  bool low_power = false;
};

/** Answers conditional-independence queries and logs every decision. */
class CiSource {
 public:
  virtual ~CiSource() = default;

  bool independent(const std::string& x, const std::string& y, const std::set<std::string>& z) {
    CiDecision d = query(x, y, z);
    log_.push_back(d);
    return d.independent;
  }

  const std::vector<CiDecision>& log() const { return log_; }

 protected:
  virtual CiDecision query(const std::string& x, const std::string& y,
                           const std::set<std::string>& z) = 0;

 private:
  std::vector<CiDecision> log_;
};

/** Ground-truth source: separation queries against a known graph. */
class GraphCi : public CiSource {
 public:
  explicit GraphCi(Graph g) : g_(std::move(g)) {
    if (g_.has_bidirected_edges())
      fail(ErrorCode::unsupported_graph, "structure search assumes no hidden common causes");
    if (g_.has_unobserved_variables())
      fail(ErrorCode::unsupported_graph, "structure search assumes every variable is observed");
  }

  const Graph& graph() const { return g_; }

 protected:
  CiDecision query(const std::string& x, const std::string& y,
                   const std::set<std::string>& z) override {
    CiDecision d;
    d.x = x;
    d.y = y;
    d.z = z;
    d.independent = g_.d_separated({x}, {y}, z);
    return d;
  }

 private:
  Graph g_;
};

inline constexpr double kDefaultCiAlpha = 0.05;
inline constexpr double kLowPowerExpected = 5.0;
inline constexpr double kLowPowerShare = 0.2;

/**
 * Data-driven source: stratified chi-squared test of independence. Statistics
 * and degrees of freedom are pooled across conditioning strata; empty cells
 * receive a half-count so sparse tables stay finite. Queries whose expected
 * counts are mostly small are flagged as low power.
 */
class DataCi : public CiSource {
 public:
  explicit DataCi(const Dataset& data, double alpha = kDefaultCiAlpha)
      : data_(data), alpha_(alpha) {
    if (alpha <= 0.0 || alpha >= 1.0) fail(ErrorCode::bad_argument, "alpha must lie in (0, 1)");
  }

 protected:
  CiDecision query(const std::string& x, const std::string& y,
                   const std::set<std::string>& z) override {
    int kx = data_.levels_of(x);
    int ky = data_.levels_of(y);
    std::vector<std::string> zs(z.begin(), z.end());
    for (const auto& v : zs) data_.levels_of(v);  // rejects continuous columns up front
    // group rows by conditioning stratum
    std::map<std::vector<int>, std::vector<std::size_t>> strata;
    std::vector<int> key(zs.size());
    for (std::size_t i = 0; i < data_.n(); ++i) {
      for (std::size_t j = 0; j < zs.size(); ++j) key[j] = data_.level_at(zs[j], i);
      strata[key].push_back(i);
    }
    double stat = 0.0;
    double dof = 0.0;
    std::size_t cells_total = 0, cells_small = 0;
    for (const auto& [_, rows] : strata) {
      std::vector<double> table(static_cast<std::size_t>(kx * ky), 0.0);
      for (std::size_t i : rows)
        table[static_cast<std::size_t>(data_.level_at(x, i) * ky + data_.level_at(y, i))] += 1.0;
      for (double& c : table)
        if (c == 0.0) c = 0.5;
      std::vector<double> row(static_cast<std::size_t>(kx), 0.0);
      std::vector<double> col(static_cast<std::size_t>(ky), 0.0);
      double total = 0.0;
      for (int r = 0; r < kx; ++r)
        for (int c = 0; c < ky; ++c) {
          double v = table[static_cast<std::size_t>(r * ky + c)];
          row[static_cast<std::size_t>(r)] += v;
          col[static_cast<std::size_t>(c)] += v;
          total += v;
        }
      for (int r = 0; r < kx; ++r)
        for (int c = 0; c < ky; ++c) {
          double expected =
              row[static_cast<std::size_t>(r)] * col[static_cast<std::size_t>(c)] / total;
          double observed = table[static_cast<std::size_t>(r * ky + c)];
          stat += (observed - expected) * (observed - expected) / expected;
          ++cells_total;
          if (expected < kLowPowerExpected) ++cells_small;
        }
      dof += static_cast<double>((kx - 1) * (ky - 1));
    }
    CiDecision d;
    d.x = x;
    d.y = y;
    d.z = z;
    if (dof <= 0.0) {
      d.p_value = 1.0;
      d.independent = true;
      return d;
    }
    boost::math::chi_squared dist(dof);
    d.p_value = boost::math::cdf(boost::math::complement(dist, stat));
    d.independent = d.p_value > alpha_;
    d.low_power = cells_total > 0 && static_cast<double>(cells_small) >
                                         kLowPowerShare * static_cast<double>(cells_total);
    return d;
  }

 private:
  const Dataset& data_;
  double alpha_;
};

struct PcResult {
  Cpdag cpdag;
  std::vector<CiDecision> decisions;  // every query, in issue order
  bool low_power = false;             // any flagged decision
};

namespace detail {

/** Mutable mixed edge state during orientation. */
struct OrientState {
  std::set<std::pair<std::string, std::string>> directed;
  std::set<std::pair<std::string, std::string>> undirected;  // canonical order

  static std::pair<std::string, std::string> canon(const std::string& a, const std::string& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }

  bool adjacent(const std::string& a, const std::string& b) const {
    return undirected.count(canon(a, b)) != 0 || directed.count({a, b}) != 0 ||
           directed.count({b, a}) != 0;
  }

  bool is_undirected(const std::string& a, const std::string& b) const {
    return undirected.count(canon(a, b)) != 0;
  }

  bool has_directed(const std::string& from, const std::string& to) const {
    return directed.count({from, to}) != 0;
  }

  /** Orients a currently undirected edge; returns false if not possible. */
  bool orient(const std::string& from, const std::string& to) {
    auto key = canon(from, to);
    if (undirected.count(key) == 0) return false;
    undirected.erase(key);
    directed.insert({from, to});
    return true;
  }
};

/** Meek propagation: repeat the three ambient orientation rules to fixpoint. */
inline void meek_closure(OrientState& st, const std::vector<std::string>& nodes) {
  bool changed = true;
  while (changed) {
    changed = false;
    // rule 1: a -> b, b - c, a and c non-adjacent  =>  b -> c
    for (const auto& [a, b] : std::set<std::pair<std::string, std::string>>(st.directed))
      for (const auto& c : nodes) {
        if (c == a || c == b) continue;
        if (st.is_undirected(b, c) && !st.adjacent(a, c) && st.orient(b, c)) changed = true;
      }
    // rule 2: a -> b -> c with a - c  =>  a -> c
    for (const auto& a : nodes)
      for (const auto& c : nodes) {
        if (a == c || !st.is_undirected(a, c)) continue;
        for (const auto& b : nodes) {
          if (b == a || b == c) continue;
          if (st.has_directed(a, b) && st.has_directed(b, c) && st.orient(a, c)) {
            changed = true;
            break;
          }
        }
      }
    // rule 3: a - b, a - c, a - d, c -> b, d -> b, c and d non-adjacent  =>  a -> b
    for (const auto& a : nodes)
      for (const auto& b : nodes) {
        if (a == b || !st.is_undirected(a, b)) continue;
        bool done = false;
        for (const auto& c : nodes) {
          if (done || c == a || c == b) continue;
          if (!st.is_undirected(a, c) || !st.has_directed(c, b)) continue;
          for (const auto& d : nodes) {
            if (d == a || d == b || d == c) continue;
            if (st.is_undirected(a, d) && st.has_directed(d, b) && !st.adjacent(c, d)) {
              if (st.orient(a, b)) changed = true;
              done = true;
              break;
            }
          }
        }
      }
  }
}

inline Cpdag to_cpdag(const std::vector<std::string>& nodes, const OrientState& st) {
  Cpdag out;
  out.nodes = nodes;
  out.directed = st.directed;
  out.undirected = st.undirected;
  return out;
}

}  // namespace detail

/**
 * Constraint-based structure search. Deterministic by construction: node
 * names are processed in sorted order, conditioning sets in size-then-
 * lexicographic order, and the first separating set found is kept.
 */
inline PcResult pc_learn(CiSource& ci, std::vector<std::string> nodes) {
  std::sort(nodes.begin(), nodes.end());
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (nodes[i] == nodes[i - 1])
      fail(ErrorCode::duplicate_name, "duplicate node name: " + nodes[i]);
  std::map<std::string, std::set<std::string>> adj;
  for (const auto& a : nodes)
    for (const auto& b : nodes)
      if (a != b) adj[a].insert(b);
  std::map<std::pair<std::string, std::string>, std::set<std::string>> sepset;

  // skeleton phase
  for (std::size_t depth = 0;; ++depth) {
    bool candidate_left = false;
    for (const auto& x : nodes) {
      for (const auto& y : std::set<std::string>(adj[x])) {
        if (adj[x].count(y) == 0) continue;  // removed earlier in this sweep
        std::vector<std::string> pool;
        for (const auto& v : adj[x])
          if (v != y) pool.push_back(v);
        if (pool.size() < depth) continue;
        candidate_left = true;
        // all subsets of the pool with exactly `depth` elements, lexicographic
        std::vector<std::size_t> pick(depth);
        for (std::size_t i = 0; i < depth; ++i) pick[i] = i;
        bool more = true;
        while (more) {
          std::set<std::string> s;
          for (std::size_t i : pick) s.insert(pool[i]);
          if (ci.independent(x, y, s)) {
            adj[x].erase(y);
            adj[y].erase(x);
            sepset[detail::OrientState::canon(x, y)] = s;
            break;
          }
          // advance the combination
          more = false;
          for (std::size_t i = depth; i-- > 0;) {
            if (pick[i] + (depth - i) < pool.size()) {
              ++pick[i];
              for (std::size_t j = i + 1; j < depth; ++j) pick[j] = pick[j - 1] + 1;
              more = true;
              break;
            }
          }
          if (depth == 0) break;
        }
      }
    }
    if (!candidate_left) break;
  }

  detail::OrientState st;
  for (const auto& x : nodes)
    for (const auto& y : adj[x])
      if (x < y) st.undirected.insert({x, y});

  // collider phase: x - z - y with x, y non-adjacent and z outside their
  // separating set becomes x -> z <- y; earlier orientations win conflicts
  for (const auto& x : nodes)
    for (const auto& y : nodes) {
      if (x >= y || adj[x].count(y) != 0) continue;
      for (const auto& z : nodes) {
        if (z == x || z == y) continue;
        if (adj[x].count(z) == 0 || adj[y].count(z) == 0) continue;
        auto it = sepset.find(detail::OrientState::canon(x, y));
        if (it == sepset.end() || it->second.count(z) != 0) continue;
        st.orient(x, z);
        st.orient(y, z);
      }
    }

  detail::meek_closure(st, nodes);

  PcResult out;
  out.cpdag = detail::to_cpdag(nodes, st);
  out.decisions = ci.log();
  for (const auto& d : out.decisions)
    if (d.low_power) out.low_power = true;
  return out;
}

/**
 * The pattern a directed acyclic graph belongs to: same skeleton, colliders
 * without a connecting edge kept directed, everything else propagated.
 */
inline Cpdag cpdag_of(const Graph& g) {
  if (g.has_bidirected_edges())
    fail(ErrorCode::unsupported_graph, "pattern is defined for directed graphs only");
  if (g.has_unobserved_variables())
    fail(ErrorCode::unsupported_graph, "pattern assumes every variable is observed");
  std::vector<std::string> nodes;
  for (const auto& v : g.variables()) nodes.push_back(v.name);
  detail::OrientState st;
  for (const auto& e : g.edges()) st.undirected.insert(detail::OrientState::canon(e.from, e.to));
  for (const auto& v : g.variables()) {
    std::set<std::string> parents = g.parents_of(v.name);
    std::vector<std::string> ps(parents.begin(), parents.end());
    for (std::size_t i = 0; i < ps.size(); ++i)
      for (std::size_t j = i + 1; j < ps.size(); ++j)
        if (!g.adjacent(ps[i], ps[j])) {
          st.orient(ps[i], v.name);
          st.orient(ps[j], v.name);
        }
  }
  detail::meek_closure(st, nodes);
  return detail::to_cpdag(nodes, st);
}

}  // namespace causal
