#pragma once

#include <algorithm>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

#include "herdkit/types.hpp"

namespace herd {

// Influence graph of a system matrix.  Arc j -> i exists iff A(i, j) != 0:
// column index = source, row index = target.  Undirected graphs require a
// symmetric matrix and store one edge per unordered pair.
template <class S>
struct SignedGraph {
  struct Edge {
    Index from, to;
    S weight;
  };
  Index node_count = 0;
  bool directed = true;
  std::vector<Edge> edges;
  // out_adj[v] = arcs leaving v as (target, weight); for undirected graphs
  // both directions are materialized.
  std::vector<std::vector<std::pair<Index, S>>> out_adj;
  std::vector<std::vector<std::pair<Index, S>>> in_adj;
};

template <class S>
SignedGraph<S> graph_from_matrix(const Mat<S>& A, bool directed,
                                 double eps = kDefaultEps) {
  if (A.rows() != A.cols())
    throw DimensionError("graph_from_matrix: A must be square");
  const Index n = A.rows();
  if (!directed) {
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if (!is_zero(S(A(i, j) - A(j, i)), eps))
          throw SymmetryError("graph_from_matrix: undirected graph needs a "
                              "symmetric matrix; entries (" +
                              std::to_string(i + 1) + "," +
                              std::to_string(j + 1) + ") differ");
  }
  SignedGraph<S> g;
  g.node_count = n;
  g.directed = directed;
  g.out_adj.resize(n);
  g.in_adj.resize(n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (is_zero(A(i, j), eps)) continue;
      if (!directed && i < j) continue;  // mirrored below
      g.edges.push_back({j, i, A(i, j)});
      g.out_adj[j].emplace_back(i, A(i, j));
      g.in_adj[i].emplace_back(j, A(i, j));
      if (!directed && i != j) {
        g.out_adj[i].emplace_back(j, A(i, j));
        g.in_adj[j].emplace_back(i, A(i, j));
      }
    }
  }
  return g;
}

// Multi-source BFS hop distances; nullopt marks unreachable nodes.
template <class S>
std::vector<std::optional<int>> distances_from_set(
    const SignedGraph<S>& g, const std::vector<Index>& sources) {
  if (sources.empty())
    throw ArgumentError("distances_from_set: source set is empty");
  std::vector<std::optional<int>> dist(g.node_count);
  std::queue<Index> q;
  for (Index s : sources) {
    if (s < 0 || s >= g.node_count)
      throw ArgumentError("distances_from_set: node " + std::to_string(s + 1) +
                          " out of range");
    if (!dist[s]) {
      dist[s] = 0;
      q.push(s);
    }
  }
  while (!q.empty()) {
    Index v = q.front();
    q.pop();
    for (const auto& [w, wt] : g.out_adj[v]) {
      (void)wt;
      if (!dist[w]) {
        dist[w] = *dist[v] + 1;
        q.push(w);
      }
    }
  }
  return dist;
}

struct LayerDecomposition {
  std::vector<Index> leaders;               // distance 0
  std::vector<std::vector<Index>> layers;   // layers[k] = nodes at distance k+1
  int depth = 0;                            // K = number of nonempty layers
};

template <class S>
LayerDecomposition layer_decomposition(const SignedGraph<S>& g,
                                       const std::vector<Index>& leaders) {
  auto dist = distances_from_set(g, leaders);
  int maxd = 0;
  for (Index v = 0; v < g.node_count; ++v) {
    if (!dist[v])
      throw CoverageError("node " + std::to_string(v + 1) +
                          " is unreachable from the leader set");
    maxd = std::max(maxd, *dist[v]);
  }
  LayerDecomposition ld;
  ld.leaders = leaders;
  std::sort(ld.leaders.begin(), ld.leaders.end());
  ld.layers.assign(maxd, {});
  for (Index v = 0; v < g.node_count; ++v)
    if (*dist[v] > 0) ld.layers[*dist[v] - 1].push_back(v);
  ld.depth = maxd;
  return ld;
}

struct OutNeighborhoods {
  std::vector<Index> all;       // targets outside the set, ascending
  std::vector<Index> positive;  // reached through a positive arc
  std::vector<Index> negative;  // reached through a negative arc
};

template <class S>
OutNeighborhoods out_neighborhoods(const SignedGraph<S>& g,
                                   const std::vector<Index>& set,
                                   double eps = kDefaultEps) {
  std::vector<char> inside(g.node_count, 0);
  for (Index v : set) {
    if (v < 0 || v >= g.node_count)
      throw ArgumentError("out_neighborhoods: node " + std::to_string(v + 1) +
                          " out of range");
    inside[v] = 1;
  }
  std::vector<char> any(g.node_count, 0), pos(g.node_count, 0),
      neg(g.node_count, 0);
  for (Index v : set) {
    for (const auto& [w, wt] : g.out_adj[v]) {
      if (inside[w]) continue;
      any[w] = 1;
      Sign s = sign_of(wt, eps);
      if (s == Sign::Positive) pos[w] = 1;
      if (s == Sign::Negative) neg[w] = 1;
    }
  }
  OutNeighborhoods out;
  for (Index v = 0; v < g.node_count; ++v) {
    if (any[v]) out.all.push_back(v);
    if (pos[v]) out.positive.push_back(v);
    if (neg[v]) out.negative.push_back(v);
  }
  return out;
}

template <class S>
bool is_strongly_connected(const SignedGraph<S>& g) {
  if (g.node_count == 0) return true;
  auto sweep = [&](const std::vector<std::vector<std::pair<Index, S>>>& adj) {
    std::vector<char> seen(g.node_count, 0);
    std::queue<Index> q;
    seen[0] = 1;
    q.push(0);
    Index count = 1;
    while (!q.empty()) {
      Index v = q.front();
      q.pop();
      for (const auto& [w, wt] : adj[v]) {
        (void)wt;
        if (!seen[w]) {
          seen[w] = 1;
          ++count;
          q.push(w);
        }
      }
    }
    return count == g.node_count;
  };
  return sweep(g.out_adj) && sweep(g.in_adj);
}

// Two-coloring by arc sign over the underlying undirected structure: positive
// arcs keep endpoints together, negative arcs separate them.  Returns the
// classes (V1, V2) or nullopt when some component admits no such split.  The
// lowest-index node of each component is placed in V1, which makes the
// orientation canonical.
template <class S>
std::optional<std::pair<std::vector<Index>, std::vector<Index>>>
structural_balance_partition(const SignedGraph<S>& g,
                             double eps = kDefaultEps) {
  std::vector<int> color(g.node_count, -1);
  for (Index root = 0; root < g.node_count; ++root) {
    if (color[root] >= 0) continue;
    color[root] = 0;
    std::queue<Index> q;
    q.push(root);
    while (!q.empty()) {
      Index v = q.front();
      q.pop();
      auto visit = [&](Index w, const S& wt) {
        Sign s = sign_of(wt, eps);
        if (s == Sign::Zero) return true;
        int want = (s == Sign::Positive) ? color[v] : 1 - color[v];
        if (color[w] < 0) {
          color[w] = want;
          q.push(w);
          return true;
        }
        return color[w] == want;
      };
      for (const auto& [w, wt] : g.out_adj[v])
        if (!visit(w, wt)) return std::nullopt;
      for (const auto& [w, wt] : g.in_adj[v])
        if (!visit(w, wt)) return std::nullopt;
    }
  }
  std::pair<std::vector<Index>, std::vector<Index>> classes;
  for (Index v = 0; v < g.node_count; ++v)
    (color[v] == 0 ? classes.first : classes.second).push_back(v);
  return classes;
}

}  // namespace herd
