#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "herdkit/graph.hpp"
#include "herdkit/linalg.hpp"
#include "herdkit/oracle.hpp"
#include "herdkit/types.hpp"
#include "herdkit/unisign.hpp"

namespace herd {

// An undirected tree driven from a single node.  Canonical order puts the
// leader at index 0 and then the follower layers by distance.
template <class S>
struct TreeSystem {
  Mat<S> A;                   // canonical order
  Index leader_original = 0;  // caller's index of the driven node
  LayerDecomposition layers;  // canonical indices
  std::vector<Index> to_original;
  bool permuted = false;
};

template <class S>
TreeSystem<S> validate_tree(const Mat<S>& A, Index leader,
                            double eps = kDefaultEps) {
  if (A.rows() != A.cols())
    throw DimensionError("validate_tree: A must be square");
  const Index n = A.rows();
  if (leader < 0 || leader >= n)
    throw ArgumentError("validate_tree: leader index out of range");
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (!is_zero(S(A(i, j) - A(j, i)), eps))
        throw SymmetryError("validate_tree: A is not symmetric at (" +
                            std::to_string(i + 1) + "," +
                            std::to_string(j + 1) + ")");
  Index edge_count = 0;
  for (Index i = 0; i < n; ++i) {
    if (!is_zero(A(i, i), eps))
      throw NotATreeError("validate_tree: self-loop at node " +
                          std::to_string(i + 1));
    for (Index j = i + 1; j < n; ++j)
      if (!is_zero(A(i, j), eps)) ++edge_count;
  }
  if (edge_count != n - 1)
    throw NotATreeError("validate_tree: " + std::to_string(edge_count) +
                        " edges, a tree on " + std::to_string(n) +
                        " nodes needs " + std::to_string(n - 1));
  auto g = graph_from_matrix(A, /*directed=*/false, eps);
  auto dist = distances_from_set(g, {leader});
  int maxd = 0;
  for (Index v = 0; v < n; ++v) {
    if (!dist[v])
      throw NotATreeError("validate_tree: node " + std::to_string(v + 1) +
                          " is disconnected");
    maxd = std::max(maxd, *dist[v]);
  }
  TreeSystem<S> t;
  t.leader_original = leader;
  t.to_original.resize(n);
  t.to_original[0] = leader;
  t.layers.leaders = {0};
  t.layers.layers.assign(maxd, {});
  Index pos = 1;
  for (int d = 1; d <= maxd; ++d) {
    for (Index v = 0; v < n; ++v) {
      if (v != leader && *dist[v] == d) {
        t.to_original[pos] = v;
        t.layers.layers[d - 1].push_back(pos);
        ++pos;
      }
    }
  }
  t.layers.depth = maxd;
  t.permuted = false;
  for (Index i = 0; i < n; ++i)
    if (t.to_original[i] != i) { t.permuted = true; break; }
  t.A = t.permuted ? permute(A, t.to_original, t.to_original) : A;
  return t;
}

namespace detail {

// Witnesses live in row space; map canonical row indices back to the caller.
template <class S>
Vec<S> unpermute_witness(const Vec<S>& w, const std::vector<Index>& to_original) {
  Vec<S> out(w.size());
  for (Index i = 0; i < w.size(); ++i) out[to_original[i]] = w[i];
  return out;
}

template <class S>
Vec<S> tree_input(Index n) {
  Vec<S> b = Vec<S>::Zero(n);
  b[0] = S(1);
  return b;
}

}  // namespace detail

// Sufficient test: every depth boundary of the tree uses a single edge sign.
// Then the walk products down to layer k are all alike, so each column of the
// reachability matrix is unisigned on its layer and a staged certificate
// exists.
template <class S>
Verdict<S> layer_sign_check(const TreeSystem<S>& tree,
                            double eps = kDefaultEps) {
  Verdict<S> v;
  const Index n = tree.A.rows();
  std::vector<Sign> boundary(tree.layers.depth, Sign::Zero);
  for (int k = 0; k < tree.layers.depth; ++k) {
    const std::vector<Index> parents =
        (k == 0) ? std::vector<Index>{0} : tree.layers.layers[k - 1];
    for (Index c : tree.layers.layers[k]) {
      for (Index p : parents) {
        Sign s = sign_of(tree.A(c, p), eps);
        if (s == Sign::Zero) continue;
        if (boundary[k] == Sign::Zero) boundary[k] = s;
        else if (boundary[k] != s) {
          v.detail = "boundary between layers " + std::to_string(k) + " and " +
                     std::to_string(k + 1) + " mixes edge signs";
          return v;
        }
      }
    }
  }
  EliminationTrace<S> trace;
  trace.push_back({{{Index(0), S(1)}}, {Index(0)}});
  S walk(1);
  for (int k = 0; k < tree.layers.depth; ++k) {
    walk *= S(sign_value(boundary[k]));
    EliminationStep<S> step;
    step.columns.emplace_back(Index(k + 1), walk);
    step.rows = tree.layers.layers[k];
    trace.push_back(std::move(step));
  }
  Mat<S> B = detail::tree_input<S>(n);
  Mat<S> R = reachability_matrix(tree.A, B);
  return detail::herdable_from_trace(
      R, std::move(trace),
      "all " + std::to_string(tree.layers.depth) +
          " depth boundaries are sign-uniform");
}

// Scan nodes in ascending order for a root whose breadth-first frontiers
// expand through sign-uniform arc bundles; the first hit is returned together
// with its layered certificate.
template <class S>
std::optional<std::pair<Index, Verdict<S>>> select_leader(
    const Mat<S>& A, double eps = kDefaultEps) {
  const Index n = A.rows();
  // Treeness does not depend on the root; validate once.
  validate_tree(A, 0, eps);
  auto g = graph_from_matrix(A, /*directed=*/false, eps);
  for (Index cand = 0; cand < n; ++cand) {
    std::vector<char> visited(n, 0);
    std::vector<Index> frontier{cand};
    visited[cand] = 1;
    Index covered = 1;
    bool ok = true;
    while (covered < n) {
      Sign uniform = Sign::Zero;
      std::vector<Index> next;
      for (Index p : frontier) {
        for (const auto& [c, wt] : g.out_adj[p]) {
          if (visited[c]) continue;
          Sign s = sign_of(wt, eps);
          if (uniform == Sign::Zero) uniform = s;
          else if (uniform != s) { ok = false; break; }
          visited[c] = 1;
          next.push_back(c);
        }
        if (!ok) break;
      }
      if (!ok) break;
      if (next.empty()) { ok = false; break; }  // cannot happen on a tree
      covered += static_cast<Index>(next.size());
      frontier = std::move(next);
    }
    if (!ok) continue;
    TreeSystem<S> t = validate_tree(A, cand, eps);
    Verdict<S> v = layer_sign_check(t, eps);
    if (v.status == Status::Herdable)
      return std::make_pair(cand, std::move(v));
  }
  return std::nullopt;
}

// Exact test for depth-1 trees (a star driven at the center): herdable iff
// the leaf weights share one sign.
template <class S>
Verdict<S> depth1_exact_check(const TreeSystem<S>& tree,
                              double eps = kDefaultEps) {
  if (tree.layers.depth > 1)
    throw DepthError("depth1_exact_check: tree has depth " +
                     std::to_string(tree.layers.depth));
  const Index n = tree.A.rows();
  Verdict<S> v;
  if (tree.layers.depth == 0) {
    v.status = Status::Herdable;
    v.certificate = Vec<S>::Constant(1, S(1));
    v.detail = "single-node system";
    return v;
  }
  Vec<S> a21 = tree.A.col(0).tail(n - 1);
  auto s = is_unisigned(a21, eps);
  Mat<S> B = detail::tree_input<S>(n);
  if (s) {
    EliminationTrace<S> trace;
    trace.push_back({{{Index(0), S(1)}}, {Index(0)}});
    EliminationStep<S> step;
    step.columns.emplace_back(Index(1), S(sign_value(*s)));
    for (Index r = 1; r < n; ++r) step.rows.push_back(r);
    trace.push_back(std::move(step));
    Mat<S> R = reachability_matrix(tree.A, B);
    return detail::herdable_from_trace(R, std::move(trace),
                                       "leaf weights share one sign");
  }
  Verdict<S> lp = herdable(tree.A, B, eps);
  if (lp.status != Status::NotHerdable)
    throw NumericError(
        "depth-1 test refuses but the oracle disagrees (numeric trouble)");
  v.status = Status::NotHerdable;
  v.witness = detail::unpermute_witness(*lp.witness, tree.to_original);
  v.detail = "leaf weights mix signs";
  return v;
}

// Exact test for depth-2 trees.  With q_i the squared child-weight mass of
// depth-1 node i, every pair (i, j) with q_i = q_j must satisfy: equal signs
// into the leader, and a sign-consistent joint child pattern; i = j asks the
// node's own child weights to be zero or unisigned.
template <class S>
Verdict<S> depth2_exact_check(const TreeSystem<S>& tree,
                              double eps = kDefaultEps) {
  if (tree.layers.depth > 2)
    throw DepthError("depth2_exact_check: tree has depth " +
                     std::to_string(tree.layers.depth));
  if (tree.layers.depth <= 1) return depth1_exact_check(tree, eps);
  const Index n = tree.A.rows();
  const Index m1 = static_cast<Index>(tree.layers.layers[0].size());
  const Index m2 = static_cast<Index>(tree.layers.layers[1].size());
  Vec<S> a21 = tree.A.col(0).segment(1, m1);
  Mat<S> a32 = tree.A.block(1 + m1, 1, m2, m1);

  Vec<S> q(m1);
  for (Index i = 0; i < m1; ++i) {
    S acc(0);
    for (Index r = 0; r < m2; ++r) acc += a32(r, i) * a32(r, i);
    q[i] = acc;
  }
  auto q_equal = [&](Index i, Index j) {
    if (scalar_traits<S>::exact) return q[i] == q[j];
    double a = scalar_traits<S>::to_double(q[i]);
    double b = scalar_traits<S>::to_double(q[j]);
    return std::abs(a - b) <=
           1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
  };
  auto caller_node = [&](Index i) {  // depth-1 slot -> caller 1-based index
    return tree.to_original[1 + i] + 1;
  };

  std::string violation;
  for (Index i = 0; i < m1 && violation.empty(); ++i) {
    Vec<S> col = a32.col(i);
    if (!nonzero_pattern(col, eps).empty() && !is_unisigned(col, eps))
      violation = "child weights of node " + std::to_string(caller_node(i)) +
                  " mix signs";
  }
  for (Index i = 0; i < m1 && violation.empty(); ++i) {
    for (Index j = i + 1; j < m1 && violation.empty(); ++j) {
      if (!q_equal(i, j)) continue;
      if (sign_of(a21[i], eps) != sign_of(a21[j], eps)) {
        violation = "nodes " + std::to_string(caller_node(i)) + " and " +
                    std::to_string(caller_node(j)) +
                    " tie in child mass but differ in leader-edge sign";
        continue;
      }
      Vec<S> joint = a32.col(i) + a32.col(j);
      if (!nonzero_pattern(joint, eps).empty() && !is_unisigned(joint, eps))
        violation = "nodes " + std::to_string(caller_node(i)) + " and " +
                    std::to_string(caller_node(j)) +
                    " tie in child mass but mix joint child signs";
    }
  }

  Mat<S> B = detail::tree_input<S>(n);
  Verdict<S> lp = herdable(tree.A, B, eps);
  Verdict<S> v;
  if (violation.empty()) {
    if (lp.status != Status::Herdable)
      throw NumericError(
          "depth-2 test accepts but the oracle disagrees (numeric trouble)");
    v.status = Status::Herdable;
    v.certificate = lp.certificate;
    v.detail = "all tied pairs are sign-consistent";
  } else {
    if (lp.status != Status::NotHerdable)
      throw NumericError(
          "depth-2 test refuses but the oracle disagrees (numeric trouble)");
    v.status = Status::NotHerdable;
    v.witness = detail::unpermute_witness(*lp.witness, tree.to_original);
    v.detail = violation;
  }
  return v;
}

// Exact test for a diagonal state matrix with a single input column: herdable
// iff, inside every group of equal diagonal values, the input entries share
// one sign.  Both directions come with explicit vectors: a Vandermonde solve
// on the group representatives, or a two-entry annihilating witness.
template <class S>
Verdict<S> diagonal_pair_herdable(const Vec<S>& lambda, const Vec<S>& gamma,
                                  double eps = kDefaultEps) {
  const Index n = lambda.size();
  if (gamma.size() != n)
    throw DimensionError("diagonal_pair_herdable: lambda and gamma lengths differ");
  if (n == 0)
    throw ArgumentError("diagonal_pair_herdable: empty system");
  for (Index i = 0; i < n; ++i)
    if (is_zero(gamma[i], eps))
      throw ZeroGammaError("diagonal_pair_herdable: gamma[" +
                           std::to_string(i + 1) + "] is zero");

  auto lambda_equal = [&](Index i, Index j) {
    if (scalar_traits<S>::exact) return lambda[i] == lambda[j];
    double a = scalar_traits<S>::to_double(lambda[i]);
    double b = scalar_traits<S>::to_double(lambda[j]);
    return std::abs(a - b) <=
           1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
  };

  std::vector<Index> order(n);
  for (Index i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (lambda[a] != lambda[b]) return lambda[a] < lambda[b];
    return a < b;
  });
  std::vector<std::vector<Index>> groups;
  for (Index idx : order) {
    if (!groups.empty() && lambda_equal(groups.back().front(), idx))
      groups.back().push_back(idx);
    else
      groups.push_back({idx});
  }
  for (auto& grp : groups) std::sort(grp.begin(), grp.end());

  Verdict<S> v;
  for (const auto& grp : groups) {
    for (size_t a = 0; a < grp.size(); ++a) {
      for (size_t b = a + 1; b < grp.size(); ++b) {
        Index i = grp[a], j = grp[b];
        if (sign_of(gamma[i], eps) == sign_of(gamma[j], eps)) continue;
        Vec<S> w = Vec<S>::Zero(n);
        w[i] = gamma[j];
        w[j] = -gamma[i];
        if (w[i] < S(0)) w = -w;
        v.status = Status::NotHerdable;
        v.witness = std::move(w);
        v.detail = "equal diagonal values at " + std::to_string(i + 1) +
                   " and " + std::to_string(j + 1) +
                   " carry opposite input signs";
        return v;
      }
    }
  }

  const Index s = static_cast<Index>(groups.size());
  Vec<S> y(s);
  Mat<S> V(s, s);
  for (Index gi = 0; gi < s; ++gi) {
    const auto& grp = groups[gi];
    S min_abs = abs(gamma[grp[0]]);
    for (Index idx : grp) {
      S a = abs(gamma[idx]);
      if (a < min_abs) min_abs = a;
    }
    S sgn = S(sign_value(sign_of(gamma[grp[0]], eps)));
    y[gi] = sgn / min_abs;
    S node = lambda[grp[0]];
    S pw(1);
    for (Index t = 0; t < s; ++t) {
      V(gi, t) = pw;
      pw *= node;
    }
  }
  Eigen::FullPivLU<Mat<S>> lu(V);
  Vec<S> us = lu.solve(y);
  Vec<S> u = Vec<S>::Zero(n);
  u.head(s) = us;

  Mat<S> A = Mat<S>::Zero(n, n);
  for (Index i = 0; i < n; ++i) A(i, i) = lambda[i];
  Mat<S> B(n, 1);
  B.col(0) = gamma;
  Mat<S> R = reachability_matrix(A, B);
  v.status = Status::Herdable;
  v.detail = std::to_string(s) + " diagonal groups, all sign-consistent";
  if (verify_certificate(R, u)) {
    v.certificate = std::move(u);
    return v;
  }
  auto lp = positive_image_feasible(R);
  if (!lp.feasible)
    throw NumericError(
        "diagonal groups are sign-consistent but the oracle refused");
  v.certificate = lp.point;
  v.detail += "; certificate recovered from the feasibility oracle";
  return v;
}

}  // namespace herd
