#pragma once

#include <string>
#include <utility>
#include <vector>

#include "herdkit/graph.hpp"
#include "herdkit/linalg.hpp"
#include "herdkit/oracle.hpp"
#include "herdkit/types.hpp"
#include "herdkit/unisign.hpp"

namespace herd {

// A system with input matrix [I_m; 0]: the first m nodes are directly
// actuated.  `A` is stored in canonical order (leaders 0..m-1, then follower
// layers contiguous by distance, ascending original index inside a layer);
// `to_original[i]` maps a canonical index back to the caller's.
template <class S>
struct LeaderFollowerSystem {
  Mat<S> A;
  Index leader_count = 0;
  LayerDecomposition layers;  // canonical indices
  std::vector<Index> to_original;
  bool permuted = false;
};

template <class S>
Mat<S> leader_input_matrix(Index n, Index m) {
  Mat<S> B = Mat<S>::Zero(n, m);
  for (Index j = 0; j < m; ++j) B(j, j) = S(1);
  return B;
}

template <class S>
LeaderFollowerSystem<S> validate_leader_follower(const Mat<S>& A, Index m,
                                                 double eps = kDefaultEps) {
  if (A.rows() != A.cols())
    throw DimensionError("validate_leader_follower: A must be square");
  const Index n = A.rows();
  if (m < 1 || m >= n)
    throw PartitionError("validate_leader_follower: need 1 <= m < n, got m=" +
                         std::to_string(m) + ", n=" + std::to_string(n));
  auto g = graph_from_matrix(A, /*directed=*/true, eps);
  std::vector<Index> leaders(m);
  for (Index i = 0; i < m; ++i) leaders[i] = i;
  auto dist = distances_from_set(g, leaders);
  for (Index v = 0; v < n; ++v)
    if (!dist[v])
      throw CoverageError("node " + std::to_string(v + 1) +
                          " is unreachable from the leader set");
  LeaderFollowerSystem<S> sys;
  sys.leader_count = m;
  sys.to_original.resize(n);
  for (Index i = 0; i < m; ++i) sys.to_original[i] = i;
  int maxd = 0;
  for (Index v = m; v < n; ++v) maxd = std::max(maxd, *dist[v]);
  Index pos = m;
  sys.layers.leaders.clear();
  for (Index i = 0; i < m; ++i) sys.layers.leaders.push_back(i);
  sys.layers.layers.assign(maxd, {});
  for (int d = 1; d <= maxd; ++d) {
    for (Index v = m; v < n; ++v) {
      if (*dist[v] == d) {
        sys.to_original[pos] = v;
        sys.layers.layers[d - 1].push_back(pos);
        ++pos;
      }
    }
  }
  sys.layers.depth = maxd;
  sys.permuted = false;
  for (Index i = 0; i < n; ++i)
    if (sys.to_original[i] != i) { sys.permuted = true; break; }
  sys.A = sys.permuted ? permute(A, sys.to_original, sys.to_original) : A;
  return sys;
}

// Rows of A^k [I_m; 0] restricted to layer k, for k = 1..K.  A row of zeros
// means weight cancellation erased every walk contribution; the layered
// sufficient checks cannot run on such a block.
template <class S>
std::vector<Mat<S>> layer_blocks(const LeaderFollowerSystem<S>& sys,
                                 double eps = kDefaultEps) {
  const Index m = sys.leader_count;
  std::vector<Mat<S>> blocks;
  Mat<S> power = sys.A.leftCols(m);  // A^1 [I;0]
  for (int k = 1; k <= sys.layers.depth; ++k) {
    const auto& layer = sys.layers.layers[k - 1];
    Mat<S> blk(static_cast<Index>(layer.size()), m);
    for (Index r = 0; r < blk.rows(); ++r) blk.row(r) = power.row(layer[r]);
    if (has_zero_row(blk, eps))
      throw StructureError("layer " + std::to_string(k) +
                           " has a zero row after cancellation");
    blocks.push_back(std::move(blk));
    if (k < sys.layers.depth) power = sys.A * power;
  }
  return blocks;
}

namespace detail {

// Shared driver for the layered sufficient tests: run `check` on every layer
// block, then stack the per-layer certificates into one trace over the full
// reachability matrix.  Layer k's input block is zero on deeper layers'
// rows (no walk of length k reaches them), which is exactly the staging
// invariant the composer needs.
template <class S, class Check>
Verdict<S> layered_check(const LeaderFollowerSystem<S>& sys, double eps,
                         Check check, const char* label) {
  const Index m = sys.leader_count;
  Verdict<S> v;
  std::vector<Mat<S>> blocks;
  try {
    blocks = layer_blocks(sys, eps);
  } catch (const StructureError& e) {
    v.detail = std::string(label) + ": " + e.what();
    return v;
  }
  std::vector<Vec<S>> layer_certs;
  for (int k = 1; k <= sys.layers.depth; ++k) {
    Verdict<S> sub = check(blocks[k - 1], eps);
    if (sub.status != Status::Herdable) {
      v.detail = std::string(label) + ": layer " + std::to_string(k) + ": " +
                 sub.detail;
      return v;
    }
    layer_certs.push_back(*sub.certificate);
  }
  EliminationTrace<S> trace;
  EliminationStep<S> base;
  for (Index j = 0; j < m; ++j) base.columns.emplace_back(j, S(1));
  for (Index j = 0; j < m; ++j) base.rows.push_back(j);
  trace.push_back(std::move(base));
  for (int k = 1; k <= sys.layers.depth; ++k) {
    EliminationStep<S> step;
    const Vec<S>& u = layer_certs[k - 1];
    for (Index j = 0; j < m; ++j)
      if (u[j] != S(0)) step.columns.emplace_back(k * m + j, u[j]);
    step.rows = sys.layers.layers[k - 1];
    trace.push_back(std::move(step));
  }
  Mat<S> R = reachability_matrix(sys.A, leader_input_matrix<S>(sys.A.rows(), m));
  return herdable_from_trace(R, std::move(trace),
                             std::string(label) + ": all " +
                                 std::to_string(sys.layers.depth) +
                                 " layers pass");
}

}  // namespace detail

// Sufficient test: every layer block passes the unisigned-cover test.
template <class S>
Verdict<S> layer_cover_check(const LeaderFollowerSystem<S>& sys,
                             double eps = kDefaultEps) {
  return detail::layered_check(
      sys, eps,
      [](const Mat<S>& blk, double e) { return unisigned_cover_check(blk, e); },
      "layer cover");
}

// Sufficient test: every layer block passes the residual-cover test.
template <class S>
Verdict<S> layer_residual_check(const LeaderFollowerSystem<S>& sys,
                                double eps = kDefaultEps) {
  return detail::layered_check(
      sys, eps,
      [](const Mat<S>& blk, double e) { return residual_cover_check(blk, e); },
      "layer residual");
}

// The pair (A, [I_m; 0]) is herdable iff the reduced pair (A22, A21) is.
template <class S>
std::pair<Mat<S>, Mat<S>> reduce(const Mat<S>& A, Index m) {
  auto p = block_partition(A, m);
  return {p.A22, p.A21};
}

namespace detail {

// Lift a certificate of the reduced pair to the full system: the image of the
// full reachability matrix contains [v1; v2] for any v1 and any v2 reachable
// in the reduced pair, so solve for a preimage of [1; R_red u2].
template <class S>
Verdict<S> lift_reduced_certificate(const Mat<S>& A, Index m,
                                    const Vec<S>& u2, const Mat<S>& R_red,
                                    std::string msg) {
  const Index n = A.rows();
  Mat<S> R = reachability_matrix(A, leader_input_matrix<S>(n, m));
  Vec<S> rhs(n);
  rhs.head(m) = Vec<S>::Constant(m, S(1));
  rhs.tail(n - m) = R_red * u2;
  Eigen::FullPivLU<Mat<S>> lu(R);
  Vec<S> u = lu.solve(rhs);
  Verdict<S> v;
  v.status = Status::Herdable;
  v.detail = std::move(msg);
  if (verify_certificate(R, u)) {
    v.certificate = std::move(u);
    return v;
  }
  auto lp = positive_image_feasible(R);
  if (!lp.feasible)
    throw NumericError("reduction accepted but the full-system oracle refused");
  v.certificate = lp.point;
  v.detail += "; certificate recovered from the feasibility oracle";
  return v;
}

}  // namespace detail

// Sufficient test via sign symmetry: a strongly connected system whose signed
// graph splits into two classes (positive arcs inside a class, negative arcs
// across) with the first class contained in the leader set is herdable.
// Certificate comes from the oracle on the reduced pair, lifted back up.
template <class S>
Verdict<S> balance_reduction_check(const Mat<S>& A, Index m,
                                   double eps = kDefaultEps) {
  if (A.rows() != A.cols())
    throw DimensionError("balance_reduction_check: A must be square");
  const Index n = A.rows();
  if (m < 1 || m >= n)
    throw PartitionError("balance_reduction_check: need 1 <= m < n");
  Verdict<S> v;
  auto g = graph_from_matrix(A, /*directed=*/true, eps);
  if (!is_strongly_connected(g)) {
    v.detail = "graph is not strongly connected";
    return v;
  }
  auto classes = structural_balance_partition(g, eps);
  if (!classes) {
    v.detail = "graph is not structurally balanced";
    return v;
  }
  for (Index node : classes->first) {
    if (node >= m) {
      v.detail = "balance class containing node 1 reaches follower " +
                 std::to_string(node + 1);
      return v;
    }
  }
  auto [A22, A21] = reduce(A, m);
  Mat<S> R_red = reachability_matrix(A22, A21);
  auto lp = positive_image_feasible(R_red);
  if (!lp.feasible)
    throw NumericError(
        "balance hypotheses hold but the reduced pair is infeasible");
  return detail::lift_reduced_certificate(
      A, m, lp.point, R_red,
      "strongly connected and balanced with class V1 inside the leader set");
}

// Sufficient test: followers are reached in one hop with sign-consistent
// influence: A21 has no zero rows and each column is zero or unisigned.  The
// certificate is explicit: pick u1 with A21 u1 >= 1 and cancel the leader
// drift with the first input block.
template <class S>
Verdict<S> direct_influence_check(const Mat<S>& A, Index m,
                                  double eps = kDefaultEps) {
  auto p = block_partition(A, m);
  const Index n = A.rows();
  Verdict<S> v;
  if (has_zero_row(p.A21, eps)) {
    v.detail = "a follower row of A21 is zero";
    return v;
  }
  EliminationStep<S> step;
  for (Index j = 0; j < m; ++j) {
    Vec<S> col = p.A21.col(j);
    auto zp = nonzero_pattern(col, eps);
    if (zp.empty()) continue;
    auto s = is_unisigned(col, eps);
    if (!s) {
      v.detail = "column " + std::to_string(j + 1) + " of A21 mixes signs";
      return v;
    }
    step.columns.emplace_back(j, S(sign_value(*s)));
  }
  for (Index r = 0; r < n - m; ++r) step.rows.push_back(r);
  EliminationTrace<S> trace{std::move(step)};
  Vec<S> u1;
  try {
    u1 = compose_block_certificates(p.A21, trace);
  } catch (const CertificateAssemblyError&) {
    auto lp = positive_image_feasible(p.A21);
    if (!lp.feasible)
      throw NumericError(
          "direct-influence hypotheses hold but A21 u >= 1 is infeasible");
    u1 = lp.point;
  }
  Mat<S> R = reachability_matrix(A, leader_input_matrix<S>(n, m));
  Vec<S> u = Vec<S>::Zero(R.cols());
  u.head(m) = Vec<S>::Constant(m, S(1)) - p.A11 * u1;
  u.segment(m, m) = u1;
  v.status = Status::Herdable;
  v.detail = "A21 has no zero rows and sign-consistent columns";
  if (verify_certificate(R, u)) {
    v.certificate = std::move(u);
    return v;
  }
  auto lp = positive_image_feasible(R);
  if (!lp.feasible)
    throw NumericError(
        "direct-influence hypotheses hold but the oracle refused");
  v.certificate = lp.point;
  v.detail += "; certificate recovered from the feasibility oracle";
  return v;
}

}  // namespace herd
