#pragma once

#include <array>
#include <vector>

#include "herdkit/types.hpp"

namespace herd {

// [B, A*B, A^2*B, ..., A^(steps-1)*B], built by repeated multiplication so it
// stays exact for rational scalars.
template <class S>
Mat<S> controllability_matrix(const Mat<S>& A, const Mat<S>& B, Index steps) {
  if (A.rows() != A.cols())
    throw DimensionError("controllability_matrix: A must be square");
  if (B.rows() != A.rows())
    throw DimensionError("controllability_matrix: B has " +
                         std::to_string(B.rows()) + " rows, expected " +
                         std::to_string(A.rows()));
  if (steps < 1)
    throw ArgumentError("controllability_matrix: steps must be >= 1");
  const Index n = A.rows(), m = B.cols();
  Mat<S> R(n, steps * m);
  Mat<S> block = B;
  R.leftCols(m) = block;
  for (Index k = 1; k < steps; ++k) {
    block = A * block;
    R.middleCols(k * m, m) = block;
  }
  return R;
}

template <class S>
Mat<S> reachability_matrix(const Mat<S>& A, const Mat<S>& B) {
  return controllability_matrix(A, B, A.rows());
}

template <class S>
struct BlockPartition {
  Mat<S> A11;  // m x m
  Mat<S> A12;  // m x (n-m)
  Mat<S> A21;  // (n-m) x m
  Mat<S> A22;  // (n-m) x (n-m)
};

template <class S>
BlockPartition<S> block_partition(const Mat<S>& A, Index m) {
  if (A.rows() != A.cols())
    throw DimensionError("block_partition: A must be square");
  const Index n = A.rows();
  if (m < 1 || m >= n)
    throw PartitionError("block_partition: need 1 <= m < n, got m=" +
                         std::to_string(m) + ", n=" + std::to_string(n));
  BlockPartition<S> p;
  p.A11 = A.topLeftCorner(m, m);
  p.A12 = A.topRightCorner(m, n - m);
  p.A21 = A.bottomLeftCorner(n - m, m);
  p.A22 = A.bottomRightCorner(n - m, n - m);
  return p;
}

inline void check_permutation(const std::vector<Index>& perm, Index size,
                              const char* what) {
  if (static_cast<Index>(perm.size()) != size)
    throw PermutationError(std::string(what) + ": permutation length " +
                           std::to_string(perm.size()) + " does not match " +
                           std::to_string(size));
  std::vector<char> seen(perm.size(), 0);
  for (Index v : perm) {
    if (v < 0 || v >= size || seen[v])
      throw PermutationError(std::string(what) + ": not a permutation of 0.." +
                             std::to_string(size - 1));
    seen[v] = 1;
  }
}

// result(i, j) = M(row_perm[i], col_perm[j]); perm maps output slot to source.
template <class S>
Mat<S> permute(const Mat<S>& M, const std::vector<Index>& row_perm,
               const std::vector<Index>& col_perm) {
  check_permutation(row_perm, M.rows(), "permute rows");
  check_permutation(col_perm, M.cols(), "permute cols");
  Mat<S> out(M.rows(), M.cols());
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j)
      out(i, j) = M(row_perm[i], col_perm[j]);
  return out;
}

template <class S>
Mat<S> permute_rows(const Mat<S>& M, const std::vector<Index>& row_perm) {
  check_permutation(row_perm, M.rows(), "permute rows");
  Mat<S> out(M.rows(), M.cols());
  for (Index i = 0; i < M.rows(); ++i) out.row(i) = M.row(row_perm[i]);
  return out;
}

inline std::vector<Index> identity_permutation(Index n) {
  std::vector<Index> p(n);
  for (Index i = 0; i < n; ++i) p[i] = i;
  return p;
}

inline std::vector<Index> invert_permutation(const std::vector<Index>& perm) {
  check_permutation(perm, static_cast<Index>(perm.size()), "invert");
  std::vector<Index> inv(perm.size());
  for (Index i = 0; i < static_cast<Index>(perm.size()); ++i) inv[perm[i]] = i;
  return inv;
}

template <class S>
bool all_finite(const Mat<S>& M) {
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i)
      if (!scalar_traits<S>::is_finite(M(i, j))) return false;
  return true;
}

}  // namespace herd
