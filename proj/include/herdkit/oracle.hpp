#pragma once

#include <string>
#include <vector>

#include "herdkit/linalg.hpp"
#include "herdkit/types.hpp"

namespace herd {

// Outcome of the positive-image feasibility LP for M u >= 1 (u free).
template <class S>
struct FeasibilityResult {
  bool feasible = false;
  S objective = S(0);   // phase-1 optimum (sum of artificials)
  Vec<S> point;         // u with M u >= 1, when feasible
  Vec<S> farkas;        // y >= 0, y != 0, M^T y = 0, when infeasible
  long iterations = 0;
};

namespace detail {

// min sum(s)  s.t.  M u+ - M u- + s - t = 1,  all variables >= 0.
// Feasible for the original system iff the optimum is zero.  Bland's rule
// keeps the pivot sequence finite and deterministic; with a rational scalar
// every quantity below is exact.
template <class S>
FeasibilityResult<S> phase1_simplex(const Mat<S>& M) {
  const Index n = M.rows(), k = M.cols();
  const Index ncols = 2 * k + 2 * n;
  const Index s0 = 2 * k;      // artificial block
  const Index t0 = 2 * k + n;  // surplus block

  Mat<S> T(n, ncols);
  T.leftCols(k) = M;
  T.middleCols(k, k) = -M;
  T.middleCols(s0, n) = Mat<S>::Identity(n, n);
  T.middleCols(t0, n) = -Mat<S>::Identity(n, n);
  Vec<S> b = Vec<S>::Constant(n, S(1));

  // Reduced costs for the initial basis (the artificial block): the basis
  // matrix is the identity and every basic cost is 1.
  Vec<S> rc(ncols);
  for (Index j = 0; j < ncols; ++j) {
    S colsum(0);
    for (Index i = 0; i < n; ++i) colsum += T(i, j);
    S cost = (j >= s0 && j < t0) ? S(1) : S(0);
    rc[j] = cost - colsum;
  }
  std::vector<Index> basis(n);
  for (Index i = 0; i < n; ++i) basis[i] = s0 + i;

  constexpr bool exact = scalar_traits<S>::exact;
  auto rc_negative = [&](const S& v) {
    if (exact) return v < S(0);
    return scalar_traits<S>::to_double(v) < -1e-9;
  };
  auto pivot_usable = [&](const S& v) {
    if (exact) return v > S(0);
    return scalar_traits<S>::to_double(v) > 1e-9;
  };

  const long iter_cap = 2000 + 64 * static_cast<long>(n + ncols) * (n + 1);
  long iters = 0;
  for (;; ++iters) {
    if (iters > iter_cap)
      throw NumericError("phase-1 simplex exceeded the iteration cap");
    Index entering = -1;
    for (Index j = 0; j < ncols; ++j) {
      if (rc_negative(rc[j])) { entering = j; break; }
    }
    if (entering < 0) break;

    Index leaving = -1;
    S best_ratio(0);
    for (Index i = 0; i < n; ++i) {
      if (!pivot_usable(T(i, entering))) continue;
      S ratio = b[i] / T(i, entering);
      if (leaving < 0 || ratio < best_ratio ||
          (ratio == best_ratio && basis[i] < basis[leaving])) {
        leaving = i;
        best_ratio = ratio;
      }
    }
    if (leaving < 0)
      throw NumericError("phase-1 simplex: unbounded pivot column (internal)");

    const S piv = T(leaving, entering);
    T.row(leaving) /= piv;
    b[leaving] /= piv;
    for (Index i = 0; i < n; ++i) {
      if (i == leaving) continue;
      const S f = T(i, entering);
      if (f == S(0)) continue;
      T.row(i) -= f * T.row(leaving);
      b[i] -= f * b[leaving];
      T(i, entering) = S(0);
    }
    const S frc = rc[entering];
    rc -= frc * T.row(leaving).transpose();
    rc[entering] = S(0);
    basis[leaving] = entering;
  }

  S objective(0);
  for (Index i = 0; i < n; ++i)
    if (basis[i] >= s0 && basis[i] < t0) objective += b[i];

  FeasibilityResult<S> res;
  res.objective = objective;
  res.iterations = iters;
  res.feasible = exact ? objective == S(0)
                       : scalar_traits<S>::to_double(objective) <= 1e-8;
  if (res.feasible) {
    Vec<S> x = Vec<S>::Zero(ncols);
    for (Index i = 0; i < n; ++i) x[basis[i]] = b[i];
    res.point = x.head(k) - x.segment(k, k);
  } else {
    // Dual multipliers read off the surplus block: rc(t_i) = y_i, which at
    // optimality gives y >= 0, M^T y = 0, 1^T y = objective > 0.
    Vec<S> y(n);
    for (Index i = 0; i < n; ++i) {
      y[i] = rc[t0 + i];
      if (!exact && scalar_traits<S>::to_double(y[i]) < 0) y[i] = S(0);
    }
    res.farkas = y;
  }
  return res;
}

}  // namespace detail

template <class S>
FeasibilityResult<S> positive_image_feasible(const Mat<S>& M) {
  if (M.rows() == 0 || M.cols() == 0)
    throw ArgumentError("positive_image_feasible: M must be nonempty");
  if (!all_finite(M))
    throw NumericError("positive_image_feasible: M has non-finite entries");
  return detail::phase1_simplex(M);
}

template <class S>
bool verify_certificate(const Mat<S>& M, const Vec<S>& u, double tol = 1e-8) {
  if (u.size() != M.cols())
    throw DimensionError("verify_certificate: u length " +
                         std::to_string(u.size()) + " != columns " +
                         std::to_string(M.cols()));
  const S threshold = S(1) - scalar_traits<S>::from_double(tol);
  Vec<S> r = M * u;
  for (Index i = 0; i < r.size(); ++i)
    if (r[i] < threshold) return false;
  return true;
}

// Decides the pair (A, B) by testing whether the image of the reachability
// matrix meets the open positive orthant.  Never returns Unknown.
template <class S>
Verdict<S> herdable(const Mat<S>& A, const Mat<S>& B,
                    double eps = kDefaultEps) {
  Mat<S> R = reachability_matrix(A, B);
  for (Index i = 0; i < R.rows(); ++i) {
    bool zero_row = true;
    for (Index j = 0; j < R.cols(); ++j)
      if (!is_zero(R(i, j), eps)) { zero_row = false; break; }
    if (zero_row) {
      Verdict<S> v;
      v.status = Status::NotHerdable;
      Vec<S> w = Vec<S>::Zero(R.rows());
      w[i] = S(1);
      v.witness = w;
      v.detail = "row " + std::to_string(i + 1) +
                 " of the reachability matrix is zero";
      return v;
    }
  }
  auto lp = positive_image_feasible(R);
  Verdict<S> v;
  if (lp.feasible) {
    v.status = Status::Herdable;
    v.certificate = lp.point;
    v.detail = "phase-1 optimum zero after " +
               std::to_string(lp.iterations) + " pivots";
  } else {
    v.status = Status::NotHerdable;
    v.witness = lp.farkas;
    v.detail = "phase-1 optimum positive; dual multipliers block the "
               "positive orthant";
  }
  return v;
}

}  // namespace herd
