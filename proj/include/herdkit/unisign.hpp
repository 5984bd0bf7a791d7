#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "herdkit/oracle.hpp"
#include "herdkit/types.hpp"

namespace herd {

template <class S>
std::vector<Index> nonzero_pattern(const Vec<S>& v,
                                   double eps = kDefaultEps) {
  std::vector<Index> zp;
  for (Index i = 0; i < v.size(); ++i)
    if (!is_zero(v[i], eps)) zp.push_back(i);
  return zp;
}

// A vector is unisigned when it is nonzero and all nonzero entries share one
// sign.  The zero vector is not unisigned.
template <class S>
std::optional<Sign> is_unisigned(const Vec<S>& v, double eps = kDefaultEps) {
  Sign found = Sign::Zero;
  for (Index i = 0; i < v.size(); ++i) {
    Sign s = sign_of(v[i], eps);
    if (s == Sign::Zero) continue;
    if (found == Sign::Zero) found = s;
    else if (found != s) return std::nullopt;
  }
  if (found == Sign::Zero) return std::nullopt;
  return found;
}

// Per-column sign classification of a matrix: which columns are unisigned and
// which rows their nonzero entries jointly reach.
struct UnisignAnalysis {
  std::vector<Index> unisigned_cols;              // ascending
  std::vector<std::optional<Sign>> column_sign;   // one slot per column
  std::vector<Index> covered_rows;                // ascending, deduplicated
};

template <class S>
UnisignAnalysis analyze_columns(const Mat<S>& M, double eps = kDefaultEps) {
  UnisignAnalysis a;
  a.column_sign.resize(M.cols());
  std::vector<char> covered(M.rows(), 0);
  for (Index j = 0; j < M.cols(); ++j) {
    Vec<S> col = M.col(j);
    a.column_sign[j] = is_unisigned(col, eps);
    if (!a.column_sign[j]) continue;
    a.unisigned_cols.push_back(j);
    for (Index i : nonzero_pattern(col, eps)) covered[i] = 1;
  }
  for (Index i = 0; i < M.rows(); ++i)
    if (covered[i]) a.covered_rows.push_back(i);
  return a;
}

template <class S>
bool has_zero_row(const Mat<S>& M, double eps = kDefaultEps) {
  for (Index i = 0; i < M.rows(); ++i) {
    bool zero = true;
    for (Index j = 0; j < M.cols(); ++j)
      if (!is_zero(M(i, j), eps)) { zero = false; break; }
    if (zero) return true;
  }
  return false;
}

// One stage of a structured certificate: a sparse input direction (column,
// coefficient pairs) together with the rows it is responsible for pushing
// above 1.  Stages must be block-triangular: a stage's columns are zero on
// every row owned by a *later* stage, so scaling one stage never disturbs
// rows settled after it.
template <class S>
struct EliminationStep {
  std::vector<std::pair<Index, S>> columns;
  std::vector<Index> rows;
};

template <class S>
using EliminationTrace = std::vector<EliminationStep<S>>;

// Turns a trace into a concrete u with R u >= 1 by walking the stages
// last-to-first, doubling each stage's scale until its rows clear 1.
template <class S>
Vec<S> compose_block_certificates(const Mat<S>& R,
                                  const EliminationTrace<S>& trace) {
  Vec<S> u = Vec<S>::Zero(R.cols());
  const S target = scalar_traits<S>::exact
                       ? S(1)
                       : scalar_traits<S>::from_double(1.0 - 1e-9);
  for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
    const auto& step = *it;
    if (step.rows.empty() && step.columns.empty()) continue;
    Vec<S> d = Vec<S>::Zero(R.cols());
    for (const auto& [col, coef] : step.columns) {
      if (col < 0 || col >= R.cols())
        throw CertificateAssemblyError("trace column out of range");
      d[col] += coef;
    }
    Vec<S> rd = R * d;
    S alpha(1);
    bool done = false;
    for (int doubling = 0; doubling <= 60; ++doubling) {
      bool ok = true;
      for (Index r : step.rows) {
        if (r < 0 || r >= R.rows())
          throw CertificateAssemblyError("trace row out of range");
        S value = (R.row(r) * u).value();
        value += alpha * rd[r];
        if (value < target) { ok = false; break; }
      }
      if (ok) { done = true; break; }
      alpha *= S(2);
    }
    if (!done)
      throw CertificateAssemblyError(
          "stage scale exceeded 2^60 without clearing its rows");
    u += alpha * d;
  }
  return u;
}

namespace detail {

// Wraps a trace into a Herdable verdict; falls back to the LP certificate if
// the composed vector cannot be assembled or fails verification.
template <class S>
Verdict<S> herdable_from_trace(const Mat<S>& R, EliminationTrace<S> trace,
                               std::string detail_msg) {
  Verdict<S> v;
  v.status = Status::Herdable;
  v.detail = std::move(detail_msg);
  try {
    Vec<S> u = compose_block_certificates(R, trace);
    if (verify_certificate(R, u)) {
      v.certificate = std::move(u);
      return v;
    }
  } catch (const CertificateAssemblyError&) {
  }
  auto lp = positive_image_feasible(R);
  if (!lp.feasible)
    throw NumericError(
        "structured check accepted but the feasibility oracle refused");
  v.certificate = lp.point;
  v.detail += "; certificate recovered from the feasibility oracle";
  return v;
}

}  // namespace detail

// Sufficient test: with J the unisigned columns and H the rows they cover,
// accept when there are no zero rows and H misses at most one row; the missed
// row is settled afterwards by any column hitting it.
template <class S>
Verdict<S> unisigned_cover_check(const Mat<S>& R, double eps = kDefaultEps) {
  Verdict<S> v;
  if (R.rows() == 0 || R.cols() == 0)
    throw ArgumentError("unisigned_cover_check: R must be nonempty");
  if (has_zero_row(R, eps)) {
    v.detail = "a zero row makes the covering hypothesis fail";
    return v;
  }
  UnisignAnalysis a = analyze_columns(R, eps);
  const Index n = R.rows();
  const Index covered = static_cast<Index>(a.covered_rows.size());
  if (covered < n - 1) {
    v.detail = "unisigned columns cover " + std::to_string(covered) +
               " of " + std::to_string(n) + " rows";
    return v;
  }
  EliminationTrace<S> trace;
  EliminationStep<S> base;
  for (Index j : a.unisigned_cols)
    base.columns.emplace_back(j, S(sign_value(*a.column_sign[j])));
  base.rows = a.covered_rows;
  trace.push_back(std::move(base));
  if (covered == n - 1) {
    Index missing = -1;
    {
      std::vector<char> in(n, 0);
      for (Index r : a.covered_rows) in[r] = 1;
      for (Index i = 0; i < n; ++i)
        if (!in[i]) { missing = i; break; }
    }
    Index fix = -1;
    for (Index j = 0; j < R.cols(); ++j)
      if (!is_zero(R(missing, j), eps)) { fix = j; break; }
    // A nonzero entry exists (no zero rows) and its column cannot be
    // unisigned, since unisigned columns vanish on the uncovered row.
    EliminationStep<S> patch;
    patch.columns.emplace_back(fix, S(sign_value(sign_of(R(missing, fix), eps))));
    patch.rows = {missing};
    trace.push_back(std::move(patch));
  }
  return detail::herdable_from_trace(
      R, std::move(trace),
      "unisigned columns cover " + std::to_string(covered) + " of " +
          std::to_string(n) + " rows");
}

// Sufficient test: rows missed by the unisigned columns must each be hit by a
// column whose nonzero entries are sign-uniform across the missed rows.
template <class S>
Verdict<S> residual_cover_check(const Mat<S>& R, double eps = kDefaultEps) {
  Verdict<S> v;
  if (R.rows() == 0 || R.cols() == 0)
    throw ArgumentError("residual_cover_check: R must be nonempty");
  if (has_zero_row(R, eps)) {
    v.detail = "a zero row makes the covering hypothesis fail";
    return v;
  }
  UnisignAnalysis a = analyze_columns(R, eps);
  const Index n = R.rows();
  std::vector<char> in_h(n, 0);
  for (Index r : a.covered_rows) in_h[r] = 1;
  std::vector<Index> residual;
  for (Index i = 0; i < n; ++i)
    if (!in_h[i]) residual.push_back(i);

  EliminationTrace<S> trace;
  EliminationStep<S> base;
  for (Index j : a.unisigned_cols)
    base.columns.emplace_back(j, S(sign_value(*a.column_sign[j])));
  base.rows = a.covered_rows;
  if (!base.columns.empty() || !base.rows.empty())
    trace.push_back(std::move(base));

  if (!residual.empty()) {
    std::vector<char> in_j(R.cols(), 0);
    for (Index j : a.unisigned_cols) in_j[j] = 1;
    std::vector<char> chosen(R.cols(), 0);
    EliminationStep<S> patch;
    patch.rows = residual;
    for (Index h : residual) {
      Index pick = -1;
      Sign pick_sign = Sign::Zero;
      for (Index j = 0; j < R.cols(); ++j) {
        if (in_j[j] || is_zero(R(h, j), eps)) continue;
        // Restriction of column j to the residual rows must be sign-uniform.
        Sign uniform = Sign::Zero;
        bool ok = true;
        for (Index q : residual) {
          Sign s = sign_of(R(q, j), eps);
          if (s == Sign::Zero) continue;
          if (uniform == Sign::Zero) uniform = s;
          else if (uniform != s) { ok = false; break; }
        }
        if (ok) { pick = j; pick_sign = uniform; break; }
      }
      if (pick < 0) {
        v.detail = "row " + std::to_string(h + 1) +
                   " has no sign-uniform column over the residual rows";
        return v;
      }
      if (!chosen[pick]) {
        chosen[pick] = 1;
        patch.columns.emplace_back(pick, S(sign_value(pick_sign)));
      }
    }
    std::sort(patch.columns.begin(), patch.columns.end(),
              [](const auto& a_, const auto& b_) { return a_.first < b_.first; });
    trace.push_back(std::move(patch));
  }
  return detail::herdable_from_trace(
      R, std::move(trace),
      std::to_string(residual.size()) + " residual rows patched");
}

// Greedy elimination: repeatedly take the lowest-index column that is
// unisigned on the still-active rows, retire the rows it reaches, restart the
// scan.  Accepts when every row is retired.
template <class S>
Verdict<S> greedy_check(const Mat<S>& R, double eps = kDefaultEps,
                        EliminationTrace<S>* trace_out = nullptr) {
  Verdict<S> v;
  if (R.rows() == 0 || R.cols() == 0)
    throw ArgumentError("greedy_check: R must be nonempty");
  const Index n = R.rows();
  std::vector<char> row_active(n, 1), col_active(R.cols(), 1);
  Index remaining = n;
  EliminationTrace<S> trace;
  while (remaining > 0) {
    Index pick = -1;
    Sign pick_sign = Sign::Zero;
    std::vector<Index> hits;
    for (Index j = 0; j < R.cols() && pick < 0; ++j) {
      if (!col_active[j]) continue;
      Sign uniform = Sign::Zero;
      bool ok = true;
      std::vector<Index> local;
      for (Index i = 0; i < n; ++i) {
        if (!row_active[i]) continue;
        Sign s = sign_of(R(i, j), eps);
        if (s == Sign::Zero) continue;
        if (uniform == Sign::Zero) uniform = s;
        else if (uniform != s) { ok = false; break; }
        local.push_back(i);
      }
      if (ok && uniform != Sign::Zero) {
        pick = j;
        pick_sign = uniform;
        hits = std::move(local);
      }
    }
    if (pick < 0) {
      std::string left;
      for (Index i = 0; i < n; ++i)
        if (row_active[i]) left += (left.empty() ? "" : ",") +
                                   std::to_string(i + 1);
      v.detail = "no column is unisigned on the remaining rows {" + left + "}";
      if (trace_out) *trace_out = {};
      return v;
    }
    EliminationStep<S> step;
    step.columns.emplace_back(pick, S(sign_value(pick_sign)));
    step.rows = hits;
    trace.push_back(std::move(step));
    for (Index i : hits) row_active[i] = 0;
    col_active[pick] = 0;
    remaining -= static_cast<Index>(hits.size());
  }
  if (trace_out) *trace_out = trace;
  return detail::herdable_from_trace(
      R, std::move(trace),
      "greedy elimination retired all rows in " +
          std::to_string(trace.size()) + " stages");
}

}  // namespace herd
