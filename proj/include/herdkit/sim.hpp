#pragma once

#include <string>
#include <vector>

#include "herdkit/linalg.hpp"
#include "herdkit/oracle.hpp"
#include "herdkit/types.hpp"

namespace herd {

// Open-loop input schedule that pushes every state component to `threshold`
// by time `horizon`.
template <class S>
struct HerdingPlan {
  Index horizon = 0;
  std::vector<Vec<S>> inputs;  // inputs[t] applied at time t
  S threshold = S(0);
  Vec<S> final_state;
};

// x(t+1) = A x(t) + B u(t); returns the trajectory x(0..T).
template <class S>
std::vector<Vec<S>> simulate(const Mat<S>& A, const Mat<S>& B,
                             const Vec<S>& x0,
                             const std::vector<Vec<S>>& inputs) {
  if (A.rows() != A.cols())
    throw DimensionError("simulate: A must be square");
  if (B.rows() != A.rows())
    throw DimensionError("simulate: B row count mismatch");
  if (x0.size() != A.rows())
    throw DimensionError("simulate: x0 length mismatch");
  std::vector<Vec<S>> traj;
  traj.reserve(inputs.size() + 1);
  traj.push_back(x0);
  for (const auto& u : inputs) {
    if (u.size() != B.cols())
      throw DimensionError("simulate: input length " +
                           std::to_string(u.size()) + " != " +
                           std::to_string(B.cols()));
    Vec<S> next = A * traj.back() + B * u;
    for (Index i = 0; i < next.size(); ++i)
      if (!scalar_traits<S>::is_finite(next[i]))
        throw NumericError("simulate: state diverged to a non-finite value");
    traj.push_back(std::move(next));
  }
  return traj;
}

// Scale the herdability certificate until the reachable offset lifts the
// drifted initial state over the threshold, then unstack it into per-step
// inputs: x(n) = A^n x0 + [B | AB | ...] [u(n-1); ...; u(0)].
template <class S>
HerdingPlan<S> synthesize_plan(const Mat<S>& A, const Mat<S>& B,
                               const Vec<S>& x0, const S& threshold,
                               double eps = kDefaultEps) {
  const Index n = A.rows();
  if (x0.size() != n) throw DimensionError("synthesize_plan: x0 length mismatch");
  if (!scalar_traits<S>::is_finite(threshold))
    throw NumericError("synthesize_plan: threshold is not finite");
  Verdict<S> verdict = herdable(A, B, eps);
  if (verdict.status != Status::Herdable)
    throw NotHerdableError("synthesize_plan: pair is not herdable (" +
                           verdict.detail + ")");
  const Index m = B.cols();
  Mat<S> R = reachability_matrix(A, B);
  Vec<S> u_cert = *verdict.certificate;
  Vec<S> r = R * u_cert;  // componentwise >= 1 (up to verify tolerance)
  Vec<S> drift = x0;
  for (Index k = 0; k < n; ++k) drift = A * drift;
  S alpha(0);
  for (Index i = 0; i < n; ++i) {
    S ratio = (threshold - drift[i]) / r[i];
    if (ratio > alpha) alpha = ratio;
  }
  Vec<S> stacked = alpha * u_cert;
  std::vector<Vec<S>> inputs(static_cast<size_t>(n));
  for (Index t = 0; t < n; ++t)
    inputs[t] = stacked.segment((n - 1 - t) * m, m);
  auto traj = simulate(A, B, x0, inputs);
  HerdingPlan<S> plan;
  plan.horizon = n;
  plan.inputs = std::move(inputs);
  plan.threshold = threshold;
  plan.final_state = traj.back();
  for (Index i = 0; i < n; ++i) {
    S slack = plan.final_state[i] - threshold;
    if (!scalar_traits<S>::exact &&
        scalar_traits<S>::to_double(slack) < -1e-6)
      throw NumericError("synthesize_plan: replay misses the threshold");
    if (scalar_traits<S>::exact && slack < S(0))
      throw NumericError("synthesize_plan: exact replay misses the threshold");
  }
  return plan;
}

}  // namespace herd
