#pragma once

// The extended Douglas-Rachford iteration with independent step sizes
// (alpha, beta) and relaxation theta:
//
//   x1 = J_{alpha A}(z)
//   x2 = J_{beta B}((1 + beta/alpha) x1 - (beta/alpha) z)
//   z+ = z + theta (x2 - x1)
//
// together with the sharp parameter-region classification, fixed-point
// residuals, and the scalar counterexample pair that certifies sharpness.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "xdrs/errors.hpp"
#include "xdrs/functions.hpp"
#include "xdrs/numerics.hpp"

namespace xdrs {

struct SplitParams {
  double alpha;
  double beta;
  double theta;

  SplitParams(double a, double b, double t) : alpha(a), beta(b), theta(t) {
    if (!(a > 0.0) || !(b > 0.0))
      throw std::invalid_argument("SplitParams: alpha, beta must be > 0");
    if (t == 0.0) throw std::invalid_argument("SplitParams: theta must be != 0");
  }

  // Recomputed on demand; never stored stale.
  double tau() const { return alpha / beta; }
};

// Region tags against
//   S1 = { tau <= 1, theta in (0, 2 tau) }
//   S2 = { tau >= 1, theta in (0, 2) }.
// Boundaries theta = 2 and theta = 2 tau classify as Outside (open intervals).
enum class RegionClass { InS1Only, InS2Only, InBoth, Outside };

inline const char* to_string(RegionClass r) {
  switch (r) {
    case RegionClass::InS1Only: return "InS1Only";
    case RegionClass::InS2Only: return "InS2Only";
    case RegionClass::InBoth: return "InBoth";
    case RegionClass::Outside: return "Outside";
  }
  return "?";
}

inline RegionClass classify_params(const SplitParams& p) {
  const double tau = p.tau();
  const double theta = p.theta;
  if (std::abs(tau - 1.0) <= 1e-12) {
    return (theta > 0.0 && theta < 2.0) ? RegionClass::InBoth
                                        : RegionClass::Outside;
  }
  if (tau < 1.0) {
    return (theta > 0.0 && theta < 2.0 * tau) ? RegionClass::InS1Only
                                              : RegionClass::Outside;
  }
  return (theta > 0.0 && theta < 2.0) ? RegionClass::InS2Only
                                      : RegionClass::Outside;
}

inline bool in_region(RegionClass r) { return r != RegionClass::Outside; }

// One iterate. When recorded in a trace, z is the pre-update point z^k and
// x1, x2, u1, u2 are evaluated from it, so that
//   u1 = (z - x1)/alpha
//   u2 = ((1 + beta/alpha) x1 - (beta/alpha) z - x2)/beta
// hold by construction (and hence u1 + u2 = (x1 - x2)/beta).
// The state returned by edr_step instead carries the updated z for chaining.
struct EDRState {
  std::size_t k = 0;
  Vector z, x1, x2, u1, u2;
};

enum class StopReason { ResidualMet, MaxIters, Diverged };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::ResidualMet: return "ResidualMet";
    case StopReason::MaxIters: return "MaxIters";
    case StopReason::Diverged: return "Diverged";
  }
  return "?";
}

// Blow-up guard: converts counterexample divergence into a reportable stop
// reason instead of a float overflow.
inline constexpr double kDivergenceGuard = 1e12;

struct Trace {
  SplitParams params;
  OperatorSpec f_op;  // operator in the first (subdifferential) position
  OperatorSpec g_op;  // operator in the second position
  std::vector<EDRState> states;
  StopReason stop_reason = StopReason::MaxIters;
  double final_residual = kInf;
  double tol = 0.0;  // stopping tolerance the run used
};

// Both resolvents with their step sizes factored once; iterating drivers
// reuse one engine for the whole run.
class EdrEngine {
 public:
  EdrEngine(const OperatorSpec& f_op, const OperatorSpec& g_op,
            const SplitParams& p)
      : p_(p), f_res_(f_op, p.alpha), g_res_(g_op, p.beta) {}

  EDRState step(const Vector& z, std::size_t k = 0) const {
    const double r = p_.beta / p_.alpha;
    EDRState s;
    s.x1 = f_res_.apply(z);
    const Vector w = (1.0 + r) * s.x1 - r * z;
    s.x2 = g_res_.apply(w);
    s.u1 = (1.0 / p_.alpha) * (z - s.x1);
    s.u2 = (1.0 / p_.beta) * (w - s.x2);
    s.z = z + p_.theta * (s.x2 - s.x1);
    s.k = k + 1;
    return s;
  }

 private:
  SplitParams p_;
  ResolventCache f_res_, g_res_;
};

// One update of the iteration. The returned state's z is the post-update
// point z^{k+1}; x1, x2, u1, u2 belong to the input z.
inline EDRState edr_step(const OperatorSpec& f_op, const OperatorSpec& g_op,
                         const SplitParams& p, const Vector& z,
                         std::size_t k = 0) {
  return EdrEngine(f_op, g_op, p).step(z, k);
}

// Runs the iteration until the fixed-point residual ||x2 - x1|| drops below
// tol * (1 + ||z||), the iteration budget is exhausted, or the divergence
// guard trips. Every visited state is recorded.
inline Trace edr_run(const OperatorSpec& f_op, const OperatorSpec& g_op,
                     const SplitParams& p, const Vector& z0,
                     std::size_t max_iters, double tol) {
  if (max_iters < 1) throw std::invalid_argument("edr_run: max_iters >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("edr_run: tol must be > 0");
  Trace tr{p, f_op, g_op, {}, StopReason::MaxIters, kInf, tol};
  const EdrEngine engine(f_op, g_op, p);
  Vector z = z0;
  for (std::size_t k = 0;; ++k) {
    if (norm(z) > kDivergenceGuard || !all_finite(z)) {
      tr.stop_reason = StopReason::Diverged;
      break;
    }
    EDRState next = engine.step(z, k);
    EDRState rec;
    rec.k = k;
    rec.z = z;
    rec.x1 = std::move(next.x1);
    rec.x2 = std::move(next.x2);
    rec.u1 = std::move(next.u1);
    rec.u2 = std::move(next.u2);
    tr.states.push_back(std::move(rec));
    const double res = norm(tr.states.back().x2 - tr.states.back().x1);
    tr.final_residual = res;
    if (res <= tol * (1.0 + norm(z))) {
      tr.stop_reason = StopReason::ResidualMet;
      break;
    }
    z = std::move(next.z);
    if (k + 1 == max_iters) {
      tr.stop_reason = StopReason::MaxIters;
      break;
    }
  }
  return tr;
}

// max(||x - J_{alpha A}(z)||, ||x - J_{beta B}((1+beta/alpha)x - (beta/alpha)z)||):
// zero exactly when (x, x, z) lies in the fixed-point set.
inline double fix_residual(const OperatorSpec& f_op, const OperatorSpec& g_op,
                           const SplitParams& p, const Vector& x,
                           const Vector& z) {
  const double r = p.beta / p.alpha;
  const Vector j1 = f_op.resolvent(p.alpha, z);
  const Vector j2 = g_op.resolvent(p.beta, (1.0 + r) * x - r * z);
  return std::max(norm(x - j1), norm(x - j2));
}

// A fixed point (x*, z*) with u* = (z* - x*)/alpha in df(x*).
struct FixedPointRef {
  Vector x_star, z_star, u_star;
};

// Extracts the limit of a tightly converged run (tol <= 1e-10) and asserts
// the fixed-point residual is below 1e-8.
inline FixedPointRef extract_fixed_point(const Trace& tr) {
  if (tr.stop_reason != StopReason::ResidualMet)
    throw NotConverged("extract_fixed_point: run did not meet residual");
  if (tr.tol > 1e-10)
    throw NotConverged("extract_fixed_point: run tolerance above 1e-10");
  const EDRState& last = tr.states.back();
  FixedPointRef ref;
  ref.x_star = last.x1;
  ref.z_star = last.z;
  ref.u_star = (1.0 / tr.params.alpha) * (ref.z_star - ref.x_star);
  if (fix_residual(tr.f_op, tr.g_op, tr.params, ref.x_star, ref.z_star) > 1e-8)
    throw NotConverged("extract_fixed_point: fixed-point residual above 1e-8");
  return ref;
}

// Per-step multipliers of the two scalar counterexamples (f, g) = (0, i_{0})
// and (i_{0}, 0): the iterates follow z^{k+1} = factor * z^k exactly.
// Outside the convergence region (with theta > 0) at least one multiplier
// has magnitude >= 1.
inline std::pair<double, double> counterexample_factors(const SplitParams& p) {
  return {1.0 - p.theta, 1.0 - p.theta * p.beta / p.alpha};
}

// The scalar problem pairs behind counterexample_factors.
// which = 0: f = 0, g = indicator of {0};  which = 1: roles swapped.
inline std::pair<OperatorSpec, OperatorSpec> counterexample_problem(int which) {
  OperatorSpec zero_fn =
      OperatorSpec::subdifferential(ConvexFunction::zero(1));
  OperatorSpec point_ind =
      OperatorSpec::subdifferential(ConvexFunction::indicator_point(Vector{0.0}));
  if (which == 0) return {zero_fn, point_ind};
  return {point_ind, zero_fn};
}

}  // namespace xdrs
