#pragma once

// Operator-composition view of the extended Douglas-Rachford iteration:
// relaxed resolvents R_A^{a,b} = (1 + b/a) J_{aA} - (b/a) Id, the averaged
// composition
//
//   T = (1 - theta b/(a+b)) Id + (theta b/(a+b)) R_B^{b,a} R_A^{a,b},
//
// conic constants of the two factors, and the two-line feasibility example
// whose 2x2 iteration matrix exhibits convergence without nonexpansiveness.

#include <cmath>
#include <cstddef>

#include "xdrs/edr.hpp"
#include "xdrs/errors.hpp"
#include "xdrs/functions.hpp"
#include "xdrs/numerics.hpp"

namespace xdrs {

inline Vector relaxed_resolvent(const OperatorSpec& op, double alpha,
                                double beta, const Vector& z) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("relaxed_resolvent: steps must be > 0");
  const double r = beta / alpha;
  return (1.0 + r) * op.resolvent(alpha, z) - r * z;
}

// One application of the algorithm operator T; agrees with the z-update of
// edr_step up to rounding (two independent arithmetic paths).
inline Vector algorithm_operator_apply(const OperatorSpec& f_op,
                                       const OperatorSpec& g_op,
                                       const SplitParams& p, const Vector& z) {
  const double mu = p.theta * p.beta / (p.alpha + p.beta);
  const Vector r1 = relaxed_resolvent(f_op, p.alpha, p.beta, z);
  const Vector r2 = relaxed_resolvent(g_op, p.beta, p.alpha, r1);
  return (1.0 - mu) * z + mu * r2;
}

enum class ConicClass {
  BothNonexpansive,          // alpha = beta
  FirstConicSecondAveraged,  // alpha < beta
  FirstAveragedSecondConic,  // alpha > beta
};

inline const char* to_string(ConicClass c) {
  switch (c) {
    case ConicClass::BothNonexpansive: return "BothNonexpansive";
    case ConicClass::FirstConicSecondAveraged:
      return "FirstConicSecondAveraged";
    case ConicClass::FirstAveragedSecondConic:
      return "FirstAveragedSecondConic";
  }
  return "?";
}

struct ConicReport {
  double lambda_ab = 1.0;  // (1 + beta/alpha)/2, conic constant of R_A^{a,b}
  double lambda_ba = 1.0;  // (1 + alpha/beta)/2
  double product = 1.0;    // >= 1, with equality iff alpha = beta
  ConicClass classification = ConicClass::BothNonexpansive;
};

inline ConicReport conic_report(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("conic_report: steps must be > 0");
  ConicReport rep;
  rep.lambda_ab = 0.5 * (1.0 + beta / alpha);
  rep.lambda_ba = 0.5 * (1.0 + alpha / beta);
  rep.product = rep.lambda_ab * rep.lambda_ba;
  if (std::abs(alpha - beta) <= 1e-12 * std::max(alpha, beta))
    rep.classification = ConicClass::BothNonexpansive;
  else if (alpha < beta)
    rep.classification = ConicClass::FirstConicSecondAveraged;
  else
    rep.classification = ConicClass::FirstAveragedSecondConic;
  return rep;
}

struct RateReport {
  Matrix T;  // 2x2 iteration matrix
  double spectral_radius = 0.0;
  double max_singular_value = 0.0;
};

// Two-line feasibility: C1 = span{(c,1)}, C2 = span{(0,1)}. The iteration
// matrix is extracted by applying the algorithm operator to the standard
// basis, which exercises the full composition path; the hand-written matrix
// for c = 1/2 is then an assertion in the tests, not an input here.
inline RateReport line_feasibility_rates(double c, const SplitParams& p) {
  if (c == 0.0) throw DegenerateLines("line_feasibility_rates: c = 0");
  const OperatorSpec f_op = OperatorSpec::subdifferential(
      ConvexFunction::indicator_affine(Matrix{{1.0, -c}}, Vector{0.0}));
  const OperatorSpec g_op = OperatorSpec::subdifferential(
      ConvexFunction::indicator_affine(Matrix{{1.0, 0.0}}, Vector{0.0}));
  RateReport rep;
  rep.T = Matrix(2, 2);
  for (std::size_t j = 0; j < 2; ++j) {
    Vector e(2);
    e[j] = 1.0;
    const Vector col = algorithm_operator_apply(f_op, g_op, p, e);
    rep.T(0, j) = col[0];
    rep.T(1, j) = col[1];
  }
  const Spectrum2x2 spec = spectrum_2x2(rep.T);
  rep.spectral_radius = spec.eig_moduli[0];
  rep.max_singular_value = spec.singular_values[0];
  return rep;
}

// Geometric-mean per-step contraction of z^{k+1} = T z^k over the window
// k in [k_lo, k_hi); the empirical counterpart of the spectral radius.
inline double empirical_linear_rate(const Matrix& t, Vector z0,
                                    std::size_t k_lo, std::size_t k_hi) {
  if (k_hi <= k_lo)
    throw std::invalid_argument("empirical_linear_rate: empty window");
  Vector z = std::move(z0);
  double log_sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < k_hi; ++k) {
    const Vector next = t.apply(z);
    if (k >= k_lo) {
      log_sum += std::log(norm(next) / norm(z));
      ++count;
    }
    z = next;
  }
  return std::exp(log_sum / static_cast<double>(count));
}

}  // namespace xdrs
