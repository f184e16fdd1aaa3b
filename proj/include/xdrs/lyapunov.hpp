#pragma once

// Per-iteration Lyapunov diagnostics for the extended Douglas-Rachford
// iteration: the two Lyapunov/residual representations V^(i), R^(i), the
// monotonicity aggregate I, the residual of the Lyapunov equality
//
//   V_{k+1}^(i) = V_k^(i) - R_k^(i) - theta alpha I_k,
//
// and the 5x5 quadratic-form matrix identity that certifies the equality
// for all (tau, theta).

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>

#include "xdrs/edr.hpp"
#include "xdrs/errors.hpp"
#include "xdrs/functions.hpp"
#include "xdrs/numerics.hpp"

namespace xdrs {

struct LyapunovRecord {
  std::size_t k = 0;
  // Undefined when a required Bregman value is +inf or the 4*tau - theta
  // denominator of the i=2 representation vanishes.
  std::optional<double> V1, V2, R1, R2;
  double I = 0.0;
  std::optional<double> le_residual_1, le_residual_2;
};

namespace detail {

inline std::optional<double> safe_bregman(const ConvexFunction& f,
                                          const Vector& x, const Vector& y,
                                          const Vector& u) {
  const double fx = f.value(x);
  const double fy = f.value(y);
  if (fx == kInf || fy == kInf) return std::nullopt;
  return fx - fy - dot(u, x - y);
}

// V^(i) at a single recorded state.
inline std::optional<double> lyapunov_value(const EDRState& s,
                                            const FixedPointRef& ref,
                                            const SplitParams& p,
                                            const ConvexFunction& f, int i) {
  const double tau = p.tau();
  const double theta = p.theta;
  const Vector dz = s.z - ref.z_star;
  const Vector d1 = s.x1 - ref.x_star;
  const Vector d21 = s.x2 - s.x1;
  if (i == 1) {
    const Vector lead = dz + (theta / 2.0) * d21 + (tau - 1.0) * d1;
    const double q = dot(lead, lead) +
                     theta * (4.0 * tau - theta) / 4.0 * dot(d21, d21) +
                     tau * (1.0 - tau) * dot(d1, d1);
    const auto b = safe_bregman(f, s.x1, ref.x_star, ref.u_star);
    if (!b) return std::nullopt;
    return q + 2.0 * p.alpha * (1.0 - tau) * *b;
  }
  const double denom = 4.0 * tau - theta;
  if (std::abs(denom) <= 1e-12 * (1.0 + 4.0 * tau + std::abs(theta)))
    return std::nullopt;
  const Vector lead = dz + (theta / 2.0) * d21;
  const Vector mid = d21 + (2.0 * (tau - 1.0) / denom) * d1;
  const double q = dot(lead, lead) +
                   theta * denom / 4.0 * dot(mid, mid) +
                   tau * (tau - 1.0) * (4.0 - theta) / denom * dot(d1, d1);
  const auto b = safe_bregman(f, ref.x_star, s.x1, s.u1);
  if (!b) return std::nullopt;
  return q + 2.0 * p.alpha * (tau - 1.0) * *b;
}

// R^(i) for the consecutive pair (s_k, s_k1).
inline std::optional<double> residual_value(const EDRState& sk,
                                            const EDRState& sk1,
                                            const SplitParams& p,
                                            const ConvexFunction& f, int i) {
  const double tau = p.tau();
  const double theta = p.theta;
  const Vector d12 = sk.x1 - sk.x2;
  const Vector step1 = sk1.x1 - sk.x1;
  if (i == 1) {
    const auto b = safe_bregman(f, sk.x1, sk1.x1, sk1.u1);
    if (!b) return std::nullopt;
    return theta * (2.0 * tau - theta) * dot(d12, d12) +
           (1.0 - tau) * dot(step1, step1) +
           2.0 * p.alpha * (1.0 - tau) * *b;
  }
  const Vector lead = step1 + theta * d12;
  const auto b = safe_bregman(f, sk1.x1, sk.x1, sk.u1);
  if (!b) return std::nullopt;
  return (tau - 1.0) * dot(lead, lead) +
         tau * theta * (2.0 - theta) * dot(d12, d12) +
         2.0 * p.alpha * (tau - 1.0) * *b;
}

}  // namespace detail

// The monotonicity aggregate over the pair (s_k, s_k1): four inner products,
// each nonnegative by monotonicity of the two operators.
inline double lyapunov_inner_sum(const EDRState& sk, const EDRState& sk1,
                                 const FixedPointRef& ref) {
  auto term = [&](const Vector& u, const Vector& x, bool flip_ustar) {
    const Vector du = flip_ustar ? u + ref.u_star : u - ref.u_star;
    return dot(du, x - ref.x_star);
  };
  return term(sk.u1, sk.x1, false) + term(sk.u2, sk.x2, true) +
         term(sk1.u1, sk1.x1, false) + term(sk1.u2, sk1.x2, true);
}

// Full diagnostic row for the consecutive pair (s_k, s_k1). Both states must
// be trace-recorded states (z is the pre-update point), with s_k1 the
// successor of s_k.
inline LyapunovRecord lyapunov_record(const EDRState& sk, const EDRState& sk1,
                                      const FixedPointRef& ref,
                                      const SplitParams& p,
                                      const ConvexFunction& f) {
  {
    // Successor sanity: z^{k+1} = z^k + theta (x2^k - x1^k).
    const Vector pred = sk.z + p.theta * (sk.x2 - sk.x1);
    if (norm(sk1.z - pred) > 1e-9 * (1.0 + norm(pred)))
      throw std::invalid_argument("lyapunov_record: states not consecutive");
  }
  LyapunovRecord rec;
  rec.k = sk.k;
  rec.I = lyapunov_inner_sum(sk, sk1, ref);
  rec.V1 = detail::lyapunov_value(sk, ref, p, f, 1);
  rec.V2 = detail::lyapunov_value(sk, ref, p, f, 2);
  rec.R1 = detail::residual_value(sk, sk1, p, f, 1);
  rec.R2 = detail::residual_value(sk, sk1, p, f, 2);
  const auto v1_next = detail::lyapunov_value(sk1, ref, p, f, 1);
  const auto v2_next = detail::lyapunov_value(sk1, ref, p, f, 2);
  const double rhs = p.theta * p.alpha * rec.I;
  if (rec.V1 && v1_next && rec.R1)
    rec.le_residual_1 = std::abs(*rec.V1 - *v1_next - *rec.R1 - rhs);
  if (rec.V2 && v2_next && rec.R2)
    rec.le_residual_2 = std::abs(*rec.V2 - *v2_next - *rec.R2 - rhs);
  return rec;
}

// V^(i) of the first recorded state; the seed of the telescoped bounds.
inline std::optional<double> lyapunov_v0(const Trace& tr,
                                         const FixedPointRef& ref, int i) {
  if (tr.states.empty()) return std::nullopt;
  if (!tr.f_op.is_subdifferential()) return std::nullopt;
  return detail::lyapunov_value(tr.states.front(), ref, tr.params,
                                tr.f_op.function(), i);
}

// ---------------------------------------------------------------------------
// Quadratic-form matrices: the Lyapunov equality reduces to the 5x5 identity
//   Q_V^(i) - M^T Q_V^(i) M - Q_R^(i) + 2 (1 - tau) Q_low^(i) = theta Q_I
// in the block basis (x1-x*, x2-x*, x1+-x*, x2+-x*, z-z*).
// ---------------------------------------------------------------------------

struct QuadFormMatrices {
  Matrix Q_V, Q_R, Q_low, M, Q_I;  // all 5x5; Q_* symmetric
  int i = 1;
  double tau = 1.0, theta = 1.0;
};

namespace detail {
inline void set_sym(Matrix& m, std::size_t i, std::size_t j, double v) {
  m(i, j) = v;
  m(j, i) = v;
}
}  // namespace detail

inline QuadFormMatrices appendix_matrices(double tau, double theta, int i) {
  if (!(tau > 0.0)) throw std::invalid_argument("appendix_matrices: tau > 0");
  if (theta == 0.0)
    throw std::invalid_argument("appendix_matrices: theta != 0");
  if (i != 1 && i != 2) throw std::invalid_argument("appendix_matrices: i");
  using detail::set_sym;
  QuadFormMatrices out;
  out.i = i;
  out.tau = tau;
  out.theta = theta;

  Matrix qv(5, 5);
  if (i == 1) {
    set_sym(qv, 0, 0, theta - tau + 1.0);
    set_sym(qv, 0, 1, -theta * (1.0 + tau) / 2.0);
    set_sym(qv, 0, 4, tau - 1.0 - theta / 2.0);
    set_sym(qv, 1, 1, theta * tau);
    set_sym(qv, 1, 4, theta / 2.0);
    set_sym(qv, 4, 4, 1.0);
  } else {
    set_sym(qv, 0, 0, theta + tau - 1.0);
    set_sym(qv, 0, 1, -theta * (1.0 + tau) / 2.0);
    set_sym(qv, 0, 4, -theta / 2.0);
    set_sym(qv, 1, 1, theta * tau);
    set_sym(qv, 1, 4, theta / 2.0);
    set_sym(qv, 4, 4, 1.0);
  }
  out.Q_V = qv;

  Matrix qr(5, 5);
  if (i == 1) {
    set_sym(qr, 0, 0, theta * (2.0 * tau - theta) - tau + 1.0);
    set_sym(qr, 0, 1, -theta * (2.0 * tau - theta));
    set_sym(qr, 0, 2, -(1.0 - tau));
    set_sym(qr, 1, 1, theta * (2.0 * tau - theta));
    set_sym(qr, 2, 2, 1.0 - tau);
  } else {
    set_sym(qr, 0, 0, theta * (2.0 - theta) + tau - 1.0);
    set_sym(qr, 0, 1, theta * (theta - 1.0 - tau));
    set_sym(qr, 0, 2, (theta - 1.0) * (tau - 1.0));
    set_sym(qr, 1, 1, theta * (2.0 * tau - theta));
    set_sym(qr, 1, 2, -theta * (tau - 1.0));
    set_sym(qr, 2, 2, tau - 1.0);
  }
  out.Q_R = qr;

  Matrix ql(5, 5);
  if (i == 1) {
    set_sym(ql, 0, 0, -theta);
    set_sym(ql, 0, 1, theta / 2.0);
    set_sym(ql, 0, 2, (theta - 1.0) / 2.0);
    set_sym(ql, 0, 4, 0.5);
    set_sym(ql, 1, 2, -theta / 2.0);
    set_sym(ql, 2, 2, 1.0);
    set_sym(ql, 2, 4, -0.5);
  } else {
    set_sym(ql, 0, 2, (1.0 - theta) / 2.0);
    set_sym(ql, 1, 2, theta / 2.0);
    set_sym(ql, 2, 2, -1.0);
  }
  out.Q_low = ql;

  Matrix m(5, 5);
  m(0, 2) = 1.0;
  m(1, 3) = 1.0;
  m(4, 0) = -theta;
  m(4, 1) = theta;
  m(4, 4) = 1.0;
  out.M = m;

  Matrix qi(5, 5);
  set_sym(qi, 0, 0, -1.0);
  set_sym(qi, 0, 1, (1.0 + tau) / 2.0);
  set_sym(qi, 0, 2, -theta / 2.0);
  set_sym(qi, 0, 3, theta / 2.0);
  set_sym(qi, 0, 4, 0.5);
  set_sym(qi, 1, 1, -tau);
  set_sym(qi, 1, 2, theta / 2.0);
  set_sym(qi, 1, 3, -theta / 2.0);
  set_sym(qi, 1, 4, -0.5);
  set_sym(qi, 2, 2, -1.0);
  set_sym(qi, 2, 3, (1.0 + tau) / 2.0);
  set_sym(qi, 2, 4, 0.5);
  set_sym(qi, 3, 3, -tau);
  set_sym(qi, 3, 4, -0.5);
  out.Q_I = qi;
  return out;
}

// Max-abs entry of Q_V - M^T Q_V M - Q_R + 2(1-tau) Q_low - theta Q_I;
// zero (to roundoff) for every (tau, theta) and both i.
inline double appendix_matrix_identity(double tau, double theta, int i) {
  const QuadFormMatrices m = appendix_matrices(tau, theta, i);
  const Matrix mt_qv_m = m.M.transpose() * m.Q_V * m.M;
  Matrix d = m.Q_V;
  d -= mt_qv_m;
  d -= m.Q_R;
  d += 2.0 * (1.0 - tau) * m.Q_low;
  d -= theta * m.Q_I;
  return d.max_abs();
}

// <v, Q v> with the 5 blocks sharing one dimension:
// sum_{i,j} Q[i][j] <v_i, v_j>.
inline double quadform_eval(const Matrix& q, const std::array<Vector, 5>& v) {
  if (q.rows() != 5 || q.cols() != 5) throw DimMismatch("quadform_eval: Q 5x5");
  for (int i = 1; i < 5; ++i)
    if (v[i].size() != v[0].size())
      throw DimMismatch("quadform_eval: block dims differ");
  double s = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      if (q(i, j) == 0.0) continue;
      s += q(i, j) * dot(v[i], v[j]);
    }
  return s;
}

}  // namespace xdrs
