#pragma once

// Ergodic averages of the extended Douglas-Rachford iterates and the
// primal-dual gap functions they control:
//
//   gap     = D_f(x, x*, u*) + D_{g*}(u, -u*, x*)
//   gap_bar = D_{f*}(u, u*, x*) + D_g(x, x*, -u*)
//
// Along the ergodic sequence, gap + gap_bar <= V_0^(i) / (alpha theta (K+1)).

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "xdrs/edr.hpp"
#include "xdrs/errors.hpp"
#include "xdrs/functions.hpp"
#include "xdrs/lyapunov.hpp"
#include "xdrs/numerics.hpp"

namespace xdrs {

struct ErgodicIterates {
  std::size_t K = 0;
  Vector xbar1, xbar2, ubar1, ubar2;  // arithmetic means over k = 0..K
};

inline ErgodicIterates ergodic_averages(const Trace& tr, std::size_t K) {
  if (K >= tr.states.size())
    throw std::out_of_range("ergodic_averages: K beyond trace length");
  const std::size_t n = tr.states.front().z.size();
  ErgodicIterates e{K, Vector(n), Vector(n), Vector(n), Vector(n)};
  for (std::size_t k = 0; k <= K; ++k) {
    e.xbar1 += tr.states[k].x1;
    e.xbar2 += tr.states[k].x2;
    e.ubar1 += tr.states[k].u1;
    e.ubar2 += tr.states[k].u2;
  }
  const double w = 1.0 / static_cast<double>(K + 1);
  e.xbar1 *= w;
  e.xbar2 *= w;
  e.ubar1 *= w;
  e.ubar2 *= w;
  return e;
}

struct GapPair {
  double gap = 0.0;      // D_{x*,-u*}(x1, u2)
  double gap_bar = 0.0;  // D-bar_{x*,u*}(x2, u1)
  double bound = 0.0;    // V_0^(i) / (alpha theta (K+1)); 0 when not attached
};

// Both gap functions at a point, via the analytic conjugate table. Arguments
// outside a domain give +inf gaps (reported, not thrown);
// ConjugateUnavailable propagates for shapes outside the table.
inline GapPair pd_gaps(const ConvexFunction& f, const ConvexFunction& g,
                       const FixedPointRef& ref, const Vector& x1,
                       const Vector& u2, const Vector& x2, const Vector& u1) {
  const Vector& xs = ref.x_star;
  const Vector& us = ref.u_star;
  GapPair out;
  const double f_x1 = f.value(x1);
  const double f_xs = f.value(xs);
  const double gc_u2 = g.conjugate_value(u2);
  const double gc_mus = g.conjugate_value(-us);
  if (f_x1 == kInf || f_xs == kInf || gc_u2 == kInf || gc_mus == kInf) {
    out.gap = kInf;
  } else {
    out.gap = (f_x1 - f_xs - dot(us, x1 - xs)) +
              (gc_u2 - gc_mus - dot(xs, u2 + us));
  }
  const double fc_u1 = f.conjugate_value(u1);
  const double fc_us = f.conjugate_value(us);
  const double g_x2 = g.value(x2);
  const double g_xs = g.value(xs);
  if (fc_u1 == kInf || fc_us == kInf || g_x2 == kInf || g_xs == kInf) {
    out.gap_bar = kInf;
  } else {
    out.gap_bar = (fc_u1 - fc_us - dot(xs, u1 - us)) +
                  (g_x2 - g_xs + dot(us, x2 - xs));
  }
  return out;
}

// Gap series at the ergodic iterates of an in-region run, each paired with
// the telescoped bound V_0^(i)/(alpha theta (K+1)), i chosen by region
// (i = 1 when tau <= 1, else 2). Checks gap + gap_bar <= bound + 1e-8 at
// every K.
inline std::vector<GapPair> ergodic_bound_series(const Trace& tr,
                                                 const FixedPointRef& ref,
                                                 const SplitParams& p,
                                                 const ConvexFunction& f,
                                                 const ConvexFunction& g) {
  if (!in_region(classify_params(p)))
    throw std::invalid_argument("ergodic_bound_series: params out of region");
  if (tr.states.size() < 2)
    throw std::invalid_argument("ergodic_bound_series: need >= 2 states");
  const int i = (p.tau() <= 1.0) ? 1 : 2;
  const std::optional<double> v0 = lyapunov_v0(tr, ref, i);
  if (!v0) throw Error("ergodic_bound_series: V0 undefined");

  const std::size_t n = tr.states.front().z.size();
  const std::size_t len = tr.states.size();
  std::vector<GapPair> series;
  series.reserve(len);
  Vector s1(n), s2(n), su1(n), su2(n);  // running sums
  for (std::size_t K = 0; K < len; ++K) {
    s1 += tr.states[K].x1;
    s2 += tr.states[K].x2;
    su1 += tr.states[K].u1;
    su2 += tr.states[K].u2;
    const double w = 1.0 / static_cast<double>(K + 1);
    GapPair gp = pd_gaps(f, g, ref, w * s1, w * su2, w * s2, w * su1);
    gp.bound = *v0 / (p.alpha * p.theta * static_cast<double>(K + 1));
    if (!(gp.gap + gp.gap_bar <= gp.bound + 1e-8))
      throw Error("ergodic_bound_series: gap bound violated");
    series.push_back(gp);
  }
  return series;
}

// Conjugate-free variant of the bound chain: the running mean of I_k is
// bounded by V_0^(i)/(alpha theta (K+1)); usable when conjugates are
// unavailable (e.g. an affine indicator in either slot).
inline std::vector<std::pair<double, double>> ik_mean_bound_series(
    const Trace& tr, const FixedPointRef& ref, int i) {
  if (tr.states.size() < 2)
    throw std::invalid_argument("ik_mean_bound_series: need >= 2 states");
  const std::optional<double> v0 = lyapunov_v0(tr, ref, i);
  if (!v0) throw Error("ik_mean_bound_series: V0 undefined");
  std::vector<std::pair<double, double>> out;
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < tr.states.size(); ++k) {
    sum += lyapunov_inner_sum(tr.states[k], tr.states[k + 1], ref);
    const double denom =
        tr.params.alpha * tr.params.theta * static_cast<double>(k + 1);
    out.emplace_back(sum / static_cast<double>(k + 1), *v0 / denom);
  }
  return out;
}

}  // namespace xdrs
