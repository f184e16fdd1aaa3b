#pragma once

// Derived algorithms obtained from the extended Douglas-Rachford iteration:
// extended ADMM (with its dual-DR reconstruction), the doubly relaxed
// Chambolle-Pock method (with its lifted-DR equivalence), and extended
// parallel splitting over a consensus formulation.

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "xdrs/edr.hpp"
#include "xdrs/errors.hpp"
#include "xdrs/functions.hpp"
#include "xdrs/numerics.hpp"

namespace xdrs {

namespace detail {

inline bool is_identity(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) != (i == j ? 1.0 : 0.0)) return false;
  return true;
}

inline Matrix gram(const Matrix& a) {  // A^T A
  Matrix g(a.cols(), a.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * a(k, j);
      g(i, j) = g(j, i) = s;
    }
  return g;
}

inline Matrix outer_gram(const Matrix& a) {  // A A^T
  Matrix g(a.rows(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * a(j, k);
      g(i, j) = g(j, i) = s;
    }
  return g;
}

inline Vector soft_threshold(const Vector& v, double k) {
  Vector x(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]) - k;
    x[i] = mag > 0.0 ? (v[i] > 0.0 ? mag : -mag) : 0.0;
  }
  return x;
}

// argmin_x 1/2 x^T P x + q^T x + <w, C x> + pen/2 ||C x + r||^2, solved
// through a cached Cholesky factor of P + pen C^T C.
class QuadCouplingSolver {
 public:
  QuadCouplingSolver(const shapes::Quadratic& fq, const Matrix& c, double pen)
      : c_(&c), pen_(pen), q_(&fq.q), chol_(make_system(fq.p, c, pen)) {}

  Vector solve(const Vector& w, const Vector& r) const {
    // rhs = -q - C^T w - pen C^T r
    Vector rhs = -(*q_) - c_->apply_transpose(w + pen_ * r);
    return chol_.solve(rhs);
  }

 private:
  static Matrix make_system(const Matrix& p, const Matrix& c, double pen) {
    Matrix sys = gram(c);
    sys *= pen;
    sys += p;
    try {
      CholeskyFactor probe(sys);
    } catch (const NotSpd&) {
      throw UnsupportedSubproblem(
          "quadratic subproblem: P + pen C^T C not positive definite");
    }
    return sys;
  }
  const Matrix* c_;
  double pen_;
  const Vector* q_;
  CholeskyFactor chol_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Extended ADMM
// ---------------------------------------------------------------------------

// minimize f(x) + g(y) subject to A x + B y = c, with f quadratic and g
// either quadratic or an l1 term with identity coupling. Subproblems are
// solved exactly (SPD solve or soft threshold); inexact inner solves would
// break the 1e-8 equivalence diagnostics downstream.
struct AdmmInstance {
  ConvexFunction f, g;
  Matrix A, B;
  Vector c;

  AdmmInstance(ConvexFunction f_in, ConvexFunction g_in, Matrix a_in,
               Matrix b_in, Vector c_in)
      : f(std::move(f_in)),
        g(std::move(g_in)),
        A(std::move(a_in)),
        B(std::move(b_in)),
        c(std::move(c_in)) {
    if (A.rows() != c.size() || B.rows() != c.size())
      throw DimMismatch("AdmmInstance: A, B row counts must match c");
    if (!f.is<shapes::Quadratic>())
      throw UnsupportedSubproblem("AdmmInstance: f must be quadratic");
    if (f.dim() != A.cols())
      throw DimMismatch("AdmmInstance: f dimension vs A columns");
    if (g.is<shapes::Quadratic>()) {
      if (g.dim() != B.cols())
        throw DimMismatch("AdmmInstance: g dimension vs B columns");
    } else if (g.is<shapes::L1>()) {
      if (!detail::is_identity(B))
        throw UnsupportedSubproblem("AdmmInstance: l1 g requires B = I");
    } else {
      throw UnsupportedSubproblem("AdmmInstance: g must be quadratic or l1");
    }
    // Both subproblems must stay SPD for every positive penalty.
    detail::QuadCouplingSolver probe_x(f.as<shapes::Quadratic>(), A, 1.0);
    if (g.is<shapes::Quadratic>())
      detail::QuadCouplingSolver probe_y(g.as<shapes::Quadratic>(), B, 1.0);
  }

  std::size_t p_dim() const { return A.cols(); }
  std::size_t q_dim() const { return B.cols(); }
  std::size_t n_dim() const { return c.size(); }
};

struct AdmmState {
  Vector x, y, u;
};

struct AdmmTrace {
  std::vector<AdmmState> states;  // states[k] = (x^{k+1}, y^{k+1}, u^{k+1})
  bool params_in_region = true;
};

inline bool admm_params_in_region(double alpha, double beta, double theta) {
  return theta > 0.0 && theta < std::min(2.0, 2.0 * beta / alpha);
}

// Extended ADMM: per iteration
//   x^{k+1} = argmin_x L_beta(x, y^k, u^k + alpha (1-theta)(B y^k - c))
//   y^{k+1} = argmin_y L_alpha(theta x^{k+1}, y, u^k)
//   u^{k+1} = u^k + theta alpha (A x^{k+1} + B y^{k+1} - c)
// Out-of-region parameters are flagged, not rejected, so sharpness sweeps
// can drive the method outside its guarantee.
inline AdmmTrace extended_admm_run(const AdmmInstance& inst, const Vector& y0,
                                   const Vector& u0, double alpha, double beta,
                                   double theta, std::size_t iters) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(theta > 0.0))
    throw std::invalid_argument("extended_admm_run: parameters must be > 0");
  if (y0.size() != inst.q_dim() || u0.size() != inst.n_dim())
    throw DimMismatch("extended_admm_run: y0/u0 dims");
  AdmmTrace tr;
  tr.params_in_region = admm_params_in_region(alpha, beta, theta);
  const detail::QuadCouplingSolver x_solver(inst.f.as<shapes::Quadratic>(),
                                            inst.A, beta);
  std::optional<detail::QuadCouplingSolver> y_solver;
  if (inst.g.is<shapes::Quadratic>())
    y_solver.emplace(inst.g.as<shapes::Quadratic>(), inst.B, alpha);
  const double lam =
      inst.g.is<shapes::L1>() ? inst.g.as<shapes::L1>().weight : 0.0;

  Vector y = y0, u = u0;
  for (std::size_t k = 0; k < iters; ++k) {
    const Vector by_c = inst.B.apply(y) - inst.c;
    const Vector w_x = u + (alpha * (1.0 - theta)) * by_c;
    const Vector x_next = x_solver.solve(w_x, by_c);
    const Vector r_y = theta * inst.A.apply(x_next) - inst.c;
    Vector y_next;
    if (y_solver) {
      y_next = y_solver->solve(u, r_y);
    } else {
      // l1 with B = I: soft threshold of -r_y - u/alpha at lambda/alpha.
      y_next = detail::soft_threshold(-r_y - (1.0 / alpha) * u, lam / alpha);
    }
    const Vector u_next =
        u + (theta * alpha) * (inst.A.apply(x_next) + inst.B.apply(y_next) -
                               inst.c);
    tr.states.push_back(AdmmState{x_next, y_next, u_next});
    y = y_next;
    u = u_next;
  }
  return tr;
}

// Classical ADMM (theta = 1, single penalty); kept as an independent loop so
// the extended path can be checked against it step for step.
inline AdmmTrace classical_admm_run(const AdmmInstance& inst, const Vector& y0,
                                    const Vector& u0, double alpha,
                                    std::size_t iters) {
  AdmmTrace tr;
  const detail::QuadCouplingSolver x_solver(inst.f.as<shapes::Quadratic>(),
                                            inst.A, alpha);
  std::optional<detail::QuadCouplingSolver> y_solver;
  if (inst.g.is<shapes::Quadratic>())
    y_solver.emplace(inst.g.as<shapes::Quadratic>(), inst.B, alpha);
  const double lam =
      inst.g.is<shapes::L1>() ? inst.g.as<shapes::L1>().weight : 0.0;
  Vector y = y0, u = u0;
  for (std::size_t k = 0; k < iters; ++k) {
    const Vector by_c = inst.B.apply(y) - inst.c;
    const Vector x_next = x_solver.solve(u, by_c);
    const Vector r_y = inst.A.apply(x_next) - inst.c;
    Vector y_next;
    if (y_solver) {
      y_next = y_solver->solve(u, r_y);
    } else {
      y_next = detail::soft_threshold(-r_y - (1.0 / alpha) * u, lam / alpha);
    }
    const Vector u_next =
        u + alpha * (inst.A.apply(x_next) + inst.B.apply(y_next) - inst.c);
    tr.states.push_back(AdmmState{x_next, y_next, u_next});
    y = y_next;
    u = u_next;
  }
  return tr;
}

// Runs the extended Douglas-Rachford iteration on the ADMM dual
//   minimize f*(-A^T u) + g*(-B^T u) + c^T u
// with parameters (alpha, beta, theta alpha/beta), reconstructs the primal
// triple through u^k = psi^k - theta alpha A x^k, and returns the largest
// residual of the three extended-ADMM update relations along the way.
inline double admm_dual_dr_equiv(const AdmmInstance& inst, double alpha,
                                 double beta, double theta,
                                 std::size_t iters) {
  if (iters == 0) return 0.0;
  const std::size_t n = inst.n_dim();
  const double r = beta / alpha;
  const double theta_dr = theta * alpha / beta;

  std::optional<detail::QuadCouplingSolver> g_solver;
  if (inst.g.is<shapes::Quadratic>())
    g_solver.emplace(inst.g.as<shapes::Quadratic>(), inst.B, alpha);
  const detail::QuadCouplingSolver f_solver(inst.f.as<shapes::Quadratic>(),
                                            inst.A, beta);

  // Resolvent of alpha d(g~), g~(u) = g*(-B^T u) + c^T u. Returns the primal
  // witness y and the resolvent value psi + alpha (B y - c).
  auto resolve_gtilde = [&](const Vector& psi) -> std::pair<Vector, Vector> {
    Vector y;
    if (g_solver) {
      // argmin_y g(y) + <psi - alpha c, B y> + alpha/2 ||B y||^2
      y = g_solver->solve(psi - alpha * inst.c, Vector(n));
    } else {
      y = detail::soft_threshold(inst.c - (1.0 / alpha) * psi,
                                 inst.g.as<shapes::L1>().weight / alpha);
    }
    return {y, psi + alpha * (inst.B.apply(y) - inst.c)};
  };
  // Resolvent of beta d(f~), f~(u) = f*(-A^T u).
  auto resolve_ftilde = [&](const Vector& w) -> std::pair<Vector, Vector> {
    Vector x = f_solver.solve(w, Vector(n));
    return {x, w + beta * inst.A.apply(x)};
  };

  std::vector<Vector> psi_hist, x_hist, y_hist;  // x_hist[k], y_hist[k]: k >= 1
  Vector psi(n);  // DR initial point; any choice induces a valid trajectory
  psi_hist.push_back(psi);
  x_hist.emplace_back();  // x~^0 not produced by the DR run
  y_hist.emplace_back();
  for (std::size_t k = 0; k < iters; ++k) {
    auto [y_next, mu_half] = resolve_gtilde(psi);
    const Vector w = (1.0 + r) * mu_half - r * psi;
    auto [x_next, mu_full] = resolve_ftilde(w);
    psi = psi + theta_dr * (mu_full - mu_half);
    psi_hist.push_back(psi);
    x_hist.push_back(std::move(x_next));
    y_hist.push_back(std::move(y_next));
  }

  // Reconstruct u^k = psi^k - theta alpha A x^k (k >= 1) and measure the
  // extended-ADMM relations on the reconstructed triple.
  auto u_at = [&](std::size_t k) {
    return psi_hist[k] - (theta * alpha) * inst.A.apply(x_hist[k]);
  };
  double max_dev = 0.0;
  for (std::size_t k = 1; k + 1 < psi_hist.size(); ++k) {
    const Vector u_k = u_at(k);
    const Vector u_k1 = u_at(k + 1);
    // y relation: the reconstructed y^{k+1} minimizes L_alpha with the
    // theta-scaled primal offset.
    const Vector r_y = theta * inst.A.apply(x_hist[k]) - inst.c;
    Vector y_hat;
    if (g_solver) {
      y_hat = g_solver->solve(u_k, r_y);
    } else {
      y_hat = detail::soft_threshold(
          -r_y - (1.0 / alpha) * u_k,
          inst.g.as<shapes::L1>().weight / alpha);
    }
    max_dev = std::max(max_dev, norm(y_hist[k + 1] - y_hat));
    // u relation.
    const Vector u_pred =
        u_k + (theta * alpha) * (inst.A.apply(x_hist[k]) +
                                 inst.B.apply(y_hist[k + 1]) - inst.c);
    max_dev = std::max(max_dev, norm(u_k1 - u_pred));
    // x relation at the next step.
    const Vector by_c = inst.B.apply(y_hist[k + 1]) - inst.c;
    const Vector x_hat =
        f_solver.solve(u_k1 + (alpha * (1.0 - theta)) * by_c, by_c);
    max_dev = std::max(max_dev, norm(x_hist[k + 1] - x_hat));
  }
  return max_dev;
}

// ---------------------------------------------------------------------------
// Doubly relaxed Chambolle-Pock
// ---------------------------------------------------------------------------

// minimize f(x) + g(A x); op_norm = ||A|| by power iteration.
struct CpInstance {
  ConvexFunction f, g;
  Matrix A;
  double op_norm;

  CpInstance(ConvexFunction f_in, ConvexFunction g_in, Matrix a_in)
      : f(std::move(f_in)), g(std::move(g_in)), A(std::move(a_in)),
        op_norm(operator_norm(A)) {
    if (f.dim() != 0 && f.dim() != A.cols())
      throw DimMismatch("CpInstance: f dimension vs A columns");
    if (g.dim() != 0 && g.dim() != A.rows())
      throw DimMismatch("CpInstance: g dimension vs A rows");
  }
};

struct CpParams {
  double tau, sigma, theta, rho;

  bool admissible(double op_norm) const {
    return rho > 0.0 && rho < std::min(2.0, 2.0 * theta) &&
           tau * sigma * op_norm * op_norm <= 1.0 / theta + 1e-12;
  }
};

struct CpState {
  Vector x, z, xbar, zbar;  // pre-step point and the relaxation targets
};

struct CpTrace {
  std::vector<CpState> states;
  bool params_admissible = true;
};

// prox_{sigma g*}(v) through the Moreau decomposition from g's prox.
inline Vector prox_conjugate(const ConvexFunction& g, double sigma,
                             const Vector& v) {
  return v - sigma * g.prox(1.0 / sigma, (1.0 / sigma) * v);
}

namespace detail {
// Cached flavor of prox_conjugate for fixed sigma.
class ConjProxCache {
 public:
  ConjProxCache(const ConvexFunction& g, double sigma)
      : sigma_(sigma), cache_(g, 1.0 / sigma) {}
  Vector apply(const Vector& v) const {
    return v - sigma_ * cache_.apply((1.0 / sigma_) * v);
  }

 private:
  double sigma_;
  ProxCache cache_;
};
}  // namespace detail

// Doubly relaxed Chambolle-Pock:
//   xbar = prox_{tau f}(x - tau A^T z)
//   zbar = prox_{sigma g*}(z + sigma A (xbar + theta (xbar - x)))
//   x+   = x + rho (xbar - x),   z+ = z + rho (zbar - z)
inline CpTrace drcp_run(const CpInstance& inst, const CpParams& p,
                        const Vector& x0, const Vector& z0,
                        std::size_t iters) {
  if (!(p.tau > 0.0) || !(p.sigma > 0.0) || !(p.theta > 0.0) || !(p.rho > 0.0))
    throw std::invalid_argument("drcp_run: parameters must be > 0");
  if (x0.size() != inst.A.cols() || z0.size() != inst.A.rows())
    throw DimMismatch("drcp_run: x0/z0 dims");
  CpTrace tr;
  tr.params_admissible = p.admissible(inst.op_norm);
  const ProxCache f_prox(inst.f, p.tau);
  const detail::ConjProxCache g_conj(inst.g, p.sigma);
  Vector x = x0, z = z0;
  for (std::size_t k = 0; k < iters; ++k) {
    const Vector xbar = f_prox.apply(x - p.tau * inst.A.apply_transpose(z));
    const Vector zbar =
        g_conj.apply(z + p.sigma * inst.A.apply(xbar + p.theta * (xbar - x)));
    tr.states.push_back(CpState{x, z, xbar, zbar});
    x = x + p.rho * (xbar - x);
    z = z + p.rho * (zbar - z);
  }
  return tr;
}

// Scalar degenerate instance (n = m = 1, A = 1, f = g* = 0) iterates by
// this matrix.
inline Matrix cp_iteration_matrix(double rho, double tau, double sigma,
                                  double theta) {
  return Matrix{{1.0, -rho * tau},
                {rho * sigma, 1.0 - rho * sigma * tau * (1.0 + theta)}};
}

// The boundary eigenvalue of the scalar recursion, omega = tau sigma ||A||^2:
//   lambda_-(rho, omega, theta)
//     = 1 - rho omega (1+theta)/2 - (rho sqrt(omega)/2) sqrt(omega (1+theta)^2 - 4).
// Real only when the discriminant is nonnegative (always for omega >= 1/theta).
inline double lambda_minus(double rho, double omega, double theta) {
  const double disc = omega * (1.0 + theta) * (1.0 + theta) - 4.0;
  if (disc < 0.0)
    throw ComplexRegime("lambda_minus: discriminant negative");
  return 1.0 - rho * omega * (1.0 + theta) / 2.0 -
         rho * std::sqrt(omega) / 2.0 * std::sqrt(disc);
}

// Runs the extended Douglas-Rachford iteration on the lifted pair
//   f~(u1, u2) = f(u1) + i_{0}(u2),   G~ = B^T dg B,  B = [A C],
// with C = (gamma^{-2} I - A A^T)^{1/2}, maps the lifted iterates back to
// (x^k, z^k), and returns the max deviation from drcp_run. The dual step
// size is derived as sigma = gamma^2 / eta with eta = theta tau; the caller's
// p.sigma must equal it for the two trajectories to coincide.
inline double cp_lifted_equiv(const CpInstance& inst, const CpParams& p,
                              double gamma, std::size_t iters) {
  const std::size_t n = inst.A.cols();
  const std::size_t m = inst.A.rows();
  if (!(gamma > 0.0) || gamma * inst.op_norm >= 1.0)
    throw LiftingUnavailable("cp_lifted_equiv: need gamma ||A|| < 1");
  const double eta = p.theta * p.tau;
  const double sigma = gamma * gamma / eta;
  const double rho_dr = p.rho / p.theta;

  Matrix gram_gap = detail::outer_gram(inst.A);
  gram_gap *= -1.0;
  for (std::size_t i = 0; i < m; ++i) gram_gap(i, i) += 1.0 / (gamma * gamma);
  const Matrix c_block = sqrt_psd(gram_gap);
  // B = [A C], stored as its action on R^{n+m}.
  auto b_apply = [&](const Vector& v) {
    Vector head(n), tail(m);
    for (std::size_t i = 0; i < n; ++i) head[i] = v[i];
    for (std::size_t i = 0; i < m; ++i) tail[i] = v[n + i];
    return inst.A.apply(head) + c_block.apply(tail);
  };
  auto bt_apply = [&](const Vector& w) {
    const Vector top = inst.A.apply_transpose(w);
    const Vector bottom = c_block.apply(w);  // C symmetric
    Vector out(n + m);
    for (std::size_t i = 0; i < n; ++i) out[i] = top[i];
    for (std::size_t i = 0; i < m; ++i) out[n + i] = bottom[i];
    return out;
  };

  // Deterministic nonzero start shared by both trajectories.
  Vector x0(n), z0(m);
  for (std::size_t i = 0; i < n; ++i) x0[i] = 1.0 + 0.1 * static_cast<double>(i);
  for (std::size_t j = 0; j < m; ++j) z0[j] = 0.5 - 0.05 * static_cast<double>(j);

  // Reference trajectory.
  const CpTrace ref =
      drcp_run(inst, CpParams{p.tau, sigma, p.theta, p.rho}, x0, z0, iters);
  // Lifted start: w^0 = tau B^T z^0, u^0 = (x^0, 0), y^0 = u^0 - w^0, which
  // back-maps exactly to (x^0, z^0).
  const Vector w0 = p.tau * bt_apply(z0);
  Vector u(n + m);
  for (std::size_t i = 0; i < n; ++i) u[i] = x0[i];
  Vector y = u - w0;
  double max_dev = 0.0;
  for (std::size_t k = 0; k < iters; ++k) {
    // Back-map: x^k = u_1^k, z^k = (gamma^2/tau) B (u^k - y^k).
    Vector x_k(n);
    for (std::size_t i = 0; i < n; ++i) x_k[i] = u[i];
    const Vector z_k = (gamma * gamma / p.tau) * b_apply(u - y);
    max_dev = std::max(max_dev, norm(x_k - ref.states[k].x));
    max_dev = std::max(max_dev, norm(z_k - ref.states[k].z));

    // prox_{tau f~}: prox of f on the first block, projection to 0 after.
    Vector y_head(n);
    for (std::size_t i = 0; i < n; ++i) y_head[i] = y[i];
    const Vector xbar = inst.f.prox(p.tau, y_head);
    Vector ubar(n + m);
    for (std::size_t i = 0; i < n; ++i) ubar[i] = xbar[i];
    max_dev = std::max(max_dev, norm(xbar - ref.states[k].xbar));

    const Vector v = (1.0 + p.theta) * ubar - p.theta * y;  // eta/tau = theta
    const Vector zbar = prox_conjugate(inst.g, sigma, sigma * b_apply(v));
    max_dev = std::max(max_dev, norm(zbar - ref.states[k].zbar));
    const Vector w_res = v - eta * bt_apply(zbar);  // J_{eta G~}(v) via Moreau

    y = y + rho_dr * (w_res - ubar);
    u = (1.0 - p.rho) * u + p.rho * ubar;
  }
  return max_dev;
}

// ---------------------------------------------------------------------------
// Extended parallel splitting
// ---------------------------------------------------------------------------

struct ParallelState {
  std::vector<Vector> y, x;
  Vector p_mean, q_mean;
};

struct ParallelTrace {
  std::vector<ParallelState> states;
  bool params_in_region = true;
};

// Extended parallel splitting over minimize sum_i f_i(x):
//   p = mean(y),  x_i = prox_{alpha f_i}(y_i),  q = mean(x),
//   y_i+ = y_i + theta ((1 + gamma) q - gamma p - x_i).
// Equals the extended Douglas-Rachford iteration applied to the consensus
// lifting with step sizes (alpha, gamma alpha); the consensus projection is
// independent of its step size, so gamma ranges freely.
inline ParallelTrace parallel_splitting_run(
    const std::vector<ConvexFunction>& fs, const std::vector<Vector>& y0,
    double alpha, double gamma, double theta, std::size_t iters) {
  if (fs.empty() || fs.size() != y0.size())
    throw DimMismatch("parallel_splitting_run: fs/y0 sizes");
  const std::size_t d = y0.front().size();
  for (const Vector& y : y0)
    if (y.size() != d) throw DimMismatch("parallel_splitting_run: y0 dims");
  if (!(alpha > 0.0) || !(gamma > 0.0))
    throw std::invalid_argument("parallel_splitting_run: alpha, gamma > 0");
  ParallelTrace tr;
  tr.params_in_region = theta > 0.0 && theta < std::min(2.0, 2.0 / gamma);
  const double nn = static_cast<double>(fs.size());
  std::vector<ProxCache> prox;
  prox.reserve(fs.size());
  for (const ConvexFunction& f : fs) prox.emplace_back(f, alpha);
  std::vector<Vector> y = y0;
  for (std::size_t k = 0; k < iters; ++k) {
    ParallelState st;
    st.y = y;
    st.p_mean = Vector(d);
    for (const Vector& yi : y) st.p_mean += yi;
    st.p_mean *= 1.0 / nn;
    st.x.reserve(fs.size());
    st.q_mean = Vector(d);
    for (std::size_t i = 0; i < fs.size(); ++i) {
      st.x.push_back(prox[i].apply(y[i]));
      st.q_mean += st.x.back();
    }
    st.q_mean *= 1.0 / nn;
    const Vector target = (1.0 + gamma) * st.q_mean - gamma * st.p_mean;
    for (std::size_t i = 0; i < fs.size(); ++i)
      y[i] += theta * (target - st.x[i]);
    tr.states.push_back(std::move(st));
  }
  return tr;
}

}  // namespace xdrs
