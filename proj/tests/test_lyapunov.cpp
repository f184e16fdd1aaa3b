#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "xdrs/lyapunov.hpp"
#include "xdrs/random.hpp"

using namespace xdrs;

namespace {

struct DiagnosticRun {
  Trace trace;
  FixedPointRef ref;
  ConvexFunction f;
};

DiagnosticRun make_quadratic_run(Rng& rng, std::size_t n,
                                 const SplitParams& p, std::size_t iters) {
  auto f = ConvexFunction::quadratic(random_spd(rng, n, 20.0),
                                     random_vector(rng, n));
  auto g = ConvexFunction::quadratic(random_spd(rng, n, 20.0),
                                     random_vector(rng, n));
  const auto f_op = OperatorSpec::subdifferential(f);
  const auto g_op = OperatorSpec::subdifferential(g);
  const Vector z0 = random_vector(rng, n, 2.0);
  const Trace pre = edr_run(f_op, g_op, p, z0, 200000, 1e-12);
  REQUIRE(pre.stop_reason == StopReason::ResidualMet);
  DiagnosticRun run{edr_run(f_op, g_op, p, z0, iters, 1e-14),
                    extract_fixed_point(pre), std::move(f)};
  return run;
}

}  // namespace

TEST_CASE("all diagnostics vanish at the fixed point") {
  Rng rng(3);
  const SplitParams p(1.0, 2.0, 0.7);
  DiagnosticRun run = make_quadratic_run(rng, 4, p, 50);
  // Restart the iteration exactly at z*.
  const Trace at_fix = edr_run(run.trace.f_op, run.trace.g_op, p,
                               run.ref.z_star, 5, 1e-14);
  REQUIRE(at_fix.states.size() >= 1);
  EDRState s0 = at_fix.states.front();
  EDRState s1 = edr_step(run.trace.f_op, run.trace.g_op, p, s0.z);
  s1.z = s0.z + p.theta * (s0.x2 - s0.x1);
  // Build the successor as a recorded state from the updated z.
  const EDRState nxt = [&] {
    EDRState t = edr_step(run.trace.f_op, run.trace.g_op, p, s1.z);
    EDRState rec;
    rec.k = 1;
    rec.z = s1.z;
    rec.x1 = t.x1;
    rec.x2 = t.x2;
    rec.u1 = t.u1;
    rec.u2 = t.u2;
    return rec;
  }();
  const LyapunovRecord rec = lyapunov_record(s0, nxt, run.ref, p, run.f);
  CHECK(std::abs(*rec.V1) <= 1e-16);
  CHECK(std::abs(*rec.V2) <= 1e-16);
  CHECK(std::abs(*rec.R1) <= 1e-16);
  CHECK(std::abs(*rec.R2) <= 1e-16);
  CHECK(std::abs(rec.I) <= 1e-16);
}

TEST_CASE("Lyapunov equality residual on a strongly convex quadratic") {
  Rng rng(7);
  const SplitParams p(1.0, 2.0, 0.7);  // tau = 0.5, in S1
  DiagnosticRun run = make_quadratic_run(rng, 10, p, 200);
  for (std::size_t k = 0; k + 1 < run.trace.states.size(); ++k) {
    const LyapunovRecord rec =
        lyapunov_record(run.trace.states[k], run.trace.states[k + 1], run.ref,
                        p, run.f);
    REQUIRE(rec.le_residual_1.has_value());
    CHECK(*rec.le_residual_1 <= 1e-10 * (1.0 + *rec.V1));
  }
}

TEST_CASE("the two representations agree (and descend) on in-region runs") {
  Rng rng(11);
  const SplitParams params[] = {SplitParams(1.0, 1.0, 1.0),
                                SplitParams(1.0, 2.0, 0.8),
                                SplitParams(2.0, 1.0, 1.6)};
  for (const SplitParams& p : params) {
    DiagnosticRun run = make_quadratic_run(rng, 6, p, 120);
    double prev_v = kInf;
    double telescoped = 0.0;
    std::optional<double> v0;
    for (std::size_t k = 0; k + 1 < run.trace.states.size(); ++k) {
      const LyapunovRecord rec =
          lyapunov_record(run.trace.states[k], run.trace.states[k + 1],
                          run.ref, p, run.f);
      REQUIRE(rec.V1.has_value());
      REQUIRE(rec.V2.has_value());
      REQUIRE(rec.R1.has_value());
      REQUIRE(rec.R2.has_value());
      // Both-representation agreement.
      CHECK(std::abs(*rec.V1 - *rec.V2) <= 1e-10 * (1.0 + std::abs(*rec.V1)));
      CHECK(std::abs(*rec.R1 - *rec.R2) <= 1e-10 * (1.0 + std::abs(*rec.R1)));
      // Sign structure.
      CHECK(*rec.V1 >= -1e-10);
      CHECK(*rec.R1 >= -1e-10);
      CHECK(rec.I >= -1e-10);
      // Monotone descent.
      const int i = p.tau() <= 1.0 ? 1 : 2;
      const double v = i == 1 ? *rec.V1 : *rec.V2;
      CHECK(v <= prev_v + 1e-10 * (1.0 + std::abs(v)));
      prev_v = v;
      if (!v0) v0 = v;
      telescoped += (i == 1 ? *rec.R1 : *rec.R2) + p.theta * p.alpha * rec.I;
    }
    // Summability proxy: telescoped sum bounded by V0.
    CHECK(telescoped <= *v0 + 1e-8);
  }
}

TEST_CASE("quadratic-form evaluation matches the norm expressions") {
  Rng rng(13);
  const double tau = 0.5, theta = 0.7;
  const SplitParams p(1.0, 2.0, theta);
  DiagnosticRun run = make_quadratic_run(rng, 5, p, 60);
  const QuadFormMatrices m1 = appendix_matrices(tau, theta, 1);
  const QuadFormMatrices m2 = appendix_matrices(tau, theta, 2);
  for (std::size_t k = 0; k + 1 < run.trace.states.size(); k += 7) {
    const EDRState& s = run.trace.states[k];
    const EDRState& s_next = run.trace.states[k + 1];
    const std::array<Vector, 5> blocks = {
        s.x1 - run.ref.x_star, s.x2 - run.ref.x_star,
        s_next.x1 - run.ref.x_star, s_next.x2 - run.ref.x_star,
        s.z - run.ref.z_star};
    // Norm-expression forms of the pure quadratic parts of V and R.
    const Vector dz = s.z - run.ref.z_star;
    const Vector d1 = s.x1 - run.ref.x_star;
    const Vector d21 = s.x2 - s.x1;
    const Vector lead1 = dz + (theta / 2.0) * d21 + (tau - 1.0) * d1;
    const double q1 = dot(lead1, lead1) +
                      theta * (4.0 * tau - theta) / 4.0 * dot(d21, d21) +
                      tau * (1.0 - tau) * dot(d1, d1);
    CHECK(quadform_eval(m1.Q_V, blocks) ==
          doctest::Approx(q1).epsilon(1e-11));
    const double denom = 4.0 * tau - theta;
    const Vector lead2 = dz + (theta / 2.0) * d21;
    const Vector mid = d21 + (2.0 * (tau - 1.0) / denom) * d1;
    const double q2 = dot(lead2, lead2) + theta * denom / 4.0 * dot(mid, mid) +
                      tau * (tau - 1.0) * (4.0 - theta) / denom * dot(d1, d1);
    CHECK(quadform_eval(m2.Q_V, blocks) ==
          doctest::Approx(q2).epsilon(1e-11));
    const Vector step1 = s_next.x1 - s.x1;
    const double r1 = theta * (2.0 * tau - theta) * dot(d21, d21) +
                      (1.0 - tau) * dot(step1, step1);
    CHECK(quadform_eval(m1.Q_R, blocks) ==
          doctest::Approx(r1).epsilon(1e-11));
  }
}

TEST_CASE("quadform_eval identity and zero forms") {
  std::array<Vector, 5> e1;
  for (auto& b : e1) b = Vector{1.0, 0.0};
  CHECK(quadform_eval(Matrix::identity(5), e1) == doctest::Approx(5.0));
  CHECK(quadform_eval(Matrix(5, 5), e1) == 0.0);
  std::array<Vector, 5> bad = e1;
  bad[3] = Vector{1.0};
  CHECK_THROWS_AS(quadform_eval(Matrix::identity(5), bad), DimMismatch);
}

TEST_CASE("appendix matrix identity at pinned and random points") {
  CHECK(appendix_matrix_identity(1.0, 1.0, 1) <= 1e-14);
  CHECK(appendix_matrix_identity(1.0, 1.0, 2) <= 1e-14);
  CHECK(appendix_matrix_identity(0.3, 0.4, 1) <= 1e-13);
  CHECK(appendix_matrix_identity(2.0, 1.7, 2) <= 1e-13);
  // Entries are degree <= 2 polynomials in (tau, theta), so dense random
  // sampling over (0,4) x (-3,3) is decisive.
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const double tau = 4.0 * (static_cast<double>(rng() % 100000) + 1.0) / 100001.0;
    double theta = -3.0 + 6.0 * (static_cast<double>(rng() % 100000) / 100000.0);
    if (theta == 0.0) theta = 0.123;
    CHECK(appendix_matrix_identity(tau, theta, 1) <= 1e-12);
    CHECK(appendix_matrix_identity(tau, theta, 2) <= 1e-12);
  }
}

TEST_CASE("V2 is reported undefined when the denominator vanishes") {
  Rng rng(19);
  const SplitParams p(1.0, 1.0, 4.0);  // theta = 4 tau exactly
  auto f = ConvexFunction::quadratic(Matrix::identity(2), Vector(2));
  const auto f_op = OperatorSpec::subdifferential(f);
  const auto g_op = OperatorSpec::subdifferential(f);
  const Trace tr = edr_run(f_op, g_op, p, Vector{1.0, 1.0}, 3, 1e-14);
  REQUIRE(tr.states.size() >= 2);
  const FixedPointRef ref{Vector(2), Vector(2), Vector(2)};
  const LyapunovRecord rec =
      lyapunov_record(tr.states[0], tr.states[1], ref, p, f);
  CHECK(!rec.V2.has_value());
  CHECK(!rec.le_residual_2.has_value());
  CHECK(rec.V1.has_value());  // the i=1 representation has no denominator
}

TEST_CASE("lyapunov_record rejects non-consecutive states") {
  Rng rng(23);
  const SplitParams p(1.0, 1.0, 1.0);
  DiagnosticRun run = make_quadratic_run(rng, 3, p, 30);
  CHECK_THROWS_AS(lyapunov_record(run.trace.states[0], run.trace.states[5],
                                  run.ref, p, run.f),
                  std::invalid_argument);
}

TEST_CASE("Lyapunov equality holds with nonsmooth f in the first slot") {
  Rng rng(31);
  const ConvexFunction f = ConvexFunction::l1(0.6, 4);
  const ConvexFunction g = ConvexFunction::quadratic(random_spd(rng, 4, 10.0),
                                                     random_vector(rng, 4));
  const auto f_op = OperatorSpec::subdifferential(f);
  const auto g_op = OperatorSpec::subdifferential(g);
  const SplitParams params[] = {SplitParams(1.0, 2.0, 0.8),
                                SplitParams(2.0, 1.0, 1.4)};
  for (const SplitParams& p : params) {
    const Vector z0 = random_vector(rng, 4, 1.5);
    const Trace pre = edr_run(f_op, g_op, p, z0, 400000, 1e-12);
    REQUIRE(pre.stop_reason == StopReason::ResidualMet);
    const FixedPointRef ref = extract_fixed_point(pre);
    const Trace tr = edr_run(f_op, g_op, p, z0, 150, 1e-300);
    const int i = p.tau() <= 1.0 ? 1 : 2;
    for (std::size_t k = 0; k + 1 < tr.states.size(); ++k) {
      const LyapunovRecord rec =
          lyapunov_record(tr.states[k], tr.states[k + 1], ref, p, f);
      const auto le = i == 1 ? rec.le_residual_1 : rec.le_residual_2;
      const auto v = i == 1 ? rec.V1 : rec.V2;
      REQUIRE(le.has_value());
      CHECK(*le <= 1e-9 * (1.0 + std::abs(*v)));
      CHECK(*v >= -1e-10);
      CHECK(rec.I >= -1e-10);
    }
  }
}

TEST_CASE("Lyapunov equality holds with a monotone linear second operator") {
  Rng rng(29);
  auto f = ConvexFunction::quadratic(random_spd(rng, 2, 10.0), Vector(2));
  const auto f_op = OperatorSpec::subdifferential(f);
  const auto b_op = OperatorSpec::monotone_linear(skew_rotation(1.0));
  const SplitParams p(1.0, 2.0, 0.7);
  const Vector z0{1.5, -0.5};
  const Trace pre = edr_run(f_op, b_op, p, z0, 200000, 1e-12);
  REQUIRE(pre.stop_reason == StopReason::ResidualMet);
  const FixedPointRef ref = extract_fixed_point(pre);
  const Trace tr = edr_run(f_op, b_op, p, z0, 100, 1e-14);
  for (std::size_t k = 0; k + 1 < tr.states.size(); ++k) {
    const LyapunovRecord rec =
        lyapunov_record(tr.states[k], tr.states[k + 1], ref, p, f);
    REQUIRE(rec.le_residual_1.has_value());
    CHECK(*rec.le_residual_1 <= 1e-9 * (1.0 + std::abs(*rec.V1)));
    CHECK(rec.I >= -1e-10);
  }
}
