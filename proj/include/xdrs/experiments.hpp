#pragma once

// Config-driven experiment runners behind the CLI: single solves with
// Lyapunov/gap diagnostics, (tau, theta) region sweeps over a seeded problem
// battery, counterexample reproductions, rate studies, the swapped-order
// conjecture probe, and the derived-method drivers. All artifacts are CSV;
// exit codes follow the documented contract (0 ok, 2 bad config,
// 3 divergence, 4 iteration budget exhausted).

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "xdrs/analysis.hpp"
#include "xdrs/csv.hpp"
#include "xdrs/edr.hpp"
#include "xdrs/ergodic.hpp"
#include "xdrs/errors.hpp"
#include "xdrs/functions.hpp"
#include "xdrs/lyapunov.hpp"
#include "xdrs/methods.hpp"
#include "xdrs/numerics.hpp"
#include "xdrs/random.hpp"
#include "xdrs/serialize.hpp"

namespace xdrs {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDiverged = 3;
inline constexpr int kExitBudget = 4;

namespace detail {

inline void parallel_for(std::size_t count, std::size_t workers,
                         const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const std::size_t n_threads = std::min(workers, count);
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) break;
        body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

inline std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Problem batteries
// ---------------------------------------------------------------------------

struct BatteryProblem {
  std::string name;
  OperatorSpec f_op, g_op;
  Vector z0;
};

// Five seeded strongly convex QP pairs (dims {2,5,10}, condition numbers
// {10,100}) plus the two scalar counterexample pairs. Small enough that a
// full sweep finishes in well under a minute.
inline std::vector<BatteryProblem> make_sweep_battery(std::uint64_t seed) {
  std::vector<BatteryProblem> battery;
  const std::size_t dims[5] = {2, 5, 10, 5, 10};
  const double conds[5] = {10.0, 10.0, 10.0, 100.0, 100.0};
  for (int i = 0; i < 5; ++i) {
    Rng rng(seed + 1000 + static_cast<std::uint64_t>(i));
    const std::size_t n = dims[i];
    auto f = ConvexFunction::quadratic(random_spd(rng, n, conds[i]),
                                       random_vector(rng, n));
    auto g = ConvexFunction::quadratic(random_spd(rng, n, conds[i]),
                                       random_vector(rng, n));
    battery.push_back(BatteryProblem{
        "qp" + std::to_string(i), OperatorSpec::subdifferential(std::move(f)),
        OperatorSpec::subdifferential(std::move(g)), random_vector(rng, n)});
  }
  auto [f0, g0] = counterexample_problem(0);
  battery.push_back(BatteryProblem{"ce_zero_point", f0, g0, Vector{1.0}});
  auto [f1, g1] = counterexample_problem(1);
  battery.push_back(BatteryProblem{"ce_point_zero", f1, g1, Vector{1.0}});
  return battery;
}

// Swapped-order battery for the conjecture probe: monotone linear maps with
// nonzero skew part in the first slot, subdifferentials in the second, plus
// the scalar counterexample pairs (where every maximally monotone operator
// is a subdifferential, so the region statement is a theorem).
inline std::vector<BatteryProblem> make_probe_battery(std::uint64_t seed) {
  std::vector<BatteryProblem> battery;
  {
    Rng rng(seed + 2000);
    auto g = ConvexFunction::quadratic(random_spd(rng, 2, 10.0),
                                       random_vector(rng, 2));
    battery.push_back(BatteryProblem{
        "rotation_qp", OperatorSpec::monotone_linear(skew_rotation(1.0)),
        OperatorSpec::subdifferential(std::move(g)), random_vector(rng, 2)});
  }
  {
    Rng rng(seed + 2001);
    Matrix m = random_spd(rng, 2, 5.0);
    m *= 0.5;
    m += skew_rotation(0.8);
    auto g = ConvexFunction::quadratic(random_spd(rng, 2, 10.0),
                                       random_vector(rng, 2));
    battery.push_back(BatteryProblem{
        "skew_psd_qp", OperatorSpec::monotone_linear(std::move(m)),
        OperatorSpec::subdifferential(std::move(g)), random_vector(rng, 2)});
  }
  {
    Rng rng(seed + 2002);
    battery.push_back(BatteryProblem{
        "rotation_l1", OperatorSpec::monotone_linear(skew_rotation(2.0)),
        OperatorSpec::subdifferential(ConvexFunction::l1(0.5, 2)),
        random_vector(rng, 2)});
  }
  auto [f0, g0] = counterexample_problem(0);
  battery.push_back(BatteryProblem{"scalar_ce_1", f0, g0, Vector{1.0}});
  auto [f1, g1] = counterexample_problem(1);
  battery.push_back(BatteryProblem{"scalar_ce_2", f1, g1, Vector{1.0}});
  return battery;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

struct SolveConfig {
  OperatorSpec f_op, g_op;
  Vector z0;
  SplitParams params;
  std::size_t iters = 20000;
  double tol = 1e-10;
  std::uint64_t seed = 0;
};

inline SolveConfig parse_solve_config(const Json& j) {
  const Json& prob = require_field(j, "problem");
  SolveConfig cfg{operator_from_json(require_field(prob, "f")),
                  operator_from_json(require_field(prob, "g")),
                  vector_from_json(require_field(prob, "z0")),
                  split_params_from_json(require_field(j, "params"))};
  cfg.iters = j.value("iters", std::size_t{20000});
  cfg.tol = j.value("tol", 1e-10);
  cfg.seed = j.value("seed", std::uint64_t{0});
  if (cfg.iters < 1) throw ConfigError("solve: iters must be >= 1");
  if (!(cfg.tol > 0.0)) throw ConfigError("solve: tol must be > 0");
  return cfg;
}

inline int run_solve(const SolveConfig& cfg, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const Trace tr =
      edr_run(cfg.f_op, cfg.g_op, cfg.params, cfg.z0, cfg.iters, cfg.tol);

  fs::create_directories(out_dir);
  {
    CsvWriter w(out_dir + "/trace.csv");
    w.row({"k", "residual", "z_norm"});
    for (const EDRState& s : tr.states)
      w.row({std::to_string(s.k), csv_double(norm(s.x2 - s.x1)),
             csv_double(norm(s.z))});
  }

  // Diagnostics need a tight fixed-point reference from a pre-run of the
  // same problem.
  std::optional<FixedPointRef> ref;
  if (cfg.f_op.is_subdifferential() &&
      tr.stop_reason != StopReason::Diverged) {
    const std::size_t pre_iters = std::max<std::size_t>(cfg.iters, 100000);
    const Trace pre =
        edr_run(cfg.f_op, cfg.g_op, cfg.params, cfg.z0, pre_iters, 1e-12);
    if (pre.stop_reason == StopReason::ResidualMet) {
      try {
        ref = extract_fixed_point(pre);
      } catch (const NotConverged&) {
      }
    }
  }

  {
    CsvWriter w(out_dir + "/lyapunov.csv");
    w.row({"k", "V1", "V2", "R1", "R2", "I", "le_residual_1",
           "le_residual_2"});
    if (ref) {
      const ConvexFunction& f = cfg.f_op.function();
      for (std::size_t k = 0; k + 1 < tr.states.size(); ++k) {
        const LyapunovRecord rec = lyapunov_record(
            tr.states[k], tr.states[k + 1], *ref, cfg.params, f);
        w.row({std::to_string(rec.k), csv_optional(rec.V1),
               csv_optional(rec.V2), csv_optional(rec.R1),
               csv_optional(rec.R2), csv_double(rec.I),
               csv_optional(rec.le_residual_1),
               csv_optional(rec.le_residual_2)});
      }
    }
  }

  {
    CsvWriter w(out_dir + "/gaps.csv");
    w.row({"K", "gap", "gap_bar", "bound"});
    if (ref && cfg.f_op.is_subdifferential() && cfg.g_op.is_subdifferential() &&
        in_region(classify_params(cfg.params)) && tr.states.size() >= 2) {
      try {
        const auto series = ergodic_bound_series(
            tr, *ref, cfg.params, cfg.f_op.function(), cfg.g_op.function());
        for (std::size_t K = 0; K < series.size(); ++K)
          w.row({std::to_string(K), csv_double(series[K].gap),
                 csv_double(series[K].gap_bar), csv_double(series[K].bound)});
      } catch (const ConjugateUnavailable&) {
        // Conjugate-free problems get an empty gap table.
      }
    }
  }

  switch (tr.stop_reason) {
    case StopReason::ResidualMet: return kExitOk;
    case StopReason::Diverged: return kExitDiverged;
    case StopReason::MaxIters: return kExitBudget;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep / probe
// ---------------------------------------------------------------------------

enum class Observed { Converged, Diverged, Undecided };

inline const char* to_string(Observed o) {
  switch (o) {
    case Observed::Converged: return "Converged";
    case Observed::Diverged: return "Diverged";
    case Observed::Undecided: return "Undecided";
  }
  return "?";
}

struct SweepCell {
  double tau = 1.0, theta = 1.0;
  RegionClass predicted = RegionClass::Outside;
  Observed observed = Observed::Undecided;
  double final_residual = 0.0;
};

struct SweepConfig {
  std::vector<double> taus, thetas;
  std::size_t iters = 20000;
  double tol = 1e-7;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
};

inline SweepConfig parse_sweep_config(const Json& j) {
  SweepConfig cfg;
  const Json& grid = require_field(j, "grid");
  cfg.taus = grid_axis_from_json(require_field(grid, "tau"));
  cfg.thetas = grid_axis_from_json(require_field(grid, "theta"));
  for (double t : cfg.taus)
    if (!(t > 0.0)) throw ConfigError("sweep: tau values must be > 0");
  for (double t : cfg.thetas)
    if (t == 0.0) throw ConfigError("sweep: theta = 0 is not admissible");
  cfg.iters = j.value("iters", std::size_t{20000});
  cfg.tol = j.value("tol", 1e-7);
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.workers = j.value("workers", std::size_t{0});
  if (cfg.iters < 1) throw ConfigError("sweep: iters must be >= 1");
  if (!(cfg.tol > 0.0)) throw ConfigError("sweep: tol must be > 0");
  return cfg;
}

// Runs the battery at one (tau, theta) cell with alpha = 1, beta = 1/tau.
inline SweepCell evaluate_sweep_cell(double tau, double theta,
                                     const std::vector<BatteryProblem>& battery,
                                     std::size_t iters, double tol) {
  SweepCell cell;
  cell.tau = tau;
  cell.theta = theta;
  const SplitParams p(1.0, 1.0 / tau, theta);
  cell.predicted = classify_params(p);
  bool any_diverged = false, all_converged = true;
  double worst = 0.0;
  for (const BatteryProblem& prob : battery) {
    const Trace tr = edr_run(prob.f_op, prob.g_op, p, prob.z0, iters, tol);
    worst = std::max(worst, tr.final_residual);
    if (tr.stop_reason == StopReason::Diverged) any_diverged = true;
    if (tr.stop_reason != StopReason::ResidualMet) all_converged = false;
  }
  cell.final_residual = worst;
  cell.observed = any_diverged ? Observed::Diverged
                : all_converged ? Observed::Converged
                                : Observed::Undecided;
  return cell;
}

inline std::vector<SweepCell> run_sweep_cells(
    const SweepConfig& cfg, const std::vector<BatteryProblem>& battery) {
  std::vector<SweepCell> cells(cfg.taus.size() * cfg.thetas.size());
  detail::parallel_for(
      cells.size(), detail::resolve_workers(cfg.workers), [&](std::size_t i) {
        const double tau = cfg.taus[i / cfg.thetas.size()];
        const double theta = cfg.thetas[i % cfg.thetas.size()];
        cells[i] = evaluate_sweep_cell(tau, theta, battery, cfg.iters, cfg.tol);
      });
  return cells;
}

inline int run_sweep(const SweepConfig& cfg, const std::string& out_dir) {
  const auto battery = make_sweep_battery(cfg.seed);
  const auto cells = run_sweep_cells(cfg, battery);
  std::filesystem::create_directories(out_dir);
  CsvWriter w(out_dir + "/sweep.csv");
  w.row({"tau", "theta", "predicted", "observed", "final_residual"});
  for (const SweepCell& c : cells)
    w.row({csv_double(c.tau), csv_double(c.theta), to_string(c.predicted),
           to_string(c.observed), csv_double(c.final_residual)});
  return kExitOk;
}

// The conjecture probe: same sweep with the operator roles swapped (monotone
// linear first, subdifferential second). Every output row is labeled
// EMPIRICAL; agreement with the region prediction is reported, not asserted.
inline int run_probe(const SweepConfig& cfg, const std::string& out_dir) {
  const auto battery = make_probe_battery(cfg.seed);
  const auto cells = run_sweep_cells(cfg, battery);
  std::filesystem::create_directories(out_dir);
  {
    CsvWriter w(out_dir + "/probe.csv");
    w.row({"label", "tau", "theta", "predicted", "observed", "agrees"});
    for (const SweepCell& c : cells) {
      const bool agrees = in_region(c.predicted)
                              ? c.observed == Observed::Converged
                              : c.observed == Observed::Diverged;
      w.row({"EMPIRICAL", csv_double(c.tau), csv_double(c.theta),
             to_string(c.predicted), to_string(c.observed),
             agrees ? "1" : "0"});
    }
  }
  {
    CsvWriter w(out_dir + "/probe_summary.csv");
    w.row({"label", "tau", "in_region_cells", "in_region_converged",
           "outside_cells", "outside_diverged", "agreement_rate"});
    for (std::size_t ti = 0; ti < cfg.taus.size(); ++ti) {
      std::size_t in_cells = 0, in_conv = 0, out_cells = 0, out_div = 0;
      for (std::size_t i = ti * cfg.thetas.size();
           i < (ti + 1) * cfg.thetas.size(); ++i) {
        const SweepCell& c = cells[i];
        if (in_region(c.predicted)) {
          ++in_cells;
          if (c.observed == Observed::Converged) ++in_conv;
        } else {
          ++out_cells;
          if (c.observed == Observed::Diverged) ++out_div;
        }
      }
      const std::size_t total = in_cells + out_cells;
      const double rate =
          total ? static_cast<double>(in_conv + out_div) /
                      static_cast<double>(total)
                : 1.0;
      w.row({"EMPIRICAL", csv_double(cfg.taus[ti]), std::to_string(in_cells),
             std::to_string(in_conv), std::to_string(out_cells),
             std::to_string(out_div), csv_double(rate)});
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// counterexample
// ---------------------------------------------------------------------------

struct CounterexampleConfig {
  SplitParams params;
  double z0 = 1.0;
  std::size_t iters = 200;
};

inline CounterexampleConfig parse_counterexample_config(const Json& j) {
  CounterexampleConfig cfg{split_params_from_json(require_field(j, "params"))};
  cfg.z0 = j.value("z0", 1.0);
  cfg.iters = j.value("iters", std::size_t{200});
  if (cfg.z0 == 0.0) throw ConfigError("counterexample: z0 must be nonzero");
  if (cfg.iters < 1) throw ConfigError("counterexample: iters must be >= 1");
  return cfg;
}

inline int run_counterexample(const CounterexampleConfig& cfg,
                              const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  CsvWriter w(out_dir + "/counterexample.csv");
  w.row({"problem", "k", "z", "predicted", "rel_err"});
  const auto factors = counterexample_factors(cfg.params);
  bool diverged = false;
  for (int which = 0; which < 2; ++which) {
    auto [f_op, g_op] = counterexample_problem(which);
    const double factor = which == 0 ? factors.first : factors.second;
    const Trace tr = edr_run(f_op, g_op, cfg.params, Vector{cfg.z0},
                             cfg.iters, 1e-9);
    if (tr.stop_reason == StopReason::Diverged) diverged = true;
    double predicted = cfg.z0;
    for (const EDRState& s : tr.states) {
      const double rel =
          std::abs(s.z[0] - predicted) / (1.0 + std::abs(predicted));
      w.row({which == 0 ? "zero_then_point" : "point_then_zero",
             std::to_string(s.k), csv_double(s.z[0]), csv_double(predicted),
             csv_double(rel)});
      predicted *= factor;
    }
  }
  return diverged ? kExitDiverged : kExitOk;
}

// ---------------------------------------------------------------------------
// rates
// ---------------------------------------------------------------------------

struct RatesConfig {
  double c = 0.5;
  std::vector<double> thetas, ratios;  // grid for the two-line study
  std::vector<double> lambda_thetas = {0.25, 0.5, 1.0, 2.0, 4.0};
  double epsilon = 1e-3;  // boundary-approach offset for the optimized rows
};

inline RatesConfig parse_rates_config(const Json& j) {
  RatesConfig cfg;
  cfg.c = j.value("c", 0.5);
  if (cfg.c == 0.0) throw ConfigError("rates: c must be nonzero");
  if (j.contains("grid")) {
    const Json& grid = j["grid"];
    cfg.thetas = grid_axis_from_json(require_field(grid, "theta"));
    cfg.ratios = grid_axis_from_json(require_field(grid, "beta_over_alpha"));
  } else {
    for (int i = 1; i <= 19; ++i) cfg.thetas.push_back(0.1 * i);
    for (int i = 1; i <= 12; ++i) cfg.ratios.push_back(0.25 * i);
  }
  for (double t : cfg.thetas)
    if (t == 0.0) throw ConfigError("rates: theta = 0 in grid");
  for (double r : cfg.ratios)
    if (!(r > 0.0)) throw ConfigError("rates: ratio must be > 0");
  if (j.contains("lambda_thetas"))
    cfg.lambda_thetas = grid_axis_from_json(j["lambda_thetas"]);
  cfg.epsilon = j.value("epsilon", 1e-3);
  if (!(cfg.epsilon > 0.0) || cfg.epsilon >= 1.0)
    throw ConfigError("rates: epsilon must lie in (0, 1)");
  return cfg;
}

inline int run_rates(const RatesConfig& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    CsvWriter w(out_dir + "/rates.csv");
    w.row({"c", "alpha", "beta", "theta", "radius", "sigma_max"});
    for (double ratio : cfg.ratios)
      for (double theta : cfg.thetas) {
        const SplitParams p(1.0, ratio, theta);
        const RateReport rep = line_feasibility_rates(cfg.c, p);
        w.row({csv_double(cfg.c), csv_double(1.0), csv_double(ratio),
               csv_double(theta), csv_double(rep.spectral_radius),
               csv_double(rep.max_singular_value)});
      }
  }
  {
    CsvWriter w(out_dir + "/lambda_boundary.csv");
    w.row({"theta", "rho", "omega", "lambda_minus"});
    for (double theta : cfg.lambda_thetas) {
      const double rho = std::min(2.0, 2.0 * theta);
      const double omega = 1.0 / theta;
      w.row({csv_double(theta), csv_double(rho), csv_double(omega),
             csv_double(lambda_minus(rho, omega, theta))});
    }
  }
  {
    const double sigma = 9.0 - 4.0 * std::sqrt(5.0);
    const double eps = cfg.epsilon;
    struct Row {
      const char* label;
      SplitParams p;
    };
    const Row rows[3] = {
        {"douglas_rachford", SplitParams(1.0, 1.0, 1.0)},
        {"optimized_a", SplitParams(1.0, (1.0 - eps) / sigma, 2.0 * sigma)},
        {"optimized_b", SplitParams(1.0, sigma / (1.0 - eps),
                                    2.0 * (1.0 - eps))},
    };
    CsvWriter w(out_dir + "/empirical_rates.csv");
    w.row({"label", "c", "alpha", "beta", "theta", "radius", "sigma_max",
           "empirical_rate"});
    for (const Row& row : rows) {
      const RateReport rep = line_feasibility_rates(cfg.c, row.p);
      const double emp =
          empirical_linear_rate(rep.T, Vector{1.0, 1.0}, 100, 200);
      w.row({row.label, csv_double(cfg.c), csv_double(row.p.alpha),
             csv_double(row.p.beta), csv_double(row.p.theta),
             csv_double(rep.spectral_radius),
             csv_double(rep.max_singular_value), csv_double(emp)});
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// admm / cp / parallel drivers
// ---------------------------------------------------------------------------

struct AdmmRunConfig {
  AdmmInstance inst;
  Vector y0, u0;
  double alpha, beta, theta;
  std::size_t iters = 500;
  double tol = 1e-8;
};

inline AdmmRunConfig parse_admm_config(const Json& j) {
  const Json& prob = require_field(j, "problem");
  ConvexFunction f = function_from_json(require_field(prob, "f"));
  ConvexFunction g = function_from_json(require_field(prob, "g"));
  Matrix a = matrix_from_json(require_field(prob, "A"));
  Matrix b = matrix_from_json(require_field(prob, "B"));
  Vector c = vector_from_json(require_field(prob, "c"));
  const Json& params = require_field(j, "params");
  AdmmInstance inst = [&] {
    try {
      return AdmmInstance(std::move(f), std::move(g), std::move(a),
                          std::move(b), std::move(c));
    } catch (const Error& e) {
      throw ConfigError(std::string("admm: ") + e.what());
    }
  }();
  const std::size_t q = inst.q_dim(), n = inst.n_dim();
  AdmmRunConfig cfg{std::move(inst),
                    prob.contains("y0") ? vector_from_json(prob["y0"])
                                        : Vector(q),
                    prob.contains("u0") ? vector_from_json(prob["u0"])
                                        : Vector(n),
                    require_field(params, "alpha").get<double>(),
                    require_field(params, "beta").get<double>(),
                    require_field(params, "theta").get<double>()};
  cfg.iters = j.value("iters", std::size_t{500});
  cfg.tol = j.value("tol", 1e-8);
  if (!(cfg.alpha > 0.0) || !(cfg.beta > 0.0) || !(cfg.theta > 0.0))
    throw ConfigError("admm: alpha, beta, theta must be > 0");
  if (cfg.y0.size() != q || cfg.u0.size() != n)
    throw ConfigError("admm: y0/u0 dimensions do not match the instance");
  return cfg;
}

inline int run_admm(const AdmmRunConfig& cfg, const std::string& out_dir) {
  const AdmmTrace tr = extended_admm_run(cfg.inst, cfg.y0, cfg.u0, cfg.alpha,
                                         cfg.beta, cfg.theta, cfg.iters);
  std::filesystem::create_directories(out_dir);
  CsvWriter w(out_dir + "/admm.csv");
  w.row({"k", "primal_residual", "in_region"});
  double last_res = kInf;
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const AdmmState& s = tr.states[k];
    last_res = norm(cfg.inst.A.apply(s.x) + cfg.inst.B.apply(s.y) -
                    cfg.inst.c);
    w.row({std::to_string(k + 1), csv_double(last_res),
           tr.params_in_region ? "1" : "0"});
  }
  return last_res <= cfg.tol ? kExitOk : kExitBudget;
}

struct CpRunConfig {
  CpInstance inst;
  CpParams params;
  Vector x0, z0;
  std::size_t iters = 5000;
  double tol = 1e-8;
};

inline CpRunConfig parse_cp_config(const Json& j) {
  const Json& prob = require_field(j, "problem");
  CpInstance inst = [&] {
    try {
      return CpInstance(function_from_json(require_field(prob, "f")),
                        function_from_json(require_field(prob, "g")),
                        matrix_from_json(require_field(prob, "A")));
    } catch (const Error& e) {
      throw ConfigError(std::string("cp: ") + e.what());
    }
  }();
  const Json& params = require_field(j, "params");
  CpParams p{require_field(params, "tau").get<double>(),
             require_field(params, "sigma").get<double>(),
             require_field(params, "theta").get<double>(),
             require_field(params, "rho").get<double>()};
  if (!(p.tau > 0.0) || !(p.sigma > 0.0) || !(p.theta > 0.0) || !(p.rho > 0.0))
    throw ConfigError("cp: parameters must be > 0");
  const std::size_t n = inst.A.cols(), m = inst.A.rows();
  CpRunConfig cfg{std::move(inst), p,
                  prob.contains("x0") ? vector_from_json(prob["x0"])
                                      : Vector(n),
                  prob.contains("z0") ? vector_from_json(prob["z0"])
                                      : Vector(m)};
  cfg.iters = j.value("iters", std::size_t{5000});
  cfg.tol = j.value("tol", 1e-8);
  if (cfg.x0.size() != n || cfg.z0.size() != m)
    throw ConfigError("cp: x0/z0 dimensions do not match A");
  return cfg;
}

inline int run_cp(const CpRunConfig& cfg, const std::string& out_dir) {
  const CpTrace tr =
      drcp_run(cfg.inst, cfg.params, cfg.x0, cfg.z0, cfg.iters);
  std::filesystem::create_directories(out_dir);
  CsvWriter w(out_dir + "/cp.csv");
  w.row({"k", "x_change", "z_change", "admissible"});
  double last = kInf;
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const CpState& s = tr.states[k];
    last = norm(s.xbar - s.x);
    w.row({std::to_string(k), csv_double(last),
           csv_double(norm(s.zbar - s.z)),
           tr.params_admissible ? "1" : "0"});
  }
  return last <= cfg.tol ? kExitOk : kExitBudget;
}

struct ParallelRunConfig {
  std::vector<ConvexFunction> fs;
  std::vector<Vector> y0;
  double alpha, gamma, theta;
  std::size_t iters = 2000;
  double tol = 1e-8;
};

inline ParallelRunConfig parse_parallel_config(const Json& j) {
  const Json& prob = require_field(j, "problem");
  ParallelRunConfig cfg{{}, {}, 1.0, 1.0, 1.0};
  for (const Json& fj : require_field(prob, "fs"))
    cfg.fs.push_back(function_from_json(fj));
  if (cfg.fs.empty()) throw ConfigError("parallel: need at least one function");
  std::size_t d = 0;
  for (const ConvexFunction& f : cfg.fs) {
    const std::size_t fd = f.dim();
    if (fd == 0) continue;  // dimension-free shapes adapt
    if (d != 0 && fd != d)
      throw ConfigError("parallel: functions pin different dimensions");
    d = fd;
  }
  if (d == 0) throw ConfigError("parallel: functions must pin a dimension");
  if (prob.contains("y0")) {
    for (const Json& yj : prob["y0"]) cfg.y0.push_back(vector_from_json(yj));
  } else {
    cfg.y0.assign(cfg.fs.size(), Vector(d));
  }
  if (cfg.y0.size() != cfg.fs.size())
    throw ConfigError("parallel: y0 must have one block per function");
  for (const Vector& y : cfg.y0)
    if (y.size() != d) throw ConfigError("parallel: y0 block dimension");
  const Json& params = require_field(j, "params");
  cfg.alpha = require_field(params, "alpha").get<double>();
  cfg.gamma = require_field(params, "gamma").get<double>();
  cfg.theta = require_field(params, "theta").get<double>();
  if (!(cfg.alpha > 0.0) || !(cfg.gamma > 0.0) || !(cfg.theta > 0.0))
    throw ConfigError("parallel: alpha, gamma, theta must be > 0");
  cfg.iters = j.value("iters", std::size_t{2000});
  cfg.tol = j.value("tol", 1e-8);
  return cfg;
}

inline int run_parallel(const ParallelRunConfig& cfg,
                        const std::string& out_dir) {
  const ParallelTrace tr = parallel_splitting_run(
      cfg.fs, cfg.y0, cfg.alpha, cfg.gamma, cfg.theta, cfg.iters);
  std::filesystem::create_directories(out_dir);
  CsvWriter w(out_dir + "/parallel.csv");
  w.row({"k", "fix_residual", "consensus_spread", "in_region"});
  double last = kInf;
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const ParallelState& s = tr.states[k];
    const Vector target =
        (1.0 + cfg.gamma) * s.q_mean - cfg.gamma * s.p_mean;
    double fixres = 0.0, spread = 0.0;
    for (const Vector& xi : s.x) {
      fixres = std::max(fixres, norm(target - xi));
      spread = std::max(spread, norm(xi - s.q_mean));
    }
    last = fixres;
    w.row({std::to_string(k), csv_double(fixres), csv_double(spread),
           tr.params_in_region ? "1" : "0"});
  }
  return last <= cfg.tol ? kExitOk : kExitBudget;
}

// ---------------------------------------------------------------------------
// Dispatcher
// ---------------------------------------------------------------------------

// Loads a config file, checks its kind against the invoked subcommand, and
// runs it. Any malformed input maps to exit code 2; no artifact is written
// in that case (validation happens before any file is opened).
inline int run_config_file(const std::string& config_path,
                           const std::string& expected_kind,
                           const std::string& out_dir,
                           std::optional<std::uint64_t> seed_override,
                           std::optional<std::size_t> workers_override,
                           std::ostream& err) {
  Json j;
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config: " + config_path);
    in >> j;
  } catch (const Json::exception& e) {
    err << "config parse error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfigError;
  }
  try {
    const std::string kind = require_field(j, "kind").get<std::string>();
    if (kind != expected_kind)
      throw ConfigError("config kind '" + kind + "' does not match command '" +
                        expected_kind + "'");
    if (seed_override) j["seed"] = *seed_override;
    if (workers_override) j["workers"] = *workers_override;
    if (kind == "solve") return run_solve(parse_solve_config(j), out_dir);
    if (kind == "sweep") return run_sweep(parse_sweep_config(j), out_dir);
    if (kind == "probe") return run_probe(parse_sweep_config(j), out_dir);
    if (kind == "counterexample")
      return run_counterexample(parse_counterexample_config(j), out_dir);
    if (kind == "rates") return run_rates(parse_rates_config(j), out_dir);
    if (kind == "admm") return run_admm(parse_admm_config(j), out_dir);
    if (kind == "cp") return run_cp(parse_cp_config(j), out_dir);
    if (kind == "parallel")
      return run_parallel(parse_parallel_config(j), out_dir);
    throw ConfigError("unknown kind: " + kind);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfigError;
  } catch (const Json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace xdrs
