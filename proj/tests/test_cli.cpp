#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "xdrs/experiments.hpp"
#include "xdrs/random.hpp"

using namespace xdrs;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("xdrs_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_config(const fs::path& dir, const std::string& name,
                         const Json& j) {
  const fs::path path = dir / name;
  std::ofstream out(path);
  out << j.dump(2);
  return path.string();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json quadratic_solve_config() {
  return Json{
      {"kind", "solve"},
      {"problem",
       {{"f", {{"shape", "quadratic"},
               {"P", Json::array({Json::array({2.0, 0.0}),
                                  Json::array({0.0, 1.0})})},
               {"q", Json::array({0.5, -0.5})}}},
        {"g", {{"shape", "quadratic"},
               {"P", Json::array({Json::array({1.0, 0.0}),
                                  Json::array({0.0, 3.0})})},
               {"q", Json::array({-1.0, 0.0})}}},
        {"z0", Json::array({2.0, -1.0})}}},
      {"params", {{"alpha", 1.0}, {"beta", 2.0}, {"theta", 0.7}}},
      {"iters", 50000},
      {"tol", 1e-10},
      {"seed", 1}};
}

int run_kind(const std::string& kind, const Json& cfg, const fs::path& dir) {
  const std::string cfg_path = write_config(dir, kind + ".json", cfg);
  std::ostringstream err;
  const int code = run_config_file(cfg_path, kind, (dir / "out").string(),
                                   std::nullopt, std::nullopt, err);
  INFO(err.str());
  return code;
}

}  // namespace

TEST_CASE("solve: quadratic demo converges with tight Lyapunov residuals") {
  const fs::path dir = temp_dir("solve");
  CHECK(run_kind("solve", quadratic_solve_config(), dir) == kExitOk);
  CHECK(fs::exists(dir / "out/trace.csv"));
  CHECK(fs::exists(dir / "out/lyapunov.csv"));
  CHECK(fs::exists(dir / "out/gaps.csv"));
  // Every Lyapunov row keeps the equality residual below 1e-9 * (1 + V1).
  std::ifstream in(dir / "out/lyapunov.csv");
  std::string line;
  std::getline(in, line);  // header
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      vals.push_back(cell.empty() ? -1.0 : std::stod(cell));
    }
    REQUIRE(vals.size() == 8);
    const double v1 = vals[1], le1 = vals[6];
    CHECK(le1 <= 1e-9 * (1.0 + v1));
    ++rows;
  }
  CHECK(rows >= 10);
}

TEST_CASE("solve: counterexample with theta = 2.5 exits 3") {
  const fs::path dir = temp_dir("solve_div");
  Json cfg{{"kind", "solve"},
           {"problem",
            {{"f", {{"shape", "zero"}, {"dim", 1}}},
             {"g", {{"shape", "indicator_point"},
                    {"point", Json::array({0.0})}}},
             {"z0", Json::array({1.0})}}},
           {"params", {{"alpha", 1.0}, {"beta", 1.0}, {"theta", 2.5}}},
           {"iters", 100000},
           {"tol", 1e-9}};
  CHECK(run_kind("solve", cfg, dir) == kExitDiverged);
  CHECK(fs::exists(dir / "out/trace.csv"));
}

TEST_CASE("solve with a monotone linear first operator skips diagnostics") {
  const fs::path dir = temp_dir("solve_lin");
  Json cfg{{"kind", "solve"},
           {"problem",
            {{"f", {{"kind", "monotone_linear"},
                    {"M", Json::array({Json::array({0.0, 1.0}),
                                       Json::array({-1.0, 0.0})})}}},
             {"g", {{"shape", "quadratic"},
                    {"P", Json::array({Json::array({1.0, 0.0}),
                                       Json::array({0.0, 1.0})})},
                    {"q", Json::array({0.5, -0.5})}}},
             {"z0", Json::array({1.0, 1.0})}}},
           {"params", {{"alpha", 1.0}, {"beta", 1.0}, {"theta", 1.0}}},
           {"iters", 50000},
           {"tol", 1e-10}};
  CHECK(run_kind("solve", cfg, dir) == kExitOk);
  // Lyapunov diagnostics need a subdifferential first operator; the file
  // carries the header only.
  const std::string lyap = slurp(dir / "out/lyapunov.csv");
  CHECK(lyap.find("le_residual_2") != std::string::npos);
  CHECK(lyap.find("\r\n0,") == std::string::npos);
  CHECK(!slurp(dir / "out/trace.csv").empty());
}

TEST_CASE("malformed configs exit 2 and write nothing") {
  const fs::path dir = temp_dir("badcfg");
  Json cfg = quadratic_solve_config();
  cfg["problem"].erase("z0");
  CHECK(run_kind("solve", cfg, dir) == kExitConfigError);
  CHECK(!fs::exists(dir / "out/trace.csv"));

  // Kind mismatch between config and subcommand.
  std::ostringstream err;
  const std::string path =
      write_config(dir, "mismatch.json", quadratic_solve_config());
  CHECK(run_config_file(path, "sweep", (dir / "out2").string(), std::nullopt,
                        std::nullopt, err) == kExitConfigError);
  CHECK(!fs::exists(dir / "out2"));

  // Unparseable JSON.
  const fs::path broken = dir / "broken.json";
  std::ofstream(broken) << "{ not json";
  std::ostringstream err2;
  CHECK(run_config_file(broken.string(), "solve", (dir / "out3").string(),
                        std::nullopt, std::nullopt, err2) == kExitConfigError);

  // Structurally valid JSON with a non-PSD quadratic is rejected.
  Json bad_psd = quadratic_solve_config();
  bad_psd["problem"]["f"]["P"] =
      Json::array({Json::array({-1.0, 0.0}), Json::array({0.0, 1.0})});
  CHECK(run_kind("solve", bad_psd, dir) == kExitConfigError);

  // Wrong field types are config errors, not crashes.
  Json bad_type = quadratic_solve_config();
  bad_type["params"]["alpha"] = "one";
  CHECK(run_kind("solve", bad_type, dir) == kExitConfigError);

  // Parallel functions pinning different dimensions are rejected.
  Json bad_par{
      {"kind", "parallel"},
      {"problem",
       {{"fs",
         Json::array({{{"shape", "quadratic"},
                       {"P", Json::array({Json::array({1.0})})},
                       {"q", Json::array({0.0})}},
                      {{"shape", "quadratic"},
                       {"P", Json::array({Json::array({1.0, 0.0}),
                                          Json::array({0.0, 1.0})})},
                       {"q", Json::array({0.0, 0.0})}}})}}},
      {"params", {{"alpha", 1.0}, {"gamma", 1.0}, {"theta", 1.0}}}};
  CHECK(run_kind("parallel", bad_par, dir) == kExitConfigError);
}

TEST_CASE("sweep over a tiny grid classifies all four cells correctly") {
  const fs::path dir = temp_dir("sweep");
  Json cfg{{"kind", "sweep"},
           {"grid",
            {{"tau", Json::array({0.5, 1.0})},
             {"theta", Json::array({-0.5, 0.45, 2.3})}}},
           {"iters", 20000},
           {"tol", 1e-7},
           {"seed", 11},
           {"workers", 2}};
  CHECK(run_kind("sweep", cfg, dir) == kExitOk);
  const std::string body = slurp(dir / "out/sweep.csv");
  // tau = 0.5, theta = 0.45: inside S1; theta = 2.3: outside, diverges.
  CHECK(body.find("0.5,0.45000000000000001,InS1Only,Converged") !=
        std::string::npos);
  CHECK(body.find("InBoth,Converged") != std::string::npos);
  CHECK(body.find("Outside,Diverged") != std::string::npos);
  // Negative theta cells diverge on the counterexamples (|1 - theta| > 1).
  CHECK(body.find("0.5,-0.5,Outside,Diverged") != std::string::npos);
  CHECK(body.find("1,-0.5,Outside,Diverged") != std::string::npos);
}

TEST_CASE("sweep output is byte-identical across runs and worker counts") {
  const fs::path dir = temp_dir("sweep_det");
  Json cfg{{"kind", "sweep"},
           {"grid",
            {{"tau", Json::array({0.5, 1.0, 2.0})},
             {"theta", Json::array({0.45, 0.9})}}},
           {"iters", 5000},
           {"tol", 1e-7},
           {"seed", 42}};
  const std::string cfg_path = write_config(dir, "sweep.json", cfg);
  std::ostringstream err;
  REQUIRE(run_config_file(cfg_path, "sweep", (dir / "a").string(),
                          std::nullopt, std::nullopt, err) == kExitOk);
  REQUIRE(run_config_file(cfg_path, "sweep", (dir / "b").string(),
                          std::nullopt, 4, err) == kExitOk);
  CHECK(slurp(dir / "a/sweep.csv") == slurp(dir / "b/sweep.csv"));
  // A different seed changes the battery and hence the bytes.
  REQUIRE(run_config_file(cfg_path, "sweep", (dir / "c").string(), 77,
                          std::nullopt, err) == kExitOk);
  CHECK(slurp(dir / "a/sweep.csv") != slurp(dir / "c/sweep.csv"));
}

TEST_CASE("counterexample runs write the factor table and flag divergence") {
  const fs::path dir = temp_dir("ce");
  Json cfg{{"kind", "counterexample"},
           {"params", {{"alpha", 1.0}, {"beta", 2.0}, {"theta", 1.5}}},
           {"z0", 1.0},
           {"iters", 60}};
  CHECK(run_kind("counterexample", cfg, dir) == kExitDiverged);
  const std::string body = slurp(dir / "out/counterexample.csv");
  CHECK(body.find("zero_then_point") != std::string::npos);
  CHECK(body.find("point_then_zero") != std::string::npos);

  const fs::path dir2 = temp_dir("ce_in");
  Json cfg2 = cfg;
  cfg2["params"]["theta"] = 0.8;
  CHECK(run_kind("counterexample", cfg2, dir2) == kExitOk);
}

TEST_CASE("rates artifacts carry the pinned reference values") {
  const fs::path dir = temp_dir("rates");
  Json cfg{{"kind", "rates"}};
  CHECK(run_kind("rates", cfg, dir) == kExitOk);
  const std::string lam = slurp(dir / "out/lambda_boundary.csv");
  CHECK(lam.find("-1") != std::string::npos);
  const std::string emp = slurp(dir / "out/empirical_rates.csv");
  CHECK(emp.find("douglas_rachford") != std::string::npos);
  CHECK(emp.find("optimized_a") != std::string::npos);
  CHECK(fs::exists(dir / "out/rates.csv"));
}

TEST_CASE("probe emits EMPIRICAL-labeled rows and a per-tau summary") {
  const fs::path dir = temp_dir("probe");
  Json cfg{{"kind", "probe"},
           {"grid",
            {{"tau", Json::array({1.0})},
             {"theta", Json::array({0.45, 0.9, 1.35})}}},
           {"iters", 20000},
           {"tol", 1e-7},
           {"seed", 5}};
  CHECK(run_kind("probe", cfg, dir) == kExitOk);
  const std::string body = slurp(dir / "out/probe.csv");
  CHECK(body.find("EMPIRICAL") != std::string::npos);
  const std::string summary = slurp(dir / "out/probe_summary.csv");
  // tau = 1 row: all in-region cells converged (maximal monotone theorem).
  CHECK(summary.find("EMPIRICAL,1,3,3,0,0,1") != std::string::npos);
}

TEST_CASE("admm, cp, and parallel drivers run and converge") {
  {
    const fs::path dir = temp_dir("admm");
    Json cfg{{"kind", "admm"},
             {"problem",
              {{"f", {{"shape", "quadratic"},
                      {"P", Json::array({Json::array({2.0, 0.0}),
                                         Json::array({0.0, 1.0})})},
                      {"q", Json::array({1.0, -1.0})}}},
               {"g", {{"shape", "quadratic"},
                      {"P", Json::array({Json::array({1.0, 0.0}),
                                         Json::array({0.0, 1.0})})},
                      {"q", Json::array({0.0, 0.5})}}},
               {"A", Json::array({Json::array({1.0, 0.0}),
                                  Json::array({0.0, 1.0})})},
               {"B", Json::array({Json::array({1.0, 0.0}),
                                  Json::array({0.0, 1.0})})},
               {"c", Json::array({1.0, 1.0})}}},
             {"params", {{"alpha", 1.0}, {"beta", 1.0}, {"theta", 1.0}}},
             {"iters", 500},
             {"tol", 1e-8}};
    CHECK(run_kind("admm", cfg, dir) == kExitOk);
    CHECK(fs::exists(dir / "out/admm.csv"));
  }
  {
    const fs::path dir = temp_dir("cp");
    Json cfg{{"kind", "cp"},
             {"problem",
              {{"f", {{"shape", "l1"}, {"weight", 0.3}, {"dim", 2}}},
               {"g", {{"shape", "quadratic"},
                      {"P", Json::array({Json::array({1.0, 0.0}),
                                         Json::array({0.0, 1.0})})},
                      {"q", Json::array({-1.0, 0.5})}}},
               {"A", Json::array({Json::array({1.0, 0.2}),
                                  Json::array({-0.3, 1.0})})}}},
             {"params",
              {{"tau", 0.5}, {"sigma", 0.5}, {"theta", 1.0}, {"rho", 1.0}}},
             {"iters", 20000},
             {"tol", 1e-8}};
    CHECK(run_kind("cp", cfg, dir) == kExitOk);
  }
  {
    const fs::path dir = temp_dir("par");
    Json cfg{{"kind", "parallel"},
             {"problem",
              {{"fs", Json::array(
                          {{{"shape", "quadratic"},
                            {"P", Json::array({Json::array({1.0})})},
                            {"q", Json::array({-1.0})}},
                           {{"shape", "quadratic"},
                            {"P", Json::array({Json::array({1.0})})},
                            {"q", Json::array({3.0})}}})}}},
             {"params", {{"alpha", 1.0}, {"gamma", 1.0}, {"theta", 1.0}}},
             {"iters", 2000},
             {"tol", 1e-9}};
    CHECK(run_kind("parallel", cfg, dir) == kExitOk);
    // Consensus of argmin pair {1, -3} is their mean -1.
    const std::string body = slurp(dir / "out/parallel.csv");
    CHECK(!body.empty());
  }
}

TEST_CASE("JSON round trip preserves prox behavior across the catalog") {
  Rng rng(99);
  std::vector<ConvexFunction> fns;
  fns.push_back(ConvexFunction::zero(3));
  fns.push_back(ConvexFunction::indicator_point(random_vector(rng, 3)));
  fns.push_back(ConvexFunction::indicator_affine(
      Matrix{{1.0, 0.5, -0.5}}, Vector{0.3}));
  fns.push_back(ConvexFunction::quadratic(random_spd(rng, 3, 5.0),
                                          random_vector(rng, 3)));
  fns.push_back(ConvexFunction::l1(0.7, 3));
  fns.push_back(ConvexFunction::indicator_box(Vector{-1.0, -1.0, -1.0},
                                              Vector{1.0, 0.5, 2.0}));
  {
    std::vector<std::pair<ConvexFunction, std::size_t>> parts;
    parts.emplace_back(ConvexFunction::l1(0.4, 2), 2);
    parts.emplace_back(ConvexFunction::zero(1), 1);
    fns.push_back(ConvexFunction::separable_sum(std::move(parts)));
  }
  for (const ConvexFunction& f : fns) {
    const ConvexFunction back = function_from_json(to_json(f));
    for (int trial = 0; trial < 10; ++trial) {
      const Vector v = random_vector(rng, 3, 2.0);
      const double gamma = 0.3 + static_cast<double>(rng() % 100) / 50.0;
      CHECK(norm(f.prox(gamma, v) - back.prox(gamma, v)) == 0.0);
      CHECK(f.value(v) == back.value(v));
    }
  }
  // Operators round trip too, including the linear kind.
  const auto lin = OperatorSpec::monotone_linear(Matrix{{0.5, 1.0},
                                                        {-1.0, 0.5}});
  const auto lin_back = operator_from_json(to_json(lin));
  const Vector v{1.0, -2.0};
  CHECK(norm(lin.resolvent(0.7, v) - lin_back.resolvent(0.7, v)) == 0.0);
}

TEST_CASE("iteration budget exhaustion maps to exit 4") {
  const fs::path dir = temp_dir("budget");
  Json cfg = quadratic_solve_config();
  cfg["iters"] = 3;
  cfg["tol"] = 1e-14;
  CHECK(run_kind("solve", cfg, dir) == kExitBudget);
}
