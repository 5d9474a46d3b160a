#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "regastro/config.hpp"
#include "regastro/emit.hpp"
#include "regastro/harness.hpp"
#include "regastro/stats_util.hpp"

using namespace regastro;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

ExperimentConfig tiny_quadratic_config() {
  ExperimentConfig cfg;
  cfg.problem.kind = ProblemKind::Quadratic;
  cfg.problem.d = 2;
  cfg.problem.sigma = 1.0;
  SolverSpec reg;
  reg.name = "reg-astro";
  cfg.solvers.push_back(reg);
  SolverSpec adam;
  adam.name = "adam";
  adam.kind = SolverKind::Adam;
  cfg.solvers.push_back(adam);
  cfg.n_starts = 2;
  cfg.n_macroreps = 2;
  cfg.budget = 2000;
  cfg.budget_grid = {500, 1000, 1500, 2000};
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("student-t quantiles match frozen table values") {
  CHECK(student_t_quantile(0.95, 9.0) ==
        doctest::Approx(1.8331129326536335).epsilon(1e-8));
  CHECK(student_t_quantile(0.95, 3.0) ==
        doctest::Approx(2.3533634348018264).epsilon(1e-8));
  CHECK(std::abs(student_t_quantile(0.5, 5.0)) < 1e-6);
}

TEST_CASE("progress curve: identical runs give a zero-width CI") {
  std::vector<std::vector<double>> runs(4, std::vector<double>{3.0, 2.0, 1.0});
  const auto curve = progress_curve(runs, {10, 20, 30});
  CHECK(curve.mean == std::vector<double>{3.0, 2.0, 1.0});
  for (double w : curve.ci_half_width) CHECK(w == doctest::Approx(0.0));
}

TEST_CASE("progress curve: pointwise mean of {1,3} is 2") {
  std::vector<std::vector<double>> runs = {{1.0}, {3.0}};
  const auto curve = progress_curve(runs, {10});
  CHECK(curve.mean[0] == 2.0);
  CHECK(curve.ci_half_width[0] > 0.0);
}

TEST_CASE("progress curve rejects fewer than two runs") {
  CHECK_THROWS(progress_curve({{1.0}}, {10}));
}

TEST_CASE("CI width shrinks like 1/sqrt(n)") {
  // Synthetic Gaussian run values; quadrupling reps should about halve the
  // width (within 20%).
  auto make_runs = [](int n, std::uint64_t seed) {
    std::vector<std::vector<double>> runs;
    for (int i = 0; i < n; ++i) {
      StreamKey key{0, i, StreamRole::Baseline, 0, 0};
      Substream s(seed, key);
      runs.push_back({5.0 + s.next_normal()});
    }
    return runs;
  };
  double w_small = 0.0, w_large = 0.0;
  const int trials = 40;
  for (int t = 0; t < trials; ++t) {
    w_small += progress_curve(make_runs(25, 100 + t), {1}).ci_half_width[0];
    w_large += progress_curve(make_runs(100, 500 + t), {1}).ci_half_width[0];
  }
  const double ratio = w_small / w_large;
  CHECK(ratio > 1.6);
  CHECK(ratio < 2.4);
}

TEST_CASE("solvability profile counting fixture") {
  // 2 starts x 2 reps. Start 0: ref 0, f_start 10, threshold 0.5.
  // Start 1: ref 2, f_start 4, threshold 2.1.
  const std::vector<double> refs = {0.0, 2.0};
  const std::vector<double> starts = {10.0, 4.0};
  std::vector<std::vector<std::vector<double>>> values = {
      {{5.0, 0.4}, {5.0, 5.0}},    // start 0: rep A solves at b2, rep B never
      {{2.05, 2.05}, {3.0, 2.2}},  // start 1: rep A solves from b1, rep B never
  };
  const auto prof = solvability_profile(values, refs, starts, 0.05, {10, 20});
  CHECK(prof.n_pairs == 4);
  CHECK(prof.fraction[0] == doctest::Approx(0.25));
  CHECK(prof.fraction[1] == doctest::Approx(0.5));
  CHECK(prof.excluded_starts.empty());
}

TEST_CASE("degenerate starts are excluded from the profile") {
  const std::vector<double> refs = {1.0, 0.0};
  const std::vector<double> starts = {1.0, 4.0};  // start 0: f_start == ref
  std::vector<std::vector<std::vector<double>>> values = {
      {{1.0}},
      {{0.1}},
  };
  const auto prof = solvability_profile(values, refs, starts, 0.05, {10});
  CHECK(prof.n_pairs == 1);
  CHECK(prof.excluded_starts == std::vector<int>{0});
  CHECK(prof.fraction[0] == doctest::Approx(1.0));
}

TEST_CASE("all runs at reference solve everywhere; none improving solves nowhere") {
  const std::vector<double> refs = {0.0};
  const std::vector<double> starts = {8.0};
  std::vector<std::vector<std::vector<double>>> at_ref = {{{0.0, 0.0}}};
  CHECK(solvability_profile(at_ref, refs, starts, 0.05, {1, 2}).fraction ==
        std::vector<double>{1.0, 1.0});
  std::vector<std::vector<std::vector<double>>> stuck = {{{8.0, 8.0}}};
  CHECK(solvability_profile(stuck, refs, starts, 0.05, {1, 2}).fraction ==
        std::vector<double>{0.0, 0.0});
}

TEST_CASE("complexity slope recovers planted exponents") {
  // Planted T_eps = eps^{-3/2}, W_eps = eps^{-4.5} via synthetic records.
  const std::vector<double> eps_grid = {0.5, 0.25, 0.125, 0.0625};
  std::vector<IterationRecord> traj;
  double g = 1.0;
  for (int k = 0; k < 100000; ++k) {
    IterationRecord rec;
    rec.k = k;
    // Gradient at iteration k: g_k chosen so T_eps = ceil(eps^{-1.5}).
    const double t = static_cast<double>(k + 1);
    rec.truth_g_norm = std::pow(t, -2.0 / 3.0);
    rec.budget_cum = static_cast<std::int64_t>(std::pow(t, 3.0));
    traj.push_back(rec);
    if (*rec.truth_g_norm < 0.03) break;
  }
  const auto slopes = complexity_slope({traj}, eps_grid);
  // T_eps ~ eps^{-3/2} and W_eps = T^3 ~ eps^{-4.5}.
  CHECK(slopes.t_slope.slope == doctest::Approx(1.5).epsilon(0.02));
  CHECK(slopes.w_slope.slope == doctest::Approx(4.5).epsilon(0.02));
  CHECK(slopes.t_slope.n == 4);
}

TEST_CASE("unreached epsilons are dropped from the fit") {
  std::vector<IterationRecord> traj(3);
  for (int k = 0; k < 3; ++k) {
    traj[k].k = k;
    traj[k].truth_g_norm = 1.0 / (k + 1);  // reaches 1, 0.5, 1/3 only
    traj[k].budget_cum = 10 * (k + 1);
  }
  const auto m = complexity_metrics(traj, {0.5, 0.25, 0.125});
  CHECK(m.eps == std::vector<double>{0.5});
  CHECK(m.t_eps == std::vector<double>{2.0});
}

TEST_CASE("objective checkpoints carry the last value forward") {
  RunResult run;
  Vector a(2), b(2);
  a << 3.0, 0.0;
  b << 1.0, 0.0;
  run.incumbents = {{0, a}, {50, b}};
  ExperimentConfig cfg = tiny_quadratic_config();
  IncumbentEvaluator eval(cfg.problem, 3);
  // Truth f = ||x||^2/2: a -> 4.5, b -> 0.5.
  const auto vals = objective_at_checkpoints(run, {10, 100, 1000}, eval);
  CHECK(vals == std::vector<double>{4.5, 0.5, 0.5});
}

TEST_CASE("experiment runs are deterministic and differ across reps") {
  ExperimentConfig cfg = tiny_quadratic_config();
  const auto r1 = run_experiment(cfg);
  const auto r2 = run_experiment(cfg);
  REQUIRE(r1.runs.size() == 8);  // 2 starts x 2 solvers x 2 reps
  CHECK(r1.values == r2.values);
  CHECK(r1.references == r2.references);
  // Two reps of the same (start, solver) differ.
  CHECK(r1.values[0][0][0] != r1.values[0][0][1]);
  // Budget accounting invariant on every trajectory.
  for (const auto& run : r1.runs) {
    if (run.trajectory.empty()) continue;
    std::int64_t prev = 0;
    for (const auto& rec : run.trajectory) {
      CHECK(rec.budget_cum >= prev);
      prev = rec.budget_cum;
    }
    CHECK(prev <= cfg.budget);
  }
}

TEST_CASE("emit writes deterministic files with the right row counts") {
  ExperimentConfig cfg = tiny_quadratic_config();
  const auto result = run_experiment(cfg);
  const auto dir1 = std::filesystem::temp_directory_path() / "regastro_emit1";
  const auto dir2 = std::filesystem::temp_directory_path() / "regastro_emit2";
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
  EmitFormats formats;
  const auto s1 = emit_experiment(result, formats, dir1.string());
  const auto s2 = emit_experiment(result, formats, dir2.string());
  CHECK(s1.files_written == s2.files_written);
  CHECK(s1.svg_charts == 2);

  // Byte-identical output for the same store.
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(dir1)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), dir1);
    CHECK(slurp(entry.path()) == slurp(dir2 / rel));
  }

  // CSV row count = trajectory length + header.
  for (const auto& run : result.runs) {
    const auto path = dir1 / "runs" /
                      ("run_s" + std::to_string(run.start_idx) + "_" +
                       cfg.solvers[static_cast<size_t>(run.solver_idx)].name +
                       "_r" + std::to_string(run.rep) + ".csv");
    const std::string content = slurp(path);
    const auto rows = std::count(content.begin(), content.end(), '\n');
    CHECK(rows == static_cast<long>(run.trajectory.size()) + 1);
  }
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("format parsing") {
  const EmitFormats f = parse_formats("csv,svg");
  CHECK(f.csv);
  CHECK(!f.jsonl);
  CHECK(f.svg);
  CHECK_THROWS_AS(parse_formats("csv,bogus"), ConfigError);
}

TEST_CASE("config JSON parsing and validation") {
  using nlohmann::json;
  json j = json::parse(R"({
    "seed": 11,
    "budget": 5000,
    "budget_grid": [1000, 2000, 5000],
    "n_starts": 3,
    "n_macroreps": 4,
    "gap_threshold": 0.1,
    "problem": {"name": "quadratic", "quadratic": {"d": 3, "sigma": 0.5}},
    "solvers": [
      {"kind": "reg-astro", "eta": 0.6, "kappa_a": 2.0},
      {"kind": "reg-astro-crn", "name": "crn"},
      {"kind": "astro"},
      {"kind": "adam", "lr": 0.05}
    ]
  })");
  const ExperimentConfig cfg = parse_experiment_config(j);
  CHECK(cfg.seed == 11);
  CHECK(cfg.budget == 5000);
  CHECK(cfg.problem.kind == ProblemKind::Quadratic);
  CHECK(cfg.problem.d == 3);
  CHECK(cfg.problem.sigma == 0.5);
  REQUIRE(cfg.solvers.size() == 4);
  CHECK(cfg.solvers[0].reg.eta == 0.6);
  CHECK(cfg.solvers[0].reg.kappa_a == 2.0);
  CHECK(cfg.solvers[1].kind == SolverKind::RegAstroCrn);
  CHECK(cfg.solvers[1].name == "crn");
  CHECK(cfg.solvers[3].adam.lr == 0.05);

  // Unknown keys, bad values, and bad structure all fail loudly.
  json bad = j;
  bad["typo_key"] = 1;
  CHECK_THROWS_AS(parse_experiment_config(bad), ConfigError);
  bad = j;
  bad["solvers"][0]["eta"] = 0.1;  // outside (1/4, 1)
  CHECK_THROWS_AS(parse_experiment_config(bad), ConfigError);
  bad = j;
  bad["budget_grid"] = {2000, 1000};
  CHECK_THROWS_AS(parse_experiment_config(bad), ConfigError);
  bad = j;
  bad["gap_threshold"] = 1.5;
  CHECK_THROWS_AS(parse_experiment_config(bad), ConfigError);
  bad = j;
  bad["problem"]["name"] = "unknown";
  CHECK_THROWS_AS(parse_experiment_config(bad), ConfigError);
}

TEST_CASE("generated starts are deterministic and inside the box") {
  ExperimentConfig cfg = tiny_quadratic_config();
  cfg.start_lo = -1.0;
  cfg.start_hi = 3.0;
  const auto s1 = experiment_starts(cfg);
  const auto s2 = experiment_starts(cfg);
  REQUIRE(s1.size() == 2);
  for (size_t i = 0; i < s1.size(); ++i) {
    CHECK((s1[i] - s2[i]).norm() == 0.0);
    for (int c = 0; c < s1[i].size(); ++c) {
      CHECK(s1[i][c] >= -1.0);
      CHECK(s1[i][c] <= 3.0);
    }
  }
  CHECK((s1[0] - s1[1]).norm() > 0.0);
}

TEST_CASE("telemetry formats round-trip a record") {
  IterationRecord rec;
  rec.k = 3;
  rec.n_k = 17;
  rec.delta_k = 0.125;
  rec.rho_k = std::numeric_limits<double>::quiet_NaN();
  rec.accept = Acceptance::G;
  rec.truth_f = 1.5;
  const auto j = record_to_json(rec);
  CHECK(j["k"] == 3);
  CHECK(j["rho_k"].is_null());
  CHECK(j["accept"] == "G");
  CHECK(j["truth_f"] == 1.5);
  CHECK(j["truth_g_norm"].is_null());

  const std::string csv = trajectory_to_csv({rec});
  CHECK(csv.find("3,17,0,0,0.125") != std::string::npos);
  const auto header_end = csv.find('\n');
  CHECK(csv.substr(0, header_end) ==
        "k,n_k,n_k_s,n_hess_total,delta_k,lambda_k,rho_k,accept,step_norm,"
        "g_bar_norm,g_bar_s_norm,f_bar,f_bar_s,truth_f,truth_g_norm,"
        "budget_cum,truncated");
}
