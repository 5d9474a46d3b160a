// Command-line front end: single runs, full benchmark experiments, profile
// recomputation from a persisted store, and a quick invariant check suite.
//
// Exit codes: 0 success, 2 configuration error, 3 budget/infeasible,
// 4 IO error.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "regastro/config.hpp"
#include "regastro/emit.hpp"
#include "regastro/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitIo = 4;

struct CommonOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::string format = "csv,jsonl,svg";
  std::string solver;
  std::string problem;
  std::int64_t seed = -1;
  std::int64_t budget = -1;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_path, "JSON config file");
  cmd->add_option("--seed", opt.seed, "master seed (overrides config)");
  cmd->add_option("--budget", opt.budget,
                  "oracle-call budget per run (overrides config)");
  cmd->add_option("--out", opt.out_dir, "output directory");
  cmd->add_option("--format", opt.format, "comma list of csv,jsonl,svg");
  cmd->add_option("--solver", opt.solver,
                  "solver name: reg-astro, reg-astro-crn, astro, adam");
  cmd->add_option("--problem", opt.problem,
                  "problem name: rosenbrock, quadratic, ambulance");
}

regastro::ExperimentConfig build_config(const CommonOptions& opt) {
  regastro::ExperimentConfig cfg;
  if (!opt.config_path.empty()) {
    cfg = regastro::load_experiment_config(opt.config_path);
  } else {
    regastro::SolverSpec def;
    def.name = "reg-astro";
    cfg.solvers.push_back(def);
  }
  if (!opt.problem.empty()) {
    nlohmann::json pj;
    pj["name"] = opt.problem;
    cfg.problem = regastro::parse_problem_spec(pj);
  }
  if (!opt.solver.empty()) {
    // Select the named solver from the config; fall back to building one of
    // that kind with defaults.
    std::vector<regastro::SolverSpec> picked;
    for (const auto& s : cfg.solvers)
      if (s.name == opt.solver) picked.push_back(s);
    if (picked.empty()) {
      nlohmann::json sj;
      sj["kind"] = opt.solver;
      picked.push_back(regastro::parse_solver_spec(sj));
    }
    cfg.solvers = picked;
  }
  if (opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opt.seed);
  if (opt.budget >= 0) cfg.budget = opt.budget;
  if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
  cfg.validate();
  return cfg;
}

void save_store(const regastro::ExperimentResult& result,
                const std::string& path) {
  nlohmann::ordered_json j;
  j["gap_threshold"] = result.config.gap_threshold;
  j["budget_grid"] = result.config.budget_grid;
  for (const auto& s : result.config.solvers)
    j["solvers"].push_back(s.name);
  j["references"] = result.references;
  j["start_values"] = result.start_values;
  // values[start][solver][rep][checkpoint]
  j["values"] = result.values;
  regastro::write_file(path, j.dump(2) + "\n");
}

// A store round-trips into a result with empty trajectories: enough to
// recompute curves and profiles.
regastro::ExperimentResult load_store(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open store: " + path);
  nlohmann::json j;
  in >> j;
  regastro::ExperimentResult result;
  result.config.gap_threshold = j.at("gap_threshold").get<double>();
  result.config.budget_grid =
      j.at("budget_grid").get<std::vector<std::int64_t>>();
  for (const auto& name : j.at("solvers")) {
    regastro::SolverSpec s;
    s.name = name.get<std::string>();
    result.config.solvers.push_back(s);
  }
  result.references = j.at("references").get<std::vector<double>>();
  result.start_values = j.at("start_values").get<std::vector<double>>();
  result.values =
      j.at("values")
          .get<std::vector<
              std::vector<std::vector<std::vector<double>>>>>();
  return result;
}

int cmd_run(const CommonOptions& opt) {
  regastro::ExperimentConfig cfg = build_config(opt);
  cfg.n_starts = cfg.starts.empty() ? 1 : static_cast<int>(cfg.starts.size());
  cfg.n_macroreps = 1;
  const regastro::RunResult run = regastro::execute_run(cfg, 0, 0, 0);
  const regastro::EmitFormats formats = regastro::parse_formats(opt.format);
  std::filesystem::create_directories(cfg.output_dir);
  if (formats.jsonl)
    regastro::write_file(
        (std::filesystem::path(cfg.output_dir) / "trajectory.jsonl").string(),
        regastro::trajectory_to_jsonl(run.trajectory));
  if (formats.csv)
    regastro::write_file(
        (std::filesystem::path(cfg.output_dir) / "trajectory.csv").string(),
        regastro::trajectory_to_csv(run.trajectory));
  std::cout << "run: " << run.trajectory.size() << " iterations, budget used "
            << (run.trajectory.empty() ? 0
                                       : run.trajectory.back().budget_cum)
            << ", solver " << cfg.solvers[0].name << "\n";
  return kExitOk;
}

int cmd_bench(const CommonOptions& opt) {
  const regastro::ExperimentConfig cfg = build_config(opt);
  const regastro::ExperimentResult result = regastro::run_experiment(cfg);
  const regastro::EmitFormats formats = regastro::parse_formats(opt.format);
  const regastro::EmitSummary summary =
      regastro::emit_experiment(result, formats, cfg.output_dir);
  save_store(result,
             (std::filesystem::path(cfg.output_dir) / "store.json").string());
  std::cout << "bench: " << result.runs.size() << " runs, "
            << summary.files_written + 1 << " files in " << cfg.output_dir
            << "\n";
  if (formats.svg && summary.svg_charts == 0) {
    std::cerr << "bench: no curves to chart\n";
    return kExitBudget;
  }
  return kExitOk;
}

int cmd_profile(const CommonOptions& opt) {
  const std::string store_path =
      (std::filesystem::path(opt.out_dir) / "store.json").string();
  const regastro::ExperimentResult result = load_store(store_path);
  if (result.values.empty() || result.config.solvers.empty()) {
    std::cerr << "profile: store has no runs\n";
    return kExitBudget;
  }
  const regastro::EmitFormats formats = regastro::parse_formats(opt.format);
  // Re-emit only the aggregates; per-run files require trajectories.
  regastro::ExperimentResult slim = result;
  slim.runs.clear();
  const regastro::EmitSummary summary =
      regastro::emit_experiment(slim, formats, opt.out_dir);
  std::cout << "profile: " << summary.files_written << " files in "
            << opt.out_dir << "\n";
  return kExitOk;
}

int cmd_check() {
  int failures = 0;
  auto report = [&](const char* name, bool ok) {
    std::cout << (ok ? "PASS" : "FAIL") << " " << name << "\n";
    if (!ok) ++failures;
  };

  {  // Stream determinism and key separation.
    regastro::StreamKey key{7, 3, regastro::StreamRole::Center, 0, 11};
    regastro::Substream a(42, key), b(42, key);
    bool same = true;
    for (int i = 0; i < 64; ++i)
      same = same && a.next_uniform() == b.next_uniform();
    regastro::StreamKey other = key;
    other.sample_index = 12;
    regastro::Substream c(42, key), d(42, other);
    report("rng determinism", same && c.next_uniform() != d.next_uniform());
  }
  {  // Subproblem KKT on random instances.
    bool ok = true;
    for (int t = 0; t < 25 && ok; ++t) {
      regastro::StreamKey key{0, t, regastro::StreamRole::Baseline, 0, 0};
      regastro::Substream s(1234, key);
      const int d = 2 + t % 5;
      regastro::Matrix m(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = 5.0 * (2.0 * s.next_uniform() - 1.0);
      regastro::Matrix h = 0.5 * (m + m.transpose());
      regastro::Vector g(d);
      for (int i = 0; i < d; ++i) g[i] = 2.0 * s.next_uniform() - 1.0;
      const auto sol = regastro::solve_exact(h, g, 0.8, 0.3);
      ok = regastro::verify_kkt(sol, h, g, 0.8, 0.3, 1e-8);
    }
    report("subproblem kkt", ok);
  }
  {  // Welford vs two-pass.
    regastro::StreamKey key{0, 0, regastro::StreamRole::Baseline, 0, 1};
    regastro::Substream s(99, key);
    regastro::EstimatorState st(1, 0.5);
    std::vector<double> xs;
    for (int i = 0; i < 500; ++i) {
      const double v = s.next_normal();
      xs.push_back(v);
      regastro::Vector g(1);
      g[0] = 0.0;
      regastro::welford_update(st, v, g);
    }
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= xs.size();
    double var = 0.0;
    for (double v : xs) var += (v - mean) * (v - mean);
    var /= (xs.size() - 1);
    report("welford vs two-pass",
           std::abs(st.mean_f - mean) < 1e-12 &&
               std::abs(st.sigma_f_hat() - std::sqrt(var)) < 1e-12);
  }
  {  // DES integrity on a handful of replications.
    regastro::AmbulanceSimConfig cfg;
    regastro::Vector x(4);
    x << 10.0, 10.0, 15.0, 5.0;
    bool ok = true;
    for (int r = 0; r < 10 && ok; ++r) {
      regastro::AmbulanceStats stats;
      regastro::StreamKey key{0, r, regastro::StreamRole::Baseline, 0, 0};
      const regastro::Dual resp =
          regastro::ambulance_simulate(x, cfg, key, 7, &stats);
      ok = resp.v >= 0.0 && stats.recorded > 0 &&
           stats.dispatched <= stats.arrivals;
    }
    report("des integrity", ok);
  }
  std::cout << (failures == 0 ? "check: all invariants hold\n"
                              : "check: failures detected\n");
  return failures == 0 ? kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic trust-region benchmark harness"};
  app.require_subcommand(1);

  CommonOptions run_opt, bench_opt, profile_opt;
  CLI::App* run_cmd = app.add_subcommand("run", "single solver run");
  add_common_flags(run_cmd, run_opt);
  CLI::App* bench_cmd = app.add_subcommand("bench", "full experiment");
  add_common_flags(bench_cmd, bench_opt);
  CLI::App* profile_cmd =
      app.add_subcommand("profile", "recompute aggregates from a store");
  add_common_flags(profile_cmd, profile_opt);
  app.add_subcommand("check", "run the invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_opt);
    if (bench_cmd->parsed()) return cmd_bench(bench_opt);
    if (profile_cmd->parsed()) return cmd_profile(profile_opt);
    return cmd_check();
  } catch (const regastro::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
