// Experiment orchestration: solver x problem x macro-replication grids,
// objective-at-budget evaluation, progress curves, solvability profiles,
// complexity slopes, and file emission.
#pragma once

#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "regastro/baselines.hpp"
#include "regastro/problems/ambulance.hpp"
#include "regastro/problems/quadratic.hpp"
#include "regastro/problems/rosenbrock.hpp"
#include "regastro/solver.hpp"
#include "regastro/stats_util.hpp"
#include "regastro/svg.hpp"
#include "regastro/telemetry.hpp"

namespace regastro {

enum class SolverKind { RegAstro, RegAstroCrn, AstroClassic, Adam };
enum class ProblemKind { Rosenbrock, Quadratic, Ambulance };

struct SolverSpec {
  std::string name;
  SolverKind kind = SolverKind::RegAstro;
  SolverConfig reg;
  AstroClassicConfig astro;
  AdamConfig adam;
};

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Rosenbrock;
  int d = 5;
  bool noiseless = false;
  double sigma = 1.0;        // quadratic noise level
  Vector quad_diag;          // empty = identity
  AmbulanceSimConfig ambulance;

  int dim() const {
    return kind == ProblemKind::Ambulance ? ambulance.decision_dim() : d;
  }
};

inline std::unique_ptr<StochasticOracle> make_oracle(const ProblemSpec& spec,
                                                     std::uint64_t root_seed) {
  switch (spec.kind) {
    case ProblemKind::Rosenbrock:
      return std::make_unique<RosenbrockOracle>(spec.d, root_seed,
                                                spec.noiseless);
    case ProblemKind::Quadratic: {
      Vector diag = spec.quad_diag.size() == spec.d
                        ? spec.quad_diag
                        : Vector::Ones(spec.d);
      return std::make_unique<QuadraticOracle>(
          QuadraticOracle::diagonal(diag, spec.noiseless ? 0.0 : spec.sigma,
                                    root_seed));
    }
    case ProblemKind::Ambulance:
      return std::make_unique<AmbulanceOracle>(spec.ambulance, root_seed);
  }
  throw std::logic_error("make_oracle: unknown problem");
}

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<SolverSpec> solvers;
  std::vector<Vector> starts;       // explicit starts; generated when empty
  int n_starts = 1;
  double start_lo = -2.0, start_hi = 2.0;
  int n_macroreps = 2;
  std::int64_t budget = 200000;
  std::vector<std::int64_t> budget_grid;
  double gap_threshold = 0.05;
  std::string output_dir = "out";
  std::uint64_t seed = 0;

  void validate() const {
    if (solvers.empty()) throw std::invalid_argument("no solvers configured");
    if (n_macroreps < 1) throw std::invalid_argument("n_macroreps");
    if (!(gap_threshold > 0.0 && gap_threshold < 1.0))
      throw std::invalid_argument("gap_threshold");
    for (size_t i = 1; i < budget_grid.size(); ++i)
      if (budget_grid[i] <= budget_grid[i - 1])
        throw std::invalid_argument("budget_grid not ascending");
  }
};

struct RunResult {
  int start_idx = 0;
  int solver_idx = 0;
  int rep = 0;
  std::uint64_t run_seed = 0;
  std::vector<IterationRecord> trajectory;
  // Incumbent after each accepted step (plus the start), with the cumulative
  // budget at which it took effect.
  std::vector<std::pair<std::int64_t, Vector>> incumbents;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b, std::uint64_t c) {
  std::uint64_t out[2];
  Threefry2x64::block(seed, 0x5851F42D4C957F2DULL,
                      (a << 40) | (b << 16) | c, 0, out);
  return out[0];
}

}  // namespace detail

// Deterministic starting points inside the configured box.
inline std::vector<Vector> experiment_starts(const ExperimentConfig& cfg) {
  if (!cfg.starts.empty()) return cfg.starts;
  std::vector<Vector> starts;
  const int d = cfg.problem.dim();
  for (int s = 0; s < cfg.n_starts; ++s) {
    StreamKey key{/*run_id=*/-1000 - s, 0, StreamRole::Baseline, 0, 0};
    Substream stream = derive_stream(cfg.seed, key);
    Vector x(d);
    for (int i = 0; i < d; ++i)
      x[i] = cfg.start_lo + (cfg.start_hi - cfg.start_lo) *
                                stream.next_uniform();
    starts.push_back(x);
  }
  return starts;
}

inline RunResult execute_run(const ExperimentConfig& cfg, int start_idx,
                             int solver_idx, int rep) {
  const std::vector<Vector> starts = experiment_starts(cfg);
  const Vector& x0 = starts[static_cast<size_t>(start_idx)];
  const SolverSpec& sv = cfg.solvers[static_cast<size_t>(solver_idx)];

  RunResult out;
  out.start_idx = start_idx;
  out.solver_idx = solver_idx;
  out.rep = rep;
  out.run_seed = detail::mix_seed(
      cfg.seed, static_cast<std::uint64_t>(start_idx),
      static_cast<std::uint64_t>(solver_idx), static_cast<std::uint64_t>(rep));

  auto oracle = make_oracle(cfg.problem, out.run_seed);
  out.incumbents.emplace_back(0, x0);

  switch (sv.kind) {
    case SolverKind::RegAstro:
    case SolverKind::RegAstroCrn: {
      SolverConfig sc = sv.reg;
      sc.mode = sv.kind == SolverKind::RegAstroCrn ? SolverMode::Alg2CRN
                                                   : SolverMode::Alg1;
      sc.budget_max = cfg.budget;
      SolverState state = initialize(x0, *oracle, sc, out.run_seed);
      while (state.budget_cum() < sc.budget_max) {
        if (sc.max_iterations > 0 && state.k >= sc.max_iterations) break;
        IterationRecord rec;
        const bool complete = step(state, *oracle, sc, rec);
        if (!complete) {
          if (rec.n_k > 0) out.trajectory.push_back(rec);
          break;
        }
        out.trajectory.push_back(rec);
        if (rec.accept != Acceptance::U)
          out.incumbents.emplace_back(rec.budget_cum, state.x);
        if (sc.stop_grad_tol > 0.0 && rec.truth_g_norm &&
            *rec.truth_g_norm <= sc.stop_grad_tol)
          break;
      }
      break;
    }
    case SolverKind::AstroClassic: {
      AstroClassicConfig ac = sv.astro;
      ac.budget_max = cfg.budget;
      AstroClassicState state;
      state.x = x0;
      state.delta = ac.delta0;
      while (state.budget_cum() < ac.budget_max) {
        if (ac.max_iterations > 0 && state.k >= ac.max_iterations) break;
        IterationRecord rec;
        if (!astro_classic_step(state, *oracle, ac, rec)) {
          if (rec.n_k > 0) out.trajectory.push_back(rec);
          break;
        }
        out.trajectory.push_back(rec);
        if (rec.accept != Acceptance::U)
          out.incumbents.emplace_back(rec.budget_cum, state.x);
      }
      break;
    }
    case SolverKind::Adam: {
      AdamConfig ad = sv.adam;
      ad.budget_max = cfg.budget;
      AdamState state;
      state.x = x0;
      state.m = Vector::Zero(oracle->dim());
      state.v = Vector::Zero(oracle->dim());
      std::int64_t k = 0;
      while (state.oracle_calls + ad.batch <= ad.budget_max) {
        if (ad.max_iterations > 0 && k >= ad.max_iterations) break;
        const Estimates est = estimate_fixed(
            *oracle, state.x, 1.0, ad.batch,
            detail::make_keys(0, k, StreamRole::Baseline));
        state.oracle_calls += est.n;
        IterationRecord rec;
        rec.k = k;
        rec.n_k = est.n;
        rec.f_bar = est.f_bar;
        rec.g_bar_norm = est.g_bar.norm();
        rec.accept = Acceptance::D;
        rec.budget_cum = state.oracle_calls;
        if (const auto t = oracle->truth(state.x)) {
          rec.truth_f = t->f;
          rec.truth_g_norm = t->g.norm();
        }
        adam_step(state, est.g_bar, ad);
        out.trajectory.push_back(rec);
        out.incumbents.emplace_back(state.oracle_calls, state.x);
        ++k;
      }
      break;
    }
  }
  return out;
}

// Paired post-hoc evaluator: noiseless truth when the problem has one, and a
// CRN Monte Carlo average (shared replication keys) otherwise.
class IncumbentEvaluator {
 public:
  IncumbentEvaluator(const ProblemSpec& spec, std::uint64_t seed,
                     std::int64_t n_eval_reps = 10000)
      : spec_(spec), n_reps_(n_eval_reps),
        eval_oracle_(make_oracle(spec, seed)) {}

  double operator()(const Vector& x) const {
    if (const auto t = eval_oracle_->truth(x)) return t->f;
    const std::string cache_key(
        reinterpret_cast<const char*>(x.data()),
        static_cast<size_t>(x.size()) * sizeof(double));
    if (auto it = cache_.find(cache_key); it != cache_.end())
      return it->second;
    double sum = 0.0;
    for (std::int64_t i = 0; i < n_reps_; ++i) {
      StreamKey key{/*run_id=*/-1, 0, StreamRole::Baseline, 0, i};
      sum += eval_oracle_->sample(x, key).first;
    }
    const double v = sum / static_cast<double>(n_reps_);
    cache_[cache_key] = v;
    return v;
  }

 private:
  ProblemSpec spec_;
  std::int64_t n_reps_;
  std::unique_ptr<StochasticOracle> eval_oracle_;
  mutable std::map<std::string, double> cache_;
};

// Best-so-far evaluated objective at each budget checkpoint (step-function
// interpolation; the last value carries forward past the final budget).
inline std::vector<double> objective_at_checkpoints(
    const RunResult& run, const std::vector<std::int64_t>& grid,
    const IncumbentEvaluator& eval) {
  std::vector<double> out;
  out.reserve(grid.size());
  double best = std::numeric_limits<double>::infinity();
  size_t next_inc = 0;
  for (std::int64_t b : grid) {
    while (next_inc < run.incumbents.size() &&
           run.incumbents[next_inc].first <= b) {
      best = std::min(best, eval(run.incumbents[next_inc].second));
      ++next_inc;
    }
    out.push_back(best);
  }
  return out;
}

struct AggregateCurve {
  std::vector<std::int64_t> budgets;
  std::vector<double> mean;
  std::vector<double> ci_half_width;  // 90% two-sided t interval
};

inline AggregateCurve progress_curve(
    const std::vector<std::vector<double>>& run_values,
    const std::vector<std::int64_t>& budget_grid) {
  if (run_values.size() < 2)
    throw std::invalid_argument("progress_curve: need >= 2 runs for a CI");
  AggregateCurve curve;
  curve.budgets = budget_grid;
  const double n = static_cast<double>(run_values.size());
  const double tq = student_t_quantile(0.95, n - 1.0);
  for (size_t j = 0; j < budget_grid.size(); ++j) {
    std::vector<double> col;
    col.reserve(run_values.size());
    for (const auto& rv : run_values) col.push_back(rv[j]);
    curve.mean.push_back(sample_mean(col));
    curve.ci_half_width.push_back(tq * sample_stddev(col) / std::sqrt(n));
  }
  return curve;
}

// Fraction of (start, rep) pairs within the relative optimality gap at each
// budget. references[s] is the best evaluated objective for start s across
// all solvers and runs; start_values[s] the evaluated objective at the start.
struct SolvabilityProfile {
  std::vector<std::int64_t> budgets;
  std::vector<double> fraction;
  int n_pairs = 0;
  std::vector<int> excluded_starts;  // f_start == f_ref, degenerate gap
};

inline SolvabilityProfile solvability_profile(
    const std::vector<std::vector<std::vector<double>>>& values_by_start,
    const std::vector<double>& references,
    const std::vector<double>& start_values, double gap,
    const std::vector<std::int64_t>& budget_grid) {
  SolvabilityProfile prof;
  prof.budgets = budget_grid;
  prof.fraction.assign(budget_grid.size(), 0.0);
  for (size_t s = 0; s < values_by_start.size(); ++s) {
    if (!(start_values[s] > references[s])) {
      prof.excluded_starts.push_back(static_cast<int>(s));
      continue;
    }
    prof.n_pairs += static_cast<int>(values_by_start[s].size());
  }
  if (prof.n_pairs == 0) return prof;
  for (size_t j = 0; j < budget_grid.size(); ++j) {
    int solved = 0;
    for (size_t s = 0; s < values_by_start.size(); ++s) {
      if (!(start_values[s] > references[s])) continue;
      const double threshold =
          references[s] + gap * (start_values[s] - references[s]);
      for (const auto& rv : values_by_start[s])
        if (rv[j] <= threshold) ++solved;
    }
    prof.fraction[j] = static_cast<double>(solved) / prof.n_pairs;
  }
  return prof;
}

struct ComplexityMetrics {
  // Per epsilon: iteration count T_eps and cumulative oracle calls W_eps,
  // dropped when never reached.
  std::vector<double> eps;
  std::vector<double> t_eps;
  std::vector<double> w_eps;
};

inline ComplexityMetrics complexity_metrics(
    const std::vector<IterationRecord>& traj,
    const std::vector<double>& eps_grid) {
  ComplexityMetrics m;
  for (double eps : eps_grid) {
    for (const auto& rec : traj) {
      if (rec.truth_g_norm && *rec.truth_g_norm <= eps) {
        m.eps.push_back(eps);
        m.t_eps.push_back(static_cast<double>(rec.k + 1));
        m.w_eps.push_back(static_cast<double>(rec.budget_cum));
        break;
      }
    }
  }
  return m;
}

struct ComplexitySlopes {
  SlopeFit t_slope;
  SlopeFit w_slope;
};

// Least-squares slopes of log T_eps and log W_eps against log(1/eps),
// pooling all supplied trajectories.
inline ComplexitySlopes complexity_slope(
    const std::vector<std::vector<IterationRecord>>& trajectories,
    const std::vector<double>& eps_grid) {
  std::vector<double> lx_t, ly_t, lx_w, ly_w;
  for (const auto& traj : trajectories) {
    const ComplexityMetrics m = complexity_metrics(traj, eps_grid);
    for (size_t i = 0; i < m.eps.size(); ++i) {
      lx_t.push_back(std::log(1.0 / m.eps[i]));
      ly_t.push_back(std::log(m.t_eps[i]));
      lx_w.push_back(std::log(1.0 / m.eps[i]));
      ly_w.push_back(std::log(std::max(m.w_eps[i], 1.0)));
    }
  }
  ComplexitySlopes out;
  out.t_slope = least_squares_slope(lx_t, ly_t);
  out.w_slope = least_squares_slope(lx_w, ly_w);
  return out;
}

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<Vector> starts;
  std::vector<RunResult> runs;
  // values[start][solver][rep][checkpoint]
  std::vector<std::vector<std::vector<std::vector<double>>>> values;
  std::vector<double> references;    // per start
  std::vector<double> start_values;  // per start
};

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  result.starts = experiment_starts(cfg);
  if (result.config.budget_grid.empty()) {
    // Default: 20 evenly spaced checkpoints.
    for (int i = 1; i <= 20; ++i)
      result.config.budget_grid.push_back(cfg.budget * i / 20);
  }
  const auto& grid = result.config.budget_grid;

  const int ns = static_cast<int>(result.starts.size());
  const int nv = static_cast<int>(cfg.solvers.size());
  const int nr = cfg.n_macroreps;

  // Runs are pure functions of (config, seed); schedule them on a pool and
  // collect by index.
  std::vector<std::future<RunResult>> futures;
  ExperimentConfig cfg_full = result.config;
  cfg_full.starts = result.starts;
  for (int s = 0; s < ns; ++s)
    for (int v = 0; v < nv; ++v)
      for (int r = 0; r < nr; ++r)
        futures.push_back(std::async(std::launch::async, [=] {
          return execute_run(cfg_full, s, v, r);
        }));
  for (auto& f : futures) result.runs.push_back(f.get());

  IncumbentEvaluator eval(cfg.problem, cfg.seed ^ 0xE7A1u);
  result.values.assign(
      ns, std::vector<std::vector<std::vector<double>>>(
              nv, std::vector<std::vector<double>>(nr)));
  for (const auto& run : result.runs)
    result.values[run.start_idx][run.solver_idx][run.rep] =
        objective_at_checkpoints(run, grid, eval);

  result.references.resize(ns);
  result.start_values.resize(ns);
  for (int s = 0; s < ns; ++s) {
    double best = std::numeric_limits<double>::infinity();
    for (int v = 0; v < nv; ++v)
      for (int r = 0; r < nr; ++r)
        best = std::min(best, result.values[s][v][r].back());
    result.references[s] = best;
    result.start_values[s] = eval(result.starts[static_cast<size_t>(s)]);
  }
  return result;
}

}  // namespace regastro
