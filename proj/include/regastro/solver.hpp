// Reg-ASTRO outer loops: the exact-subproblem variant with dual success
// criteria, and the common-random-numbers variant with a single success
// criterion, shared schedules, parameter updates, and per-iteration
// telemetry.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "regastro/estimation.hpp"
#include "regastro/model.hpp"
#include "regastro/oracle.hpp"
#include "regastro/subproblem.hpp"

namespace regastro {

enum class SolverMode { Alg1, Alg2CRN };
enum class Acceptance { D, G, U };

inline char acceptance_code(Acceptance a) {
  switch (a) {
    case Acceptance::D: return 'D';
    case Acceptance::G: return 'G';
    default: return 'U';
  }
}

struct SolverConfig {
  double delta0_pre = 1.0;
  double delta_max_pre = 10.0;
  double sigma0 = 1.0;
  double lambda_min = 0.1;
  double eta = 0.5;       // in (1/4, 1)
  double mu = 1.0;        // > 0
  double theta = 0.5;     // in (0, 1)
  double gamma1 = 2.0;    // > 1
  double gamma2 = 0.5;    // in (0, 1)
  double kappa_a = 1.0;
  double c_g = 0.1;
  double eps_lambda = 0.1;
  double kappa_lambda = 1.0;
  double c_star = 1.0;
  double shift_multiplier = 4.0;  // shift = multiplier * Lambda_k * Delta_k
  SolverMode mode = SolverMode::Alg1;
  double tau_cap = 0.5;
  std::int64_t budget_max = 200000;
  std::int64_t n_min = 2;
  std::int64_t n_max = 10000000;
  std::int64_t max_iterations = 0;  // 0 = until budget
  double stop_grad_tol = 0.0;       // truth-based stop when > 0

  void validate() const {
    if (!(eta > 0.25 && eta < 1.0)) throw std::invalid_argument("eta");
    if (!(mu > 0.0)) throw std::invalid_argument("mu");
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta");
    if (!(gamma1 > 1.0 && gamma2 > 0.0 && gamma2 < 1.0))
      throw std::invalid_argument("gamma1/gamma2");
    if (!(lambda_min > 0.0)) throw std::invalid_argument("lambda_min");
    if (!(delta0_pre > 0.0 && delta_max_pre >= delta0_pre))
      throw std::invalid_argument("delta pre bounds");
    if (!(sigma0 > 0.0)) throw std::invalid_argument("sigma0");
    if (!(tau_cap > 0.0 && tau_cap <= 1.0)) throw std::invalid_argument("tau");
    if (n_min < 2 || n_max < n_min) throw std::invalid_argument("n bounds");
  }
};

struct IterationRecord {
  std::int64_t k = 0;
  std::int64_t n_k = 0;
  std::int64_t n_k_s = 0;
  std::int64_t n_hess_total = 0;
  double delta_k = 0.0;
  double lambda_k = 0.0;
  double rho_k = 0.0;
  Acceptance accept = Acceptance::U;
  double step_norm = 0.0;
  double g_bar_norm = 0.0;
  double g_bar_s_norm = 0.0;
  double f_bar = 0.0;
  double f_bar_s = 0.0;
  std::optional<double> truth_f;
  std::optional<double> truth_g_norm;
  std::int64_t budget_cum = 0;
  bool truncated = false;
};

struct SolverState {
  Vector x;
  double lambda_k = 0.0;
  double delta_pre = 0.0;
  Vector g_pre;
  std::int64_t k = 0;
  std::int64_t oracle_calls_main = 0;
  std::int64_t oracle_calls_hess = 0;
  std::int64_t run_id = 0;
  std::uint64_t root_seed = 0;
  bool stationary = false;
  // Soft monitors.
  std::int64_t hess_bound_exceeded = 0;  // Alg1: norm bound observed, not enforced
  std::int64_t hess_cap_events = 0;      // Alg2: cap applied

  std::int64_t budget_cum() const { return oracle_calls_main + oracle_calls_hess; }
};

// lambda_k = kappa * (log(k+3))^{1+eps}; slowly growing and > 1 for kappa >= 1.
inline double lambda_schedule(std::int64_t k, double eps_lambda,
                              double kappa_lambda) {
  return kappa_lambda *
         std::pow(std::log(static_cast<double>(k) + 3.0), 1.0 + eps_lambda);
}

// eps_k = c_* (k+1)^{-2/3}.
inline double epsilon_schedule(std::int64_t k, double c_star) {
  return c_star * std::pow(static_cast<double>(k) + 1.0, -2.0 / 3.0);
}

inline double trust_radius(double g_bar_norm, double lambda_k) {
  return std::sqrt(g_bar_norm / (16.0 * lambda_k));
}

inline Acceptance success_decision(double rho, double step_norm, double delta,
                                   double g_bar_norm, double g_bar_s_norm,
                                   double lambda_k, double lambda_sched,
                                   const SolverConfig& cfg) {
  if (!std::isfinite(rho)) return Acceptance::U;
  if (cfg.mode == SolverMode::Alg2CRN)
    return rho > cfg.eta ? Acceptance::D : Acceptance::U;
  if (rho > cfg.eta && step_norm >= cfg.theta * delta) return Acceptance::D;
  if (g_bar_s_norm <= cfg.eta * g_bar_norm &&
      lambda_k > std::max(cfg.mu * g_bar_norm, lambda_sched))
    return Acceptance::G;
  return Acceptance::U;
}

inline void update_parameters(SolverState& state, Acceptance decision,
                              const Vector& trial_x, const Vector& g_bar,
                              const Vector& g_bar_s, const SolverConfig& cfg) {
  if (decision != Acceptance::U) {
    state.x = trial_x;
    state.lambda_k = std::max(cfg.gamma2 * state.lambda_k, cfg.lambda_min);
    state.g_pre = g_bar_s;
  } else {
    state.lambda_k = cfg.gamma1 * state.lambda_k;
    state.g_pre = g_bar;
  }
  state.delta_pre =
      std::min(trust_radius(state.g_pre.norm(), state.lambda_k),
               cfg.delta_max_pre);
  state.k += 1;
}

namespace detail {

inline KeyFactory make_keys(std::int64_t run_id, std::int64_t iteration,
                            StreamRole role, int column = 0) {
  return [=](std::int64_t i) {
    return StreamKey{run_id, iteration, role, column, i};
  };
}

inline SamplingParams sampling_params(const SolverConfig& cfg,
                                      double lambda_sched,
                                      std::int64_t remaining) {
  SamplingParams p;
  p.kappa_a = cfg.kappa_a;
  p.lambda_k = lambda_sched;
  p.power = cfg.mode == SolverMode::Alg2CRN ? SamplingPower::Quadratic
                                            : SamplingPower::Cubic;
  p.n_min = cfg.n_min;
  p.n_max = std::min(cfg.n_max, std::max<std::int64_t>(remaining, p.n_min));
  return p;
}

}  // namespace detail

// Step 1: estimate the gradient at x0 with the fixed initial sample size
// n0 = ceil((sigma0 / (kappa_a (delta0_pre)^3))^2) and set Lambda_0.
inline SolverState initialize(const Vector& x0, const StochasticOracle& oracle,
                              const SolverConfig& cfg, std::uint64_t root_seed,
                              std::int64_t run_id = 0) {
  cfg.validate();
  SolverState state;
  state.x = x0;
  state.run_id = run_id;
  state.root_seed = root_seed;

  const double ratio =
      cfg.sigma0 / (cfg.kappa_a * cfg.delta0_pre * cfg.delta0_pre *
                    cfg.delta0_pre);
  std::int64_t n0 = static_cast<std::int64_t>(std::ceil(ratio * ratio));
  n0 = std::clamp(n0, cfg.n_min, cfg.n_max);
  if (n0 > cfg.budget_max)
    throw std::invalid_argument("initialize: budget below initial sample size");

  const Estimates est = estimate_fixed(
      oracle, x0, cfg.sigma0, n0,
      detail::make_keys(run_id, -1, StreamRole::Center));
  state.oracle_calls_main += est.n;
  state.g_pre = est.g_bar;
  state.lambda_k =
      std::max(cfg.lambda_min,
               est.g_bar.norm() / (16.0 * cfg.delta0_pre * cfg.delta0_pre));
  state.delta_pre = cfg.delta0_pre;
  state.k = 0;
  return state;
}

// One full iteration. Returns false when the iteration was aborted because
// the budget ran out mid-estimation (partial work is still counted).
inline bool step(SolverState& state, const StochasticOracle& oracle,
                 const SolverConfig& cfg, IterationRecord& rec) {
  const std::int64_t k = state.k;
  const double lambda_sched =
      std::max(lambda_schedule(k, cfg.eps_lambda, cfg.kappa_lambda),
               1.0 + 1e-12);
  const double eps_k = epsilon_schedule(k, cfg.c_star);

  rec = IterationRecord{};
  rec.k = k;
  rec.lambda_k = state.lambda_k;
  if (const auto t = oracle.truth(state.x)) {
    rec.truth_f = t->f;
    rec.truth_g_norm = t->g.norm();
  }

  auto remaining = [&] { return cfg.budget_max - state.budget_cum(); };
  if (remaining() < cfg.n_min) return false;

  // Center estimate with the proxy-radius stopping rule.
  SamplingParams params = detail::sampling_params(cfg, lambda_sched, remaining());
  const Estimates center = adaptive_estimate_center(
      oracle, state.x, cfg.sigma0, params, state.lambda_k, state.delta_pre,
      cfg.c_g, eps_k, detail::make_keys(state.run_id, k, StreamRole::Center));
  state.oracle_calls_main += center.n;
  rec.n_k = center.n;
  rec.f_bar = center.f_bar;
  rec.g_bar_norm = center.g_bar.norm();
  rec.truncated = rec.truncated || center.truncated;
  rec.budget_cum = state.budget_cum();
  if (center.truncated && remaining() <= 0) return false;
  if (remaining() < cfg.n_min) return false;

  if (center.g_bar.norm() == 0.0) {
    // Degenerate radius; declare numerical stationarity.
    state.stationary = true;
    rec.delta_k = 0.0;
    return false;
  }

  const double delta = trust_radius(center.g_bar.norm(), state.lambda_k);
  rec.delta_k = delta;

  // Forward-difference Hessian, one adaptively sampled column per coordinate.
  params = detail::sampling_params(cfg, lambda_sched, remaining());
  FDHessianResult fd = build_fd_hessian(
      oracle, state.x, delta, center.g_bar, cfg.sigma0, params,
      [&](int j) {
        return detail::make_keys(state.run_id, k, StreamRole::HessColumn,
                                 j + 1);
      },
      remaining());
  state.oracle_calls_hess += fd.total_samples();
  rec.n_hess_total = fd.total_samples();
  rec.truncated = rec.truncated || fd.truncated;
  rec.budget_cum = state.budget_cum();
  if (fd.truncated && remaining() <= 0) return false;
  if (cfg.mode != SolverMode::Alg2CRN && remaining() < cfg.n_min) return false;

  Matrix hess = fd.hess;
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hess, Eigen::EigenvaluesOnly);
    const double hnorm = es.eigenvalues().cwiseAbs().maxCoeff();
    const double bound = center.g_bar.norm() / (cfg.tau_cap * delta);
    if (hnorm > bound) {
      state.hess_bound_exceeded += 1;
      if (cfg.mode == SolverMode::Alg2CRN) {
        hess *= bound / hnorm;
        state.hess_cap_events += 1;
      }
    }
  }

  const double shift = cfg.shift_multiplier * state.lambda_k * delta;
  const SubproblemSolution sol =
      solve_exact(hess, center.g_bar, delta, shift);
  rec.step_norm = sol.s.norm();
  const Vector trial_x = state.x + sol.s;

  // Trial-point estimate: fresh adaptive sampling in Alg1, exact reuse of the
  // center draws (same sample size, same keys) under CRN.
  Estimates trial;
  if (cfg.mode == SolverMode::Alg2CRN) {
    trial = estimate_fixed(
        oracle, trial_x, cfg.sigma0, center.n,
        [&](std::int64_t i) {
          return crn_pair(state.run_id, k, i).second;
        });
  } else {
    params = detail::sampling_params(cfg, lambda_sched, remaining());
    trial = adaptive_estimate_point(
        oracle, trial_x, cfg.sigma0, delta, params,
        detail::make_keys(state.run_id, k, StreamRole::Trial));
  }
  state.oracle_calls_main += trial.n;
  rec.n_k_s = trial.n;
  rec.f_bar_s = trial.f_bar;
  rec.g_bar_s_norm = trial.g_bar.norm();
  rec.truncated = rec.truncated || trial.truncated;
  rec.budget_cum = state.budget_cum();
  if (trial.truncated && remaining() <= 0 && cfg.mode != SolverMode::Alg2CRN)
    return false;

  const double rho = sol.pred_red > 0.0
                         ? (center.f_bar - trial.f_bar) / sol.pred_red
                         : std::numeric_limits<double>::quiet_NaN();
  rec.rho_k = rho;

  const Acceptance decision =
      success_decision(rho, sol.s.norm(), delta, center.g_bar.norm(),
                       trial.g_bar.norm(), state.lambda_k, lambda_sched, cfg);
  rec.accept = decision;
  update_parameters(state, decision, trial_x, center.g_bar, trial.g_bar, cfg);
  return true;
}

inline std::vector<IterationRecord> run(const Vector& x0,
                                        const StochasticOracle& oracle,
                                        const SolverConfig& cfg,
                                        std::uint64_t root_seed,
                                        std::int64_t run_id = 0) {
  std::vector<IterationRecord> trajectory;
  if (cfg.budget_max <= 0) return trajectory;
  SolverState state = initialize(x0, oracle, cfg, root_seed, run_id);
  while (state.budget_cum() < cfg.budget_max) {
    if (cfg.max_iterations > 0 && state.k >= cfg.max_iterations) break;
    IterationRecord rec;
    const bool complete = step(state, oracle, cfg, rec);
    if (!complete) {
      if (rec.n_k > 0) trajectory.push_back(rec);  // partial work, logged
      break;
    }
    trajectory.push_back(rec);
    if (cfg.stop_grad_tol > 0.0 && rec.truth_g_norm &&
        *rec.truth_g_norm <= cfg.stop_grad_tol)
      break;
  }
  return trajectory;
}

}  // namespace regastro
