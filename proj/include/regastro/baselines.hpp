// Comparison solvers: a classic adaptive-sampling trust region with
// geometric radius updates and a quadratic-order sampling rule, and ADAM with
// a fixed batch size. Both count oracle calls the same way as the main
// solver, so progress curves share an x-axis.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "regastro/estimation.hpp"
#include "regastro/model.hpp"
#include "regastro/solver.hpp"
#include "regastro/subproblem.hpp"

namespace regastro {

struct AstroClassicConfig {
  double delta0 = 1.0;
  double delta_max = 10.0;
  double eta1 = 0.1;       // acceptance threshold
  double gamma_inc = 2.0;  // > 1
  double gamma_dec = 0.5;  // in (0, 1)
  double mu_crit = 1.0;    // criticality coefficient: accept needs ||g|| >= mu delta
  double kappa_a = 1.0;
  double eps_lambda = 0.1;
  double kappa_lambda = 1.0;
  double sigma0 = 1.0;
  std::int64_t n_min = 2;
  std::int64_t n_max = 10000000;
  std::int64_t budget_max = 200000;
  std::int64_t max_iterations = 0;
  double stop_grad_tol = 0.0;
};

struct AstroClassicState {
  Vector x;
  double delta = 0.0;
  std::int64_t k = 0;
  std::int64_t oracle_calls_main = 0;
  std::int64_t oracle_calls_hess = 0;
  std::int64_t run_id = 0;

  std::int64_t budget_cum() const { return oracle_calls_main + oracle_calls_hess; }
};

// One classic trust-region iteration: quadratic-order sampling
// sigma_mx/sqrt(n) <= (kappa_a/sqrt(lambda_k)) Delta^2, FD Hessian, standard
// subproblem (zero shift), accept iff rho > eta1 and ||g|| >= mu Delta.
inline bool astro_classic_step(AstroClassicState& state,
                               const StochasticOracle& oracle,
                               const AstroClassicConfig& cfg,
                               IterationRecord& rec) {
  const std::int64_t k = state.k;
  rec = IterationRecord{};
  rec.k = k;
  rec.delta_k = state.delta;
  if (const auto t = oracle.truth(state.x)) {
    rec.truth_f = t->f;
    rec.truth_g_norm = t->g.norm();
  }

  auto remaining = [&] { return cfg.budget_max - state.budget_cum(); };
  if (remaining() < cfg.n_min) return false;

  SamplingParams params;
  params.kappa_a = cfg.kappa_a;
  params.lambda_k = std::max(
      lambda_schedule(k, cfg.eps_lambda, cfg.kappa_lambda), 1.0 + 1e-12);
  params.power = SamplingPower::Quadratic;
  params.n_min = cfg.n_min;
  params.n_max = std::min(cfg.n_max,
                          std::max<std::int64_t>(remaining(), cfg.n_min));

  const Estimates center = adaptive_estimate_point(
      oracle, state.x, cfg.sigma0, state.delta, params,
      detail::make_keys(state.run_id, k, StreamRole::Center));
  state.oracle_calls_main += center.n;
  rec.n_k = center.n;
  rec.f_bar = center.f_bar;
  rec.g_bar_norm = center.g_bar.norm();
  rec.truncated = center.truncated;
  rec.budget_cum = state.budget_cum();
  if (center.truncated && remaining() <= 0) return false;
  if (remaining() < cfg.n_min) return false;
  if (center.g_bar.norm() == 0.0) return false;

  params.n_max = std::min(cfg.n_max,
                          std::max<std::int64_t>(remaining(), cfg.n_min));
  FDHessianResult fd = build_fd_hessian(
      oracle, state.x, state.delta, center.g_bar, cfg.sigma0, params,
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
  if (remaining() < cfg.n_min) return false;

  const SubproblemSolution sol =
      solve_exact(fd.hess, center.g_bar, state.delta, /*shift=*/0.0);
  rec.step_norm = sol.s.norm();
  const Vector trial_x = state.x + sol.s;

  params.n_max = std::min(cfg.n_max,
                          std::max<std::int64_t>(remaining(), cfg.n_min));
  const Estimates trial = adaptive_estimate_point(
      oracle, trial_x, cfg.sigma0, state.delta, params,
      detail::make_keys(state.run_id, k, StreamRole::Trial));
  state.oracle_calls_main += trial.n;
  rec.n_k_s = trial.n;
  rec.f_bar_s = trial.f_bar;
  rec.g_bar_s_norm = trial.g_bar.norm();
  rec.truncated = rec.truncated || trial.truncated;
  rec.budget_cum = state.budget_cum();

  const double rho = sol.pred_red > 0.0
                         ? (center.f_bar - trial.f_bar) / sol.pred_red
                         : std::numeric_limits<double>::quiet_NaN();
  rec.rho_k = rho;

  const bool success = std::isfinite(rho) && rho > cfg.eta1 &&
                       center.g_bar.norm() >= cfg.mu_crit * state.delta;
  if (success) {
    state.x = trial_x;
    state.delta = std::min(cfg.gamma_inc * state.delta, cfg.delta_max);
    rec.accept = Acceptance::D;
  } else {
    state.delta = cfg.gamma_dec * state.delta;
    rec.accept = Acceptance::U;
  }
  rec.lambda_k = 0.0;
  state.k += 1;
  return true;
}

inline std::vector<IterationRecord> run_astro_classic(
    const Vector& x0, const StochasticOracle& oracle,
    const AstroClassicConfig& cfg, std::int64_t run_id = 0) {
  AstroClassicState state;
  state.x = x0;
  state.delta = cfg.delta0;
  state.run_id = run_id;
  std::vector<IterationRecord> trajectory;
  while (state.budget_cum() < cfg.budget_max) {
    if (cfg.max_iterations > 0 && state.k >= cfg.max_iterations) break;
    IterationRecord rec;
    if (!astro_classic_step(state, oracle, cfg, rec)) {
      if (rec.n_k > 0) trajectory.push_back(rec);
      break;
    }
    trajectory.push_back(rec);
    if (cfg.stop_grad_tol > 0.0 && rec.truth_g_norm &&
        *rec.truth_g_norm <= cfg.stop_grad_tol)
      break;
  }
  return trajectory;
}

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
  std::int64_t batch = 32;
  std::int64_t budget_max = 200000;
  std::int64_t max_iterations = 0;
  double stop_grad_tol = 0.0;
};

struct AdamState {
  Vector x;
  Vector m;
  Vector v;
  std::int64_t t = 0;
  std::int64_t oracle_calls = 0;
};

// Standard bias-corrected moment update on a batch-mean gradient.
inline void adam_step(AdamState& state, const Vector& g_batch_mean,
                      const AdamConfig& cfg) {
  state.t += 1;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * g_batch_mean;
  state.v =
      cfg.beta2 * state.v.array().matrix() +
      (1.0 - cfg.beta2) * g_batch_mean.cwiseProduct(g_batch_mean);
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  const Vector m_hat = state.m / bc1;
  const Vector v_hat = state.v / bc2;
  state.x -=
      cfg.lr * (m_hat.array() / (v_hat.array().sqrt() + cfg.eps_hat)).matrix();
}

inline std::vector<IterationRecord> run_adam(const Vector& x0,
                                             const StochasticOracle& oracle,
                                             const AdamConfig& cfg,
                                             std::int64_t run_id = 0) {
  AdamState state;
  state.x = x0;
  state.m = Vector::Zero(oracle.dim());
  state.v = Vector::Zero(oracle.dim());
  std::vector<IterationRecord> trajectory;
  std::int64_t k = 0;
  while (state.oracle_calls + cfg.batch <= cfg.budget_max) {
    if (cfg.max_iterations > 0 && k >= cfg.max_iterations) break;
    const Estimates est = estimate_fixed(
        oracle, state.x, 1.0, cfg.batch,
        detail::make_keys(run_id, k, StreamRole::Baseline));
    state.oracle_calls += est.n;

    IterationRecord rec;
    rec.k = k;
    rec.n_k = est.n;
    rec.f_bar = est.f_bar;
    rec.g_bar_norm = est.g_bar.norm();
    rec.accept = Acceptance::D;
    rec.budget_cum = state.oracle_calls;
    if (const auto t = oracle.truth(state.x)) {
      rec.truth_f = t->f;
      rec.truth_g_norm = t->g.norm();
    }

    adam_step(state, est.g_bar, cfg);
    rec.step_norm = (cfg.lr * (state.m / (1.0 - std::pow(cfg.beta1,
                                                         static_cast<double>(
                                                             state.t))))
                         .norm());
    trajectory.push_back(rec);
    if (cfg.stop_grad_tol > 0.0 && rec.truth_g_norm &&
        *rec.truth_g_norm <= cfg.stop_grad_tol)
      break;
    ++k;
  }
  return trajectory;
}

}  // namespace regastro
