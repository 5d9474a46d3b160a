// Sequential adaptive estimation of function value and gradient: samples are
// accumulated one at a time into running statistics and the loop stops as
// soon as the sampling inequality holds. The stopping index is therefore
// minimal by construction.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "regastro/oracle.hpp"
#include "regastro/rng.hpp"

namespace regastro {

enum class SamplingPower { Cubic, Quadratic };

struct SamplingParams {
  double kappa_a = 1.0;
  double lambda_k = 2.0;  // > 1
  SamplingPower power = SamplingPower::Cubic;
  std::int64_t n_min = 2;
  std::int64_t n_max = 10000000;
};

// Running single-pass statistics (Welford) for F and each component of G.
struct EstimatorState {
  std::int64_t n = 0;
  double mean_f = 0.0;
  double m2_f = 0.0;
  Vector mean_g;
  Vector m2_g;
  double sigma0 = 1.0;

  explicit EstimatorState(int d, double sigma0_floor = 1.0)
      : mean_g(Vector::Zero(d)), m2_g(Vector::Zero(d)), sigma0(sigma0_floor) {}

  double sigma_f_hat() const {
    return n > 1 ? std::sqrt(m2_f / static_cast<double>(n - 1)) : 0.0;
  }
  // Trace form: sigma_g^2 = sum of per-coordinate sample variances.
  double sigma_g_hat() const {
    return n > 1 ? std::sqrt(m2_g.sum() / static_cast<double>(n - 1)) : 0.0;
  }
  double sigma_mx() const {
    return std::max({sigma_f_hat(), sigma_g_hat(), sigma0});
  }
};

inline void welford_update(EstimatorState& state, double f, const Vector& g) {
  if (!std::isfinite(f) || !g.allFinite())
    throw std::runtime_error("welford_update: non-finite sample");
  if (g.size() != state.mean_g.size())
    throw std::runtime_error("welford_update: dimension mismatch");
  state.n += 1;
  const double inv_n = 1.0 / static_cast<double>(state.n);
  const double df = f - state.mean_f;
  state.mean_f += df * inv_n;
  state.m2_f += df * (f - state.mean_f);
  const Vector dg = g - state.mean_g;
  state.mean_g += dg * inv_n;
  state.m2_g.array() += dg.array() * (g - state.mean_g).array();
}

struct Estimates {
  double f_bar = 0.0;
  Vector g_bar;
  double sigma_f_hat = 0.0;
  double sigma_g_hat = 0.0;
  double sigma_mx = 0.0;
  std::int64_t n = 0;
  bool truncated = false;  // hit n_max before the rule held
};

inline Estimates to_estimates(const EstimatorState& s, bool truncated = false) {
  return {s.mean_f, s.mean_g, s.sigma_f_hat(), s.sigma_g_hat(), s.sigma_mx(),
          s.n,      truncated};
}

// Per-sample trust-region radius proxy: breaks the circular dependence
// between the sample size and the radius by combining the carried-over
// preliminary radius with the running gradient estimate. The epsilon floor
// keeps the value strictly positive when the inner term goes negative.
inline double delta_tilde(double g_bar_norm, double lambda_k, double delta_pre,
                          double c_g, double eps_k) {
  const double floor = std::sqrt(eps_k / lambda_k);
  const double inner =
      std::min(delta_pre, std::sqrt(g_bar_norm / (16.0 * lambda_k)) -
                              c_g * delta_pre);
  return std::max(floor, inner);
}

inline double delta_tilde(const EstimatorState& state, double lambda_cap,
                          double delta_pre, double c_g, double eps_k) {
  return delta_tilde(state.mean_g.norm(), lambda_cap, delta_pre, c_g, eps_k);
}

namespace detail {
inline double pow_int(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}
}  // namespace detail

// Center-point estimation: stop at the smallest n with
//   sigma_mx(n)/sqrt(n) <= (kappa_a/sqrt(lambda_k)) * delta_tilde(n)^p.
// The proxy radius is recomputed from the running gradient after every
// sample. Draws consumed per sample are whatever the oracle takes for the
// supplied key.
inline Estimates adaptive_estimate_center(const StochasticOracle& oracle,
                                          const Vector& x, double sigma0,
                                          const SamplingParams& params,
                                          double lambda_cap, double delta_pre,
                                          double c_g, double eps_k,
                                          const KeyFactory& keys) {
  EstimatorState state(oracle.dim(), sigma0);
  const int p = params.power == SamplingPower::Cubic ? 3 : 2;
  const double coeff = params.kappa_a / std::sqrt(params.lambda_k);
  for (std::int64_t i = 0; i < params.n_max; ++i) {
    auto [f, g] = oracle.sample(x, keys(i));
    welford_update(state, f, g);
    if (state.n < params.n_min) continue;
    const double dt = delta_tilde(state, lambda_cap, delta_pre, c_g, eps_k);
    const double rhs = coeff * detail::pow_int(dt, p);
    if (state.sigma_mx() / std::sqrt(static_cast<double>(state.n)) <= rhs)
      return to_estimates(state);
  }
  return to_estimates(state, /*truncated=*/true);
}

// Trial/perturbation-point estimation with a fixed, known radius:
//   sigma_mx(n)/sqrt(n) <= (kappa_a/sqrt(lambda_k)) * delta_k^p.
inline Estimates adaptive_estimate_point(const StochasticOracle& oracle,
                                         const Vector& x, double sigma0,
                                         double delta_k,
                                         const SamplingParams& params,
                                         const KeyFactory& keys) {
  EstimatorState state(oracle.dim(), sigma0);
  const int p = params.power == SamplingPower::Cubic ? 3 : 2;
  const double rhs =
      params.kappa_a / std::sqrt(params.lambda_k) * detail::pow_int(delta_k, p);
  for (std::int64_t i = 0; i < params.n_max; ++i) {
    auto [f, g] = oracle.sample(x, keys(i));
    welford_update(state, f, g);
    if (state.n < params.n_min) continue;
    if (state.sigma_mx() / std::sqrt(static_cast<double>(state.n)) <= rhs)
      return to_estimates(state);
  }
  return to_estimates(state, /*truncated=*/true);
}

// Fixed sample size estimation (CRN trial evaluation and plain batches).
inline Estimates estimate_fixed(const StochasticOracle& oracle, const Vector& x,
                                double sigma0, std::int64_t n,
                                const KeyFactory& keys) {
  EstimatorState state(oracle.dim(), sigma0);
  for (std::int64_t i = 0; i < n; ++i) {
    auto [f, g] = oracle.sample(x, keys(i));
    welford_update(state, f, g);
  }
  return to_estimates(state);
}

}  // namespace regastro
