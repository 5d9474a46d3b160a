#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "regastro/baselines.hpp"
#include "regastro/problems/quadratic.hpp"
#include "regastro/problems/rosenbrock.hpp"

using namespace regastro;

TEST_CASE("classic trust-region radius updates are geometric and capped") {
  QuadraticOracle oracle = QuadraticOracle::diagonal(Vector::Ones(2), 0.0, 3);
  Vector x0(2);
  x0 << 5.0, 5.0;
  AstroClassicConfig cfg;
  cfg.budget_max = 100000;
  cfg.max_iterations = 30;

  AstroClassicState state;
  state.x = x0;
  state.delta = cfg.delta0;
  double prev_delta = state.delta;
  for (int i = 0; i < 10; ++i) {
    IterationRecord rec;
    REQUIRE(astro_classic_step(state, oracle, cfg, rec));
    if (rec.accept == Acceptance::D)
      CHECK(state.delta ==
            doctest::Approx(std::min(cfg.gamma_inc * prev_delta,
                                     cfg.delta_max)));
    else
      CHECK(state.delta == doctest::Approx(cfg.gamma_dec * prev_delta));
    CHECK(state.delta <= cfg.delta_max);
    prev_delta = state.delta;
  }
}

TEST_CASE("classic solver converges on the noiseless quadratic") {
  Vector diag(2);
  diag << 1.0, 3.0;
  QuadraticOracle oracle = QuadraticOracle::diagonal(diag, 0.0, 4);
  Vector x0(2);
  x0 << 4.0, -2.0;
  AstroClassicConfig cfg;
  cfg.sigma0 = 1e-6;  // noiseless run: keep the variance floor out of the way
  cfg.budget_max = 100000;
  cfg.max_iterations = 80;
  cfg.stop_grad_tol = 1e-4;
  const auto traj = run_astro_classic(x0, oracle, cfg, 1);
  REQUIRE(!traj.empty());
  CHECK(*traj.back().truth_g_norm <= 1e-4);
}

TEST_CASE("quadratic-rule sampling scales like delta^-4") {
  // The classic rule samples until sigma_mx/sqrt(n) <= (kappa/sqrt(lambda))
  // delta^2, so halving delta multiplies N by about 16.
  QuadraticOracle oracle = QuadraticOracle::diagonal(Vector::Ones(2), 1.0, 21);
  Vector x(2);
  x << 2.0, 2.0;
  SamplingParams params;
  params.kappa_a = 2.0;
  params.lambda_k = 2.0;
  params.power = SamplingPower::Quadratic;
  params.n_max = 1 << 24;

  auto avg_n = [&](double delta, int key_base) {
    double total = 0.0;
    for (int r = 0; r < 20; ++r) {
      const auto keys = [&, r](std::int64_t i) {
        return StreamKey{0, key_base + r, StreamRole::Baseline, 0, i};
      };
      total += static_cast<double>(
          adaptive_estimate_point(oracle, x, 0.05, delta, params, keys).n);
    }
    return total / 20.0;
  };
  const double ratio = avg_n(0.25, 1000) / avg_n(0.5, 0);
  CHECK(ratio > 10.0);
  CHECK(ratio < 24.0);
}

TEST_CASE("classic acceptance requires the criticality condition") {
  // With mu_crit large the gradient-vs-radius test fails and every step is
  // rejected even when rho is good.
  QuadraticOracle oracle = QuadraticOracle::diagonal(Vector::Ones(2), 0.0, 6);
  Vector x0(2);
  x0 << 1.0, 1.0;
  AstroClassicConfig cfg;
  cfg.mu_crit = 1e6;
  cfg.max_iterations = 5;
  cfg.budget_max = 10000;
  const auto traj = run_astro_classic(x0, oracle, cfg, 0);
  for (const auto& r : traj) CHECK(r.accept == Acceptance::U);
}

TEST_CASE("adam first step matches hand arithmetic") {
  AdamConfig cfg;
  AdamState st;
  st.x = Vector::Zero(2);
  st.m = Vector::Zero(2);
  st.v = Vector::Zero(2);
  Vector g(2);
  g << 3.0, -0.5;
  adam_step(st, g, cfg);
  // After bias correction the first step is -lr * g / (|g| + eps).
  for (int i = 0; i < 2; ++i) {
    const double expected =
        -cfg.lr * g[i] / (std::abs(g[i]) + cfg.eps_hat);
    CHECK(st.x[i] == doctest::Approx(expected).epsilon(1e-9));
  }
  CHECK(st.t == 1);
  CHECK(st.m[0] == doctest::Approx((1.0 - cfg.beta1) * 3.0).epsilon(1e-15));
  CHECK(st.v[0] == doctest::Approx((1.0 - cfg.beta2) * 9.0).epsilon(1e-15));
}

TEST_CASE("adam converges on a noiseless quadratic") {
  QuadraticOracle oracle = QuadraticOracle::diagonal(Vector::Ones(2), 0.0, 8);
  Vector x0(2);
  x0 << 0.5, -0.5;
  AdamConfig cfg;
  cfg.budget_max = 400000;
  cfg.stop_grad_tol = 1e-3;
  const auto traj = run_adam(x0, oracle, cfg, 0);
  REQUIRE(!traj.empty());
  CHECK(*traj.back().truth_g_norm <= 1e-3);
}

TEST_CASE("adam respects the budget exactly in batch multiples") {
  RosenbrockOracle oracle(3, 12, false);
  Vector x0 = Vector::Zero(3);
  AdamConfig cfg;
  cfg.budget_max = 1000;
  const auto traj = run_adam(x0, oracle, cfg, 0);
  REQUIRE(!traj.empty());
  CHECK(traj.back().budget_cum ==
        (cfg.budget_max / cfg.batch) * cfg.batch);
  for (const auto& r : traj) CHECK(r.n_k == cfg.batch);
}
