#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "regastro/model.hpp"
#include "regastro/problems/quadratic.hpp"
#include "regastro/stats_util.hpp"

using namespace regastro;

namespace {

std::function<KeyFactory(int)> column_keys(std::int64_t iteration) {
  return [=](int j) {
    return [=](std::int64_t i) {
      return StreamKey{0, iteration, StreamRole::HessColumn, j + 1, i};
    };
  };
}

// Noiseless cubic test function f = sum x_i^3 with Hessian diag(6 x_i); the
// forward-difference Hessian has O(delta) bias here.
class CubicOracle final : public StochasticOracle {
 public:
  explicit CubicOracle(int d) : d_(d) {}
  int dim() const override { return d_; }
  std::pair<double, Vector> sample(const Vector& x,
                                   const StreamKey&) const override {
    double f = 0.0;
    Vector g(d_);
    for (int i = 0; i < d_; ++i) {
      f += x[i] * x[i] * x[i];
      g[i] = 3.0 * x[i] * x[i];
    }
    return {f, g};
  }

 private:
  int d_;
};

}  // namespace

TEST_CASE("model evaluation and predicted reduction by hand") {
  TRModel model;
  model.f_bar = 2.0;
  model.g = Vector(2);
  model.g << 1.0, -2.0;
  model.hess = Matrix(2, 2);
  model.hess << 2.0, 0.0, 0.0, 4.0;
  Vector s(2);
  s << 0.5, 0.5;
  // f + g.s + 0.5 s H s = 2 + (0.5 - 1) + 0.5(0.5 + 1) = 2.25
  CHECK(model_eval(model, s) == doctest::Approx(2.25).epsilon(1e-15));
  // pred_red = -(g.s + 0.5 s H s) = -(-0.5 + 0.75) = -0.25
  CHECK(predicted_reduction(model, s) ==
        doctest::Approx(-0.25).epsilon(1e-15));
}

TEST_CASE("FD Hessian is exact on a noiseless quadratic") {
  Vector diag(3);
  diag << 1.0, 4.0, 9.0;
  QuadraticOracle oracle = QuadraticOracle::diagonal(diag, 0.0, 1);
  Vector x(3);
  x << 0.3, -1.2, 2.0;
  const Vector g_center = oracle.truth(x)->g;
  SamplingParams params;
  params.lambda_k = 2.0;
  const auto fd = build_fd_hessian(oracle, x, 0.05, g_center, 1e-9, params,
                                   column_keys(0));
  CHECK(!fd.truncated);
  CHECK((fd.hess - Matrix(diag.asDiagonal())).norm() < 1e-9);
  // Noiseless sampling stops at n_min for every column.
  for (auto n : fd.column_sample_counts) CHECK(n == params.n_min);
}

TEST_CASE("FD Hessian error is O(delta) on a cubic") {
  CubicOracle oracle(2);
  Vector x(2);
  x << 1.0, 2.0;
  Matrix true_hess(2, 2);
  true_hess << 6.0, 0.0, 0.0, 12.0;
  const Vector g_center = oracle.sample(x, StreamKey{}).second;
  SamplingParams params;
  params.lambda_k = 2.0;

  std::vector<double> log_delta, log_err;
  for (double delta : {0.4, 0.2, 0.1, 0.05, 0.025}) {
    const auto fd = build_fd_hessian(oracle, x, delta, g_center, 1e-9, params,
                                     column_keys(0));
    log_delta.push_back(std::log(delta));
    log_err.push_back(std::log((fd.hess - true_hess).norm()));
  }
  const SlopeFit fit = least_squares_slope(log_delta, log_err);
  CHECK(fit.slope > 0.7);
  CHECK(fit.slope < 1.3);
}

TEST_CASE("cap arithmetic: scaling lands exactly on the bound") {
  Matrix h(2, 2);
  h << 10.0, 0.0, 0.0, -2.0;  // spectral norm 10
  const double g_norm = 1.0, delta = 0.5, tau = 0.5;
  // bound = 1 / (0.5 * 0.5) = 4 < 10 -> scale by 0.4.
  bool scaled = false;
  const Matrix capped = cap_hessian(h, g_norm, delta, tau, &scaled);
  CHECK(scaled);
  CHECK(capped(0, 0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(capped(1, 1) == doctest::Approx(-0.8).epsilon(1e-14));

  // Under the bound: untouched.
  Matrix small = 0.1 * h;
  const Matrix same = cap_hessian(small, g_norm, delta, tau, &scaled);
  CHECK(!scaled);
  CHECK((same - small).norm() == 0.0);
}

TEST_CASE("FD Hessian columns use symmetrization") {
  // An asymmetric raw FD matrix must come back symmetric.
  CubicOracle oracle(2);
  Vector x(2);
  x << 0.5, -0.5;
  const Vector g_center = oracle.sample(x, StreamKey{}).second;
  SamplingParams params;
  params.lambda_k = 2.0;
  const auto fd = build_fd_hessian(oracle, x, 0.2, g_center, 1e-9, params,
                                   column_keys(0));
  CHECK((fd.hess - fd.hess.transpose()).norm() == 0.0);
}
