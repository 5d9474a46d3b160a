// Local quadratic model around the incumbent: estimated value and gradient,
// forward-difference stochastic Hessian, radius and regularization shift tied
// together by ||g|| = 16 Lambda delta^2.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "regastro/estimation.hpp"
#include "regastro/oracle.hpp"

namespace regastro {

struct TRModel {
  double f_bar = 0.0;
  Vector g;
  Matrix hess;
  double delta = 0.0;
  double shift = 0.0;  // sqrt(Lambda ||g||) = 4 Lambda delta by the radius rule
  double lambda_k = 0.0;
};

inline double model_eval(const TRModel& model, const Vector& s) {
  return model.f_bar + s.dot(model.g) + 0.5 * s.dot(model.hess * s);
}

inline double predicted_reduction(const TRModel& model, const Vector& s) {
  return -(s.dot(model.g) + 0.5 * s.dot(model.hess * s));
}

struct FDHessianResult {
  Matrix hess;
  std::vector<std::int64_t> column_sample_counts;
  bool truncated = false;
  std::int64_t total_samples() const {
    std::int64_t t = 0;
    for (auto n : column_sample_counts) t += n;
    return t;
  }
};

// Forward-difference Hessian: column j is (G(x + delta e_j) - g_center)/delta
// with each perturbation point estimated adaptively at the known radius.
// Symmetrized by averaging with the transpose, since raw columns are
// asymmetric under noise.
inline FDHessianResult build_fd_hessian(
    const StochasticOracle& oracle, const Vector& x, double delta,
    const Vector& g_center, double sigma0, const SamplingParams& params,
    const std::function<KeyFactory(int column)>& column_keys,
    std::int64_t budget_cap = -1) {
  const int d = oracle.dim();
  FDHessianResult out;
  out.hess = Matrix::Zero(d, d);
  out.column_sample_counts.resize(d, 0);
  std::int64_t used = 0;
  for (int j = 0; j < d; ++j) {
    SamplingParams col_params = params;
    if (budget_cap >= 0) {
      const std::int64_t left = budget_cap - used;
      if (left <= 0) {
        // Budget exhausted mid-build; the caller aborts on truncation, so the
        // remaining columns are left at zero.
        out.truncated = true;
        break;
      }
      col_params.n_max = std::min(col_params.n_max, left);
    }
    Vector xj = x;
    xj[j] += delta;
    const Estimates est = adaptive_estimate_point(oracle, xj, sigma0, delta,
                                                  col_params, column_keys(j));
    out.hess.col(j) = (est.g_bar - g_center) / delta;
    out.column_sample_counts[static_cast<size_t>(j)] = est.n;
    out.truncated = out.truncated || est.truncated;
    used += est.n;
  }
  out.hess = 0.5 * (out.hess + out.hess.transpose()).eval();
  return out;
}

// Spectral-norm cap ||H|| <= bound: scale H down when it exceeds the bound,
// leave it untouched otherwise. Used only for the CRN variant, where the
// analysis requires ||H|| <= (1/tau) ||g|| / delta.
inline Matrix cap_hessian(const Matrix& hess, double g_norm, double delta,
                          double tau_cap, bool* scaled = nullptr) {
  const double bound = g_norm / (tau_cap * delta);
  Eigen::SelfAdjointEigenSolver<Matrix> es(hess,
                                           Eigen::EigenvaluesOnly);
  const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
  if (scaled) *scaled = false;
  if (norm <= bound || norm == 0.0) return hess;
  if (scaled) *scaled = true;
  return hess * (bound / norm);
}

}  // namespace regastro
