// Exact solver for the shifted trust-region subproblem
//   min  g^T s + 1/2 s^T (H + shift I) s   s.t. ||s|| <= delta
// via dense eigendecomposition and the secular equation on the dual
// multiplier, with an explicit hard-case branch. Intended for the small dense
// problems this library targets (d up to a few dozen).
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "regastro/oracle.hpp"

namespace regastro {

struct SubproblemSolution {
  Vector s;
  double ell = 0.0;  // dual multiplier for the ball constraint
  bool on_boundary = false;
  double pred_red = 0.0;  // M(0) - M(s), regularizer excluded
  double kkt_residual = 0.0;
  bool hard_case = false;
};

// Predicted reduction of the unregularized quadratic model.
inline double predicted_reduction(const Matrix& hess, const Vector& g,
                                  const Vector& s) {
  return -(s.dot(g) + 0.5 * s.dot(hess * s));
}

namespace detail {

// ||s(ell)|| for s(ell) = -(B + ell I)^{-1} g in the eigenbasis; nonincreasing
// in ell on the PSD region.
inline double step_norm_at(const Vector& eigs_shifted, const Vector& c,
                           double ell) {
  double sq = 0.0;
  for (int i = 0; i < c.size(); ++i) {
    const double denom = eigs_shifted[i] + ell;
    sq += (c[i] * c[i]) / (denom * denom);
  }
  return std::sqrt(sq);
}

}  // namespace detail

inline SubproblemSolution solve_exact(const Matrix& hess, const Vector& g,
                                      double delta, double shift,
                                      double tol = -1.0) {
  const int d = static_cast<int>(g.size());
  if (!g.allFinite() || !hess.allFinite())
    throw std::invalid_argument("solve_exact: non-finite input");
  if (delta <= 0.0) throw std::invalid_argument("solve_exact: delta <= 0");

  Eigen::SelfAdjointEigenSolver<Matrix> es(hess);
  const Vector eigs = es.eigenvalues();
  const Matrix& q = es.eigenvectors();
  if (tol <= 0.0)
    tol = 1e-10 * (1.0 + g.norm() + eigs.cwiseAbs().maxCoeff());

  // Work in the eigenbasis of B = H + shift I.
  const Vector eigs_b = eigs.array() + shift;
  const double lambda_min = eigs_b.minCoeff();
  const Vector c = q.transpose() * g;

  SubproblemSolution sol;
  sol.s = Vector::Zero(d);

  auto assemble = [&](const Vector& y, double ell, bool boundary) {
    sol.s = q * y;
    sol.ell = ell;
    sol.on_boundary = boundary;
    sol.pred_red = predicted_reduction(hess, g, sol.s);
    sol.kkt_residual =
        ((hess + (shift + ell) * Matrix::Identity(d, d)) * sol.s + g).norm();
  };

  // Interior branch: B PSD and the unconstrained minimizer fits in the ball.
  if (lambda_min > 0.0) {
    Vector y(d);
    for (int i = 0; i < d; ++i) y[i] = -c[i] / eigs_b[i];
    if (y.norm() <= delta) {
      assemble(y, 0.0, std::abs(y.norm() - delta) <= 1e-12 * delta);
      return sol;
    }
  } else if (g.norm() == 0.0 && lambda_min >= -tol) {
    // Degenerate-converged: stationary input with PSD shifted Hessian.
    assemble(Vector::Zero(d), 0.0, false);
    return sol;
  }

  // Boundary solution: find ell >= max(0, -lambda_min) with ||s(ell)|| = delta.
  const double ell_floor = std::max(0.0, -lambda_min);

  // Hard case: g has no component along the eigenspace of lambda_min and the
  // pseudoinverse step at ell = -lambda_min is short of the boundary.
  double proj_min = 0.0;
  for (int i = 0; i < d; ++i)
    if (eigs_b[i] - lambda_min <= 1e-12 * std::max(1.0, std::abs(lambda_min)))
      proj_min += c[i] * c[i];
  if (lambda_min <= 0.0 && std::sqrt(proj_min) <= tol) {
    Vector y = Vector::Zero(d);
    double sq = 0.0;
    for (int i = 0; i < d; ++i) {
      const double denom = eigs_b[i] + ell_floor;
      if (denom > 1e-12 * std::max(1.0, std::abs(lambda_min))) {
        y[i] = -c[i] / denom;
        sq += y[i] * y[i];
      }
    }
    if (sq <= delta * delta) {
      // Fill out to the boundary along a minimal eigenvector; the sign making
      // the first nonzero coordinate of the added direction positive breaks
      // the tie deterministically.
      int jmin = 0;
      eigs_b.minCoeff(&jmin);
      const double alpha = std::sqrt(std::max(0.0, delta * delta - sq));
      Vector dir = Vector::Zero(d);
      dir[jmin] = alpha;
      Vector z_full = q * dir;
      for (int i = 0; i < d; ++i) {
        if (std::abs(z_full[i]) > 1e-14) {
          if (z_full[i] < 0.0) dir = -dir;
          break;
        }
      }
      y += dir;
      assemble(y, ell_floor, true);
      sol.hard_case = true;
      return sol;
    }
  }

  // Secular equation via safeguarded Newton on phi(ell) = 1/||s|| - 1/delta,
  // which is nearly linear in ell.
  double lo = ell_floor;
  double hi = std::max(ell_floor, 0.0) + c.norm() / delta + 1.0;
  while (detail::step_norm_at(eigs_b, c, hi) > delta) hi *= 2.0;
  double ell = std::max(lo + 1e-3 * (hi - lo), lo * (1.0 + 1e-8) + 1e-16);
  for (int it = 0; it < 200; ++it) {
    double nrm_sq = 0.0, dnrm_sq = 0.0;
    for (int i = 0; i < d; ++i) {
      const double denom = eigs_b[i] + ell;
      const double t = c[i] / denom;
      nrm_sq += t * t;
      dnrm_sq += t * t / denom;
    }
    const double nrm = std::sqrt(nrm_sq);
    if (nrm > delta)
      lo = ell;
    else
      hi = ell;
    const double phi = 1.0 / nrm - 1.0 / delta;
    if (std::abs(nrm - delta) <= 1e-13 * delta) break;
    // d phi / d ell = ||s||^{-3} * sum c_i^2/(lam_i+ell)^3
    const double dphi = dnrm_sq / (nrm_sq * nrm);
    double next = ell - phi / dphi;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - ell) <= 1e-16 * std::max(1.0, ell)) {
      ell = next;
      break;
    }
    ell = next;
  }
  Vector y(d);
  for (int i = 0; i < d; ++i) y[i] = -c[i] / (eigs_b[i] + ell);
  // Exact boundary scaling mops up the last ulps of the root find.
  if (y.norm() > 0.0) y *= delta / y.norm();
  assemble(y, ell, true);
  return sol;
}

inline bool verify_kkt(const SubproblemSolution& sol, const Matrix& hess,
                       const Vector& g, double delta, double shift,
                       double tol) {
  const int d = static_cast<int>(g.size());
  if (sol.ell < -tol) return false;
  const double snorm = sol.s.norm();
  if (snorm > delta * (1.0 + 1e-8) + tol) return false;
  if (std::abs(sol.ell * (snorm - delta)) > tol * std::max(1.0, g.norm()))
    return false;
  const Vector resid =
      (hess + (shift + sol.ell) * Matrix::Identity(d, d)) * sol.s + g;
  if (resid.norm() > tol * std::max(1.0, g.norm())) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hess);
  const double scale = 1.0 + es.eigenvalues().cwiseAbs().maxCoeff() + shift;
  const double min_eig = es.eigenvalues().minCoeff() + shift + sol.ell;
  return min_eig >= -1e-8 * scale;
}

// Inexact-solution certificate: residual within a c-fraction of the shifted
// regularizer and positive curvature along the step.
inline bool check_inexact_conditions(const Vector& s, const Matrix& hess,
                                     const Vector& g, double lambda_k,
                                     double g_norm, double c) {
  if (c < 0.0 || c >= 1.0)
    throw std::invalid_argument("check_inexact_conditions: c outside [0,1)");
  const int d = static_cast<int>(g.size());
  const double reg = c * std::sqrt(lambda_k * g_norm);
  const Matrix shifted = hess + reg * Matrix::Identity(d, d);
  const bool residual_ok = (g + shifted * s).norm() <= reg * s.norm();
  const bool curvature_ok = s.dot(shifted * s) > 0.0;
  return residual_ok && curvature_ok;
}

}  // namespace regastro
