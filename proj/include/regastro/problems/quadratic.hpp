#pragma once

#include <Eigen/Core>
#include <utility>

#include "regastro/oracle.hpp"

namespace regastro {

// Controlled test bed: F = 1/2 x^T A x + sigma xi, G = A x + sigma zeta with
// unit Gaussian xi and per-coordinate zeta. The noise level is known exactly,
// which makes the sampling rules directly checkable.
class QuadraticOracle final : public StochasticOracle {
 public:
  QuadraticOracle(Matrix a, double sigma, std::uint64_t root_seed)
      : a_(std::move(a)), sigma_(sigma), root_seed_(root_seed) {}

  static QuadraticOracle diagonal(const Vector& diag, double sigma,
                                  std::uint64_t root_seed) {
    return QuadraticOracle(Matrix(diag.asDiagonal()), sigma, root_seed);
  }

  int dim() const override { return static_cast<int>(a_.rows()); }

  std::pair<double, Vector> sample(const Vector& x,
                                   const StreamKey& key) const override {
    double f = 0.5 * x.dot(a_ * x);
    Vector g = a_ * x;
    if (sigma_ > 0.0) {
      Substream stream = derive_stream(root_seed_, key);
      f += sigma_ * stream.next_normal();
      for (int i = 0; i < g.size(); ++i) g[i] += sigma_ * stream.next_normal();
    }
    return {f, g};
  }

  std::optional<Truth> truth(const Vector& x) const override {
    return Truth{0.5 * x.dot(a_ * x), a_ * x};
  }

  std::optional<double> noise_sigma() const override { return sigma_; }

  const Matrix& matrix() const { return a_; }

 private:
  Matrix a_;
  double sigma_;
  std::uint64_t root_seed_;
};

}  // namespace regastro
