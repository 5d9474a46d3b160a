#pragma once

#include <Eigen/Core>
#include <cmath>

#include "regastro/oracle.hpp"

namespace regastro {

inline double rosenbrock_value(const Vector& x) {
  double f = 0.0;
  for (int i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = 1.0 - x[i];
    f += 10.0 * a * a + b * b;
  }
  return f;
}

inline Vector rosenbrock_gradient(const Vector& x) {
  const int d = static_cast<int>(x.size());
  Vector g = Vector::Zero(d);
  g[0] = -40.0 * x[0] * (x[1] - x[0] * x[0]) - 2.0 * (1.0 - x[0]);
  for (int i = 1; i < d - 1; ++i)
    g[i] = 20.0 * (x[i] - x[i - 1] * x[i - 1]) -
           40.0 * x[i] * (x[i + 1] - x[i] * x[i]) - 2.0 * (1.0 - x[i]);
  g[d - 1] = 20.0 * (x[d - 1] - x[d - 2] * x[d - 2]);
  return g;
}

// Rosenbrock with additive Gaussian noise: F = f + sum_i xi^f_i and
// G = grad f + per-coordinate unit normal noise. The noise does not depend on
// x, so sample paths are smooth in x for a fixed draw.
class RosenbrockOracle final : public StochasticOracle {
 public:
  RosenbrockOracle(int d, std::uint64_t root_seed, bool noiseless = false)
      : d_(d), root_seed_(root_seed), noiseless_(noiseless) {}

  int dim() const override { return d_; }

  std::pair<double, Vector> sample(const Vector& x,
                                   const StreamKey& key) const override {
    double f = rosenbrock_value(x);
    Vector g = rosenbrock_gradient(x);
    if (!noiseless_) {
      Substream stream = derive_stream(root_seed_, key);
      for (int i = 0; i < d_; ++i) f += stream.next_normal();
      for (int i = 0; i < d_; ++i) g[i] += stream.next_normal();
    }
    return {f, g};
  }

  std::optional<Truth> truth(const Vector& x) const override {
    return Truth{rosenbrock_value(x), rosenbrock_gradient(x)};
  }

  std::optional<double> noise_sigma() const override {
    return noiseless_ ? 0.0 : std::sqrt(static_cast<double>(d_));
  }

 private:
  int d_;
  std::uint64_t root_seed_;
  bool noiseless_;
};

}  // namespace regastro
