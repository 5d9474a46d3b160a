#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>

#include "regastro/rng.hpp"

namespace regastro {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Truth {
  double f;
  Vector g;
};

// Stochastic first-order oracle: one call returns an unbiased function value
// and gradient sample, fully determined by (x, root_seed, key).
class StochasticOracle {
 public:
  virtual ~StochasticOracle() = default;
  virtual int dim() const = 0;
  virtual std::pair<double, Vector> sample(const Vector& x,
                                           const StreamKey& key) const = 0;
  // Closed-form value and gradient, when the problem admits them.
  virtual std::optional<Truth> truth(const Vector& x) const { return {}; }
  virtual std::optional<double> noise_sigma() const { return {}; }
};

// Maps a sample index onto the stream key consumed for that draw. The solver
// fixes (run, iteration, role) and the estimation loop supplies the index.
using KeyFactory = std::function<StreamKey(std::int64_t sample_index)>;

}  // namespace regastro
