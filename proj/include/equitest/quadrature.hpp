#pragma once

#include <vector>

namespace equitest {

/// Gauss-Hermite rule for expectations under N(0, 1): E f(Z) ~ sum w_i f(x_i).
/// Weights sum to one. Built by Golub-Welsch on the probabilists' Hermite
/// Jacobi matrix; immutable once constructed.
class GaussHermite {
 public:
  explicit GaussHermite(int nodes);

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Shared rule with `nodes` points; cached per size, safe to call concurrently.
const GaussHermite& gauss_hermite(int nodes);

}  // namespace equitest
