#include "equitest/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "equitest/error.hpp"

namespace equitest {

GaussHermite::GaussHermite(int nodes) {
  if (nodes < 1) throw DomainError("Gauss-Hermite rule needs at least one node");
  const Eigen::Index n = nodes;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) {
    const double off = std::sqrt(static_cast<double>(k));
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  if (eig.info() != Eigen::Success) throw NumericError("Gauss-Hermite eigensolve failed");

  nodes_.resize(static_cast<std::size_t>(n));
  weights_.resize(static_cast<std::size_t>(n));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v0 = eig.eigenvectors()(0, i);
    nodes_[static_cast<std::size_t>(i)] = eig.eigenvalues()(i);
    weights_[static_cast<std::size_t>(i)] = v0 * v0;
    total += v0 * v0;
  }
  for (auto& w : weights_) w /= total;
  // Symmetrize: the eigensolver leaves the pairs equal only to rounding.
  for (std::size_t i = 0, j = nodes_.size() - 1; i < j; ++i, --j) {
    const double x = 0.5 * (nodes_[j] - nodes_[i]);
    const double w = 0.5 * (weights_[i] + weights_[j]);
    nodes_[i] = -x;
    nodes_[j] = x;
    weights_[i] = w;
    weights_[j] = w;
  }
  if (nodes_.size() % 2 == 1) nodes_[nodes_.size() / 2] = 0.0;
}

const GaussHermite& gauss_hermite(int nodes) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussHermite>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[nodes];
  if (!slot) slot = std::make_unique<GaussHermite>(nodes);
  return *slot;
}

}  // namespace equitest
