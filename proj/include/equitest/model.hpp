#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "equitest/random.hpp"

namespace equitest {

/// Hierarchical equicorrelated normal model.
///
///   eta_i ~ iid Bernoulli(p)
///   X = sigma_eps (P1 + Q1 1) + D (P2 + Q2 1),  D = diag(sigma_i)
///
/// with sigma_i = sqrt(sigma0^2 + tau^2) for signals and sigma0 for nulls,
/// Q_k ~ N(0, rho_k) shared and P_k iid N(0, 1 - rho_k).
struct ModelParams {
  int n = 500;
  double p = 0.1;
  double sigma_eps = 1.0;
  double sigma0 = 1.0;
  double tau = 1.0;
  double rho1 = 0.0;
  double rho2 = 0.0;

  double sigma_signal() const;
  double null_variance() const;  // Phi0
};

using Indicators = std::vector<std::uint8_t>;

struct LatentDraw {
  Indicators eta;
  double q1 = 0.0;
  double q2 = 0.0;
  std::vector<double> p1;
  std::vector<double> p2;
};

struct DatasetDraw {
  std::vector<double> x;
  Indicators truth;
};

/// Mean and variance of X_i given (Q1, Q2) under the null and the alternative.
struct ConditionalParams {
  double mu0 = 0.0;
  double phi0 = 1.0;
  double mu_alt = 0.0;
  double phi_alt = 1.0;
};

/// Returns `params` unchanged or throws ValidationError naming the invariant.
ModelParams validate(const ModelParams& params);

Indicators sample_eta(const ModelParams& params, RandomStream& stream);

/// Draws q1, q2, then the p1 vector, then the p2 vector, in that order.
LatentDraw sample_latent(const ModelParams& params, Indicators eta, RandomStream& stream);

DatasetDraw assemble_observations(const ModelParams& params, const LatentDraw& latent);

/// sigma_eps^2 Sigma1 + D Sigma2 D.
Eigen::MatrixXd covariance_given_eta(const ModelParams& params, const Indicators& eta);

/// Oracle sampler: Cholesky factor of covariance_given_eta applied to iid
/// standard normals. Throws NumericError when the factorization fails.
DatasetDraw sample_direct(const ModelParams& params, const Indicators& eta, RandomStream& stream);

ConditionalParams conditional_params(const ModelParams& params, double q1, double q2);

}  // namespace equitest
