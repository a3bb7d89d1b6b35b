#include "equitest/model.hpp"

#include <cmath>
#include <string>

#include "equitest/error.hpp"

namespace equitest {

double ModelParams::sigma_signal() const { return std::sqrt(sigma0 * sigma0 + tau * tau); }

double ModelParams::null_variance() const {
  return sigma_eps * sigma_eps * (1.0 - rho1) + sigma0 * sigma0 * (1.0 - rho2);
}

ModelParams validate(const ModelParams& params) {
  auto fail = [](const std::string& what) { throw ValidationError("invalid model parameters: " + what); };
  if (params.n < 1) fail("n must be >= 1");
  if (!(params.p >= 0.0 && params.p <= 1.0)) fail("p must lie in [0, 1]");
  if (!(params.sigma_eps >= 0.0) || !std::isfinite(params.sigma_eps)) fail("sigma_eps must be finite and >= 0");
  if (!(params.sigma0 >= 0.0) || !std::isfinite(params.sigma0)) fail("sigma0 must be finite and >= 0");
  if (!(params.tau >= 0.0) || !std::isfinite(params.tau)) fail("tau must be finite and >= 0");
  if (!(params.rho1 >= 0.0 && params.rho1 < 1.0)) {
    fail("rho1 must lie in [0, 1) (the shared-factor decomposition needs a nonnegative variance)");
  }
  if (!(params.rho2 >= 0.0 && params.rho2 < 1.0)) {
    fail("rho2 must lie in [0, 1) (the shared-factor decomposition needs a nonnegative variance)");
  }
  if (!(params.null_variance() > 0.0)) {
    fail("sigma_eps^2 (1 - rho1) + sigma0^2 (1 - rho2) must be > 0 (degenerate null law)");
  }
  return params;
}

Indicators sample_eta(const ModelParams& params, RandomStream& stream) {
  Indicators eta(static_cast<std::size_t>(params.n));
  for (auto& e : eta) e = stream.uniform() < params.p ? 1 : 0;
  return eta;
}

LatentDraw sample_latent(const ModelParams& params, Indicators eta, RandomStream& stream) {
  const auto n = static_cast<std::size_t>(params.n);
  LatentDraw latent;
  latent.eta = std::move(eta);
  // A normal is consumed even when rho = 0 so the stream layout does not
  // depend on the parameter values.
  const double z1 = stream.normal();
  const double z2 = stream.normal();
  latent.q1 = params.rho1 > 0.0 ? std::sqrt(params.rho1) * z1 : 0.0;
  latent.q2 = params.rho2 > 0.0 ? std::sqrt(params.rho2) * z2 : 0.0;

  const double s1 = std::sqrt(1.0 - params.rho1);
  const double s2 = std::sqrt(1.0 - params.rho2);
  latent.p1.resize(n);
  latent.p2.resize(n);
  for (auto& v : latent.p1) v = s1 * stream.normal();
  for (auto& v : latent.p2) v = s2 * stream.normal();
  return latent;
}

DatasetDraw assemble_observations(const ModelParams& params, const LatentDraw& latent) {
  const auto n = latent.eta.size();
  const double sig_null = params.sigma0;
  const double sig_alt = params.sigma_signal();
  DatasetDraw draw;
  draw.x.resize(n);
  draw.truth = latent.eta;
  for (std::size_t i = 0; i < n; ++i) {
    const double sigma_i = latent.eta[i] ? sig_alt : sig_null;
    draw.x[i] = params.sigma_eps * (latent.p1[i] + latent.q1) + sigma_i * (latent.p2[i] + latent.q2);
  }
  return draw;
}

Eigen::MatrixXd covariance_given_eta(const ModelParams& params, const Indicators& eta) {
  const auto n = static_cast<Eigen::Index>(eta.size());
  const double var_eps = params.sigma_eps * params.sigma_eps;
  const double var_null = params.sigma0 * params.sigma0;
  const double var_alt = var_null + params.tau * params.tau;
  Eigen::VectorXd sigma(n), variance(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool signal = eta[static_cast<std::size_t>(i)] != 0;
    variance(i) = signal ? var_alt : var_null;
    sigma(i) = std::sqrt(variance(i));
  }
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cov(i, i) = var_eps + variance(i);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = var_eps * params.rho1 + sigma(i) * sigma(j) * params.rho2;
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  return cov;
}

DatasetDraw sample_direct(const ModelParams& params, const Indicators& eta, RandomStream& stream) {
  const Eigen::MatrixXd cov = covariance_given_eta(params, eta);
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericError("sample_direct: covariance is not positive definite");
  }
  Eigen::VectorXd z(cov.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = stream.normal();
  const Eigen::VectorXd x = llt.matrixL() * z;
  DatasetDraw draw;
  draw.x.assign(x.data(), x.data() + x.size());
  draw.truth = eta;
  return draw;
}

ConditionalParams conditional_params(const ModelParams& params, double q1, double q2) {
  const double var_eps_idio = params.sigma_eps * params.sigma_eps * (1.0 - params.rho1);
  const double var_alt = params.sigma0 * params.sigma0 + params.tau * params.tau;
  ConditionalParams c;
  c.mu0 = params.sigma_eps * q1 + params.sigma0 * q2;
  c.phi0 = params.null_variance();
  c.mu_alt = params.sigma_eps * q1 + std::sqrt(var_alt) * q2;
  c.phi_alt = var_eps_idio + var_alt * (1.0 - params.rho2);
  return c;
}

}  // namespace equitest
