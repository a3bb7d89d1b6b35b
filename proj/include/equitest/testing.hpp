#pragma once

#include <span>
#include <utility>

#include "equitest/mathcore.hpp"
#include "equitest/model.hpp"

namespace equitest {

/// Conditional rule "reject H0i when |X_i| > k_cutoff", with
/// k_cutoff = mu0 + t sqrt(phi0). `center` records the mu0 that was used.
struct FixedCutoffTest {
  double k_cutoff = 0.0;
  double t = 0.0;
  double center = 0.0;
  Probability alpha;
};

/// Most powerful size-alpha conditional region on the Y = X / tau scale:
/// reject when y > k1 or y < k2.
struct NPRegion {
  double k1 = 0.0;
  double k2 = 0.0;
  /// log of the likelihood-ratio constant the region was calibrated to.
  double lr_constant = 0.0;
  double tau = 0.0;
};

struct PowerReport {
  double power = 0.0;
  double type2 = 1.0;
};

enum class TestKind { FixedCutoff, NpExact };

FixedCutoffTest fixed_cutoff(Probability alpha, const ConditionalParams& cond);

/// P_H0(|X_i| > k) with X_i ~ N(mu0, phi0).
double fixed_cutoff_conditional_size(double k_cutoff, double mu0, double phi0);

/// flag_i = 1 iff |x_i - center| > k_abs.
Indicators apply_cutoff(std::span<const double> x, double center, double k_abs);

/// Exact conditional power of the fixed-cutoff level-alpha test at (q1, q2).
PowerReport fixed_test_power(const ModelParams& params, double q1, double q2, Probability alpha);

/// Leading-order NP thresholds on the X scale: mu0 +/- sqrt(phi0) z_{alpha/2}.
std::pair<double, double> np_asymptotic_thresholds(Probability alpha, const ConditionalParams& cond);

/// Exact NP region at (q1, q2). Throws DomainError "LR not convex on Y scale"
/// when tau^2/(2 phi0) - 1/(2 Phi1) <= 0, NumericError if calibration fails.
NPRegion np_exact_region(Probability alpha, const ModelParams& params, double q1, double q2);

/// P_H0(Y in region) with Y ~ N(mu0/tau, phi0/tau^2).
double np_region_size(const NPRegion& region, const ConditionalParams& cond);

PowerReport np_power(const NPRegion& region, const ModelParams& params, double q1, double q2);

/// (1/tau) * 2 sqrt(phi0) z_{alpha/2} / sqrt(2 pi).
double expected_type2_closed(double tau, Probability alpha, double phi0);

/// E_{Q1,Q2} of the exact conditional type II error, by a tensor Gauss-Hermite
/// rule with `nodes` points on each nondegenerate axis (an axis with rho = 0
/// collapses to the single point 0).
double expected_type2_quadrature(const ModelParams& params, Probability alpha, TestKind kind,
                                 int nodes = 64);

}  // namespace equitest
