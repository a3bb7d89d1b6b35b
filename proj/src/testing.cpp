#include "equitest/testing.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "equitest/quadrature.hpp"

namespace equitest {

namespace {

constexpr double kLrTol = 1e-13;

PowerReport from_type2(double type2) { return {1.0 - type2, type2}; }

}  // namespace

FixedCutoffTest fixed_cutoff(Probability alpha, const ConditionalParams& cond) {
  FixedCutoffTest test;
  test.t = solve_size_t(alpha, cond.mu0, cond.phi0);
  test.k_cutoff = cond.mu0 + test.t * std::sqrt(cond.phi0);
  test.center = cond.mu0;
  test.alpha = alpha;
  return test;
}

double fixed_cutoff_conditional_size(double k_cutoff, double mu0, double phi0) {
  const double s = std::sqrt(phi0);
  return normal_sf((k_cutoff - mu0) / s) + normal_cdf(-(k_cutoff + mu0) / s);
}

Indicators apply_cutoff(std::span<const double> x, double center, double k_abs) {
  Indicators flags(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) flags[i] = std::abs(x[i] - center) > k_abs ? 1 : 0;
  return flags;
}

PowerReport fixed_test_power(const ModelParams& params, double q1, double q2, Probability alpha) {
  const ConditionalParams cond = conditional_params(params, q1, q2);
  const FixedCutoffTest test = fixed_cutoff(alpha, cond);
  const double s = std::sqrt(cond.phi_alt);
  // Accept when -K < X < K.
  const double type2 =
      normal_interval((-test.k_cutoff - cond.mu_alt) / s, (test.k_cutoff - cond.mu_alt) / s);
  return from_type2(type2);
}

std::pair<double, double> np_asymptotic_thresholds(Probability alpha, const ConditionalParams& cond) {
  const double half = std::sqrt(cond.phi0) * normal_quantile(alpha.value() / 2.0);
  return {cond.mu0 + half, cond.mu0 - half};
}

NPRegion np_exact_region(Probability alpha, const ModelParams& params, double q1, double q2) {
  if (!(alpha.value() > 0.0 && alpha.value() < 1.0)) {
    throw DomainError("np_exact_region requires 0 < alpha < 1");
  }
  const ConditionalParams cond = conditional_params(params, q1, q2);
  const double tau = params.tau;
  if (!(tau > 0.0)) throw DomainError("LR not convex on Y scale (tau must be > 0)");
  const double phi1 = cond.phi_alt / (tau * tau);
  const double mu1 = cond.mu_alt / tau;
  const double y0 = cond.mu0 / tau;
  const double v0 = cond.phi0 / (tau * tau);

  // log f1(y) - log f0(y) = a y^2 - 2 b y + c0 on the Y scale.
  const double a = tau * tau / (2.0 * cond.phi0) - 1.0 / (2.0 * phi1);
  if (!(a > 0.0)) throw DomainError("LR not convex on Y scale");
  const double b = y0 / (2.0 * v0) - mu1 / (2.0 * phi1);
  const double c0 = y0 * y0 / (2.0 * v0) - mu1 * mu1 / (2.0 * phi1) +
                    0.5 * std::log(v0 / phi1);
  const double vertex = b / a;
  const double lr_min = c0 - b * b / a;

  // At LR constant L the region is |y - vertex| > sqrt((L - lr_min) / a).
  auto half_width = [&](double lr) { return std::sqrt(std::max(0.0, (lr - lr_min) / a)); };
  const double sd0 = std::sqrt(v0);
  auto size_at = [&](double lr) {
    const double h = half_width(lr);
    return normal_sf((vertex + h - y0) / sd0) + normal_cdf((vertex - h - y0) / sd0);
  };
  const double target = alpha.value();
  auto residual = [&](double lr) { return size_at(lr) - target; };

  // Size is 1 at lr_min and decreases monotonically in the constant; grow the
  // upper end until the size falls below alpha.
  const double lo = lr_min;
  double step = 1.0;
  double hi = lr_min + step;
  int grow = 0;
  while (residual(hi) > 0.0) {
    step *= 2.0;
    hi = lr_min + step;
    if (++grow > 200 || !std::isfinite(hi)) {
      throw NumericError("np_exact_region: likelihood-ratio constant not bracketable");
    }
  }
  const double scale = std::max(1.0, std::abs(lr_min) + step);
  const double lr = bisect(residual, lo, hi, kLrTol * scale);

  NPRegion region;
  const double h = half_width(lr);
  region.k1 = vertex + h;
  region.k2 = vertex - h;
  region.lr_constant = lr;
  region.tau = tau;
  return region;
}

double np_region_size(const NPRegion& region, const ConditionalParams& cond) {
  const double s = std::sqrt(cond.phi0);
  return normal_sf((region.tau * region.k1 - cond.mu0) / s) +
         normal_cdf((region.tau * region.k2 - cond.mu0) / s);
}

PowerReport np_power(const NPRegion& region, const ModelParams& params, double q1, double q2) {
  const ConditionalParams cond = conditional_params(params, q1, q2);
  const double tau = params.tau;
  const double mu1 = cond.mu_alt / tau;
  const double sd1 = std::sqrt(cond.phi_alt / (tau * tau));
  return from_type2(normal_interval((region.k2 - mu1) / sd1, (region.k1 - mu1) / sd1));
}

double expected_type2_closed(double tau, Probability alpha, double phi0) {
  if (!(tau > 0.0) || !(phi0 > 0.0)) {
    throw DomainError("expected_type2_closed requires tau > 0 and phi0 > 0");
  }
  const double numerator =
      2.0 * std::sqrt(phi0) * normal_quantile(alpha.value() / 2.0) / std::sqrt(2.0 * std::numbers::pi);
  return numerator / tau;
}

double expected_type2_quadrature(const ModelParams& params, Probability alpha, TestKind kind,
                                 int nodes) {
  if (nodes < 1) throw DomainError("expected_type2_quadrature needs at least one node");
  const GaussHermite& rule = gauss_hermite(nodes);
  const std::vector<double> point{0.0};
  const std::vector<double> unit{1.0};
  const auto& x1 = params.rho1 > 0.0 ? rule.nodes() : point;
  const auto& w1 = params.rho1 > 0.0 ? rule.weights() : unit;
  const auto& x2 = params.rho2 > 0.0 ? rule.nodes() : point;
  const auto& w2 = params.rho2 > 0.0 ? rule.weights() : unit;
  const double s1 = std::sqrt(params.rho1);
  const double s2 = std::sqrt(params.rho2);

  double total = 0.0;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < x2.size(); ++j) {
      const double q1 = s1 * x1[i];
      const double q2 = s2 * x2[j];
      const double type2 =
          kind == TestKind::FixedCutoff
              ? fixed_test_power(params, q1, q2, alpha).type2
              : np_power(np_exact_region(alpha, params, q1, q2), params, q1, q2).type2;
      inner += w2[j] * type2;
    }
    total += w1[i] * inner;
  }
  return total;
}

}  // namespace equitest
