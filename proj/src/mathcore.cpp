#include "equitest/mathcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace equitest {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684759;
constexpr double kSqrt2Pi = 2.5066282746310005024157652848110452530070;
constexpr double kTolT = 1e-12;

// Lower-tail quantile, rational approximation (relative error ~1e-9) used as
// the starting point for Halley refinement against erfc.
double lower_quantile_initial(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log1p(-p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

// x with Phi(x) = p for p <= 0.5, refined so the residual is at rounding level.
double lower_quantile(double p) {
  double x = lower_quantile_initial(p);
  for (int i = 0; i < 2; ++i) {
    const double e = normal_cdf(x) - p;
    const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

}  // namespace

Probability::Probability(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw DomainError("probability must lie in [0, 1], got " + std::to_string(value));
  }
}

TrimOrder::TrimOrder(double beta) : beta_(beta) {
  if (!(beta >= 0.0 && beta < 0.5)) {
    throw DomainError("trim order must lie in [0, 0.5), got " + std::to_string(beta));
  }
}

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_interval(double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  if (lo >= 0.0) return std::max(0.0, normal_sf(lo) - normal_sf(hi));
  if (hi <= 0.0) return std::max(0.0, normal_cdf(hi) - normal_cdf(lo));
  return std::max(0.0, 1.0 - normal_cdf(lo) - normal_sf(hi));
}

double normal_quantile(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw DomainError("normal_quantile requires 0 < gamma < 1, got " + std::to_string(gamma));
  }
  if (gamma == 0.5) return 0.0;
  // Upper quantile: z_gamma = -Phi^{-1}(gamma).
  if (gamma < 0.5) return -lower_quantile(gamma);
  return lower_quantile(1.0 - gamma);
}

double trimmed_mean(std::span<const double> xs, TrimOrder beta) {
  if (xs.empty()) throw DomainError("trimmed_mean of an empty sample");
  const auto n = xs.size();
  // Small slack keeps e.g. 0.29 * 100 from flooring to 28.
  const auto cut = static_cast<std::size_t>(std::floor(beta.value() * static_cast<double>(n) + 1e-9));
  if (2 * cut >= n) throw DomainError("trimmed_mean: trimming removes every observation");

  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (std::size_t i = cut; i < n - cut; ++i) sum += sorted[i];
  return sum / static_cast<double>(n - 2 * cut);
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw NumericError("bisect: no sign change on [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  }
  for (int iter = 0; iter < 400 && hi - lo > tol; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

double fixed_cutoff_size(double t, double mu0, double phi0) {
  // 2 - Phi(t) - Phi(t + c) written as two upper tails.
  return normal_sf(t) + normal_sf(t + 2.0 * mu0 / std::sqrt(phi0));
}

double solve_size_t(Probability alpha, double mu0, double phi0) {
  if (!(alpha.value() > 0.0 && alpha.value() < 1.0)) {
    throw DomainError("solve_size_t requires 0 < alpha < 1");
  }
  if (!(phi0 > 0.0) || !std::isfinite(mu0)) {
    throw DomainError("solve_size_t requires phi0 > 0 and finite mu0");
  }
  const double a = alpha.value();
  auto residual = [&](double t) { return fixed_cutoff_size(t, mu0, phi0) - a; };

  double lo = -50.0;
  double hi = 50.0;
  // Size tends to 2 at -inf and 0 at +inf; widen until the root is bracketed.
  for (int i = 0; i < 64 && residual(lo) <= 0.0; ++i) lo = 2.0 * lo;
  for (int i = 0; i < 64 && residual(hi) >= 0.0; ++i) hi = 2.0 * hi;
  return bisect(residual, lo, hi, kTolT);
}

}  // namespace equitest
