#pragma once

#include <functional>
#include <span>
#include <vector>

#include "equitest/error.hpp"

namespace equitest {

/// A probability in [0, 1]. Construction outside that range throws DomainError.
class Probability {
 public:
  constexpr Probability() = default;
  explicit Probability(double value);

  constexpr double value() const { return value_; }
  constexpr operator double() const { return value_; }

 private:
  double value_ = 0.0;
};

/// Fraction of observations discarded from each tail by trimmed_mean.
class TrimOrder {
 public:
  constexpr TrimOrder() = default;
  explicit TrimOrder(double beta);

  constexpr double value() const { return beta_; }

 private:
  double beta_ = 0.0;
};

double normal_pdf(double x);

/// Standard normal CDF. Never returns a negative value, even in the far tail.
double normal_cdf(double x);

/// Upper tail 1 - Phi(x), computed without cancellation for large x.
double normal_sf(double x);

/// P(lo < Z < hi) for standard normal Z, evaluated from whichever tail keeps
/// the difference well conditioned. Returns 0 when hi <= lo.
double normal_interval(double lo, double hi);

/// Upper quantile: returns z with normal_cdf(z) = 1 - gamma.
/// Throws DomainError unless 0 < gamma < 1.
double normal_quantile(double gamma);

/// Mean after sorting and dropping floor(beta * size) values from each tail.
double trimmed_mean(std::span<const double> xs, TrimOrder beta);

/// Bisection for a continuous function with a sign change on [lo, hi].
/// Stops when the bracket is narrower than `tol` or cannot shrink further.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

/// Conditional size of the uncentered rule |X| > mu0 + t*sqrt(phi0) when
/// X ~ N(mu0, phi0), i.e. 2 - Phi(t) - Phi(t + 2*mu0/sqrt(phi0)).
double fixed_cutoff_size(double t, double mu0, double phi0);

/// Solves alpha = 2 - Phi(t) - Phi(t + 2*mu0/sqrt(phi0)) for t. The left side
/// is strictly decreasing in t, so the root is unique; the bracket starts at
/// [-50, 50] and is widened when mu0 pushes the root outside it.
double solve_size_t(Probability alpha, double mu0, double phi0);

}  // namespace equitest
