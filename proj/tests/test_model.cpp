#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "equitest/error.hpp"
#include "equitest/model.hpp"
#include "equitest/random.hpp"

using namespace equitest;

namespace {

ModelParams base(double tau = 15.0, double rho = 0.4) {
  ModelParams m;
  m.n = 500;
  m.p = 0.1;
  m.tau = tau;
  m.rho1 = rho;
  m.rho2 = rho;
  return m;
}

// Streaming covariance over a fixed number of coordinates.
struct CovAccumulator {
  explicit CovAccumulator(std::size_t n) : n(n), sum(n, 0.0), cross(n * n, 0.0) {}
  void add(const std::vector<double>& x) {
    ++count;
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] += x[i];
      for (std::size_t j = 0; j < n; ++j) cross[i * n + j] += x[i] * x[j];
    }
  }
  double mean(std::size_t i) const { return sum[i] / count; }
  double cov(std::size_t i, std::size_t j) const { return cross[i * n + j] / count - mean(i) * mean(j); }
  std::size_t n;
  long count = 0;
  std::vector<double> sum, cross;
};

}  // namespace

TEST_CASE("validate") {
  CHECK_NOTHROW(validate(base()));
  auto bad = base();
  bad.rho1 = -0.5;
  CHECK_THROWS_WITH_AS(validate(bad), doctest::Contains("rho1"), ValidationError);
  bad = base();
  bad.rho2 = 1.0;
  CHECK_THROWS_WITH_AS(validate(bad), doctest::Contains("rho2"), ValidationError);
  bad = base();
  bad.sigma_eps = 0.0;
  bad.sigma0 = 0.0;
  CHECK_THROWS_WITH_AS(validate(bad), doctest::Contains("degenerate"), ValidationError);
  bad = base();
  bad.n = 0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = base();
  bad.p = 1.2;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = base();
  bad.tau = -1.0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("sample_eta edge cases and binomial moments") {
  RandomStream s(11, 0);
  auto m = base();
  m.p = 0.0;
  for (auto e : sample_eta(m, s)) CHECK(e == 0);
  m.p = 1.0;
  for (auto e : sample_eta(m, s)) CHECK(e == 1);

  m.p = 0.1;
  const int reps = 500;
  double total = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto eta = sample_eta(m, s);
    total += std::accumulate(eta.begin(), eta.end(), 0.0);
  }
  CHECK(std::abs(total / reps - 50.0) <= 4.0 * std::sqrt(500 * 0.1 * 0.9 / reps));
}

TEST_CASE("sample_latent factor moments") {
  RandomStream s(3, 9);
  auto m = base(1.0, 0.0);
  m.n = 4;
  for (int r = 0; r < 100; ++r) {
    const auto lat = sample_latent(m, Indicators(4, 0), s);
    REQUIRE(lat.q1 == 0.0);
    REQUIRE(lat.q2 == 0.0);
  }

  m.rho2 = 0.7;
  m.n = 2;
  const int draws = 100000;
  double q2sq = 0.0, q2_4 = 0.0, p01 = 0.0, p0sq = 0.0, p1sq = 0.0;
  for (int r = 0; r < draws; ++r) {
    const auto lat = sample_latent(m, Indicators(2, 0), s);
    q2sq += lat.q2 * lat.q2;
    q2_4 += std::pow(lat.q2, 4);
    p01 += lat.p1[0] * lat.p1[1];
    p0sq += lat.p1[0] * lat.p1[0];
    p1sq += lat.p1[1] * lat.p1[1];
  }
  const double var_q2 = q2sq / draws;
  const double se_var = std::sqrt((q2_4 / draws - var_q2 * var_q2) / draws);
  CHECK(std::abs(var_q2 - 0.7) <= 4.0 * se_var);
  const double corr = p01 / std::sqrt(p0sq * p1sq);
  CHECK(std::abs(corr) <= 4.0 / std::sqrt(draws));
}

TEST_CASE("assemble_observations") {
  auto m = base(0.0, 0.3);
  m.n = 3;
  LatentDraw zero{Indicators{0, 1, 0}, 0.0, 0.0, {0, 0, 0}, {0, 0, 0}};
  for (double x : assemble_observations(m, zero).x) CHECK(x == 0.0);

  // tau = 0: a signal coordinate is built exactly like a null one.
  LatentDraw lat{Indicators{0, 1, 0}, 0.4, -0.7, {0.1, 0.1, 0.2}, {0.5, 0.5, 0.3}};
  const auto draw = assemble_observations(m, lat);
  CHECK(draw.x[0] == draw.x[1]);
  CHECK(draw.truth == lat.eta);

  m.tau = 2.0;
  m.sigma_eps = 0.5;
  const auto d2 = assemble_observations(m, lat);
  CHECK(d2.x[1] == doctest::Approx(0.5 * (0.1 + 0.4) + std::sqrt(5.0) * (0.5 - 0.7)));
}

TEST_CASE("covariance_given_eta") {
  ModelParams m;
  m.n = 2;
  m.rho1 = m.rho2 = 0.0;
  const auto c0 = covariance_given_eta(m, Indicators{0, 0});
  CHECK(c0(0, 0) == 2.0);
  CHECK(c0(1, 1) == 2.0);
  CHECK(c0(0, 1) == 0.0);

  m.tau = std::sqrt(3.0);
  m.rho1 = m.rho2 = 0.5;
  const auto c = covariance_given_eta(m, Indicators{0, 1});
  CHECK(c(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(c(1, 1) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(c(0, 1) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(c(1, 0) == c(0, 1));

  auto big = base(7.0, 0.6);
  big.n = 30;
  big.sigma_eps = 0.8;
  RandomStream s(4, 4);
  const auto eta = sample_eta(big, s);
  const auto cb = covariance_given_eta(big, eta);
  for (int i = 0; i < 30; ++i) {
    const double si2 = eta[i] ? 1.0 + 49.0 : 1.0;
    CHECK(cb(i, i) == 0.64 + si2);
    for (int j = 0; j < 30; ++j) CHECK(cb(i, j) == cb(j, i));
  }
}

TEST_CASE("sample_direct") {
  RandomStream s(8, 1);
  ModelParams m;
  m.n = 1;
  m.tau = 2.0;
  const int draws = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < draws; ++r) {
    const double x = sample_direct(m, Indicators{1}, s).x[0];
    sum += x;
    sum2 += x * x;
  }
  const double var = 1.0 + 5.0;
  CHECK(std::abs(sum / draws) <= 4.0 * std::sqrt(var / draws));
  CHECK(std::abs(sum2 / draws - var) <= 4.0 * var * std::sqrt(2.0 / draws));

  ModelParams degenerate;
  degenerate.n = 2;
  degenerate.sigma_eps = degenerate.sigma0 = degenerate.tau = 0.0;
  CHECK_THROWS_AS(sample_direct(degenerate, Indicators{0, 1}, s), NumericError);
}

TEST_CASE("decomposition and Cholesky samplers agree in distribution") {
  auto m = base(2.0, 0.4);
  m.n = 5;
  const Indicators eta{0, 0, 1, 0, 1};
  const auto cov = covariance_given_eta(m, eta);
  RandomStream sa(21, 1), sb(21, 2);
  CovAccumulator a(5), b(5);
  const int draws = 200000;
  for (int r = 0; r < draws; ++r) {
    a.add(assemble_observations(m, sample_latent(m, eta, sa)).x);
    b.add(sample_direct(m, eta, sb).x);
  }
  for (std::size_t i = 0; i < 5; ++i) {
    const double se_mean = std::sqrt(cov(i, i) / draws);
    CHECK(std::abs(a.mean(i)) <= 4.0 * se_mean);
    CHECK(std::abs(b.mean(i)) <= 4.0 * se_mean);
    for (std::size_t j = 0; j < 5; ++j) {
      const double se = std::sqrt((cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) / draws);
      CAPTURE(i);
      CAPTURE(j);
      CHECK(std::abs(a.cov(i, j) - cov(i, j)) <= 4.0 * se);
      CHECK(std::abs(b.cov(i, j) - cov(i, j)) <= 4.0 * se);
    }
  }
}

TEST_CASE("independent coordinates when rho = 0") {
  auto m = base(3.0, 0.0);
  m.n = 3;
  const Indicators eta{0, 1, 0};
  RandomStream s(13, 0);
  CovAccumulator acc(3);
  const int draws = 100000;
  for (int r = 0; r < draws; ++r) acc.add(sample_direct(m, eta, s).x);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double corr = acc.cov(i, j) / std::sqrt(acc.cov(i, i) * acc.cov(j, j));
      CHECK(std::abs(corr) <= 4.0 / std::sqrt(draws));
    }
}

TEST_CASE("conditional_params") {
  ModelParams m;
  m.rho1 = m.rho2 = 0.0;
  m.tau = 5.0;
  auto c = conditional_params(m, 0.0, 0.0);
  CHECK(c.phi0 == 2.0);
  CHECK(c.mu0 == 0.0);
  CHECK(c.mu_alt == 0.0);
  CHECK(c.phi_alt == doctest::Approx(27.0));

  m.rho1 = 0.3;
  m.rho2 = 0.6;
  m.sigma_eps = 2.0;
  m.tau = 0.0;
  c = conditional_params(m, 0.4, -0.9);
  CHECK(c.mu_alt == c.mu0);
  CHECK(c.phi_alt == doctest::Approx(c.phi0).epsilon(1e-15));
  CHECK(c.mu0 == doctest::Approx(2.0 * 0.4 - 0.9));
  CHECK(c.phi0 == doctest::Approx(4.0 * 0.7 + 0.4));

  m.tau = 3.0;
  c = conditional_params(m, 0.4, -0.9);
  CHECK(c.mu_alt == doctest::Approx(0.8 - std::sqrt(10.0) * 0.9));
  CHECK(c.phi_alt == doctest::Approx(2.8 + 10.0 * 0.4));
}
