#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "equitest/error.hpp"
#include "equitest/sim.hpp"
#include "equitest/testing.hpp"

using namespace equitest;

namespace {

SimConfig config(double tau, double rho, double p = 0.1, int reps = 100) {
  SimConfig c;
  c.params.tau = tau;
  c.params.rho1 = c.params.rho2 = rho;
  c.params.p = p;
  c.reps = reps;
  return c;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("cutoff mode parsing") {
  CHECK(parse_cutoff_mode("empirical") == CutoffMode::EmpiricalNullQuantile);
  CHECK(parse_cutoff_mode(to_string(CutoffMode::EmpiricalNullQuantile)) == CutoffMode::EmpiricalNullQuantile);
  CHECK(parse_cutoff_mode("theoretical") == CutoffMode::Theoretical);
  CHECK_THROWS_AS(parse_cutoff_mode("bogus"), ValidationError);
}

TEST_CASE("config validation") {
  auto c = config(1.0, 0.0);
  c.reps = 0;
  CHECK_THROWS_AS(validate(c), ValidationError);
  c = config(1.0, 0.0);
  c.workers = 0;
  CHECK_THROWS_AS(validate(c), ValidationError);
  c = config(1.0, -0.1);
  CHECK_THROWS_AS(validate(c), ValidationError);
}

TEST_CASE("empirical cutoff flags exactly ceil(alpha m) nulls") {
  auto c = config(5.0, 0.4, 0.0);
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto out = run_replication(c, r);
    CHECK(out.true_nulls == 500);
    CHECK(out.false_positives == 25);
  }
  c = config(5.0, 0.0, 0.1);
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto out = run_replication(c, r);
    CHECK(out.false_positives == static_cast<int>(std::ceil(0.05 * out.true_nulls - 1e-9)));
  }
}

TEST_CASE("no true nulls marks the replication degenerate") {
  const auto out = run_replication(config(5.0, 0.0, 1.0), 0);
  CHECK(out.degenerate);
  CHECK(out.true_signals == 500);
}

TEST_CASE("tau = 0 signals behave like nulls") {
  auto c = config(0.0, 0.0, 0.1, 400);
  c.cutoff_mode = CutoffMode::Theoretical;
  const auto stats = aggregate(run_replications(c));
  // pfn is about 1 - alpha; per-rep sd is about sqrt(0.05 * 0.95 / 50).
  CHECK(std::abs(stats.pfn_mean - 0.95) <= 4.0 * stats.pfn_se + 1e-3);
  CHECK(std::abs(stats.pfp_mean - 0.05) <= 4.0 * stats.pfp_se + 1e-3);
}

TEST_CASE("aggregate") {
  std::vector<ReplicationOutcome> same(10, ReplicationOutcome{3, 60, 7, 40, false});
  const auto s = aggregate(same);
  CHECK(s.pfp_mean == doctest::Approx(0.05));
  CHECK(s.pfn_mean == doctest::Approx(7.0 / 40.0));
  CHECK(s.pfp_se == 0.0);
  CHECK(s.pfn_se == 0.0);
  CHECK(s.used == 10);

  std::vector<ReplicationOutcome> mixed{{1, 10, 1, 2, false}, {3, 10, 0, 2, false}, {0, 0, 0, 5, true},
                                        {0, 8, 0, 0, false}};
  const auto m = aggregate(mixed);
  CHECK(m.used == 2);
  CHECK(m.excluded == 2);
  CHECK(m.pfp_mean == doctest::Approx(0.2));
  // sample sd of {0.1, 0.3} is sqrt(0.02); se divides by sqrt(2).
  CHECK(m.pfp_se == doctest::Approx(0.1));
  CHECK(m.pfn_se == doctest::Approx(0.25));

  CHECK_THROWS_AS(aggregate({}), AggregationError);
  CHECK_THROWS_AS(aggregate({{0, 0, 0, 5, true}}), AggregationError);
}

TEST_CASE("reported se matches per-replication spread") {
  auto c = config(3.0, 0.0, 0.1, 500);
  const auto outcomes = run_replications(c);
  const auto stats = aggregate(outcomes);
  double sum = 0.0, sum2 = 0.0;
  for (const auto& o : outcomes) {
    const double v = static_cast<double>(o.false_positives) / o.true_nulls;
    sum += v;
    sum2 += v * v;
  }
  const double n = 500.0;
  const double sd = std::sqrt((sum2 - sum * sum / n) / (n - 1.0));
  CHECK(stats.pfp_se == doctest::Approx(sd / std::sqrt(n)).epsilon(1e-9));
  CHECK(stats.pfp_se < 1e-4);  // per-rep spread is only a few 1e-4
}

TEST_CASE("run_grid") {
  std::vector<SimConfig> grid;
  for (double tau : {0.0, 3.0, 30.0}) {
    auto c = config(tau, 0.7, 0.1, 60);
    grid.push_back(c);
  }
  const auto rows1 = run_grid(grid);
  for (auto& c : grid) c.workers = 8;
  const auto rows8 = run_grid(grid);
  REQUIRE(rows1.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(rows1[i].tau == grid[i].params.tau);
    CHECK(same_bits(rows1[i].pfp_mean, rows8[i].pfp_mean));
    CHECK(same_bits(rows1[i].pfp_se, rows8[i].pfp_se));
    CHECK(same_bits(rows1[i].pfn_mean, rows8[i].pfn_mean));
    CHECK(same_bits(rows1[i].pfn_se, rows8[i].pfn_se));
  }
  CHECK(std::isnan(rows1[0].e_type2));
  CHECK(rows1[1].e_type2 == doctest::Approx(0.40377788).epsilon(1e-8));
  CHECK(rows1[2].pfn_mean < rows1[1].pfn_mean);
}

TEST_CASE("p = 0.1, rho = 0 cell at tau = 15") {
  auto c = config(15.0, 0.0, 0.1, 500);
  c.workers = 4;
  const auto rows = run_grid({c});
  CHECK(std::abs(rows[0].pfn_mean - 0.144813067) <= 0.01);
  CHECK(std::abs(rows[0].pfp_mean - 0.0510) <= 0.001);
}

TEST_CASE("theoretical mode uses the closed-form cutoff") {
  auto c = config(7.0, 0.0, 0.1, 300);
  c.cutoff_mode = CutoffMode::Theoretical;
  c.workers = 4;
  const auto stats = aggregate(run_replications(c));
  // With rho = 0 the centered data are close to the conditional model.
  CHECK(std::abs(stats.pfp_mean - 0.05) <= 0.004);
  CHECK(std::abs(stats.pfn_mean - fixed_test_power(c.params, 0.0, 0.0, c.alpha).type2) <= 0.02);
}

TEST_CASE("parallel_for covers every index once and propagates errors") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 6, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(50, 4, [](std::size_t i) {
                    if (i == 17) throw NumericError("boom");
                  }),
                  NumericError);
}
