#include "equitest/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "equitest/error.hpp"
#include "equitest/mathcore.hpp"
#include "equitest/model.hpp"
#include "equitest/sim.hpp"
#include "equitest/testing.hpp"

namespace equitest {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

ModelParams table_params(double rho, double p = 0.1, double tau = 15.0) {
  ModelParams params;
  params.n = 500;
  params.p = p;
  params.tau = tau;
  params.rho1 = rho;
  params.rho2 = rho;
  return params;
}

// Running first and second moments of a vector-valued sample.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(std::size_t dim) : dim_(dim), sum_(dim, 0.0), cross_(dim * dim, 0.0) {}

  void add(const std::vector<double>& x) {
    ++count_;
    for (std::size_t i = 0; i < dim_; ++i) {
      sum_[i] += x[i];
      for (std::size_t j = 0; j < dim_; ++j) cross_[i * dim_ + j] += x[i] * x[j];
    }
    samples_.push_back(x);
  }

  double mean(std::size_t i) const { return sum_[i] / static_cast<double>(count_); }

  double mean_se(std::size_t i) const {
    double ss = 0.0;
    for (const auto& x : samples_) ss += (x[i] - mean(i)) * (x[i] - mean(i));
    return std::sqrt(ss / static_cast<double>(count_ - 1)) / std::sqrt(static_cast<double>(count_));
  }

  // Covariance about the known mean 0 and the standard error of that estimate.
  double cov0(std::size_t i, std::size_t j) const { return cross_[i * dim_ + j] / static_cast<double>(count_); }

  double cov0_se(std::size_t i, std::size_t j) const {
    const double c = cov0(i, j);
    double ss = 0.0;
    for (const auto& x : samples_) ss += (x[i] * x[j] - c) * (x[i] * x[j] - c);
    return std::sqrt(ss / static_cast<double>(count_ - 1)) / std::sqrt(static_cast<double>(count_));
  }

 private:
  std::size_t dim_;
  std::size_t count_ = 0;
  std::vector<double> sum_;
  std::vector<double> cross_;
  std::vector<std::vector<double>> samples_;
};

struct Grid {
  std::vector<double> alphas{0.2, 0.05, 0.01};
  std::vector<double> rhos{0.0, 0.1, 0.4, 0.7};
  std::vector<double> qs{-1.0, -0.3, 0.0, 0.3, 1.0};
  std::vector<double> taus{7.0, 15.0, 30.0, 100.0};
};

CheckResult quantile_roundtrip() {
  double worst = 0.0;
  for (int k = 0; k <= 160; ++k) {
    const double g = std::pow(10.0, -8.0 + 8.0 * k / 160.0) * 0.5;  // (5e-9, 0.5]
    for (double gamma : {g, 1.0 - g}) {
      if (!(gamma > 0.0 && gamma < 1.0)) continue;
      worst = std::max(worst, std::abs(normal_cdf(normal_quantile(gamma)) - (1.0 - gamma)));
    }
  }
  return {"mathcore.quantile_cdf_roundtrip", worst <= 1e-9, "max residual " + fmt(worst)};
}

CheckResult solve_size_residual() {
  double worst = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const double mu0 = -5.0 + 0.25 * i;
    for (double phi0 : {0.1, 0.6, 1.2, 2.0, 10.0}) {
      for (double alpha : {0.2, 0.05, 0.01, 1e-4}) {
        const double t = solve_size_t(Probability(alpha), mu0, phi0);
        worst = std::max(worst, std::abs(fixed_cutoff_size(t, mu0, phi0) - alpha));
      }
    }
  }
  return {"mathcore.solve_size_t_residual", worst <= 1e-10, "max residual " + fmt(worst)};
}

CheckResult solve_size_phi0_independence() {
  double worst = 0.0;
  for (double phi0 : {0.1, 0.6, 1.2, 2.0, 10.0, 100.0}) {
    for (double alpha : {0.2, 0.05, 0.01, 1e-4}) {
      const double t = solve_size_t(Probability(alpha), 0.0, phi0);
      worst = std::max(worst, std::abs(t - normal_quantile(alpha / 2.0)));
    }
  }
  return {"mathcore.solve_size_t_mu0_zero", worst <= 1e-9, "max |t - z_{a/2}| " + fmt(worst)};
}

CheckResult trimmed_mean_translation(std::uint64_t seed) {
  RandomStream stream(seed, 0x7472696d);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs(97);
    for (auto& x : xs) x = 3.0 * stream.normal();
    const double c = 20.0 * stream.normal();
    std::vector<double> shifted(xs);
    for (auto& x : shifted) x += c;
    const TrimOrder beta(0.05 * (trial % 8));
    const double diff = std::abs(trimmed_mean(shifted, beta) - (trimmed_mean(xs, beta) + c));
    worst = std::max(worst, diff / (1.0 + std::abs(c)));
  }
  return {"mathcore.trimmed_mean_translation", worst <= 1e-13, "max scaled error " + fmt(worst)};
}

CheckResult sampler_equivalence(const VerifyOptions& opt) {
  const ModelParams params = table_params(0.4);
  const Indicators eta{0, 0, 1, 0, 1};
  const int draws = opt.quick ? 20000 : 200000;
  const Eigen::MatrixXd cov = covariance_given_eta(params, eta);

  MomentAccumulator decomposed(5), direct(5);
  RandomStream s1(opt.seed, 0xdec0), s2(opt.seed, 0xd1ec);
  for (int d = 0; d < draws; ++d) {
    decomposed.add(assemble_observations(params, sample_latent(params, eta, s1)).x);
    direct.add(sample_direct(params, eta, s2).x);
  }
  double worst = 0.0;  // in standard errors
  for (const auto* acc : {&decomposed, &direct}) {
    for (std::size_t i = 0; i < 5; ++i) {
      worst = std::max(worst, std::abs(acc->mean(i)) / acc->mean_se(i));
      for (std::size_t j = 0; j <= i; ++j) {
        const double z = std::abs(acc->cov0(i, j) - cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) /
                         acc->cov0_se(i, j);
        worst = std::max(worst, z);
      }
    }
  }
  return {"model.sampler_equivalence", worst <= 4.0,
          std::to_string(draws) + " draws, worst deviation " + fmt(worst) + " SE"};
}

CheckResult exchangeability(const VerifyOptions& opt) {
  ModelParams params = table_params(0.4, 0.0);
  params.n = 6;
  const Indicators eta(6, 0);
  const int draws = opt.quick ? 20000 : 100000;
  MomentAccumulator acc(6);
  RandomStream s(opt.seed, 0xe7c4);
  for (int d = 0; d < draws; ++d) acc.add(assemble_observations(params, sample_latent(params, eta, s)).x);
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < i; ++j) sum += acc.cov0(i, j), ++pairs;
  const double avg = sum / pairs;
  double worst = 0.0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < i; ++j) worst = std::max(worst, std::abs(acc.cov0(i, j) - avg) / acc.cov0_se(i, j));
  return {"model.exchangeability", worst <= 4.0, "worst pair deviation " + fmt(worst) + " SE"};
}

CheckResult covariance_identity(std::uint64_t seed) {
  RandomStream s(seed, 0xc0);
  bool ok = true;
  for (int trial = 0; trial < 20 && ok; ++trial) {
    ModelParams params = table_params(0.1 * (trial % 9), 0.3, 0.5 + trial);
    params.n = 7;
    params.sigma_eps = 0.5 + 0.1 * trial;
    params.rho2 = 0.05 * (trial % 19);
    const Indicators eta = sample_eta(params, s);
    const Eigen::MatrixXd cov = covariance_given_eta(params, eta);
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
      const double var_i = eta[static_cast<std::size_t>(i)] ? params.sigma0 * params.sigma0 + params.tau * params.tau
                                                             : params.sigma0 * params.sigma0;
      ok = ok && cov(i, i) == params.sigma_eps * params.sigma_eps + var_i;
      for (Eigen::Index j = 0; j < cov.cols(); ++j) ok = ok && cov(i, j) == cov(j, i);
    }
  }
  return {"model.covariance_symmetric_unit_diagonal", ok, ok ? "exact" : "mismatch"};
}

CheckResult conditional_independence(const VerifyOptions& opt) {
  ModelParams params = table_params(0.4, 0.5, 7.0);
  params.n = 4;
  const Indicators eta{0, 1, 0, 1};
  const double q1 = 0.3, q2 = -0.5;
  const ConditionalParams cond = conditional_params(params, q1, q2);
  const int draws = opt.quick ? 20000 : 100000;
  MomentAccumulator acc(4);
  RandomStream s(opt.seed, 0xc1);
  for (int d = 0; d < draws; ++d) {
    LatentDraw latent = sample_latent(params, eta, s);
    latent.q1 = q1;
    latent.q2 = q2;
    std::vector<double> x = assemble_observations(params, latent).x;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double var = eta[i] ? cond.phi_alt : cond.phi0;
      x[i] = (x[i] - (eta[i] ? cond.mu_alt : cond.mu0)) / std::sqrt(var);
    }
    acc.add(x);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < i; ++j) worst = std::max(worst, std::abs(acc.cov0(i, j)) / acc.cov0_se(i, j));
  return {"model.conditional_independence", worst <= 4.0, "worst cross-correlation " + fmt(worst) + " SE"};
}

struct GridOutcome {
  double worst_fixed_size = 0.0;
  double worst_np_size = 0.0;
  double worst_dominance = 0.0;  // max(fixed - np)
  int points = 0;
  int np_points = 0;
};

GridOutcome scan_grid() {
  const Grid grid;
  GridOutcome out;
  for (double alpha : grid.alphas)
    for (double rho : grid.rhos)
      for (double q1 : grid.qs)
        for (double q2 : grid.qs)
          for (double tau : grid.taus) {
            const ModelParams params = table_params(rho, 0.1, tau);
            const Probability a(alpha);
            const ConditionalParams cond = conditional_params(params, q1, q2);
            const FixedCutoffTest test = fixed_cutoff(a, cond);
            out.worst_fixed_size = std::max(
                out.worst_fixed_size,
                std::abs(fixed_cutoff_conditional_size(test.k_cutoff, cond.mu0, cond.phi0) - alpha));
            ++out.points;
            NPRegion region;
            try {
              region = np_exact_region(a, params, q1, q2);
            } catch (const DomainError&) {
              continue;
            }
            ++out.np_points;
            out.worst_np_size = std::max(out.worst_np_size, std::abs(np_region_size(region, cond) - alpha));
            const double gap = fixed_test_power(params, q1, q2, a).power - np_power(region, params, q1, q2).power;
            out.worst_dominance = std::max(out.worst_dominance, gap);
          }
  return out;
}

CheckResult asymptotic_thresholds() {
  bool ok = true;
  std::string detail;
  for (double rho : {0.0, 0.4, 0.7}) {
    for (double q2 : {-1.0, 0.3, 1.0}) {
      const double q1 = 0.3;
      std::vector<double> scaled;
      for (double tau : {1e2, 1e3, 1e4}) {
        const ModelParams params = table_params(rho, 0.1, tau);
        const ConditionalParams cond = conditional_params(params, q1, q2);
        const NPRegion region = np_exact_region(Probability(0.05), params, q1, q2);
        const double leading = np_asymptotic_thresholds(Probability(0.05), cond).first;
        scaled.push_back(tau * (region.k1 * tau - leading));
      }
      const double bound = 2.0 * std::abs(scaled[0]) + 1e-3;
      ok = ok && std::abs(scaled[1]) <= bound && std::abs(scaled[2]) <= bound;
      detail = "tau*(tau*k1 - leading) at 1e4: " + fmt(scaled[2]);
    }
  }
  return {"testing.np_threshold_asymptotics", ok, detail};
}

CheckResult gap_decay() {
  const ModelParams base = table_params(0.0);
  std::vector<double> gaps;
  for (double tau : {10.0, 30.0, 100.0}) {
    ModelParams params = base;
    params.tau = tau;
    const double fixed = expected_type2_quadrature(params, Probability(0.05), TestKind::FixedCutoff);
    const double np = expected_type2_quadrature(params, Probability(0.05), TestKind::NpExact);
    gaps.push_back(tau * std::abs(fixed - np));
  }
  // Non-increasing up to rounding of the two type II errors.
  constexpr double kRound = 1e-12;
  const bool ok = gaps[1] <= gaps[0] + kRound && gaps[2] <= gaps[1] + kRound;
  return {"testing.expected_gap_decay_rho0", ok,
          "tau*gap at 10,30,100: " + fmt(gaps[0]) + ", " + fmt(gaps[1]) + ", " + fmt(gaps[2])};
}

CheckResult power_monotone() {
  bool ok = true;
  for (double rho : {0.0, 0.1, 0.4, 0.7})
    for (double q2 : {-1.0, -0.3, 0.3, 1.0}) {
      double previous = -1.0;
      for (double tau : {1.0, 3.0, 7.0, 15.0, 30.0, 50.0, 100.0}) {
        const double power = fixed_test_power(table_params(rho, 0.1, tau), 0.3, q2, Probability(0.05)).power;
        ok = ok && power >= previous - 1e-12;
        previous = power;
      }
    }
  return {"testing.fixed_power_monotone_in_tau", ok, ok ? "nondecreasing" : "decrease found"};
}

CheckResult closed_form_scaling() {
  bool ok = true;
  for (double phi0 : {2.0, 1.8, 1.2, 0.6})
    for (double tau : {1.0, 3.0, 7.0, 15.0})
      for (double c : {2.0, 4.0, 0.5, 8.0}) {
        ok = ok && expected_type2_closed(c * tau, Probability(0.05), phi0) ==
                       expected_type2_closed(tau, Probability(0.05), phi0) / c;
      }
  return {"testing.closed_form_scaling", ok, ok ? "exact for power-of-two factors" : "mismatch"};
}

std::vector<CheckResult> sim_checks(const VerifyOptions& opt) {
  std::vector<CheckResult> results;
  const std::vector<double> taus{1, 3, 7, 15, 30, 50, 100};
  const int reps = opt.quick ? 100 : 500;

  int m_min = 1 << 30, m_max = 0;
  std::vector<AggregateStats> stats;
  for (double tau : taus) {
    SimConfig config;
    config.params = table_params(0.0, 0.1, tau);
    config.reps = reps;
    config.master_seed = opt.seed;
    const auto outcomes = run_replications(config);
    for (const auto& o : outcomes) {
      if (o.degenerate) continue;
      m_min = std::min(m_min, o.true_nulls);
      m_max = std::max(m_max, o.true_nulls);
    }
    stats.push_back(aggregate(outcomes));
  }

  const double alpha = 0.05;
  const double lo = std::ceil(alpha * m_min) / m_max * 0.9;
  const double hi = std::ceil(alpha * m_max) / m_min * 1.1;
  bool pfp_ok = true;
  for (const auto& s : stats) pfp_ok = pfp_ok && s.pfp_mean >= lo && s.pfp_mean <= hi;
  results.push_back({"sim.pfp_order_statistic_bound", pfp_ok,
                     "bound [" + fmt(lo) + ", " + fmt(hi) + "], tau=1 pfp " + fmt(stats[0].pfp_mean)});

  bool mono = true;
  for (std::size_t k = 1; k < stats.size(); ++k) {
    const double slack = 2.0 * std::hypot(stats[k].pfn_se, stats[k - 1].pfn_se);
    mono = mono && stats[k].pfn_mean <= stats[k - 1].pfn_mean + slack;
  }
  results.push_back({"sim.pfn_nonincreasing_in_tau", mono, mono ? "nonincreasing within 2 SE" : "increase found"});

  bool close = true;
  std::string detail;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    if (taus[k] < 15) continue;
    const double e = expected_type2_closed(taus[k], Probability(alpha), 2.0);
    const double diff = std::abs(stats[k].pfn_mean - e);
    close = close && diff <= std::max(0.01, 4.0 * stats[k].pfn_se);
    detail += "tau=" + fmt(taus[k]) + " |diff| " + fmt(diff) + "; ";
  }
  results.push_back({"sim.pfn_tracks_closed_form_rho0", close, detail});

  SimConfig config;
  config.params = table_params(0.4, 0.1, 15);
  config.reps = opt.quick ? 40 : 100;
  config.master_seed = opt.seed;
  config.workers = 1;
  const auto a = run_grid({config});
  config.workers = 4;
  const auto b = run_grid({config});
  const auto r1 = run_replication(config, 17), r2 = run_replication(config, 17);
  const bool same = a[0].pfp_mean == b[0].pfp_mean && a[0].pfn_mean == b[0].pfn_mean &&
                    a[0].pfp_se == b[0].pfp_se && a[0].pfn_se == b[0].pfn_se &&
                    r1.false_positives == r2.false_positives && r1.false_negatives == r2.false_negatives;
  results.push_back({"sim.replication_determinism", same, same ? "bit-identical across workers 1 and 4" : "differs"});
  return results;
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  std::vector<CheckResult> results;
  auto guarded = [&](const std::string& name, const std::function<CheckResult()>& check) {
    try {
      results.push_back(check());
    } catch (const std::exception& e) {
      results.push_back({name, false, std::string("exception: ") + e.what()});
    }
  };

  guarded("model.validate_base_params", [&] {
    ModelParams params = table_params(0.4);
    if (options.inject_rho1) params.rho1 = *options.inject_rho1;
    validate(params);
    return CheckResult{"model.validate_base_params", true, "valid"};
  });
  guarded("model.validate_rejects_negative_rho", [&] {
    ModelParams params = table_params(0.4);
    params.rho1 = -0.5;
    try {
      validate(params);
    } catch (const ValidationError&) {
      return CheckResult{"model.validate_rejects_negative_rho", true, "rejected"};
    }
    return CheckResult{"model.validate_rejects_negative_rho", false, "accepted rho1 = -0.5"};
  });

  guarded("mathcore.quantile_cdf_roundtrip", quantile_roundtrip);
  guarded("mathcore.solve_size_t_residual", solve_size_residual);
  guarded("mathcore.solve_size_t_mu0_zero", solve_size_phi0_independence);
  guarded("mathcore.trimmed_mean_translation", [&] { return trimmed_mean_translation(options.seed); });

  guarded("model.sampler_equivalence", [&] { return sampler_equivalence(options); });
  guarded("model.exchangeability", [&] { return exchangeability(options); });
  guarded("model.covariance_symmetric_unit_diagonal", [&] { return covariance_identity(options.seed); });
  guarded("model.conditional_independence", [&] { return conditional_independence(options); });

  GridOutcome grid;
  guarded("testing.size_exactness", [&] {
    grid = scan_grid();
    const bool ok = grid.worst_fixed_size <= 1e-9 && grid.worst_np_size <= 1e-9;
    return CheckResult{"testing.size_exactness", ok,
                       std::to_string(grid.points) + " points, worst fixed " + fmt(grid.worst_fixed_size) +
                           ", worst np " + fmt(grid.worst_np_size)};
  });
  guarded("testing.np_dominance", [&] {
    return CheckResult{"testing.np_dominance", grid.np_points > 0 && grid.worst_dominance <= 1e-9,
                       std::to_string(grid.np_points) + " points, max(fixed - np) " + fmt(grid.worst_dominance)};
  });
  guarded("testing.np_threshold_asymptotics", asymptotic_thresholds);
  guarded("testing.expected_gap_decay_rho0", gap_decay);
  guarded("testing.fixed_power_monotone_in_tau", power_monotone);
  guarded("testing.closed_form_scaling", closed_form_scaling);

  try {
    for (auto& r : sim_checks(options)) results.push_back(std::move(r));
  } catch (const std::exception& e) {
    results.push_back({"sim", false, std::string("exception: ") + e.what()});
  }
  return results;
}

}  // namespace equitest
