#include "equitest/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "equitest/error.hpp"
#include "equitest/testing.hpp"

namespace equitest {

std::string to_string(CutoffMode mode) {
  return mode == CutoffMode::EmpiricalNullQuantile ? "empirical-null-quantile" : "theoretical";
}

CutoffMode parse_cutoff_mode(const std::string& text) {
  if (text == "empirical" || text == "empirical-null-quantile") return CutoffMode::EmpiricalNullQuantile;
  if (text == "theoretical") return CutoffMode::Theoretical;
  throw ValidationError("unknown cutoff mode '" + text + "' (expected empirical or theoretical)");
}

SimConfig validate(const SimConfig& config) {
  validate(config.params);
  if (config.reps < 1) throw ValidationError("invalid simulation config: reps must be >= 1");
  if (config.workers < 1) throw ValidationError("invalid simulation config: workers must be >= 1");
  if (!(config.alpha.value() > 0.0 && config.alpha.value() < 1.0)) {
    throw ValidationError("invalid simulation config: alpha must lie in (0, 1)");
  }
  return config;
}

ReplicationOutcome run_replication(const SimConfig& config, std::uint64_t rep_index) {
  const ModelParams& params = config.params;
  RandomStream stream(config.master_seed, rep_index);
  Indicators eta = sample_eta(params, stream);
  const LatentDraw latent = sample_latent(params, std::move(eta), stream);
  const DatasetDraw data = assemble_observations(params, latent);

  const double center = trimmed_mean(data.x, config.beta);

  ReplicationOutcome out;
  for (auto t : data.truth) (t ? out.true_signals : out.true_nulls) += 1;

  double k_abs = 0.0;
  if (config.cutoff_mode == CutoffMode::EmpiricalNullQuantile) {
    if (out.true_nulls == 0) {
      out.degenerate = true;
      return out;
    }
    std::vector<double> null_abs;
    null_abs.reserve(static_cast<std::size_t>(out.true_nulls));
    for (std::size_t i = 0; i < data.x.size(); ++i) {
      if (!data.truth[i]) null_abs.push_back(std::abs(data.x[i] - center));
    }
    const auto m = static_cast<double>(null_abs.size());
    auto rank = static_cast<std::size_t>(std::ceil(config.alpha.value() * m - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, null_abs.size());
    // rank-th largest value.
    auto nth = null_abs.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(null_abs.begin(), nth, null_abs.end(), std::greater<>());
    // Reject |x - center| >= K, i.e. strictly above the next double below K.
    k_abs = std::nextafter(*nth, -std::numeric_limits<double>::infinity());
  } else {
    const double phi0 = params.null_variance();
    k_abs = solve_size_t(config.alpha, 0.0, phi0) * std::sqrt(phi0);
  }

  const Indicators flags = apply_cutoff(data.x, center, k_abs);
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (!data.truth[i] && flags[i]) ++out.false_positives;
    if (data.truth[i] && !flags[i]) ++out.false_negatives;
  }
  return out;
}

namespace {

void mean_and_se(const std::vector<double>& values, double& mean, double& se) {
  // Shifting by the first value keeps identical inputs exact (se = 0).
  const auto n = static_cast<double>(values.size());
  const double shift = values.front();
  double sum = 0.0;
  for (double v : values) sum += v - shift;
  mean = shift + sum / n;
  if (values.size() < 2) {
    se = 0.0;
    return;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

}  // namespace

AggregateStats aggregate(const std::vector<ReplicationOutcome>& outcomes) {
  std::vector<double> pfp, pfn;
  pfp.reserve(outcomes.size());
  pfn.reserve(outcomes.size());
  AggregateStats stats;
  for (const auto& o : outcomes) {
    if (o.degenerate || o.true_nulls == 0 || o.true_signals == 0) {
      ++stats.excluded;
      continue;
    }
    pfp.push_back(static_cast<double>(o.false_positives) / o.true_nulls);
    pfn.push_back(static_cast<double>(o.false_negatives) / o.true_signals);
  }
  if (pfp.empty()) {
    throw AggregationError("aggregate: no usable replications (" + std::to_string(stats.excluded) +
                           " excluded)");
  }
  stats.used = static_cast<int>(pfp.size());
  mean_and_se(pfp, stats.pfp_mean, stats.pfp_se);
  mean_and_se(pfn, stats.pfn_mean, stats.pfn_se);
  return stats;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body) {
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(std::min(threads, count));
  for (std::size_t t = 0; t < std::min(threads, count); ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<ReplicationOutcome> run_replications(const SimConfig& config) {
  validate(config);
  std::vector<ReplicationOutcome> outcomes(static_cast<std::size_t>(config.reps));
  parallel_for(outcomes.size(), config.workers,
               [&](std::size_t r) { outcomes[r] = run_replication(config, r); });
  return outcomes;
}

std::vector<TableRow> run_grid(const std::vector<SimConfig>& configs) {
  std::vector<TableRow> rows;
  rows.reserve(configs.size());
  for (const auto& config : configs) {
    const AggregateStats stats = aggregate(run_replications(config));
    TableRow row;
    row.tau = config.params.tau;
    row.pfp_mean = stats.pfp_mean;
    row.pfp_se = stats.pfp_se;
    row.pfn_mean = stats.pfn_mean;
    row.pfn_se = stats.pfn_se;
    row.e_type2 = config.params.tau > 0.0
                      ? expected_type2_closed(config.params.tau, config.alpha,
                                              config.params.null_variance())
                      : std::numeric_limits<double>::quiet_NaN();
    row.used_reps = stats.used;
    row.excluded_reps = stats.excluded;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace equitest
