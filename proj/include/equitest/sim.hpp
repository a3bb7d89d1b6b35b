#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "equitest/mathcore.hpp"
#include "equitest/model.hpp"

namespace equitest {

enum class CutoffMode {
  /// Upper-alpha order statistic of the centered |x| over the true nulls.
  EmpiricalNullQuantile,
  /// K = t sqrt(phi0) with t = solve_size_t(alpha, 0, phi0), on centered data.
  Theoretical,
};

std::string to_string(CutoffMode mode);
/// Accepts "empirical" / "empirical-null-quantile" and "theoretical".
CutoffMode parse_cutoff_mode(const std::string& text);

struct SimConfig {
  ModelParams params;
  int reps = 500;
  Probability alpha{0.05};
  TrimOrder beta{0.05};
  CutoffMode cutoff_mode = CutoffMode::EmpiricalNullQuantile;
  std::uint64_t master_seed = 2024;
  int workers = 1;
};

struct ReplicationOutcome {
  int false_positives = 0;
  int true_nulls = 0;
  int false_negatives = 0;
  int true_signals = 0;
  /// No true nulls in empirical mode: the cutoff is undefined.
  bool degenerate = false;
};

struct AggregateStats {
  double pfp_mean = 0.0;
  double pfp_se = 0.0;
  double pfn_mean = 0.0;
  double pfn_se = 0.0;
  int used = 0;
  int excluded = 0;
};

struct TableRow {
  double tau = 0.0;
  double pfp_mean = 0.0;
  double pfp_se = 0.0;
  double pfn_mean = 0.0;
  double pfn_se = 0.0;
  double e_type2 = 0.0;
  int used_reps = 0;
  int excluded_reps = 0;
};

/// Throws ValidationError when the config (or its ModelParams) is invalid.
SimConfig validate(const SimConfig& config);

/// One replication; a pure function of (config, rep_index). Its stream is
/// RandomStream(config.master_seed, rep_index).
ReplicationOutcome run_replication(const SimConfig& config, std::uint64_t rep_index);

/// Per-replication proportions averaged in index order. The reported spreads
/// are standard errors of the mean (sample sd / sqrt(used)). Outcomes lacking
/// nulls or signals are excluded and counted. Throws AggregationError if
/// nothing is left.
AggregateStats aggregate(const std::vector<ReplicationOutcome>& outcomes);

/// Runs body(i) for i in [0, count) on up to `workers` threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

std::vector<ReplicationOutcome> run_replications(const SimConfig& config);

/// One row per config, in input order. Bit-identical for any worker count.
std::vector<TableRow> run_grid(const std::vector<SimConfig>& configs);

}  // namespace equitest
