#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace equitest {

struct VerifyOptions {
  bool quick = false;
  std::uint64_t seed = 2024;
  /// Test hook: replaces rho1 in the base model so validation must fail.
  std::optional<double> inject_rho1;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs every invariant check and returns one result per check, in a fixed order.
std::vector<CheckResult> run_verification(const VerifyOptions& options);

}  // namespace equitest
