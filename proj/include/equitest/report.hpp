#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "equitest/sim.hpp"

namespace equitest {

std::string code_version();

/// Provenance attached to every emitted file.
///
/// `config`, `master_seed`, `code_version` and `exclusions` are embedded in
/// CSV and Markdown outputs as comment lines, so identical manifests give
/// byte-identical files. `workers` and `wall_seconds` do not change results
/// and only appear in the JSON sidecar.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t master_seed = 0;
  std::string code_version = equitest::code_version();
  int workers = 1;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::string, int>> exclusions;
};

/// 9 significant digits, '.' decimal point; NaN prints as "NA".
std::string format_number(double value);

/// Header line of every table CSV.
inline constexpr const char* kTableCsvHeader = "tau,pfp_mean,pfp_se,pfn_mean,pfn_se,e_type2";

std::string manifest_comment_block(const RunManifest& manifest, const std::string& prefix);
std::string render_manifest_json(const RunManifest& manifest);

std::string render_table_csv(const std::vector<TableRow>& rows, const RunManifest& manifest);

struct TableSection {
  std::string caption;
  std::vector<TableRow> rows;
};

std::string render_markdown_report(const std::vector<TableSection>& sections,
                                   const RunManifest& manifest);

/// Table number (1-8) for the standard n=500 grid cells, or nullopt.
std::optional<int> standard_table_number(double p, double rho);
std::string table_file_stem(double p, double rho);

struct PowerRow {
  double tau = 0.0;
  double fixed_power = 0.0;
  double fixed_type2 = 0.0;
  std::optional<double> np_power;
  std::optional<double> np_type2;
  std::optional<double> e_type2_closed;
  std::optional<double> gap;  // tau * |type2_fixed - type2_np|
  std::string note;
};

inline constexpr const char* kPowerCsvHeader =
    "tau,fixed_power,fixed_type2,np_power,np_type2,e_type2_closed,tau_gap,note";

std::string render_power_csv(const std::vector<PowerRow>& rows, const RunManifest& manifest);

/// Writes `content` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace equitest
