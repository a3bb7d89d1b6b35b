#include "equitest/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "equitest/error.hpp"

#ifndef EQUITEST_VERSION
#define EQUITEST_VERSION "unknown"
#endif

namespace equitest {

std::string code_version() { return EQUITEST_VERSION; }

std::string format_number(double value) {
  if (std::isnan(value)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

std::string manifest_comment_block(const RunManifest& manifest, const std::string& prefix) {
  std::ostringstream os;
  os << prefix << "command: " << manifest.command << '\n';
  for (const auto& [key, value] : manifest.config) os << prefix << key << ": " << value << '\n';
  os << prefix << "master_seed: " << manifest.master_seed << '\n';
  os << prefix << "code_version: " << manifest.code_version << '\n';
  for (const auto& [key, count] : manifest.exclusions) {
    os << prefix << "excluded_replications[" << key << "]: " << count << '\n';
  }
  return os.str();
}

std::string render_manifest_json(const RunManifest& manifest) {
  nlohmann::ordered_json j;
  j["command"] = manifest.command;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [key, value] : manifest.config) cfg[key] = value;
  j["config"] = cfg;
  j["master_seed"] = manifest.master_seed;
  j["code_version"] = manifest.code_version;
  j["workers"] = manifest.workers;
  j["wall_seconds"] = manifest.wall_seconds;
  nlohmann::ordered_json ex = nlohmann::ordered_json::object();
  for (const auto& [key, count] : manifest.exclusions) ex[key] = count;
  j["excluded_replications"] = ex;
  return j.dump(2) + "\n";
}

std::string render_table_csv(const std::vector<TableRow>& rows, const RunManifest& manifest) {
  std::ostringstream os;
  os << manifest_comment_block(manifest, "# ");
  os << kTableCsvHeader << '\n';
  for (const auto& r : rows) {
    os << format_number(r.tau) << ',' << format_number(r.pfp_mean) << ','
       << format_number(r.pfp_se) << ',' << format_number(r.pfn_mean) << ','
       << format_number(r.pfn_se) << ',' << format_number(r.e_type2) << '\n';
  }
  return os.str();
}

std::string render_markdown_report(const std::vector<TableSection>& sections,
                                   const RunManifest& manifest) {
  std::ostringstream os;
  os << "# Simulation tables\n\n";
  os << "<!--\n" << manifest_comment_block(manifest, "") << "-->\n\n";
  os << "sd columns are standard errors of the replication mean.\n";
  for (const auto& section : sections) {
    os << "\n## " << section.caption << "\n\n";
    os << "| tau | p.f.p. | sd(p.f.p) | p.f.n. | sd(p.f.n) | E(Type II error) |\n";
    os << "|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& r : section.rows) {
      os << "| " << format_number(r.tau) << " | " << format_number(r.pfp_mean) << " | "
         << format_number(r.pfp_se) << " | " << format_number(r.pfn_mean) << " | "
         << format_number(r.pfn_se) << " | " << format_number(r.e_type2) << " |\n";
    }
  }
  return os.str();
}

std::optional<int> standard_table_number(double p, double rho) {
  static constexpr double kRhos[] = {0.0, 0.1, 0.4, 0.7};
  int base = 0;
  if (p == 0.1) {
    base = 0;
  } else if (p == 0.05) {
    base = 4;
  } else {
    return std::nullopt;
  }
  for (int i = 0; i < 4; ++i) {
    if (rho == kRhos[i]) return base + i + 1;
  }
  return std::nullopt;
}

std::string table_file_stem(double p, double rho) {
  std::string stem = "table";
  if (auto number = standard_table_number(p, rho)) stem += std::to_string(*number);
  return stem + "_p" + format_number(p) + "_rho" + format_number(rho);
}

std::string render_power_csv(const std::vector<PowerRow>& rows, const RunManifest& manifest) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("NA"); };
  std::ostringstream os;
  os << manifest_comment_block(manifest, "# ");
  os << kPowerCsvHeader << '\n';
  for (const auto& r : rows) {
    os << format_number(r.tau) << ',' << format_number(r.fixed_power) << ','
       << format_number(r.fixed_type2) << ',' << opt(r.np_power) << ',' << opt(r.np_type2) << ','
       << opt(r.e_type2_closed) << ',' << opt(r.gap) << ',' << r.note << '\n';
  }
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace equitest
