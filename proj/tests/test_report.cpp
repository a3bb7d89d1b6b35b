#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "equitest/error.hpp"
#include "equitest/report.hpp"

using namespace equitest;

namespace {

RunManifest manifest() {
  RunManifest m;
  m.command = "tables";
  m.config = {{"p", "0.1"}, {"rho", "0"}, {"reps", "500"}};
  m.master_seed = 42;
  m.workers = 7;
  m.wall_seconds = 1.25;
  m.exclusions = {{"tau=1", 0}};
  return m;
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("format_number") {
  CHECK(format_number(0.05) == "0.05");
  CHECK(format_number(100.0) == "100");
  CHECK(format_number(2.211582528123) == "2.21158253");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "NA");
}

TEST_CASE("table csv schema") {
  std::vector<TableRow> rows{{1.0, 0.051, 2.7e-5, 0.89, 0.002, 2.211582528, 500, 0},
                             {0.0, 0.05, 1e-5, 0.95, 0.001, std::numeric_limits<double>::quiet_NaN(), 500, 0}};
  const auto csv = render_table_csv(rows, manifest());
  const auto lines = data_lines(csv);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == kTableCsvHeader);
  CHECK(lines[1] == "1,0.051,2.7e-05,0.89,0.002,2.21158253");
  CHECK(lines[2] == "0,0.05,1e-05,0.95,0.001,NA");
  CHECK(csv.find("# master_seed: 42") != std::string::npos);
  CHECK(csv.find("# code_version: ") != std::string::npos);
  CHECK(csv.find("# excluded_replications[tau=1]: 0") != std::string::npos);
  // Scheduling details must not leak into result files.
  CHECK(csv.find("workers") == std::string::npos);
  CHECK(csv.find("wall") == std::string::npos);
}

TEST_CASE("manifest json carries everything") {
  const auto j = nlohmann::json::parse(render_manifest_json(manifest()));
  CHECK(j["command"] == "tables");
  CHECK(j["master_seed"] == 42);
  CHECK(j["workers"] == 7);
  CHECK(j["config"]["reps"] == "500");
  CHECK(j["excluded_replications"]["tau=1"] == 0);
}

TEST_CASE("markdown report") {
  const auto md = render_markdown_report({{"Table 1", {{3.0, 0.05, 1e-5, 0.6, 0.01, 0.7, 500, 0}}}}, manifest());
  CHECK(md.find("## Table 1") != std::string::npos);
  CHECK(md.find("| 3 | 0.05 | 1e-05 | 0.6 | 0.01 | 0.7 |") != std::string::npos);
  CHECK(md.find("workers") == std::string::npos);
}

TEST_CASE("table numbering") {
  CHECK(standard_table_number(0.1, 0.0) == 1);
  CHECK(standard_table_number(0.1, 0.7) == 4);
  CHECK(standard_table_number(0.05, 0.0) == 5);
  CHECK(standard_table_number(0.05, 0.4) == 7);
  CHECK_FALSE(standard_table_number(0.2, 0.0).has_value());
  CHECK(table_file_stem(0.1, 0.0) == "table1_p0.1_rho0");
  CHECK(table_file_stem(0.05, 0.7) == "table8_p0.05_rho0.7");
  CHECK(table_file_stem(0.3, 0.2) == "table_p0.3_rho0.2");
}

TEST_CASE("power csv") {
  std::vector<PowerRow> rows(2);
  rows[0] = {0.0, 0.05, 0.95, std::nullopt, std::nullopt, std::nullopt, std::nullopt, "LR not convex on Y scale"};
  rows[1] = {10.0, 0.9, 0.1, 0.9, 0.1, 0.22, 1e-13, ""};
  const auto lines = data_lines(render_power_csv(rows, manifest()));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == kPowerCsvHeader);
  CHECK(lines[1] == "0,0.05,0.95,NA,NA,NA,NA,LR not convex on Y scale");
  CHECK(lines[2] == "10,0.9,0.1,0.9,0.1,0.22,1e-13,");
}

TEST_CASE("write_text_file") {
  const auto dir = std::filesystem::temp_directory_path() / "equitest_report_test";
  std::filesystem::remove_all(dir);
  write_text_file(dir / "a" / "b.txt", "hello\n");
  std::ifstream in(dir / "a" / "b.txt");
  std::string s;
  std::getline(in, s);
  CHECK(s == "hello");
  // A regular file where a directory is needed.
  CHECK_THROWS_AS(write_text_file(dir / "a" / "b.txt" / "c.txt", "x"), IoError);
  std::filesystem::remove_all(dir);
}
