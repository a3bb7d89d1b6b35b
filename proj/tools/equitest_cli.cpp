// equitest command-line tool: table reproduction, power curves, verification.
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "equitest/error.hpp"
#include "equitest/report.hpp"
#include "equitest/sim.hpp"
#include "equitest/testing.hpp"
#include "equitest/verify.hpp"

namespace {

using namespace equitest;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_number(values[i]);
  return out;
}

struct TablesArgs {
  std::vector<double> ps{0.1, 0.05};
  std::vector<double> rhos{0.0, 0.1, 0.4, 0.7};
  std::vector<double> taus{1, 3, 7, 15, 30, 50, 100};
  int reps = 500;
  int n = 500;
  double alpha = 0.05;
  double beta = 0.05;
  std::uint64_t seed = 2024;
  int workers = 1;
  std::string out = "tables";
  std::string mode = "empirical";
  std::string config;
};

struct PowerArgs {
  std::vector<double> taus{1, 3, 7, 15, 30, 50, 100};
  double q1 = 0.0;
  double q2 = 0.0;
  bool expected = false;
  double alpha = 0.05;
  std::optional<double> rho;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double sigma_eps = 1.0;
  double sigma0 = 1.0;
  int nodes = 64;
  std::string mode = "theoretical";
  std::string out;
  std::string config;
};

struct VerifyArgs {
  bool quick = false;
  std::uint64_t seed = 2024;
  std::optional<double> inject_rho1;
};

// Applies a flat key=value file to `cmd`: options already set on the command
// line or from the environment keep their values. Keys may use '_' or '-'.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    std::string key = item.name;
    std::replace(key.begin(), key.end(), '_', '-');
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw ValidationError("config file " + path + ": unknown key '" + item.name + "'");
    }
    if (opt->count() > 0) continue;
    for (const std::string& input : item.inputs) {
      std::stringstream values(input);
      for (std::string v; std::getline(values, v, ',');) opt->add_result(v);
    }
    try {
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      throw ValidationError("config file " + path + ": " + item.name + ": " + e.what());
    }
  }
}

int run_tables(const TablesArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  const CutoffMode mode = parse_cutoff_mode(args.mode);
  const std::filesystem::path out_dir(args.out);

  RunManifest summary;
  summary.command = "tables";
  summary.master_seed = args.seed;
  summary.workers = args.workers;
  summary.config = {{"n", std::to_string(args.n)},       {"p", join(args.ps)},
                    {"rho", join(args.rhos)},            {"tau_grid", join(args.taus)},
                    {"reps", std::to_string(args.reps)}, {"alpha", format_number(args.alpha)},
                    {"beta", format_number(args.beta)},  {"sigma_eps", "1"},
                    {"sigma0", "1"},                     {"mode", to_string(mode)}};

  std::vector<TableSection> sections;
  int total_excluded = 0;
  for (double p : args.ps) {
    for (double rho : args.rhos) {
      std::vector<SimConfig> configs;
      for (double tau : args.taus) {
        SimConfig config;
        config.params.n = args.n;
        config.params.p = p;
        config.params.tau = tau;
        config.params.rho1 = rho;
        config.params.rho2 = rho;
        config.reps = args.reps;
        config.alpha = Probability(args.alpha);
        config.beta = TrimOrder(args.beta);
        config.cutoff_mode = mode;
        config.master_seed = args.seed;
        config.workers = args.workers;
        configs.push_back(validate(config));
      }
      const std::vector<TableRow> rows = run_grid(configs);

      RunManifest manifest = summary;
      manifest.config = {{"n", std::to_string(args.n)},       {"p", format_number(p)},
                         {"rho1", format_number(rho)},        {"rho2", format_number(rho)},
                         {"sigma_eps", "1"},                  {"sigma0", "1"},
                         {"tau_grid", join(args.taus)},       {"reps", std::to_string(args.reps)},
                         {"alpha", format_number(args.alpha)}, {"beta", format_number(args.beta)},
                         {"mode", to_string(mode)}};
      int excluded = 0;
      for (const auto& r : rows) {
        excluded += r.excluded_reps;
        if (r.excluded_reps > 0) manifest.exclusions.emplace_back("tau=" + format_number(r.tau), r.excluded_reps);
      }
      manifest.exclusions.insert(manifest.exclusions.begin(), {"total", excluded});
      total_excluded += excluded;
      if (excluded > 0) {
        std::cerr << "p=" << format_number(p) << " rho=" << format_number(rho) << ": excluded "
                  << excluded << " degenerate replications\n";
      }

      const std::string stem = table_file_stem(p, rho);
      write_text_file(out_dir / (stem + ".csv"), render_table_csv(rows, manifest));
      std::cout << (out_dir / (stem + ".csv")).string() << '\n';

      std::string caption;
      if (auto number = standard_table_number(p, rho)) caption = "Table " + std::to_string(*number) + ": ";
      caption += "n=" + std::to_string(args.n) + ", p=" + format_number(p) + ", rho1=rho2=" + format_number(rho);
      sections.push_back({caption, rows});
    }
  }
  summary.exclusions = {{"total", total_excluded}};
  write_text_file(out_dir / "tables.md", render_markdown_report(sections, summary));
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text_file(out_dir / "manifest.json", render_manifest_json(summary));
  std::cerr << "wrote " << sections.size() << " tables to " << out_dir.string() << " in "
            << format_number(summary.wall_seconds) << " s\n";
  return kExitOk;
}

int run_power(const PowerArgs& args) {
  if (parse_cutoff_mode(args.mode) != CutoffMode::Theoretical) {
    throw ValidationError("power computes exact conditional curves; only --mode theoretical applies");
  }
  ModelParams base;
  base.sigma_eps = args.sigma_eps;
  base.sigma0 = args.sigma0;
  base.rho1 = args.rho ? *args.rho : args.rho1;
  base.rho2 = args.rho ? *args.rho : args.rho2;
  base.tau = 0.0;
  validate(base);
  const Probability alpha(args.alpha);

  RunManifest manifest;
  manifest.command = "power";
  manifest.config = {{"tau_grid", join(args.taus)},
                     {"alpha", format_number(args.alpha)},
                     {"sigma_eps", format_number(base.sigma_eps)},
                     {"sigma0", format_number(base.sigma0)},
                     {"rho1", format_number(base.rho1)},
                     {"rho2", format_number(base.rho2)}};
  if (args.expected) {
    manifest.config.emplace_back("expected", "quadrature");
    manifest.config.emplace_back("nodes", std::to_string(args.nodes));
  } else {
    manifest.config.emplace_back("q1", format_number(args.q1));
    manifest.config.emplace_back("q2", format_number(args.q2));
  }

  std::vector<PowerRow> rows;
  for (double tau : args.taus) {
    ModelParams params = base;
    params.tau = tau;
    validate(params);
    PowerRow row;
    row.tau = tau;
    row.fixed_type2 = args.expected
                          ? expected_type2_quadrature(params, alpha, TestKind::FixedCutoff, args.nodes)
                          : fixed_test_power(params, args.q1, args.q2, alpha).type2;
    row.fixed_power = 1.0 - row.fixed_type2;
    if (tau > 0.0) row.e_type2_closed = expected_type2_closed(tau, alpha, params.null_variance());
    try {
      const double np_type2 =
          args.expected ? expected_type2_quadrature(params, alpha, TestKind::NpExact, args.nodes)
                        : np_power(np_exact_region(alpha, params, args.q1, args.q2), params, args.q1, args.q2).type2;
      row.np_type2 = np_type2;
      row.np_power = 1.0 - np_type2;
      row.gap = tau * std::abs(row.fixed_type2 - np_type2);
    } catch (const DomainError& e) {
      row.note = e.what();
    }
    rows.push_back(row);
  }

  const std::string csv = render_power_csv(rows, manifest);
  if (args.out.empty()) {
    std::cout << csv;
  } else {
    write_text_file(args.out, csv);
  }
  return kExitOk;
}

int run_verify(const VerifyArgs& args) {
  VerifyOptions options;
  options.quick = args.quick;
  options.seed = args.seed;
  options.inject_rho1 = args.inject_rho1;
  const auto results = run_verification(options);
  int failures = 0;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << '\n';
    failures += r.passed ? 0 : 1;
  }
  std::cout << (results.size() - static_cast<std::size_t>(failures)) << '/' << results.size()
            << " checks passed\n";
  if (failures > 0) {
    std::cerr << "verification failed:";
    for (const auto& r : results)
      if (!r.passed) std::cerr << ' ' << r.name;
    std::cerr << '\n';
    return kExitVerifyFailed;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dependent multiple testing: fixed-cutoff conditional tests and simulation tables"};
  app.require_subcommand(1);
  app.set_version_flag("--version", equitest::code_version());

  TablesArgs tables;
  auto* tables_cmd = app.add_subcommand("tables", "Reproduce the simulation tables (CSV + Markdown)");
  tables_cmd->add_option("--config", tables.config, "Flat key=value file; flags and environment take precedence");
  tables_cmd->add_option("--p", tables.ps, "Signal prevalence values")->delimiter(',');
  tables_cmd->add_option("--rho", tables.rhos, "Common rho1 = rho2 values")->delimiter(',');
  tables_cmd->add_option("--tau-grid", tables.taus, "Signal scale grid")->delimiter(',');
  tables_cmd->add_option("--reps", tables.reps, "Replications per row")->check(CLI::PositiveNumber);
  tables_cmd->add_option("--n", tables.n, "Hypotheses per replication")->check(CLI::PositiveNumber);
  tables_cmd->add_option("--alpha", tables.alpha, "Level")->check(CLI::Range(0.0, 1.0));
  tables_cmd->add_option("--beta", tables.beta, "Trim order per tail")->check(CLI::Range(0.0, 0.5));
  tables_cmd->add_option("--seed", tables.seed, "Master seed")->envname("EQUITEST_SEED");
  tables_cmd->add_option("--workers", tables.workers, "Worker threads")
      ->envname("EQUITEST_WORKERS")
      ->check(CLI::PositiveNumber);
  tables_cmd->add_option("--out", tables.out, "Output directory");
  tables_cmd->add_option("--mode", tables.mode, "empirical | theoretical");

  PowerArgs power;
  auto* power_cmd = app.add_subcommand("power", "Conditional or expected power / type II curves");
  power_cmd->add_option("--config", power.config, "Flat key=value file; flags take precedence");
  power_cmd->add_option("--tau-grid", power.taus, "Signal scale grid")->delimiter(',');
  power_cmd->add_option("--q1", power.q1, "Shared factor Q1 value");
  power_cmd->add_option("--q2", power.q2, "Shared factor Q2 value");
  auto* expected_flag = power_cmd->add_flag("--expected", power.expected, "Integrate over (Q1, Q2) by quadrature");
  power_cmd->get_option("--q1")->excludes(expected_flag);
  power_cmd->get_option("--q2")->excludes(expected_flag);
  power_cmd->add_option("--alpha", power.alpha, "Level")->check(CLI::Range(0.0, 1.0));
  power_cmd->add_option("--rho", power.rho, "Sets rho1 = rho2");
  power_cmd->add_option("--rho1", power.rho1, "Observation correlation");
  power_cmd->add_option("--rho2", power.rho2, "Prior correlation");
  power_cmd->add_option("--sigma-eps", power.sigma_eps, "Observation scale");
  power_cmd->add_option("--sigma0", power.sigma0, "Null prior scale");
  power_cmd->add_option("--nodes", power.nodes, "Gauss-Hermite nodes per axis")->check(CLI::Range(64, 400));
  power_cmd->add_option("--mode", power.mode, "Cutoff mode (theoretical)");
  power_cmd->add_option("--out", power.out, "Output CSV (default: stdout)");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Run the invariant / oracle checks");
  verify_cmd->add_flag("--quick", verify.quick, "Reduced draw counts");
  verify_cmd->add_option("--seed", verify.seed, "Seed for the Monte Carlo checks")->envname("EQUITEST_SEED");
  verify_cmd->add_option("--inject-rho1", verify.inject_rho1, "Test hook: override rho1 of the base model")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*tables_cmd) {
      apply_config_file(tables_cmd, tables.config);
      return run_tables(tables);
    }
    if (*power_cmd) {
      apply_config_file(power_cmd, power.config);
      return run_power(power);
    }
    if (*verify_cmd) return run_verify(verify);
  } catch (const equitest::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const equitest::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const equitest::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitVerifyFailed;
  }
  return kExitUsage;
}
