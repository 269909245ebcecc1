#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsst/config.hpp"
#include "dsst/decoder.hpp"
#include "dsst/sim.hpp"
#include "dsst/trace_io.hpp"
#include "dsst/types.hpp"

namespace dsst {

namespace cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitParseIo = 2;

inline std::string read_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

inline std::string format_vector(const Vector& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += detail::format_double(v(i));
  }
  return s + "]";
}

inline std::string format_matrix_rows(const Matrix& m, const std::string& indent) {
  std::string s;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    s += indent + format_vector(m.row(r).transpose()) + "\n";
  }
  return s;
}

inline std::string format_support(const std::vector<int>& support) {
  std::string s = "{";
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(support[i] + 1);
  }
  return s + "}";
}

inline void print_validation(const ValidationReport& report, std::ostream& out) {
  for (const ValidationReport::Item& item : report.items)
    out << item.name << ": " << (item.pass ? "PASS" : "FAIL") << " (" << item.detail << ")\n";
}

inline int cmd_check(const std::string& config_path, std::ostream& out) {
  const ScenarioConfig config = parse_scenario_config(read_file(config_path));
  const Scenario scenario = build_scenario(config);
  const ValidationReport report = validate_scenario(scenario);
  print_validation(report, out);
  if (report.all_pass()) {
    out << "verdict: solvable\n";
    return kExitOk;
  }
  for (const ValidationReport::Item& item : report.items) {
    if (!item.pass && item.name == "solvability") {
      out << "verdict: not solvable (" << item.detail << ")\n";
      return kExitValidation;
    }
  }
  out << "verdict: invalid scenario\n";
  return kExitValidation;
}

inline int cmd_run(const std::string& config_path, const std::string& out_dir, bool force,
                   std::optional<std::uint64_t> seed_override, std::ostream& out) {
  ScenarioConfig config = parse_scenario_config(read_file(config_path));
  if (seed_override) config.seed = *seed_override;
  Scenario scenario = build_scenario(config);
  scenario.force = force;
  const ScenarioTrace trace = run_scenario(scenario);

  std::optional<double> beta;
  std::string beta_error;
  try {
    beta = error_bound_beta(scenario.sys, scenario.compression, scenario.s);
  } catch (const Error& err) {
    beta_error = err.what();
  }

  std::filesystem::create_directories(out_dir);
  const auto trace_path = std::filesystem::path(out_dir) / config.trace_path;
  const auto summary_path = std::filesystem::path(out_dir) / config.summary_path;
  write_trace_csv(trace, trace_path.string());
  write_summary(trace, beta, beta_error, summary_path.string());

  print_validation(trace.validation, out);
  out << "steps: " << trace.steps.size() << (trace.diverged ? " (diverged)" : "") << "\n";
  if (trace.final_max_w_err)
    out << "final max tracking error: " << detail::format_double(*trace.final_max_w_err) << "\n";
  if (trace.final_max_x_err)
    out << "final max state error: " << detail::format_double(*trace.final_max_x_err) << "\n";
  if (trace.alpha_w)
    out << "fitted tracking decay rate: " << detail::format_double(*trace.alpha_w) << "\n";
  if (beta)
    out << "decode amplification bound beta: " << detail::format_double(*beta) << "\n";
  else
    out << "decode amplification bound beta: unavailable (" << beta_error << ")\n";
  out << "trace: " << trace_path.string() << "\n";
  out << "summary: " << summary_path.string() << "\n";
  return kExitOk;
}

inline int cmd_design_d(const std::string& config_path, const std::string& out_dir,
                        std::optional<std::uint64_t> seed_override, std::ostream& out) {
  ScenarioConfig config = parse_scenario_config(read_file(config_path));
  if (seed_override) config.design_seed = *seed_override;
  Matrix a = config.a_continuous ? discretize(*config.a_continuous, config.tau) : *config.a;
  LtiSystem sys(std::move(a), config.c);

  CompressionMatrix compression;
  switch (config.mode) {
    case CompressionMode::kIdentity:
      compression = identity_compression(sys, config.s);
      break;
    case CompressionMode::kGiven:
      compression = validate_compression(sys, *config.d, config.s);
      break;
    case CompressionMode::kDesign:
      compression =
          design_compression(sys, config.s, config.design_seed, config.design_max_tries);
      break;
  }
  out << "certified D (v = " << compression.v() << ", s = " << compression.certified_s << "):\n";
  out << format_matrix_rows(compression.d, "  ");

  const double beta = error_bound_beta(sys, compression, config.s);
  out << "decode amplification bound beta: " << detail::format_double(beta) << "\n";

  std::filesystem::create_directories(out_dir);
  const auto design_path = std::filesystem::path(out_dir) / "design_d.json";
  cfg::ordered_json doc;
  doc["version"] = 1;
  doc["D"] = cfg::emit_matrix(compression.d);
  doc["v"] = compression.v();
  doc["s"] = compression.certified_s;
  doc["beta"] = beta;
  std::ofstream file(design_path);
  if (!file) throw ConfigError("cannot open " + design_path.string());
  file << doc.dump(2) << "\n";
  out << "written: " << design_path.string() << "\n";
  return kExitOk;
}

inline int cmd_decode(const std::string& config_path, std::ostream& out) {
  const DecodeInput input = parse_decode_input(read_file(config_path));
  Matrix a = input.a_continuous ? discretize(*input.a_continuous, input.tau) : *input.a;
  LtiSystem sys(std::move(a), input.c);
  CompressionMatrix compression;
  switch (input.mode) {
    case CompressionMode::kIdentity:
      compression = identity_compression(sys, input.s);
      break;
    case CompressionMode::kGiven:
      compression = validate_compression(sys, *input.d, input.s);
      break;
    case CompressionMode::kDesign:
      compression = design_compression(sys, input.s, input.design_seed, input.design_max_tries);
      break;
  }
  const DecodeResult result = ssr_decode(input.w, sys, compression, input.s);
  out << "x_hat: " << format_vector(result.x_hat) << "\n";
  out << "x_hat_now: " << format_vector(result.x_hat_now) << "\n";
  out << "support: " << format_support(result.support) << "\n";
  out << "residual: " << detail::format_double(result.residual) << "\n";
  out << "residuals_by_support:\n";
  for (const auto& [support, residual] : result.residual_table)
    out << "  " << format_support(support) << ": " << detail::format_double(residual) << "\n";
  return kExitOk;
}

}  // namespace cli

// Entry point shared by the binary and the tests.  Exit codes: 0 success,
// 1 validation/analysis failure, 2 parse or I/O failure.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"decentralized secure state tracking: scenario checks, runs, and decoding"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  bool force = false;
  std::optional<std::uint64_t> seed_override;
  std::uint64_t seed_value = 0;

  CLI::App* check = app.add_subcommand("check", "validate a scenario and print the report");
  check->add_option("--config", config_path, "scenario config path")->required();

  CLI::App* run = app.add_subcommand("run", "simulate a scenario; write trace and summary");
  run->add_option("--config", config_path, "scenario config path")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--force", force, "run even when validators fail");
  CLI::Option* run_seed = run->add_option("--seed", seed_value, "override run.seed");

  CLI::App* design = app.add_subcommand("design-d", "certify or search a compression matrix");
  design->add_option("--config", config_path, "scenario config path")->required();
  design->add_option("--out", out_dir, "output directory");
  CLI::Option* design_seed = design->add_option("--seed", seed_value, "override compression.seed");

  CLI::App* decode = app.add_subcommand("decode", "decode a serialized tracked estimate");
  decode->add_option("--config", config_path, "decode input path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    out << app.help();
    return cli::kExitOk;
  } catch (const CLI::ParseError& parse_err) {
    err << "error: " << parse_err.what() << "\n";
    return cli::kExitParseIo;
  }
  if (run_seed->count() > 0 || design_seed->count() > 0) seed_override = seed_value;

  try {
    if (check->parsed()) return cli::cmd_check(config_path, out);
    if (run->parsed()) return cli::cmd_run(config_path, out_dir, force, seed_override, out);
    if (design->parsed()) return cli::cmd_design_d(config_path, out_dir, seed_override, out);
    if (decode->parsed()) return cli::cmd_decode(config_path, out);
  } catch (const ConfigError& config_err) {
    err << "error: " << config_err.what() << "\n";
    return cli::kExitParseIo;
  } catch (const Error& lib_err) {
    err << "error: " << lib_err.what() << "\n";
    return cli::kExitValidation;
  }
  return cli::kExitParseIo;
}

inline int cli_main(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  std::vector<const char*> argv;
  argv.push_back("dsst");
  for (const std::string& arg : args) argv.push_back(arg.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace dsst
