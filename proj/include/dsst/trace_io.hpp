#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "dsst/sim.hpp"
#include "dsst/types.hpp"

namespace dsst {

namespace detail {

// Shortest exact decimal form; keeps emitted files byte-reproducible.
inline std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

inline std::string support_cell(const std::vector<int>& support) {
  std::string cell;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (i) cell += "|";
    cell += std::to_string(support[i] + 1);
  }
  return cell;
}

}  // namespace detail

// One row per (step, node); empty cells where the value does not exist yet
// (warm-up) or the step skipped decoding.  Node ids are 1-based.
inline void write_trace_csv(const ScenarioTrace& trace, std::ostream& out) {
  out << "t,node,w_err,x_err,sanity_pass,sanity_residual,z1_err,z2_norm,decoded_support\n";
  for (const StepRecord& step : trace.steps) {
    for (std::size_t i = 0; i < step.nodes.size(); ++i) {
      const NodeRecord& node = step.nodes[i];
      out << step.t << ',' << (i + 1) << ',';
      if (node.w_err) out << detail::format_double(*node.w_err);
      out << ',';
      if (node.x_err) out << detail::format_double(*node.x_err);
      out << ',';
      if (node.sanity_pass) out << (*node.sanity_pass ? 1 : 0);
      out << ',';
      if (node.sanity_residual) out << detail::format_double(*node.sanity_residual);
      out << ',';
      if (step.z1_err) out << detail::format_double(*step.z1_err);
      out << ',';
      if (step.z2_norm) out << detail::format_double(*step.z2_norm);
      out << ',';
      if (node.decoded_support) out << detail::support_cell(*node.decoded_support);
      out << '\n';
    }
  }
}

inline void write_trace_csv(const ScenarioTrace& trace, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw Error("write_trace_csv: cannot open " + path);
  write_trace_csv(trace, file);
}

// Run summary: validator outcomes, resolved gains, fitted decay rates, final
// errors, and the decoding error-amplification bound (or why it is
// unavailable).
inline nlohmann::ordered_json summary_json(const ScenarioTrace& trace,
                                           const std::optional<double>& beta,
                                           const std::string& beta_error = "") {
  nlohmann::ordered_json summary;
  summary["version"] = 1;
  nlohmann::ordered_json validators;
  for (const ValidationReport::Item& item : trace.validation.items) {
    validators[item.name] = {{"pass", item.pass}, {"detail", item.detail}};
  }
  summary["validators"] = validators;
  if (trace.validation.detectability_index != std::numeric_limits<int>::min())
    summary["sparse_detectability_index"] = trace.validation.detectability_index;
  summary["gains"] = {{"k_p", trace.validation.gains.k_p},
                      {"k_i", trace.validation.gains.k_i}};
  if (std::isfinite(trace.validation.max_spectral_radius))
    summary["max_spectral_radius"] = trace.validation.max_spectral_radius;
  auto rate = [](const std::optional<double>& r) {
    return r ? nlohmann::ordered_json(*r) : nlohmann::ordered_json(nullptr);
  };
  summary["fitted_alpha"] = {{"w_err", rate(trace.alpha_w)},
                             {"x_err", rate(trace.alpha_x)},
                             {"z1_err", rate(trace.alpha_z1)},
                             {"z2_norm", rate(trace.alpha_z2)}};
  summary["final"] = {{"steps", trace.steps.size()},
                      {"max_w_err", rate(trace.final_max_w_err)},
                      {"max_x_err", rate(trace.final_max_x_err)}};
  if (beta)
    summary["beta"] = *beta;
  else
    summary["beta_error"] = beta_error;
  summary["diverged"] = trace.diverged;
  return summary;
}

inline void write_summary(const ScenarioTrace& trace, const std::optional<double>& beta,
                          const std::string& beta_error, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw Error("write_summary: cannot open " + path);
  file << summary_json(trace, beta, beta_error).dump(2) << '\n';
}

}  // namespace dsst
