#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dsst/adversary.hpp"
#include "dsst/compress.hpp"
#include "dsst/decoder.hpp"
#include "dsst/detect.hpp"
#include "dsst/graph.hpp"
#include "dsst/model.hpp"
#include "dsst/tracker.hpp"
#include "dsst/types.hpp"

namespace dsst {

struct Scenario {
  LtiSystem sys;
  CommGraph graph;
  CompressionMatrix compression;
  int s = 0;
  Vector x0;
  AttackPlan attack;
  long horizon = 0;
  std::optional<TrackerGains> gains;  // nullopt selects gains from the graph
  double epsilon = 1e-6;              // sanity-check tolerance
  std::uint64_t seed = 0;
  int decode_cadence = 1;  // decode every k-th step once windows are warm
  bool force = false;      // run even when a validator fails
};

struct ValidationReport {
  struct Item {
    std::string name;
    bool pass = false;
    std::string detail;
  };
  std::vector<Item> items;
  TrackerGains gains;  // resolved gains (selected or explicit)
  double sampling_margin = std::numeric_limits<double>::quiet_NaN();
  double max_spectral_radius = std::numeric_limits<double>::quiet_NaN();
  int detectability_index = std::numeric_limits<int>::min();

  bool all_pass() const {
    for (const Item& item : items)
      if (!item.pass) return false;
    return true;
  }
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

namespace detail {

inline std::string complex_to_string(Complex z) {
  return std::to_string(z.real()) + (z.imag() < 0 ? "-" : "+") +
         std::to_string(std::abs(z.imag())) + "i";
}

}  // namespace detail

// Runs every pre-flight check a scenario must pass: connectivity, the
// sampling-rate condition, the solvability gate, compression certification,
// attack-plan sanity, and closed-loop gain stability.
inline ValidationReport validate_scenario(const Scenario& sc) {
  ValidationReport report;
  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    report.items.push_back({name, pass, detail});
  };

  const bool connected = check_connected(sc.graph);
  add("connectivity", connected, connected ? "graph connected" : "graph not connected");

  try {
    const SamplingRateReport rate = check_sampling_rate(sc.sys, sc.graph.spectrum());
    report.sampling_margin = rate.min_margin;
    add("sampling_rate", rate.pass,
        "min margin " + std::to_string(rate.min_margin) + " at eigenvalue " +
            detail::complex_to_string(rate.worst_eig_a));
  } catch (const Error& err) {
    add("sampling_rate", false, err.what());
  }

  try {
    const DetectabilityReport det = sparse_detectability_index(sc.sys);
    report.detectability_index = det.index;
    const bool solvable = det.index >= 2 * sc.s;
    add("solvability", solvable,
        "sparse detectability index " + std::to_string(det.index) +
            (solvable ? " >= " : " < ") + std::to_string(2 * sc.s));
  } catch (const Error& err) {
    add("solvability", false, err.what());
  }

  try {
    const SparseDetectabilityResult cert =
        is_sparse_detectable_wrt(sc.sys, sc.compression.d, 2 * sc.s);
    std::string detail = "v = " + std::to_string(sc.compression.v());
    if (!cert.detectable && cert.witness) {
      detail = "erasure subset {";
      for (std::size_t i = 0; i < cert.witness->nodes.size(); ++i)
        detail += (i ? "," : "") + std::to_string(cert.witness->nodes[i] + 1);
      detail += "} breaks detectability";
    }
    add("compression_certification", cert.detectable, detail);
  } catch (const Error& err) {
    add("compression_certification", false, err.what());
  }

  try {
    validate_attack_plan(sc.attack, sc.sys, sc.s);
    add("attack_plan", true,
        "support size " + std::to_string(sc.attack.attacks.size()) + " <= s");
  } catch (const Error& err) {
    add("attack_plan", false, err.what());
  }

  try {
    report.gains = sc.gains ? *sc.gains : select_gains(sc.graph);
    const GainStabilityReport stability =
        verify_gain_stability(sc.sys, sc.graph, report.gains);
    report.max_spectral_radius = stability.max_spectral_radius;
    add("gain_stability", stability.stable,
        "max closed-loop spectral radius " + std::to_string(stability.max_spectral_radius));
  } catch (const Error& err) {
    add("gain_stability", false, err.what());
  }

  return report;
}

struct NodeRecord {
  std::optional<double> w_err;
  std::optional<double> x_err;
  std::optional<bool> sanity_pass;
  std::optional<double> sanity_residual;
  std::optional<std::vector<int>> decoded_support;
};

struct StepRecord {
  long t = 0;
  Vector x;  // true state
  Vector y;  // per-node measurements (attacks included)
  std::optional<double> z1_err;
  std::optional<double> z2_norm;
  std::optional<Vector> z1_hat;  // aggregate-coordinate error vector
  std::vector<NodeRecord> nodes;
};

struct ScenarioTrace {
  std::vector<StepRecord> steps;
  bool diverged = false;
  ValidationReport validation;
  std::optional<double> alpha_w;   // fitted decay of the worst-node tracking error
  std::optional<double> alpha_x;   // fitted decay of the worst-node state error
  std::optional<double> alpha_z1;
  std::optional<double> alpha_z2;
  std::optional<double> final_max_w_err;
  std::optional<double> final_max_x_err;
};

// Least-squares slope of log(error) over the window where the series sits in
// [1e-12, initial/10]; falls back to all samples above the numeric floor when
// the series never decays below initial/10 (a constant series fits to 1.0).
inline double fit_decay_rate(const std::vector<double>& errors) {
  if (errors.size() < 2) throw Error("fit_decay_rate: series too short");
  const double initial = errors.front();
  if (!(initial > 0.0) || !std::isfinite(initial))
    throw Error("fit_decay_rate: series must start positive");
  auto collect = [&](double upper) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < errors.size(); ++i) {
      if (!(errors[i] >= 0.0) || !std::isfinite(errors[i]))
        throw Error("fit_decay_rate: series must be nonnegative and finite");
      if (errors[i] >= 1e-12 && errors[i] <= upper)
        pts.emplace_back(static_cast<double>(i), std::log(errors[i]));
    }
    return pts;
  };
  std::vector<std::pair<double, double>> pts = collect(initial / 10.0);
  if (pts.size() < 2) pts = collect(std::numeric_limits<double>::infinity());
  if (pts.size() < 2) throw Error("fit_decay_rate: series hits the numeric floor immediately");
  double st = 0.0, se = 0.0, stt = 0.0, ste = 0.0;
  for (const auto& [t, loge] : pts) {
    st += t;
    se += loge;
    stt += t * t;
    ste += t * loge;
  }
  const double count = static_cast<double>(pts.size());
  const double slope = (count * ste - st * se) / (count * stt - st * st);
  return std::exp(slope);
}

namespace detail {

// phi_i stacks v blocks; block j is d_ji * Z_i.
inline std::vector<Vector> build_inputs(const Matrix& d,
                                        const std::vector<MeasurementWindow>& windows, int n) {
  const int p = static_cast<int>(windows.size());
  const int v = static_cast<int>(d.rows());
  std::vector<Vector> phi(p);
  for (int i = 0; i < p; ++i) {
    const Vector z = windows[i].values();
    phi[i].resize(v * n);
    for (int j = 0; j < v; ++j) phi[i].segment(j * n, n) = d(j, i) * z;
  }
  return phi;
}

inline std::optional<double> guarded_fit(const std::vector<double>& series) {
  try {
    return fit_decay_rate(series);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace detail

// Synchronous-round simulation: advance the plant, spoof measurements, fill
// windows, run sanity checks, one tracker round per sample, decode on the
// configured cadence, and record everything.  Deterministic for a fixed
// scenario.  Tracker and decoder outputs only exist after the n-step warm-up
// that fills the measurement windows.
inline ScenarioTrace run_scenario(const Scenario& sc) {
  const int n = sc.sys.n();
  const int p = sc.sys.p();
  if (sc.x0.size() != n) throw DimensionError("run_scenario: x0 must have n entries");
  if (sc.graph.size() != p) throw DimensionError("run_scenario: graph size must equal p");
  if (sc.compression.d.cols() != p)
    throw DimensionError("run_scenario: compression matrix must have p columns");
  if (sc.horizon < 0) throw Error("run_scenario: negative horizon");
  if (sc.decode_cadence < 1) throw Error("run_scenario: decode cadence must be >= 1");

  ScenarioTrace trace;
  trace.validation = validate_scenario(sc);
  if (!trace.validation.all_pass() && !sc.force) {
    std::string failed;
    for (const ValidationReport::Item& item : trace.validation.items)
      if (!item.pass) failed += (failed.empty() ? "" : ", ") + item.name + " (" + item.detail + ")";
    throw ValidationError("run_scenario: validators failed: " + failed);
  }
  const TrackerGains gains = trace.validation.gains;
  const int v = sc.compression.v();

  Vector x = sc.x0;
  std::vector<MeasurementWindow> windows;
  windows.reserve(p);
  for (int i = 0; i < p; ++i) windows.emplace_back(i, n);
  std::vector<NodeState> states;
  std::vector<Vector> phi_prev;
  bool tracker_live = false;

  std::vector<double> w_series, x_series, z1_series, z2_series;

  for (long t = 0; t < sc.horizon; ++t) {
    if (t > 0) x = sc.sys.A() * x;
    const Vector e = generate_attack(sc.attack, sc.sys, x, t);
    const Vector y = sc.sys.C() * x + e;

    std::vector<Vector> prev_window_vals;
    const bool was_full = windows[0].full();
    if (was_full) {
      prev_window_vals.reserve(p);
      for (int i = 0; i < p; ++i) prev_window_vals.push_back(windows[i].values());
    }
    for (int i = 0; i < p; ++i) windows[i].push(y(i));

    StepRecord rec;
    rec.t = t;
    rec.x = x;
    rec.y = y;
    rec.nodes.resize(p);

    if (windows[0].full()) {
      const std::vector<Vector> phi = detail::build_inputs(sc.compression.d, windows, n);
      if (!tracker_live) {
        states = tracker_init(sc.graph, v * n);
        for (int i = 0; i < p; ++i) states[i].window = windows[i];
        tracker_live = true;
      } else {
        states = tracker_step(states, phi_prev, sc.graph, gains, sc.sys.A_hat());
        for (int i = 0; i < p; ++i) {
          states[i].window = windows[i];
          const SanityResult sanity = local_sanity_check(prev_window_vals[i],
                                                         windows[i].values(),
                                                         sc.sys.A_hat(), sc.epsilon);
          rec.nodes[i].sanity_pass = sanity.pass;
          rec.nodes[i].sanity_residual = sanity.residual;
        }
      }

      const DecompositionDiagnostics diag = decomposition_diagnostics(states, phi);
      rec.z1_err = diag.z1_target_error;
      rec.z2_norm = diag.z2_norm;
      rec.z1_hat = diag.z1 - diag.z1_target;
      z1_series.push_back(diag.z1_target_error);
      z2_series.push_back(diag.z2_norm);

      Vector avg = Vector::Zero(v * n);
      for (const Vector& f : phi) avg += f;
      avg /= static_cast<double>(p);
      double max_w_err = 0.0;
      for (int i = 0; i < p; ++i) {
        const double w_err = (states[i].w - avg).norm();
        rec.nodes[i].w_err = w_err;
        max_w_err = std::max(max_w_err, w_err);
      }
      w_series.push_back(max_w_err);
      trace.final_max_w_err = max_w_err;

      if (t >= n && (t - n) % sc.decode_cadence == 0) {
        double max_x_err = 0.0;
        for (int i = 0; i < p; ++i) {
          const DecodeResult decoded = ssr_decode(states[i].w, sc.sys, sc.compression, sc.s);
          const double x_err = (decoded.x_hat_now - x).norm();
          rec.nodes[i].x_err = x_err;
          rec.nodes[i].decoded_support = decoded.support;
          max_x_err = std::max(max_x_err, x_err);
        }
        x_series.push_back(max_x_err);
        trace.final_max_x_err = max_x_err;
      }
      phi_prev = phi;
    }

    double magnitude = x.cwiseAbs().maxCoeff();
    if (tracker_live)
      for (const NodeState& st : states)
        magnitude = std::max(magnitude, st.w.cwiseAbs().maxCoeff());
    const bool finite = x.allFinite() &&
                        (!tracker_live || std::all_of(states.begin(), states.end(),
                                                      [](const NodeState& st) {
                                                        return st.w.allFinite() &&
                                                               st.b.allFinite();
                                                      }));
    trace.steps.push_back(std::move(rec));
    if (!finite || magnitude > 1e12) {
      trace.diverged = true;
      break;
    }
  }

  trace.alpha_w = detail::guarded_fit(w_series);
  trace.alpha_x = detail::guarded_fit(x_series);
  trace.alpha_z1 = detail::guarded_fit(z1_series);
  trace.alpha_z2 = detail::guarded_fit(z2_series);
  return trace;
}

}  // namespace dsst
