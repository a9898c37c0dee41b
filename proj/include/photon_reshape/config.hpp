#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "photon_reshape/biphoton.hpp"
#include "photon_reshape/errors.hpp"
#include "photon_reshape/fiber.hpp"
#include "photon_reshape/propagate.hpp"

namespace photon_reshape {

using nlohmann::json;

enum class ScenarioKind { fig2_jsi_sweep, fig3_heralded_map, fig4_hom, fig4_bump, calibrate };

inline const char* scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::fig2_jsi_sweep: return "fig2_jsi_sweep";
    case ScenarioKind::fig3_heralded_map: return "fig3_heralded_map";
    case ScenarioKind::fig4_hom: return "fig4_hom";
    case ScenarioKind::fig4_bump: return "fig4_bump";
    case ScenarioKind::calibrate: return "calibrate";
  }
  return "?";
}

/// Fully resolved run configuration. All quantities are SI; the JSON layer
/// carries units in its key names and converts on ingestion.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::fig2_jsi_sweep;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;

  FiberSpec fiber;
  PulseSpec control;             // peak_power ignored when calibrate_power
  bool calibrate_power = false;  // control.peak_power_w == "calibrated"
  bool auto_delay = false;       // control.delay_ps == "max_shift"
  double target_shift_hz = 0.0;  // calibration target
  SpdcSpec spdc;

  int time_points = 4096;
  double time_window = 40e-12;
  int jsa_points = 512;
  double jsa_span_hz = 5e12;

  std::vector<double> sweep_delta_t;   // s, fig2/fig3
  std::vector<double> fringe_delays;   // s, fig4*

  std::optional<FilterSpec> herald;
  FilterSpec scan_template;
  std::vector<double> scan_centers;    // m
  std::optional<FilterSpec> filter_signal;
  std::optional<FilterSpec> filter_idler;

  PropagationConfig solver;
  double accidental_fraction = 0.0;

  std::string canonical_text;  // sorted-key dump used for the config hash
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& what) {
  throw config_error(path + ": " + what);
}

inline void expect_keys(const json& j, const std::string& path,
                        const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) config_fail(path + "/" + key, "unknown key");
}

inline const json* find(const json& j, const std::string& key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

inline double require_number(const json& j, const std::string& path,
                             const std::string& key) {
  const json* v = find(j, key);
  if (!v) config_fail(path + "/" + key, "missing required number");
  if (!v->is_number()) config_fail(path + "/" + key, "expected a number");
  return v->get<double>();
}

inline double optional_number(const json& j, const std::string& path,
                              const std::string& key, double fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number()) config_fail(path + "/" + key, "expected a number");
  return v->get<double>();
}

inline bool optional_bool(const json& j, const std::string& path,
                          const std::string& key, bool fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_boolean()) config_fail(path + "/" + key, "expected a boolean");
  return v->get<bool>();
}

inline std::string require_string(const json& j, const std::string& path,
                                  const std::string& key) {
  const json* v = find(j, key);
  if (!v) config_fail(path + "/" + key, "missing required string");
  if (!v->is_string()) config_fail(path + "/" + key, "expected a string");
  return v->get<std::string>();
}

inline std::vector<double> number_list(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) config_fail(path, "expected a non-empty array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) config_fail(path, "expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

/// Accepts either an explicit array or {"from": a, "to": b, "step": s} /
/// {"from": a, "to": b, "count": n} range descriptions.
inline std::vector<double> sweep_values(const json& j, const std::string& path) {
  if (j.is_array()) return number_list(j, path);
  if (!j.is_object()) config_fail(path, "expected an array or a range object");
  expect_keys(j, path, {"from", "to", "step", "count"});
  const double from = require_number(j, path, "from");
  const double to = require_number(j, path, "to");
  std::vector<double> out;
  if (find(j, "count")) {
    const double count = require_number(j, path, "count");
    const int n = static_cast<int>(count);
    if (n < 2 || count != n) config_fail(path + "/count", "expected an integer >= 2");
    for (int i = 0; i < n; ++i) out.push_back(from + (to - from) * i / (n - 1));
  } else {
    const double step = require_number(j, path, "step");
    if (!(step > 0.0)) config_fail(path + "/step", "expected a positive step");
    for (double v = from; v <= to + 0.5 * step; v += step) out.push_back(v);
  }
  if (out.empty()) config_fail(path, "range produced no values");
  return out;
}

inline FilterSpec parse_filter(const json& j, const std::string& path) {
  expect_keys(j, path, {"center_nm", "width_nm", "shape", "centers_nm"});
  FilterSpec f;
  f.center = optional_number(j, path, "center_nm", 1512.0) * nm;
  f.width = optional_number(j, path, "width_nm", 0.4) * nm;
  const json* shape = find(j, "shape");
  if (shape) {
    const std::string s = shape->get<std::string>();
    if (s == "rectangular")
      f.shape = FilterShape::rectangular;
    else if (s == "gaussian")
      f.shape = FilterShape::gaussian;
    else
      config_fail(path + "/shape", "expected 'rectangular' or 'gaussian'");
  }
  try {
    f.validate();
  } catch (const std::exception& e) {
    config_fail(path, e.what());
  }
  return f;
}

}  // namespace detail

/// Parses and validates a scenario configuration document.
inline ScenarioConfig parse_config(const std::string& text) {
  using detail::config_fail;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // translate the byte offset into line:column for a line-precise message
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw config_error("config parse error at line " + std::to_string(line) +
                       ", column " + std::to_string(col) + ": " + e.what());
  }
  if (!root.is_object()) throw config_error("config root must be an object");

  detail::expect_keys(root, "", {"scenario", "seed", "output_dir", "fiber", "control",
                                 "calibration", "spdc", "grids", "sweep", "filters",
                                 "solver", "accidental_background_fraction"});

  ScenarioConfig cfg;
  const std::string kind = detail::require_string(root, "", "scenario");
  if (kind == "fig2_jsi_sweep")
    cfg.kind = ScenarioKind::fig2_jsi_sweep;
  else if (kind == "fig3_heralded_map")
    cfg.kind = ScenarioKind::fig3_heralded_map;
  else if (kind == "fig4_hom")
    cfg.kind = ScenarioKind::fig4_hom;
  else if (kind == "fig4_bump")
    cfg.kind = ScenarioKind::fig4_bump;
  else if (kind == "calibrate")
    cfg.kind = ScenarioKind::calibrate;
  else
    config_fail("/scenario", "unknown scenario '" + kind + "'");

  const double seed = detail::optional_number(root, "", "seed", 0.0);
  if (seed < 0.0 || seed != std::floor(seed))
    config_fail("/seed", "expected a non-negative integer");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.output_dir = detail::require_string(root, "", "output_dir");

  // fiber
  {
    const json* j = detail::find(root, "fiber");
    if (!j) config_fail("/fiber", "missing section");
    detail::expect_keys(*j, "/fiber",
                        {"length_m", "gamma_control_per_w_m", "gamma_signal_per_w_m",
                         "xpm_factor", "transmission", "group_delay"});
    cfg.fiber.length = detail::optional_number(*j, "/fiber", "length_m", 1.0);
    cfg.fiber.gamma_control =
        detail::optional_number(*j, "/fiber", "gamma_control_per_w_m", 0.018);
    cfg.fiber.gamma_signal =
        detail::optional_number(*j, "/fiber", "gamma_signal_per_w_m", 0.0075);
    cfg.fiber.xpm_factor = detail::optional_number(*j, "/fiber", "xpm_factor", 2.0);
    cfg.fiber.transmission =
        detail::optional_number(*j, "/fiber", "transmission", 1.0);
    const json* gd = detail::find(*j, "group_delay");
    if (gd) {
      detail::expect_keys(*gd, "/fiber/group_delay",
                          {"bundled", "csv_path", "fit_degree"});
      const bool bundled =
          detail::optional_bool(*gd, "/fiber/group_delay", "bundled", false);
      const json* csv = detail::find(*gd, "csv_path");
      if (bundled == (csv != nullptr))
        config_fail("/fiber/group_delay",
                    "specify exactly one of 'bundled: true' or 'csv_path'");
      if (csv) {
        const double degree =
            detail::optional_number(*gd, "/fiber/group_delay", "fit_degree", 6.0);
        try {
          auto samples = read_group_delay_csv_file(csv->get<std::string>());
          cfg.fiber.delay_curve =
              fit_group_delay(samples, static_cast<int>(degree)).curve;
        } catch (const std::exception& e) {
          config_fail("/fiber/group_delay/csv_path", e.what());
        }
      }
    }
    try {
      cfg.fiber.validate();
    } catch (const std::exception& e) {
      config_fail("/fiber", e.what());
    }
  }

  // control pulse
  {
    const json* j = detail::find(root, "control");
    if (!j) config_fail("/control", "missing section");
    detail::expect_keys(*j, "/control",
                        {"shape", "fwhm_ps", "wavelength_nm", "peak_power_w",
                         "delay_ps"});
    const std::string shape =
        detail::find(*j, "shape") ? (*j)["shape"].get<std::string>() : "gaussian";
    if (shape == "gaussian")
      cfg.control.shape = PulseShape::gaussian;
    else if (shape == "sech")
      cfg.control.shape = PulseShape::sech;
    else
      config_fail("/control/shape", "expected 'gaussian' or 'sech'");
    cfg.control.fwhm = detail::optional_number(*j, "/control", "fwhm_ps", 0.78) * ps;
    cfg.control.wavelength =
        detail::optional_number(*j, "/control", "wavelength_nm", 756.0) * nm;

    const json* power = detail::find(*j, "peak_power_w");
    if (!power) config_fail("/control/peak_power_w", "missing (number or 'calibrated')");
    if (power->is_string()) {
      if (power->get<std::string>() != "calibrated")
        config_fail("/control/peak_power_w", "expected a number or 'calibrated'");
      cfg.calibrate_power = true;
      cfg.control.peak_power = 0.0;
    } else if (power->is_number()) {
      cfg.control.peak_power = power->get<double>();
    } else {
      config_fail("/control/peak_power_w", "expected a number or 'calibrated'");
    }

    const json* delay = detail::find(*j, "delay_ps");
    if (delay && delay->is_string()) {
      if (delay->get<std::string>() != "max_shift")
        config_fail("/control/delay_ps", "expected a number or 'max_shift'");
      cfg.auto_delay = true;
      cfg.control.delay = 0.0;
    } else {
      cfg.control.delay = detail::optional_number(*j, "/control", "delay_ps", 0.0) * ps;
    }
    try {
      PulseSpec probe = cfg.control;
      probe.peak_power = std::max(probe.peak_power, 0.0);
      probe.validate();
    } catch (const std::exception& e) {
      config_fail("/control", e.what());
    }
  }

  // calibration
  {
    const json* j = detail::find(root, "calibration");
    if (j) {
      detail::expect_keys(*j, "/calibration", {"target_shift_thz"});
      cfg.target_shift_hz =
          detail::require_number(*j, "/calibration", "target_shift_thz") * thz;
      if (cfg.target_shift_hz < 0.0)
        config_fail("/calibration/target_shift_thz", "must be >= 0");
    }
    if ((cfg.calibrate_power || cfg.kind == ScenarioKind::calibrate) && !j)
      config_fail("/calibration",
                  "required when peak_power_w is 'calibrated' or scenario is 'calibrate'");
  }

  // spdc
  {
    const json* j = detail::find(root, "spdc");
    if (!j) config_fail("/spdc", "missing section");
    detail::expect_keys(*j, "/spdc",
                        {"pump_center_nm", "pump_bandwidth_rad_per_s",
                         "crystal_length_mm", "gvm_pump_signal_ps_per_mm",
                         "gvm_pump_idler_ps_per_mm", "mismatch_offset_per_m",
                         "degenerate_wavelength_nm"});
    cfg.spdc.pump_center =
        detail::optional_number(*j, "/spdc", "pump_center_nm", 756.0) * nm;
    cfg.spdc.pump_bandwidth =
        detail::optional_number(*j, "/spdc", "pump_bandwidth_rad_per_s", 2.0e12);
    cfg.spdc.crystal_length =
        detail::optional_number(*j, "/spdc", "crystal_length_mm", 10.0) * mm;
    // ps/mm -> s/m: 1e-12 / 1e-3
    cfg.spdc.gvm_ps =
        detail::optional_number(*j, "/spdc", "gvm_pump_signal_ps_per_mm", 0.11) * 1e-9;
    cfg.spdc.gvm_pi =
        detail::optional_number(*j, "/spdc", "gvm_pump_idler_ps_per_mm", -0.09) * 1e-9;
    cfg.spdc.mismatch_offset =
        detail::optional_number(*j, "/spdc", "mismatch_offset_per_m", 0.0);
    cfg.spdc.degenerate_wavelength =
        detail::optional_number(*j, "/spdc", "degenerate_wavelength_nm", 1512.0) * nm;
    try {
      cfg.spdc.validate();
    } catch (const std::exception& e) {
      config_fail("/spdc", e.what());
    }
  }

  // grids
  {
    const json* j = detail::find(root, "grids");
    if (j) {
      detail::expect_keys(*j, "/grids",
                          {"time_points", "time_window_ps", "jsa_points",
                           "jsa_span_thz"});
      cfg.time_points =
          static_cast<int>(detail::optional_number(*j, "/grids", "time_points", 4096));
      cfg.time_window =
          detail::optional_number(*j, "/grids", "time_window_ps", 40.0) * ps;
      cfg.jsa_points =
          static_cast<int>(detail::optional_number(*j, "/grids", "jsa_points", 512));
      cfg.jsa_span_hz = detail::optional_number(*j, "/grids", "jsa_span_thz", 5.0) * thz;
    }
    if (!is_power_of_two(cfg.time_points) || !is_power_of_two(cfg.jsa_points))
      config_fail("/grids", "grid point counts must be powers of two");
    if (!(cfg.time_window > 0.0) || !(cfg.jsa_span_hz > 0.0))
      config_fail("/grids", "grid spans must be positive");
  }

  // sweep
  {
    const json* j = detail::find(root, "sweep");
    const bool wants_delta_t = (cfg.kind == ScenarioKind::fig2_jsi_sweep ||
                                cfg.kind == ScenarioKind::fig3_heralded_map);
    const bool wants_fringe =
        (cfg.kind == ScenarioKind::fig4_hom || cfg.kind == ScenarioKind::fig4_bump);
    if (!j && (wants_delta_t || wants_fringe)) config_fail("/sweep", "missing section");
    if (j) {
      detail::expect_keys(*j, "/sweep", {"delta_t_ps", "fringe_delay_ps"});
      if (const json* v = detail::find(*j, "delta_t_ps")) {
        cfg.sweep_delta_t = detail::sweep_values(*v, "/sweep/delta_t_ps");
        for (auto& x : cfg.sweep_delta_t) x *= ps;
      }
      if (const json* v = detail::find(*j, "fringe_delay_ps")) {
        cfg.fringe_delays = detail::sweep_values(*v, "/sweep/fringe_delay_ps");
        for (auto& x : cfg.fringe_delays) x *= ps;
        for (size_t i = 1; i < cfg.fringe_delays.size(); ++i)
          if (!(cfg.fringe_delays[i] > cfg.fringe_delays[i - 1]))
            config_fail("/sweep/fringe_delay_ps", "must be strictly increasing");
      }
    }
    if (wants_delta_t && cfg.sweep_delta_t.empty())
      config_fail("/sweep/delta_t_ps", "required for this scenario");
    if (wants_fringe && cfg.fringe_delays.size() < 4)
      config_fail("/sweep/fringe_delay_ps", "need at least 4 delays");
  }

  // filters
  {
    const json* j = detail::find(root, "filters");
    if (j) {
      detail::expect_keys(*j, "/filters", {"herald", "scan", "signal", "idler"});
      if (const json* v = detail::find(*j, "herald"))
        cfg.herald = detail::parse_filter(*v, "/filters/herald");
      if (const json* v = detail::find(*j, "scan")) {
        cfg.scan_template = detail::parse_filter(*v, "/filters/scan");
        const json* centers = detail::find(*v, "centers_nm");
        if (!centers) config_fail("/filters/scan/centers_nm", "missing");
        cfg.scan_centers = detail::sweep_values(*centers, "/filters/scan/centers_nm");
        for (auto& c : cfg.scan_centers) c *= nm;
      }
      if (const json* v = detail::find(*j, "signal"))
        cfg.filter_signal = detail::parse_filter(*v, "/filters/signal");
      if (const json* v = detail::find(*j, "idler"))
        cfg.filter_idler = detail::parse_filter(*v, "/filters/idler");
    }
    if (cfg.kind == ScenarioKind::fig3_heralded_map) {
      if (!cfg.herald) config_fail("/filters/herald", "required for fig3_heralded_map");
      if (cfg.scan_centers.empty())
        config_fail("/filters/scan", "required for fig3_heralded_map");
      // the herald sits at the degenerate wavelength in this experiment
      if (std::abs(cfg.herald->center - cfg.spdc.degenerate_wavelength) > 2.0 * nm)
        config_fail("/filters/herald/center_nm",
                    "must sit at the degenerate wavelength (within 2 nm)");
    }
  }

  // solver
  {
    const json* j = detail::find(root, "solver");
    if (j) {
      detail::expect_keys(*j, "/solver",
                          {"z_steps", "scheme", "include_control_dispersion",
                           "include_spm"});
      cfg.solver.z_steps =
          static_cast<int>(detail::optional_number(*j, "/solver", "z_steps", 64.0));
      const json* scheme = detail::find(*j, "scheme");
      if (scheme) {
        const std::string s = scheme->get<std::string>();
        if (s == "lumped")
          cfg.solver.scheme = Scheme::lumped;
        else if (s == "split_step")
          cfg.solver.scheme = Scheme::split_step;
        else
          config_fail("/solver/scheme", "expected 'lumped' or 'split_step'");
      }
      cfg.solver.include_control_dispersion =
          detail::optional_bool(*j, "/solver", "include_control_dispersion", true);
      cfg.solver.include_spm =
          detail::optional_bool(*j, "/solver", "include_spm", true);
    }
    try {
      cfg.solver.validate();
    } catch (const std::exception& e) {
      config_fail("/solver", e.what());
    }
  }

  cfg.accidental_fraction =
      detail::optional_number(root, "", "accidental_background_fraction", 0.0);
  if (cfg.accidental_fraction < 0.0)
    config_fail("/accidental_background_fraction", "must be >= 0");

  // cross-section checks that need several sections at once
  if (cfg.time_window < 10.0 * cfg.control.fwhm)
    config_fail("/grids/time_window_ps", "must span at least 10x the control fwhm");
  const double lambda_s = cfg.spdc.degenerate_wavelength;
  if (!cfg.fiber.delay_curve.contains(lambda_s) ||
      !cfg.fiber.delay_curve.contains(cfg.control.wavelength))
    config_fail("/fiber/group_delay",
                "delay curve does not cover the control and signal wavelengths");

  cfg.canonical_text = root.dump();
  return cfg;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open config file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config(text);
}

}  // namespace photon_reshape
