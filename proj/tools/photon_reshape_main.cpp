#include <CLI11.hpp>

#include <iostream>

#include "photon_reshape/photon_reshape.hpp"

namespace pr = photon_reshape;

namespace {

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const pr::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const pr::numerics_error& e) {
    std::cerr << "numerical consistency failure: " << e.what() << "\n";
    return 3;
  } catch (const pr::saturation_error& e) {
    std::cerr << "calibration saturated: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator of single-photon spectral reshaping by cross-phase "
               "modulation in a dispersion-managed fiber"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  int jobs = 1;
  bool emit_svg = false;

  auto* run = app.add_subcommand("run", "run a scenario from a JSON config");
  run->add_option("config", config_path, "scenario configuration (JSON)")->required();
  run->add_option("--jobs", jobs, "worker threads for sweep points")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", out_override, "override the configured output directory");
  run->add_flag("--svg", emit_svg, "also render SVG heatmaps and fringe plots");

  auto* validate = app.add_subcommand("validate", "parse and validate a config");
  validate->add_option("config", config_path, "scenario configuration (JSON)")
      ->required();

  auto* calibrate =
      app.add_subcommand("calibrate", "fit the control peak power to a target shift");
  calibrate->add_option("config", config_path, "scenario configuration (JSON)")
      ->required();
  calibrate->add_option("--out", out_override, "override the configured output directory");

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) {
    return run_guarded([&] {
      pr::load_config(config_path);
      std::cout << "configuration OK\n";
      return 0;
    });
  }

  if (calibrate->parsed()) {
    return run_guarded([&] {
      auto cfg = pr::load_config(config_path);
      if (!(cfg.target_shift_hz > 0.0) && cfg.kind != pr::ScenarioKind::calibrate)
        throw pr::config_error("/calibration/target_shift_thz: required for calibrate");
      cfg.kind = pr::ScenarioKind::calibrate;
      if (!out_override.empty()) cfg.output_dir = out_override;
      auto result = pr::run_scenario(cfg);
      std::cout << result.summary.dump(2) << "\n";
      return 0;
    });
  }

  return run_guarded([&] {
    auto cfg = pr::load_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    auto result = pr::run_scenario(cfg, jobs, emit_svg);
    std::cout << "scenario " << pr::scenario_name(cfg.kind) << " written to "
              << result.output_dir.string() << "\n";
    return 0;
  });
}
