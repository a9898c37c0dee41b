// Acceptance suite: every criterion below runs at its stated tolerance and
// prints one PASS/FAIL line. The process exits non-zero if any criterion
// fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "photon_reshape/photon_reshape.hpp"

using namespace photon_reshape;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s — %s\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double v) { return format_double(v); }

// --- shared defaults, matching the bundled configs -------------------------

ScenarioConfig default_config(ScenarioKind kind) {
  ScenarioConfig cfg;
  cfg.kind = kind;
  cfg.output_dir = "/tmp/photon_reshape_acceptance";
  cfg.fiber = FiberSpec{1.0, 0.018, 0.0075, 2.0, bundled_group_delay_curve(), 1.0};
  cfg.control = PulseSpec{PulseShape::gaussian, 0.78e-12, 245.0, 756e-9, 0.0};
  cfg.spdc = SpdcSpec{};  // 10 mm crystal, gvm +0.11/-0.09 ps/mm, degenerate 1512 nm
  cfg.time_points = 4096;
  cfg.time_window = 40e-12;
  cfg.jsa_points = 512;
  cfg.jsa_span_hz = 5e12;
  cfg.solver = PropagationConfig{64, Scheme::split_step, true, true};
  cfg.canonical_text = "acceptance";
  return cfg;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    out[static_cast<size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

JointSpectralAmplitude random_smooth_jsa(const SampledGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> center(-1.2e12, 1.2e12);
  std::uniform_real_distribution<double> width(0.35e12, 0.8e12);
  std::normal_distribution<double> coeff(0.0, 1.0);
  MatrixXcd amp = MatrixXcd::Zero(g.n, g.n);
  for (int m = 0; m < 3; ++m) {
    const double as = center(rng), ai = center(rng);
    const double ss = width(rng), si = width(rng);
    const complexd c(coeff(rng), coeff(rng));
    for (int j = 0; j < g.n; ++j) {
      const double ni = g.offset(j) - ai;
      for (int i = 0; i < g.n; ++i) {
        const double ns = g.offset(i) - as;
        amp(i, j) += c * std::exp(-ns * ns / (4.0 * ss * ss)) *
                     std::exp(-ni * ni / (4.0 * si * si));
      }
    }
  }
  JointSpectralAmplitude jsa(g, g, std::move(amp));
  jsa.scale(1.0 / std::sqrt(jsa.total_norm()));
  return jsa;
}

// --- criteria ---------------------------------------------------------------

// 1. Unitary (lossless) conversion across a 21-point delay sweep, < 60 s.
void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  auto cfg = default_config(ScenarioKind::fig2_jsi_sweep);
  ScenarioRuntime rt(cfg);
  auto history = rt.control_history(cfg.control.peak_power);
  const double norm0 = rt.source_state().total_norm();

  double max_dev = 0.0;
  for (double dt : linspace(-2e-12, 2e-12, 21)) {
    auto op = rt.make_operator(history, dt);
    auto out = apply_signal_operator(rt.source_state(), op);
    max_dev = std::max(max_dev, std::abs(out.total_norm() / norm0 - 1.0));
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(1, "lossless conversion across the delay sweep",
         max_dev < 1e-6 && seconds < 60.0,
         "max relative norm deviation " + fmt(max_dev) + " (< 1e-6), runtime " +
             fmt(seconds) + " s (< 60)");
}

// 2. Calibrated maximum blue shift equals 0.4 THz within 1 % at trailing-edge
//    delay.
void criterion_2() {
  auto cfg = default_config(ScenarioKind::calibrate);
  ScenarioRuntime rt(cfg);
  const double target = 0.4e12;
  auto outcome = rt.calibrate(target);

  const double at_star = rt.marginal_shift_hz(outcome.peak_power, outcome.delta_t);
  double max_over_sweep = at_star;
  for (double dt : linspace(-2e-12, 2e-12, 21))
    max_over_sweep =
        std::max(max_over_sweep, rt.marginal_shift_hz(outcome.peak_power, dt));

  const bool within = std::abs(max_over_sweep - target) <= 0.01 * target;
  const bool trailing = outcome.delta_t > 0.0;
  report(2, "calibrated 0.4 THz blue shift at a trailing-edge delay",
         within && trailing,
         "max shift " + fmt(max_over_sweep / 1e12) + " THz (target 0.4 +/- 1%), "
         "achieving delay " + fmt(outcome.delta_t * 1e12) + " ps (> 0), power " +
             fmt(outcome.peak_power) + " W");
}

// 3. Identity limits: dark control, and |delta_t| = 10 ps.
void criterion_3() {
  auto cfg = default_config(ScenarioKind::fig2_jsi_sweep);
  ScenarioRuntime rt(cfg);
  const auto& jsa0 = rt.source_state();

  double worst = 0.0;
  auto check = [&](const JointSpectralAmplitude& out) {
    const double rel =
        std::sqrt((out.amplitude() - jsa0.amplitude()).squaredNorm() /
                  jsa0.amplitude().squaredNorm());
    worst = std::max(worst, rel);
  };

  auto dark_history = rt.control_history(0.0);
  // with a dark control only the signal dispersion phase acts; compare JSI
  {
    auto op = rt.make_operator(dark_history, 0.5e-12);
    auto out = apply_signal_operator(jsa0, op);
    const double rel = std::sqrt((jsi(out) - jsi(jsa0)).squaredNorm() /
                                 jsi(jsa0).squaredNorm());
    worst = std::max(worst, rel);
  }
  auto lit_history = rt.control_history(245.0);
  for (double dt : {10e-12, -10e-12}) {
    auto op = rt.make_operator(lit_history, dt);
    auto out = apply_signal_operator(jsa0, op);
    // remove the delta_t-independent dispersion phase by comparing against
    // the dark-control output through the same dispersion
    auto ref = apply_signal_operator(jsa0, rt.make_operator(dark_history, dt));
    const double rel =
        std::sqrt((out.amplitude() - ref.amplitude()).squaredNorm() /
                  ref.amplitude().squaredNorm());
    worst = std::max(worst, rel);
  }
  report(3, "identity limits (dark control, far-delayed control)", worst < 1e-6,
         "max relative L2 deviation " + fmt(worst) + " (< 1e-6)");
}

// 4. HOM dip physics: perfect dip for an exchange-symmetric JSA and the
//    analytic triangular dip for the sinc-ridge JSA.
void criterion_4() {
  auto g64 = SampledGrid::frequency_axis_from_span(64, 2e12,
                                                   wavelength_to_omega(1512e-9));
  MatrixXcd amp(64, 64);
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i) {
      const double ns = g64.offset(i), ni = g64.offset(j);
      amp(i, j) = std::exp(-(ns * ns + ni * ni) / (4.0 * 0.6e12 * 0.6e12)) *
                  std::exp(-(ns + ni) * (ns + ni) / (4.0 * 0.8e12 * 0.8e12));
    }
  JointSpectralAmplitude sym(g64, g64, std::move(amp));
  sym.scale(1.0 / std::sqrt(sym.total_norm()));
  auto v = visibility(hom_fringe(sym, linspace(-15e-12, 15e-12, 301)));
  const bool dip_ok = std::abs(v.value - 1.0) <= 1e-6 && v.kind == FringeKind::dip;

  // sinc ridge: cw-pump limit of the source model
  auto g = SampledGrid::frequency_axis_from_span(512, 5e12,
                                                 wavelength_to_omega(1512e-9));
  SpdcSpec spec;
  spec.pump_bandwidth = g.spacing * 1e-3;
  spec.crystal_length = 0.02;
  spec.gvm_ps = 3.2e-10;
  spec.gvm_pi = -3.2e-10;
  auto ridge = build_jsa(spec, g, g);
  const double base = 0.5 * (spec.gvm_ps - spec.gvm_pi) * spec.crystal_length;
  auto fringe = hom_fringe(ridge, linspace(-15e-12, 15e-12, 401));
  double max_err = 0.0;
  for (Eigen::Index i = 0; i < fringe.delays.size(); ++i) {
    const double triangle =
        std::max(0.0, 1.0 - std::abs(fringe.delays[i] / base));
    max_err = std::max(max_err, std::abs(fringe.rates[i] - (1.0 - triangle)));
  }
  report(4, "HOM dip physics (perfect dip, analytic triangle)",
         dip_ok && max_err <= 0.01,
         "symmetric-JSA V = " + fmt(v.value) + " (1 +/- 1e-6), triangle max "
         "pointwise error " + fmt(max_err) + " (<= 0.01)");
}

// 5. fig4_hom crossing: V rises from below 0.5 to above 0.5 and the marginal
//    overlap increases.
void criterion_5() {
  auto cfg = default_config(ScenarioKind::fig4_hom);
  cfg.spdc.mismatch_offset = 430.0;
  cfg.calibrate_power = true;
  cfg.auto_delay = true;
  cfg.target_shift_hz = 0.4e12;
  cfg.fringe_delays = linspace(-12e-12, 12e-12, 241);
  cfg.output_dir = "/tmp/photon_reshape_acceptance/fig4_hom";
  fs::remove_all(cfg.output_dir);

  auto result = run_scenario(cfg);
  const double vb = result.summary["visibility_before"].get<double>();
  const double va = result.summary["visibility_after"].get<double>();
  const double ob = result.summary["overlap_before"].get<double>();
  const double oa = result.summary["overlap_after"].get<double>();
  const double bound = result.summary["jsi_visibility_bound_after"].get<double>();
  const bool pass = vb < 0.5 && va > 0.5 && oa > ob && va <= bound + 1e-9;
  report(5, "classical-limit crossing in the fig4_hom scenario", pass,
         "V " + fmt(vb) + " -> " + fmt(va) + " (crosses 0.5), overlap " + fmt(ob) +
             " -> " + fmt(oa) + ", bound " + fmt(bound));
}

// 6. Dip visibility never exceeds the JSI phase-free bound over 1000 seeded
//    random states.
void criterion_6() {
  auto g = SampledGrid::frequency_axis_from_span(64, 2e12,
                                                 wavelength_to_omega(1512e-9));
  std::mt19937_64 rng(20160331);
  const auto delays = linspace(-25e-12, 25e-12, 201);
  int dips = 0;
  double worst_margin = -1e300;
  for (int trial = 0; trial < 1000; ++trial) {
    auto jsa = random_smooth_jsa(g, rng);
    auto fringe = hom_fringe(jsa, delays);
    auto v = visibility(fringe);
    if (v.kind != FringeKind::dip) continue;
    ++dips;
    worst_margin =
        std::max(worst_margin, v.value - jsi_visibility_bound(jsi(jsa)));
  }
  report(6, "dip visibility bounded by the JSI bound over 1000 random states",
         worst_margin <= 1e-9 && dips > 800,
         "worst (V - bound) = " + fmt(worst_margin) + " (<= 1e-9) over " +
             std::to_string(dips) + " dips");
}

// 7. Bump criterion: W(0) equals the exchange-norm difference, and the
//    fig4_bump scenario bumps exactly when the antisymmetric fraction
//    exceeds one half.
void criterion_7() {
  auto g = SampledGrid::frequency_axis_from_span(64, 2e12,
                                                 wavelength_to_omega(1512e-9));
  std::mt19937_64 rng(815);
  double worst_identity = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    auto jsa = random_smooth_jsa(g, rng);
    auto parts = exchange_decompose(jsa);
    const double sym = parts.symmetric.squaredNorm() * jsa.measure();
    const double anti = parts.antisymmetric.squaredNorm() * jsa.measure();
    const double w0 =
        1.0 - hom_fringe(jsa, {-2e-15, -1e-15, 0.0, 1e-15, 2e-15}).rates[2];
    worst_identity = std::max(
        worst_identity, std::abs(w0 - (sym - anti) / jsa.total_norm()));
  }

  auto cfg = default_config(ScenarioKind::fig4_bump);
  cfg.control.peak_power = 300.0;
  cfg.control.delay = 0.5e-12;
  cfg.fringe_delays = linspace(-12e-12, 12e-12, 241);
  cfg.output_dir = "/tmp/photon_reshape_acceptance/fig4_bump";
  fs::remove_all(cfg.output_dir);
  auto result = run_scenario(cfg);
  const double anti_after =
      result.summary["antisymmetric_fraction_after"].get<double>();
  const double bump = result.summary["bump_visibility_after"].get<double>();
  const bool equivalence = (anti_after > 0.5) == (bump > 0.0);

  report(7, "bump criterion (W(0) identity, antisymmetric-fraction threshold)",
         worst_identity <= 1e-9 && equivalence && anti_after > 0.5 && bump > 0.0,
         "max |W(0) - (sym - anti)| = " + fmt(worst_identity) +
             " (<= 1e-9), fraction " + fmt(anti_after) + " > 0.5 with bump V " +
             fmt(bump));
}

// 8. Solver oracles: analytic SPM, lumped-versus-split-step agreement,
//    brute-force beam splitter.
void criterion_8() {
  // SPM versus the analytic phase multiplication
  auto cgrid = SampledGrid::time_axis(1024, 20e-12 / 1024, 0.0,
                                      wavelength_to_omega(756e-9));
  auto pulse = synthesize_pulse({PulseShape::gaussian, 0.78e-12, 40.0, 756e-9}, cgrid);
  FiberSpec fiber{1.0, 0.018, 0.0075, 2.0, bundled_group_delay_curve(), 1.0};
  auto history = evolve_control(pulse, fiber,
                                PropagationConfig{64, Scheme::split_step, false, true});
  ArrayXcd expected(cgrid.n);
  for (int i = 0; i < cgrid.n; ++i)
    expected[i] = pulse.samples[i] *
                  std::exp(complexd(0.0, fiber.gamma_control *
                                             std::norm(pulse.samples[i]) *
                                             fiber.length));
  const double spm_err = (history.back().samples - expected).matrix().norm() /
                         expected.matrix().norm();

  // lumped versus split-step in the low-GVD regime
  auto sgrid = SampledGrid::frequency_axis_from_span(512, 5e12,
                                                     wavelength_to_omega(1512e-9));
  auto frozen = std::vector<ComplexEnvelope>(
      64, synthesize_pulse({PulseShape::gaussian, 0.78e-12, 90.0, 756e-9}, cgrid));
  auto sig = to_frequency(synthesize_pulse(
      {PulseShape::gaussian, 1.6e-12, 1.0, 1512e-9, 0.0}, sgrid.conjugate()));
  SignalOperator lumped(frozen, sgrid, 0.6e-12, 5e-14, 0.0, 2.0 * 0.0075, 1.0,
                        Scheme::lumped, 1.0);
  SignalOperator split(frozen, sgrid, 0.6e-12, 5e-14, 1e-27, 2.0 * 0.0075, 1.0,
                       Scheme::split_step, 1.0);
  auto a = lumped.apply_spectrum(sig);
  auto b = split.apply_spectrum(sig);
  const double scheme_err =
      (a.samples - b.samples).matrix().norm() / a.samples.matrix().norm();

  // brute-force two-photon beam splitter at zero delay on a 64^2 grid
  auto g = SampledGrid::frequency_axis_from_span(64, 2e12,
                                                 wavelength_to_omega(1512e-9));
  std::mt19937_64 rng(5150);
  double brute_err = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    auto jsa = random_smooth_jsa(g, rng);
    const auto& s = jsa.amplitude();
    double coincidence = 0.0;
    for (int m = 0; m < g.n; ++m)
      for (int k = 0; k < g.n; ++k)
        coincidence += std::norm(0.5 * (s(k, m) - s(m, k)));
    const double brute = 2.0 * coincidence * jsa.measure() / jsa.total_norm();
    auto fringe = hom_fringe(jsa, {-2e-15, -1e-15, 0.0, 1e-15, 2e-15});
    brute_err = std::max(brute_err, std::abs(fringe.rates[2] - brute));
  }

  report(8, "solver oracles (SPM, scheme agreement, beam splitter)",
         spm_err < 1e-6 && scheme_err < 0.02 && brute_err < 1e-8,
         "SPM " + fmt(spm_err) + " (< 1e-6), lumped-vs-split " + fmt(scheme_err) +
             " (< 0.02), brute force " + fmt(brute_err) + " (< 1e-8)");
}

// 9. Fiber math: fit round trip, beta2 finite differences, matched pair.
void criterion_9() {
  // polynomial round trip at degree 6
  std::vector<double> truth = {4.88e-9, -1e-5, 40.0, 1e8, 2e14, 3e20, 5e26};
  std::vector<GroupDelaySample> samples;
  for (int i = 0; i < 40; ++i) {
    const double lam = 0.65e-6 + (1.0e-6) * i / 39;
    double acc = 0.0;
    const double x = lam - 1.1e-6;
    for (auto it = truth.rbegin(); it != truth.rend(); ++it) acc = acc * x + *it;
    samples.push_back({lam, acc});
  }
  auto fit = fit_group_delay(samples, 6);
  double fit_err = 0.0;
  for (const auto& s : samples)
    fit_err = std::max(fit_err, std::abs(fit.curve(s.wavelength) / s.delay - 1.0));

  auto curve = bundled_group_delay_curve();
  double fd_err = 0.0;
  for (double lam : {0.76e-6, 1.1e-6, 1.512e-6}) {
    const double omega = wavelength_to_omega(lam);
    const double fd = (curve(omega_to_wavelength(omega + 1e9)) -
                       curve(omega_to_wavelength(omega - 1e9))) /
                      2e9;
    fd_err = std::max(fd_err, std::abs(beta2_at(curve, lam) / fd - 1.0));
  }

  const double matched = find_matched_wavelength(curve, 756e-9, 1.2e-6, 1.65e-6);
  const double residual = std::abs(walkoff_per_meter(curve, 756e-9, matched));
  const bool matched_ok =
      std::abs(matched - 1512e-9) < 0.5e-9 && residual < 1e-4 * ps;

  report(9, "fiber math (fit round trip, beta2, matched wavelengths)",
         fit_err < 1e-9 && fd_err < 1e-6 && matched_ok,
         "fit round trip " + fmt(fit_err) + " (< 1e-9), beta2 vs FD " + fmt(fd_err) +
             " (< 1e-6), matched " + fmt(matched / nm) + " nm with residual " +
             fmt(residual / ps) + " ps/m (< 1e-4)");
}

// 10. Determinism: two CLI runs with identical config and seed produce
//     byte-identical outputs.
void criterion_10() {
  const fs::path base = "/tmp/photon_reshape_acceptance/determinism";
  fs::remove_all(base);
  fs::create_directories(base);

  json cfg = {
      {"scenario", "fig4_bump"},
      {"seed", 11},
      {"output_dir", (base / "a").string()},
      {"fiber",
       {{"length_m", 1.0},
        {"gamma_control_per_w_m", 0.018},
        {"gamma_signal_per_w_m", 0.0075},
        {"group_delay", {{"bundled", true}}}}},
      {"control",
       {{"shape", "gaussian"},
        {"fwhm_ps", 0.78},
        {"wavelength_nm", 756.0},
        {"peak_power_w", 300.0},
        {"delay_ps", 0.5}}},
      {"spdc", json::object()},
      {"grids",
       {{"time_points", 1024},
        {"time_window_ps", 20.0},
        {"jsa_points", 128},
        {"jsa_span_thz", 5.0}}},
      {"sweep",
       {{"fringe_delay_ps", {{"from", -10.0}, {"to", 10.0}, {"count", 81}}}}},
      {"solver", {{"z_steps", 32}}},
  };
  const fs::path cfg_path = base / "config.json";
  {
    std::ofstream out(cfg_path, std::ios::binary);
    out << cfg.dump(2) << "\n";
  }

  const std::string cli = PHOTON_RESHAPE_CLI_PATH;
  auto run_once = [&](const std::string& out_dir) {
    const std::string cmd = cli + " run " + cfg_path.string() + " --out " + out_dir +
                            " > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  const int rc_a = run_once((base / "a").string());
  const int rc_b = run_once((base / "b").string());

  bool identical = (rc_a == 0 && rc_b == 0);
  std::string detail = "CLI exit codes " + std::to_string(rc_a) + "/" +
                       std::to_string(rc_b);
  if (identical) {
    size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(base / "a")) {
      const auto name = entry.path().filename();
      std::ifstream fa(entry.path(), std::ios::binary);
      std::ifstream fb(base / "b" / name, std::ios::binary);
      std::stringstream sa, sb;
      sa << fa.rdbuf();
      sb << fb.rdbuf();
      if (sa.str() != sb.str()) {
        identical = false;
        detail = "mismatch in " + name.string();
        break;
      }
      ++compared;
    }
    if (identical) detail = std::to_string(compared) + " files byte-identical";
  }
  report(10, "byte-identical reruns through the CLI", identical, detail);
}

}  // namespace

int main() {
  std::printf("photon-reshape acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (failures == 0) {
    std::printf("all 10 criteria passed\n");
    return 0;
  }
  std::printf("%d criteria failed\n", failures);
  return 1;
}
