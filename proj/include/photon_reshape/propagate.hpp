#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "photon_reshape/errors.hpp"
#include "photon_reshape/fiber.hpp"
#include "photon_reshape/grid.hpp"

// Sign conventions, fixed once for the whole library:
//   * envelope convention A(t) exp(-i w0 t), spectrum F(nu) = integral A exp(+i nu t) dt
//   * propagation equation dA/dz = -i (beta2/2) d^2A/dt^2 + i gamma |A|^2 A,
//     so a dispersion step multiplies the spectrum by exp(+i (beta2/2) nu^2 dz)
//     and the Kerr phase accumulates as exp(+i gamma |A|^2 dz)
//   * instantaneous frequency shift dw(t) = -d(phi)/dt
//   * delta_t > 0 delays the signal onto the trailing edge of the control, so
//     the phase profile seen at signal-frame time tau samples the control at
//     tau + delta_t (+ walkoff drift): positive delta_t gives a blue shift.
// The last point is locked by a dedicated test against the observed blue
// shift at delta_t = 0.83 ps.

namespace photon_reshape {

enum class PulseShape { gaussian, sech };

/// Control-pulse parameters. delay is the arrival-time offset of the signal
/// with respect to the control peak (delta_t); positive values place the
/// signal on the control's trailing edge.
struct PulseSpec {
  PulseShape shape = PulseShape::gaussian;
  double fwhm = 0.0;        // s, intensity FWHM
  double peak_power = 0.0;  // W
  double wavelength = 0.0;  // m
  double delay = 0.0;       // s

  void validate() const {
    if (!(fwhm > 0.0)) throw std::invalid_argument("PulseSpec: fwhm must be > 0");
    if (peak_power < 0.0)
      throw std::invalid_argument("PulseSpec: peak_power must be >= 0");
    if (!(wavelength > 0.0))
      throw std::invalid_argument("PulseSpec: wavelength must be > 0");
  }
};

struct PhaseProfile {
  SampledGrid grid;  // time axis
  ArrayXd phase;     // rad

  PhaseProfile() = default;
  PhaseProfile(SampledGrid g, ArrayXd p) : grid(g), phase(std::move(p)) {
    if (phase.size() != grid.n)
      throw std::invalid_argument("PhaseProfile: sample count does not match grid");
    if (!phase.isFinite().all())
      throw std::invalid_argument("PhaseProfile: non-finite phase");
  }
};

enum class Scheme { lumped, split_step };

struct PropagationConfig {
  int z_steps = 64;
  Scheme scheme = Scheme::split_step;
  bool include_control_dispersion = true;
  bool include_spm = true;

  void validate() const {
    if (z_steps < 1) throw std::invalid_argument("PropagationConfig: z_steps >= 1");
    if (scheme == Scheme::split_step && z_steps < 8)
      throw std::invalid_argument("PropagationConfig: split_step needs z_steps >= 8");
  }
};

/// Transform-limited pulse with the requested intensity profile, peaked at
/// t = -spec.delay (the control sits at t = 0 when its own delay is zero and
/// the signal frame is offset by delta_t).
inline ComplexEnvelope synthesize_pulse(const PulseSpec& spec, const SampledGrid& grid) {
  spec.validate();
  if (grid.domain != Domain::time)
    throw std::invalid_argument("synthesize_pulse: need a time grid");
  if (grid.span() < 10.0 * spec.fwhm)
    throw std::invalid_argument("synthesize_pulse: grid window must span >= 10x fwhm");

  const double t0 = -spec.delay;
  const double amp = std::sqrt(spec.peak_power);
  ArrayXcd samples(grid.n);
  if (spec.shape == PulseShape::gaussian) {
    // |A|^2 = P0 exp(-4 ln2 (t-t0)^2 / fwhm^2)
    const double k = 2.0 * std::log(2.0) / (spec.fwhm * spec.fwhm);
    for (int i = 0; i < grid.n; ++i) {
      const double t = grid.coordinate(i) - t0;
      samples[i] = amp * std::exp(-k * t * t);
    }
  } else {
    const double t_sech = spec.fwhm / sech2_fwhm_factor;
    for (int i = 0; i < grid.n; ++i) {
      const double t = grid.coordinate(i) - t0;
      samples[i] = amp / std::cosh(t / t_sech);
    }
  }
  SampledGrid out = grid;
  out.conjugate_center = wavelength_to_omega(spec.wavelength);
  return ComplexEnvelope(out, std::move(samples));
}

namespace detail {

inline ArrayXcd dispersion_factor(const SampledGrid& freq_grid, double beta2,
                                  double dz) {
  ArrayXcd f(freq_grid.n);
  for (int i = 0; i < freq_grid.n; ++i) {
    const double nu = freq_grid.offset(i);
    f[i] = std::exp(complexd(0.0, 0.5 * beta2 * nu * nu * dz));
  }
  return f;
}

/// Linear interpolation of |A|^2 at absolute time t; zero outside the grid.
inline double intensity_at(const ComplexEnvelope& env, double t) {
  const double pos = (t - env.grid.min_coordinate()) / env.grid.spacing;
  if (pos < 0.0 || pos > env.grid.n - 1) return 0.0;
  const int i = std::min(static_cast<int>(pos), env.grid.n - 2);
  const double frac = pos - i;
  const double a = std::norm(env.samples[i]);
  const double b = std::norm(env.samples[i + 1]);
  return a + frac * (b - a);
}

/// |A_c|^2 resampled onto `grid` at coordinates t + shift.
inline ArrayXd sampled_intensity(const ComplexEnvelope& env, const SampledGrid& grid,
                                 double shift) {
  ArrayXd out(grid.n);
  for (int i = 0; i < grid.n; ++i)
    out[i] = intensity_at(env, grid.coordinate(i) + shift);
  return out;
}

}  // namespace detail

/// Split-step evolution of the control pulse in its co-moving frame.
/// Returns one snapshot per z step, taken at the step end, so the last
/// entry is the fiber output A(L) and sum_z |A(z)|^2 dz covers the full
/// length. The lumped scheme freezes the control and replicates the input.
inline std::vector<ComplexEnvelope> evolve_control(
    const ComplexEnvelope& pulse, const FiberSpec& fiber, const PropagationConfig& cfg,
    std::optional<double> beta2_override = std::nullopt) {
  cfg.validate();
  fiber.validate();
  if (pulse.grid.domain != Domain::time)
    throw std::invalid_argument("evolve_control: control must be on a time grid");

  if (cfg.scheme == Scheme::lumped)
    return std::vector<ComplexEnvelope>(static_cast<size_t>(cfg.z_steps), pulse);

  const double gamma = cfg.include_spm ? fiber.gamma_control : 0.0;
  double beta2 = 0.0;
  if (cfg.include_control_dispersion) {
    beta2 = beta2_override
                ? *beta2_override
                : beta2_at(fiber.delay_curve,
                           omega_to_wavelength(pulse.grid.conjugate_center));
  }

  const double dz = fiber.length / cfg.z_steps;
  const double peak = pulse.samples.abs2().maxCoeff();
  if (gamma > 0.0 && peak > 0.0) {
    const double l_nl = 1.0 / (gamma * peak);
    if (dz > 0.25 * l_nl) {
      const int needed = static_cast<int>(std::ceil(4.0 * fiber.length / l_nl));
      throw std::invalid_argument(
          "evolve_control: z step exceeds a quarter of the nonlinear length; "
          "increase z_steps to at least " +
          std::to_string(needed));
    }
  }

  const SampledGrid freq = pulse.grid.conjugate();
  const ArrayXcd half = detail::dispersion_factor(freq, beta2, 0.5 * dz);

  std::vector<ComplexEnvelope> history;
  history.reserve(static_cast<size_t>(cfg.z_steps));
  ArrayXcd field = pulse.samples;
  const double dt = pulse.grid.spacing;
  for (int k = 0; k < cfg.z_steps; ++k) {
    ArrayXcd spec = detail::centered_forward(field, dt) * half;
    field = detail::centered_inverse(spec, dt);
    for (int i = 0; i < field.size(); ++i) {
      const double p = std::norm(field[i]);
      field[i] *= std::exp(complexd(0.0, gamma * p * dz));
    }
    spec = detail::centered_forward(field, dt) * half;
    field = detail::centered_inverse(spec, dt);
    history.emplace_back(pulse.grid, field);
  }
  return history;
}

/// Accumulated XPM phase in the signal frame:
///   phi(tau) = xpm_factor * gamma_signal * sum_z I_c(z, tau + delta_t + walkoff z) dz
/// with linear interpolation of the control intensity, evaluated at step
/// midpoints. walkoff is delay(signal) - delay(control) per meter, so a
/// slower signal drifts toward the control's trailing side along the fiber.
inline PhaseProfile xpm_phase(const std::vector<ComplexEnvelope>& control_history,
                              const FiberSpec& fiber, double delta_t, double walkoff,
                              const SampledGrid& output_grid) {
  if (control_history.empty())
    throw std::invalid_argument("xpm_phase: empty control history");
  if (output_grid.domain != Domain::time)
    throw std::invalid_argument("xpm_phase: output grid must be a time axis");
  const int steps = static_cast<int>(control_history.size());
  const double dz = fiber.length / steps;
  const double scale = fiber.xpm_factor * fiber.gamma_signal * dz;

  ArrayXd phase = ArrayXd::Zero(output_grid.n);
  for (int k = 0; k < steps; ++k) {
    const double z_mid = (k + 0.5) * dz;
    phase += scale * detail::sampled_intensity(control_history[static_cast<size_t>(k)],
                                               output_grid, delta_t + walkoff * z_mid);
  }
  return PhaseProfile(output_grid, std::move(phase));
}

/// Convenience overload: the phase on the control's own time axis.
inline PhaseProfile xpm_phase(const std::vector<ComplexEnvelope>& control_history,
                              const FiberSpec& fiber, double delta_t,
                              double walkoff = 0.0) {
  if (control_history.empty())
    throw std::invalid_argument("xpm_phase: empty control history");
  return xpm_phase(control_history, fiber, delta_t, walkoff,
                   control_history.front().grid);
}

/// dw(t) = -d(phi)/dt by central differences (one-sided at the ends), rad/s.
inline ArrayXd instantaneous_frequency(const PhaseProfile& profile) {
  const int n = profile.grid.n;
  const double h = profile.grid.spacing;
  ArrayXd dw(n);
  dw[0] = -(profile.phase[1] - profile.phase[0]) / h;
  dw[n - 1] = -(profile.phase[n - 1] - profile.phase[n - 2]) / h;
  for (int i = 1; i < n - 1; ++i)
    dw[i] = -(profile.phase[i + 1] - profile.phase[i - 1]) / (2.0 * h);
  return dw;
}

/// The linear reshaping operator the control imprints on the signal field.
/// split_step: Strang composition of half-step signal dispersion (frequency
/// domain) and full-step XPM phase multiplication (time domain), one pair per
/// control snapshot. lumped: a single XPM phase screen, no dispersion.
/// Norm contract: |U x|^2 = transmission * |x|^2 for every x.
class SignalOperator {
 public:
  SignalOperator(const std::vector<ComplexEnvelope>& control_history,
                 const SampledGrid& signal_frequency_grid, double delta_t,
                 double walkoff, double beta2_signal, double xpm_gamma,
                 double transmission, Scheme scheme, double fiber_length)
      : freq_grid_(signal_frequency_grid),
        time_grid_(signal_frequency_grid.conjugate()),
        scheme_(scheme),
        amplitude_(std::sqrt(transmission)) {
    if (signal_frequency_grid.domain != Domain::frequency)
      throw std::invalid_argument("SignalOperator: need a signal frequency grid");
    if (control_history.empty())
      throw std::invalid_argument("SignalOperator: empty control history");
    if (!(transmission > 0.0) || transmission > 1.0)
      throw std::invalid_argument("SignalOperator: transmission must be in (0, 1]");

    const int steps = static_cast<int>(control_history.size());
    const double dz = fiber_length / steps;

    auto step_phase = [&](int k) {
      const double z_mid = (k + 0.5) * dz;
      return ArrayXd(xpm_gamma * dz *
                     detail::sampled_intensity(control_history[static_cast<size_t>(k)],
                                               time_grid_, delta_t + walkoff * z_mid));
    };

    if (scheme_ == Scheme::lumped) {
      ArrayXd total = ArrayXd::Zero(time_grid_.n);
      for (int k = 0; k < steps; ++k) total += step_phase(k);
      screens_.push_back(phase_to_factor(total));
    } else {
      screens_.reserve(static_cast<size_t>(steps));
      for (int k = 0; k < steps; ++k) screens_.push_back(phase_to_factor(step_phase(k)));
      half_dispersion_ = detail::dispersion_factor(freq_grid_, beta2_signal, 0.5 * dz);
      full_dispersion_ = half_dispersion_ * half_dispersion_;
    }
  }

  const SampledGrid& frequency_grid() const { return freq_grid_; }
  const SampledGrid& time_grid() const { return time_grid_; }

  /// Frequency-domain samples in, frequency-domain samples out.
  void apply_spectrum_in_place(ArrayXcd& spectrum) const {
    const double dt = time_grid_.spacing;
    if (scheme_ == Scheme::lumped) {
      ArrayXcd field = detail::centered_inverse(spectrum, dt);
      field *= screens_.front();
      spectrum = detail::centered_forward(field, dt);
    } else {
      spectrum *= half_dispersion_;
      for (size_t k = 0; k < screens_.size(); ++k) {
        ArrayXcd field = detail::centered_inverse(spectrum, dt);
        field *= screens_[k];
        spectrum = detail::centered_forward(field, dt);
        spectrum *= (k + 1 < screens_.size()) ? full_dispersion_ : half_dispersion_;
      }
    }
    spectrum *= amplitude_;
  }

  ComplexEnvelope apply_spectrum(const ComplexEnvelope& env) const {
    if (env.grid != freq_grid_)
      throw std::invalid_argument("SignalOperator: frequency grid mismatch");
    ArrayXcd s = env.samples;
    apply_spectrum_in_place(s);
    return ComplexEnvelope(freq_grid_, std::move(s));
  }

  /// Time-domain envelope in, time-domain envelope out.
  ComplexEnvelope apply(const ComplexEnvelope& env) const {
    if (env.grid != time_grid_)
      throw std::invalid_argument("SignalOperator: time grid mismatch");
    ArrayXcd s = detail::centered_forward(env.samples, time_grid_.spacing);
    apply_spectrum_in_place(s);
    return ComplexEnvelope(time_grid_,
                           detail::centered_inverse(s, time_grid_.spacing));
  }

 private:
  static ArrayXcd phase_to_factor(const ArrayXd& phase) {
    ArrayXcd f(phase.size());
    for (int i = 0; i < phase.size(); ++i)
      f[i] = std::exp(complexd(0.0, phase[i]));
    return f;
  }

  SampledGrid freq_grid_;
  SampledGrid time_grid_;
  Scheme scheme_;
  double amplitude_;
  std::vector<ArrayXcd> screens_;
  ArrayXcd half_dispersion_;
  ArrayXcd full_dispersion_;
};

/// Derives beta2(signal) and the control/signal walk-off from the fiber's
/// delay curve; wavelengths are read off the grid carriers.
inline SignalOperator signal_operator(const std::vector<ComplexEnvelope>& control_history,
                                      const FiberSpec& fiber,
                                      const SampledGrid& signal_frequency_grid,
                                      double delta_t, const PropagationConfig& cfg) {
  cfg.validate();
  fiber.validate();
  if (control_history.empty())
    throw std::invalid_argument("signal_operator: empty control history");
  const double lambda_s = omega_to_wavelength(signal_frequency_grid.center);
  const double lambda_c =
      omega_to_wavelength(control_history.front().grid.conjugate_center);
  const double beta2_s =
      (cfg.scheme == Scheme::split_step) ? beta2_at(fiber.delay_curve, lambda_s) : 0.0;
  const double walkoff = walkoff_per_meter(fiber.delay_curve, lambda_s, lambda_c);
  return SignalOperator(control_history, signal_frequency_grid, delta_t, walkoff,
                        beta2_s, fiber.xpm_factor * fiber.gamma_signal,
                        fiber.transmission, cfg.scheme, fiber.length);
}

struct CalibrationOutcome {
  double peak_power = 0.0;      // W
  double delta_t = 0.0;         // s, delay achieving the maximum blue shift
  double achieved_shift = 0.0;  // Hz
};

/// Everything calibrate_peak_power needs to know about the rest of the
/// setup, packaged as evaluation callbacks so the solver stays independent
/// of how the shift is measured.
struct CalibrationProblem {
  /// Exact signal-marginal centroid shift in Hz for (peak_power, delta_t).
  std::function<double(double, double)> shift_hz;
  /// Cheap delta_t-shape proxy used only to locate the scan maximum;
  /// any positive rescaling of the exact shift is fine. Optional.
  std::function<double(double)> shift_shape;
  double delta_t_lo = 0.0;
  double delta_t_hi = 2e-12;
  int scan_points = 41;
  double probe_power = 1.0;   // W
  double max_power = 1e6;     // W, saturation guard
  double tolerance = 0.01;    // relative shift tolerance
};

namespace detail {

inline double parabolic_refine(double x0, double x1, double x2, double y0, double y1,
                               double y2) {
  const double d = (y0 - 2.0 * y1 + y2);
  if (d >= -1e-300 && d <= 1e-300) return x1;
  double x = x1 - 0.5 * (x2 - x1) * (y2 - y0) / (2.0 * d);
  return std::clamp(x, std::min(x0, x2), std::max(x0, x2));
}

}  // namespace detail

/// Finds the control peak power whose maximum signal-marginal blue shift
/// equals the target, and the delay achieving it. Bisection/secant on the
/// power with an explicit saturation guard.
inline CalibrationOutcome calibrate_peak_power(double target_shift_hz,
                                               const CalibrationProblem& problem) {
  if (!problem.shift_hz)
    throw std::invalid_argument("calibrate_peak_power: missing shift callback");
  if (target_shift_hz < 0.0)
    throw std::invalid_argument("calibrate_peak_power: target must be >= 0");
  if (!(problem.delta_t_lo < problem.delta_t_hi) || problem.scan_points < 5)
    throw std::invalid_argument("calibrate_peak_power: bad delta_t scan window");

  // 1. locate the shift-maximizing delay on a coarse scan
  const int m = problem.scan_points;
  auto scan_value = [&](double dt) {
    return problem.shift_shape ? problem.shift_shape(dt)
                               : problem.shift_hz(problem.probe_power, dt);
  };
  std::vector<double> dts(static_cast<size_t>(m)), vals(static_cast<size_t>(m));
  int best = 0;
  for (int i = 0; i < m; ++i) {
    dts[static_cast<size_t>(i)] =
        problem.delta_t_lo +
        (problem.delta_t_hi - problem.delta_t_lo) * i / (m - 1);
    vals[static_cast<size_t>(i)] = scan_value(dts[static_cast<size_t>(i)]);
    if (vals[static_cast<size_t>(i)] > vals[static_cast<size_t>(best)]) best = i;
  }
  double dt_star = dts[static_cast<size_t>(best)];
  if (best > 0 && best < m - 1)
    dt_star = detail::parabolic_refine(
        dts[static_cast<size_t>(best - 1)], dts[static_cast<size_t>(best)],
        dts[static_cast<size_t>(best + 1)], vals[static_cast<size_t>(best - 1)],
        vals[static_cast<size_t>(best)], vals[static_cast<size_t>(best + 1)]);

  if (target_shift_hz == 0.0) return {0.0, dt_star, 0.0};

  // 2. refine the delay with exact evaluations at the probe power
  auto exact_refine = [&](double power, double dt) {
    const double h = (problem.delta_t_hi - problem.delta_t_lo) / (m - 1);
    const double y0 = problem.shift_hz(power, dt - h);
    const double y1 = problem.shift_hz(power, dt);
    const double y2 = problem.shift_hz(power, dt + h);
    if (y1 >= y0 && y1 >= y2)
      return detail::parabolic_refine(dt - h, dt, dt + h, y0, y1, y2);
    return (y0 > y2) ? dt - h : dt + h;
  };
  dt_star = exact_refine(problem.probe_power, dt_star);

  // 3. solve shift(P, dt_star) = target in P
  auto shift_at = [&](double p) { return problem.shift_hz(p, dt_star); };
  double p_lo = 0.0, s_lo = 0.0;
  double p_hi = problem.probe_power;
  double s_hi = shift_at(p_hi);
  if (s_hi <= 0.0)
    throw saturation_error(
        "calibrate_peak_power: probe power produces no blue shift");
  // linear scaling guess, then geometric growth with a plateau guard
  if (s_hi < target_shift_hz) {
    double guess = p_hi * target_shift_hz / s_hi;
    p_lo = p_hi;
    s_lo = s_hi;
    p_hi = std::min(guess * 1.25, problem.max_power);
    s_hi = shift_at(p_hi);
    int guard = 0;
    while (s_hi < target_shift_hz) {
      if (p_hi >= problem.max_power)
        throw saturation_error(
            "calibrate_peak_power: target shift unreachable below the power cap "
            "(dispersion-saturated)");
      const double growth = s_hi / std::max(s_lo, 1e-300);
      if (growth < 1.005 && ++guard >= 2)
        throw saturation_error(
            "calibrate_peak_power: shift saturated before reaching the target");
      p_lo = p_hi;
      s_lo = s_hi;
      p_hi = std::min(p_hi * 2.0, problem.max_power);
      s_hi = shift_at(p_hi);
    }
  }

  const double rel_tol = problem.tolerance / 5.0;
  double p_mid = p_hi, s_mid = s_hi;
  for (int it = 0; it < 80; ++it) {
    if (std::abs(s_mid - target_shift_hz) <= rel_tol * target_shift_hz) break;
    // secant through the bracket, clamped to its interior
    double cand = p_lo + (target_shift_hz - s_lo) * (p_hi - p_lo) /
                             std::max(s_hi - s_lo, 1e-300);
    const double width = p_hi - p_lo;
    cand = std::clamp(cand, p_lo + 0.1 * width, p_hi - 0.1 * width);
    p_mid = cand;
    s_mid = shift_at(p_mid);
    if (s_mid < target_shift_hz) {
      p_lo = p_mid;
      s_lo = s_mid;
    } else {
      p_hi = p_mid;
      s_hi = s_mid;
    }
  }
  if (std::abs(s_mid - target_shift_hz) > problem.tolerance * target_shift_hz)
    throw numerics_error("calibrate_peak_power: power solve did not converge");

  // 4. one more delay refinement at the calibrated power, then re-verify
  const double dt_refined = exact_refine(p_mid, dt_star);
  const double s_refined = problem.shift_hz(p_mid, dt_refined);
  if (s_refined > s_mid) {
    // shift grew after recentering the delay: trim the power linearly
    const double p_trim = p_mid * target_shift_hz / s_refined;
    const double s_trim = problem.shift_hz(p_trim, dt_refined);
    if (std::abs(s_trim - target_shift_hz) <= problem.tolerance * target_shift_hz)
      return {p_trim, dt_refined, s_trim};
  }
  return {p_mid, dt_refined, s_refined};
}

}  // namespace photon_reshape
