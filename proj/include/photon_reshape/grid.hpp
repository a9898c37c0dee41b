#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

#include "photon_reshape/fft.hpp"
#include "photon_reshape/units.hpp"

namespace photon_reshape {

using Eigen::ArrayXcd;
using Eigen::ArrayXd;
using complexd = std::complex<double>;

enum class Domain { time, frequency };

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// Uniformly sampled axis. A time axis stores the absolute time of its
/// center sample and the carrier frequency of envelopes living on it
/// (conjugate_center); a frequency axis stores the absolute carrier
/// frequency omega_0 and the time origin of its conjugate axis. Frequency
/// samples are detunings from omega_0, so optical-scale magnitudes
/// (~1e15 rad/s) never mix with grid-scale ones.
struct SampledGrid {
  Domain domain = Domain::time;
  int n = 0;
  double spacing = 0.0;           // s for time axes, rad/s for frequency axes
  double center = 0.0;            // absolute coordinate of sample n/2
  double conjugate_center = 0.0;  // center of the paired axis

  static SampledGrid time_axis(int n, double dt, double t_center = 0.0,
                               double carrier_omega = 0.0) {
    SampledGrid g{Domain::time, n, dt, t_center, carrier_omega};
    g.validate();
    return g;
  }

  static SampledGrid frequency_axis(int n, double domega, double omega_center,
                                    double t_center = 0.0) {
    SampledGrid g{Domain::frequency, n, domega, omega_center, t_center};
    g.validate();
    return g;
  }

  /// Frequency axis from a full span in ordinary frequency (Hz).
  static SampledGrid frequency_axis_from_span(int n, double span_hz,
                                              double omega_center,
                                              double t_center = 0.0) {
    return frequency_axis(n, two_pi * span_hz / n, omega_center, t_center);
  }

  void validate() const {
    if (n < 16 || !is_power_of_two(n))
      throw std::invalid_argument("SampledGrid: n must be a power of two >= 16, got " +
                                  std::to_string(n));
    if (!(spacing > 0.0))
      throw std::invalid_argument("SampledGrid: spacing must be positive");
  }

  double coordinate(int i) const { return center + offset(i); }
  double offset(int i) const { return (i - n / 2) * spacing; }
  double span() const { return n * spacing; }
  double min_coordinate() const { return coordinate(0); }
  double max_coordinate() const { return coordinate(n - 1); }

  ArrayXd offsets() const {
    ArrayXd x(n);
    for (int i = 0; i < n; ++i) x[i] = offset(i);
    return x;
  }
  ArrayXd coordinates() const { return offsets() + center; }

  /// The paired axis: n points, spacing 2pi/(n*spacing), centers swapped.
  SampledGrid conjugate() const {
    SampledGrid g;
    g.domain = (domain == Domain::time) ? Domain::frequency : Domain::time;
    g.n = n;
    g.spacing = two_pi / (n * spacing);
    g.center = conjugate_center;
    g.conjugate_center = center;
    return g;
  }

  bool operator==(const SampledGrid& o) const {
    return domain == o.domain && n == o.n && spacing == o.spacing &&
           center == o.center && conjugate_center == o.conjugate_center;
  }
  bool operator!=(const SampledGrid& o) const { return !(*this == o); }
};

/// Complex field envelope on a sampled axis. Units are sqrt(W) for classical
/// fields; dimensionless for normalized single-photon wave packets.
struct ComplexEnvelope {
  SampledGrid grid;
  ArrayXcd samples;

  ComplexEnvelope() = default;
  ComplexEnvelope(SampledGrid g, ArrayXcd s) : grid(g), samples(std::move(s)) {
    if (samples.size() != grid.n)
      throw std::invalid_argument("ComplexEnvelope: sample count does not match grid");
  }

  static ComplexEnvelope zero(const SampledGrid& g) {
    return ComplexEnvelope(g, ArrayXcd::Zero(g.n));
  }
};

/// Rectangle-rule energy. Time domain: sum |A|^2 dt. Frequency domain:
/// sum |A|^2 dw / 2pi, so it equals the time-domain energy of the same field.
inline double energy(const ComplexEnvelope& env) {
  const double raw = env.samples.abs2().sum() * env.grid.spacing;
  return env.grid.domain == Domain::frequency ? raw / two_pi : raw;
}

/// Unitary transform pair. Conventions, fixed once for the whole library:
///   to_frequency: F(nu_k) = dt * sum_j A(t_j) exp(+i nu_k (t_j - t_c))
///   to_time:      A(t_j) = 1/(n dt) * sum_k F(nu_k) exp(-i nu_k (t_j - t_c))
/// nu is the detuning from the carrier omega_0 = grid.conjugate_center, so a
/// positive nu centroid means a blue-shifted field.
inline ComplexEnvelope to_frequency(const ComplexEnvelope& env) {
  if (env.grid.domain != Domain::time)
    throw std::invalid_argument("to_frequency: input must live on a time grid");
  return ComplexEnvelope(env.grid.conjugate(),
                         detail::centered_forward(env.samples, env.grid.spacing));
}

inline ComplexEnvelope to_time(const ComplexEnvelope& env) {
  if (env.grid.domain != Domain::frequency)
    throw std::invalid_argument("to_time: input must live on a frequency grid");
  SampledGrid out = env.grid.conjugate();
  return ComplexEnvelope(out, detail::centered_inverse(env.samples, out.spacing));
}

/// Intensity-weighted mean coordinate of non-negative weights on a grid.
inline double centroid(const SampledGrid& grid, const ArrayXd& weights) {
  if (weights.size() != grid.n)
    throw std::invalid_argument("centroid: weight count does not match grid");
  const double total = weights.sum();
  if (!(total > 0.0)) throw std::invalid_argument("centroid: zero-energy input");
  double acc = 0.0;
  for (int i = 0; i < grid.n; ++i) acc += grid.coordinate(i) * weights[i];
  return acc / total;
}

inline double centroid(const ComplexEnvelope& env) {
  return centroid(env.grid, env.samples.abs2());
}

/// Full width at half maximum of a sampled intensity profile, with linear
/// interpolation between samples. Multi-peak profiles resolve to the
/// outermost half-max crossings.
inline double fwhm(const SampledGrid& grid, const ArrayXd& weights) {
  if (weights.size() != grid.n)
    throw std::invalid_argument("fwhm: weight count does not match grid");
  const double vmax = weights.maxCoeff();
  if (!(vmax > 0.0) || weights.minCoeff() == vmax)
    throw std::invalid_argument("fwhm: flat or empty profile");
  const double half = 0.5 * vmax;

  double left = grid.min_coordinate();
  for (int i = 0; i < grid.n; ++i) {
    if (weights[i] >= half) {
      if (i == 0) break;
      const double frac = (half - weights[i - 1]) / (weights[i] - weights[i - 1]);
      left = grid.coordinate(i - 1) + frac * grid.spacing;
      break;
    }
  }
  double right = grid.max_coordinate();
  for (int i = grid.n - 1; i >= 0; --i) {
    if (weights[i] >= half) {
      if (i == grid.n - 1) break;
      const double frac = (half - weights[i + 1]) / (weights[i] - weights[i + 1]);
      right = grid.coordinate(i + 1) - frac * grid.spacing;
      break;
    }
  }
  return right - left;
}

inline double fwhm(const ComplexEnvelope& env) {
  return fwhm(env.grid, env.samples.abs2());
}

}  // namespace photon_reshape
