#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "photon_reshape/grid.hpp"
#include "photon_reshape/propagate.hpp"

namespace photon_reshape {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;

enum class Arm { signal, idler };

/// Photon-pair source model: Gaussian pump envelope times a sinc
/// phase-matching function with linearized mismatch
///   dk = gvm_ps nu_s + gvm_pi nu_i + mismatch_offset,
/// where gvm_* are pump/daughter group-slowness differences (s/m) and
/// mismatch_offset (1/m) stands in for crystal temperature or poling detuning.
struct SpdcSpec {
  double pump_center = 756e-9;          // m
  double pump_bandwidth = 2.0e12;       // rad/s, rms of the Gaussian pump envelope
  double crystal_length = 10e-3;        // m
  double gvm_ps = 1.1e-10;              // s/m
  double gvm_pi = -0.9e-10;             // s/m
  double mismatch_offset = 0.0;         // 1/m
  double degenerate_wavelength = 1512e-9;  // m

  void validate() const {
    if (!(pump_center > 0.0) || !(crystal_length > 0.0) ||
        !(degenerate_wavelength > 0.0))
      throw std::invalid_argument("SpdcSpec: lengths must be > 0");
    if (!(pump_bandwidth > 0.0))
      throw std::invalid_argument("SpdcSpec: pump_bandwidth must be > 0");
  }
};

enum class FilterShape { rectangular, gaussian };

/// Band-pass filter specified in wavelength; width is the intensity FWHM.
struct FilterSpec {
  double center = 1512e-9;  // m
  double width = 0.4e-9;    // m
  FilterShape shape = FilterShape::rectangular;

  void validate() const {
    if (!(center > 0.0)) throw std::invalid_argument("FilterSpec: center must be > 0");
    if (!(width > 0.0)) throw std::invalid_argument("FilterSpec: width must be > 0");
  }
};

/// Filter amplitude sampled on a frequency grid. Rectangular passbands are
/// half-open ([lo, hi)) so adjacent windows tile without double counting.
inline ArrayXd filter_amplitude(const FilterSpec& filter, const SampledGrid& grid) {
  filter.validate();
  if (grid.domain != Domain::frequency)
    throw std::invalid_argument("filter_amplitude: need a frequency grid");
  const double w_c = wavelength_to_omega(filter.center);
  const double dw = wavelength_width_to_omega(filter.width, filter.center);
  ArrayXd amp(grid.n);
  if (filter.shape == FilterShape::rectangular) {
    for (int i = 0; i < grid.n; ++i) {
      const double w = grid.coordinate(i);
      amp[i] = (w >= w_c - 0.5 * dw && w < w_c + 0.5 * dw) ? 1.0 : 0.0;
    }
  } else {
    const double sigma = dw / gaussian_fwhm_factor;  // intensity FWHM = dw
    for (int i = 0; i < grid.n; ++i) {
      const double nu = grid.coordinate(i) - w_c;
      amp[i] = std::exp(-nu * nu / (4.0 * sigma * sigma));
    }
  }
  return amp;
}

/// Two-photon joint spectral amplitude S(w_s, w_i) on a signal x idler
/// frequency grid; rows follow the signal axis, columns the idler axis.
class JointSpectralAmplitude {
 public:
  JointSpectralAmplitude(SampledGrid grid_s, SampledGrid grid_i, MatrixXcd amplitude)
      : grid_s_(grid_s), grid_i_(grid_i), amp_(std::move(amplitude)) {
    if (grid_s_.domain != Domain::frequency || grid_i_.domain != Domain::frequency)
      throw std::invalid_argument("JointSpectralAmplitude: need frequency grids");
    if (amp_.rows() != grid_s_.n || amp_.cols() != grid_i_.n)
      throw std::invalid_argument("JointSpectralAmplitude: shape mismatch");
    if (!amp_.allFinite())
      throw std::invalid_argument("JointSpectralAmplitude: non-finite amplitude");
  }

  const SampledGrid& grid_s() const { return grid_s_; }
  const SampledGrid& grid_i() const { return grid_i_; }
  const MatrixXcd& amplitude() const { return amp_; }
  MatrixXcd& amplitude() { return amp_; }

  double measure() const { return grid_s_.spacing * grid_i_.spacing; }

  /// Total norm sum |S|^2 dw_s dw_i.
  double total_norm() const { return amp_.squaredNorm() * measure(); }

  void scale(double factor) { amp_ *= factor; }

 private:
  SampledGrid grid_s_;
  SampledGrid grid_i_;
  MatrixXcd amp_;
};

inline double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

/// S(nu_s, nu_i) = exp(-(nu_s + nu_i - e_p)^2 / (4 sigma_p^2)) * sinc(dk L / 2),
/// normalized to unit total norm. nu are detunings from the degenerate
/// frequency; e_p is the pump's own detuning from twice that frequency.
/// The crystal coordinate origin sits mid-crystal, so photon exit times are
/// centered on the pump frame and a zero arm delay means "photon coincident
/// with the pump peak"; the crystal-input convention differs from this one
/// only by a fixed delay of gvm L / 2 per arm.
inline JointSpectralAmplitude build_jsa(const SpdcSpec& spec, const SampledGrid& grid_s,
                                        const SampledGrid& grid_i) {
  spec.validate();
  const double w_deg = wavelength_to_omega(spec.degenerate_wavelength);
  if (std::abs(grid_s.center - w_deg) > 0.5 * grid_s.span() ||
      std::abs(grid_i.center - w_deg) > 0.5 * grid_i.span())
    throw std::invalid_argument("build_jsa: grids must be centered near degeneracy");

  const double e_p = wavelength_to_omega(spec.pump_center) - 2.0 * w_deg;
  const double sp2 = spec.pump_bandwidth * spec.pump_bandwidth;

  MatrixXcd amp(grid_s.n, grid_i.n);
  for (int j = 0; j < grid_i.n; ++j) {
    const double nu_i = grid_i.coordinate(j) - w_deg;
    for (int i = 0; i < grid_s.n; ++i) {
      const double nu_s = grid_s.coordinate(i) - w_deg;
      const double sum = nu_s + nu_i - e_p;
      const double pump = std::exp(-sum * sum / (4.0 * sp2));
      const double half_dk_l =
          0.5 * spec.crystal_length *
          (spec.gvm_ps * nu_s + spec.gvm_pi * nu_i + spec.mismatch_offset);
      amp(i, j) = pump * sinc(half_dk_l);
    }
  }

  JointSpectralAmplitude jsa(grid_s, grid_i, std::move(amp));
  const double norm = jsa.total_norm();
  if (!(norm > 0.0)) throw std::invalid_argument("build_jsa: vanishing amplitude");

  // boundary-mass guard: the grid must contain the state
  double edge = 0.0;
  const auto& m = jsa.amplitude();
  edge += m.row(0).squaredNorm() + m.row(grid_s.n - 1).squaredNorm();
  edge += m.col(0).squaredNorm() + m.col(grid_i.n - 1).squaredNorm();
  if (edge * jsa.measure() > 0.01 * norm)
    throw std::invalid_argument(
        "build_jsa: more than 1% of the norm sits on the grid boundary; widen the grids");

  jsa.scale(1.0 / std::sqrt(norm));
  return jsa;
}

/// Applies the reshaping operator to every signal column (idler fixed):
/// S'(., w_i) = U S(., w_i).
inline JointSpectralAmplitude apply_signal_operator(const JointSpectralAmplitude& jsa,
                                                    const SignalOperator& op) {
  if (op.frequency_grid() != jsa.grid_s())
    throw std::invalid_argument("apply_signal_operator: signal grid mismatch");
  MatrixXcd out = jsa.amplitude();
  ArrayXcd column(jsa.grid_s().n);
  for (int j = 0; j < jsa.grid_i().n; ++j) {
    column = out.col(j).array();
    op.apply_spectrum_in_place(column);
    out.col(j) = column.matrix();
  }
  return JointSpectralAmplitude(jsa.grid_s(), jsa.grid_i(), std::move(out));
}

/// Same reshaping applied to the idler axis (rows), used when the arms are
/// swapped in front of the fiber.
inline JointSpectralAmplitude apply_idler_operator(const JointSpectralAmplitude& jsa,
                                                   const SignalOperator& op) {
  if (op.frequency_grid() != jsa.grid_i())
    throw std::invalid_argument("apply_idler_operator: idler grid mismatch");
  MatrixXcd out = jsa.amplitude();
  ArrayXcd row(jsa.grid_i().n);
  for (int i = 0; i < jsa.grid_s().n; ++i) {
    row = out.row(i).array();
    op.apply_spectrum_in_place(row);
    out.row(i) = row.matrix().transpose();
  }
  return JointSpectralAmplitude(jsa.grid_s(), jsa.grid_i(), std::move(out));
}

/// Multiplies one arm by the filter amplitude. If the filter has no support
/// on the arm's grid, *zero_overlap is set and the state collapses to zero.
inline JointSpectralAmplitude apply_filter(const JointSpectralAmplitude& jsa,
                                           const FilterSpec& filter, Arm arm,
                                           bool* zero_overlap = nullptr) {
  const SampledGrid& grid = (arm == Arm::signal) ? jsa.grid_s() : jsa.grid_i();
  const ArrayXd amp = filter_amplitude(filter, grid);
  if (zero_overlap) *zero_overlap = (amp.maxCoeff() <= 0.0);
  const ArrayXcd camp = amp.cast<complexd>();
  MatrixXcd out = jsa.amplitude();
  if (arm == Arm::signal)
    out.array().colwise() *= camp;
  else
    out.array().rowwise() *= camp.transpose();
  return JointSpectralAmplitude(jsa.grid_s(), jsa.grid_i(), std::move(out));
}

/// Joint spectral intensity |S|^2.
inline MatrixXd jsi(const JointSpectralAmplitude& jsa) {
  return jsa.amplitude().cwiseAbs2();
}

/// Marginal intensity density of one arm (integrates to the total norm).
inline ArrayXd marginal(const JointSpectralAmplitude& jsa, Arm arm) {
  const MatrixXd intensity = jsi(jsa);
  if (arm == Arm::signal)
    return intensity.rowwise().sum().array() * jsa.grid_i().spacing;
  return intensity.colwise().sum().transpose().array() * jsa.grid_s().spacing;
}

/// Delays one arm by delay_s: the arm's spectrum picks up exp(+i nu delay).
inline JointSpectralAmplitude delay_arm(const JointSpectralAmplitude& jsa, Arm arm,
                                        double delay_s) {
  const SampledGrid& grid = (arm == Arm::signal) ? jsa.grid_s() : jsa.grid_i();
  ArrayXcd phase(grid.n);
  for (int i = 0; i < grid.n; ++i)
    phase[i] = std::exp(complexd(0.0, grid.offset(i) * delay_s));
  MatrixXcd out = jsa.amplitude();
  if (arm == Arm::signal)
    out.array().colwise() *= phase;
  else
    out.array().rowwise() *= phase.transpose();
  return JointSpectralAmplitude(jsa.grid_s(), jsa.grid_i(), std::move(out));
}

struct HeraldedSeries {
  std::vector<double> centers;  // m, scan filter centers
  ArrayXd masses;               // coincidence mass per scan center
  double heralded_total = 0.0;  // herald-filtered mass over the whole signal axis
};

/// Coincidence mass versus the scan-filter center on the signal arm, with a
/// fixed herald filter on the idler arm.
inline HeraldedSeries heralded_spectrum(const JointSpectralAmplitude& jsa,
                                        const FilterSpec& herald,
                                        const FilterSpec& scan_template,
                                        const std::vector<double>& centers) {
  const ArrayXd herald_amp = filter_amplitude(herald, jsa.grid_i());
  const ArrayXd herald_w = herald_amp * herald_amp;
  const MatrixXd intensity = jsi(jsa);

  // herald-conditioned signal spectrum, then O(n) per scan center
  ArrayXd conditioned(jsa.grid_s().n);
  for (int i = 0; i < jsa.grid_s().n; ++i)
    conditioned[i] = (intensity.row(i).transpose().array() * herald_w).sum();

  const double measure = jsa.measure();
  HeraldedSeries series;
  series.centers = centers;
  series.masses = ArrayXd::Zero(static_cast<Eigen::Index>(centers.size()));
  for (size_t c = 0; c < centers.size(); ++c) {
    FilterSpec scan = scan_template;
    scan.center = centers[c];
    const ArrayXd amp = filter_amplitude(scan, jsa.grid_s());
    series.masses[static_cast<Eigen::Index>(c)] =
        (conditioned * amp * amp).sum() * measure;
  }
  series.heralded_total = conditioned.sum() * measure;
  return series;
}

/// Bhattacharyya-squared overlap of two non-negative spectra on one grid:
/// O = (sum sqrt(a b))^2 / (sum a * sum b), in [0, 1].
inline double spectral_overlap(const ArrayXd& a, const ArrayXd& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("spectral_overlap: size mismatch");
  if (a.minCoeff() < 0.0 || b.minCoeff() < 0.0)
    throw std::invalid_argument("spectral_overlap: spectra must be non-negative");
  const double mass_a = a.sum(), mass_b = b.sum();
  if (!(mass_a > 0.0) || !(mass_b > 0.0))
    throw std::invalid_argument("spectral_overlap: zero-mass input");
  const double cross = (a * b).sqrt().sum();
  return cross * cross / (mass_a * mass_b);
}

struct ExchangeParts {
  MatrixXcd symmetric;
  MatrixXcd antisymmetric;
  double antisymmetric_fraction = 0.0;  // norm(anti) / norm(S), squared-norm ratio
};

/// Splits S into exchange-symmetric and antisymmetric parts,
/// S = (S + S^T)/2 + (S - S^T)/2; requires identical arm grids.
inline ExchangeParts exchange_decompose(const JointSpectralAmplitude& jsa) {
  if (jsa.grid_s() != jsa.grid_i())
    throw std::invalid_argument("exchange_decompose: arm grids must match");
  const MatrixXcd& s = jsa.amplitude();
  ExchangeParts parts;
  parts.symmetric = 0.5 * (s + s.transpose());
  parts.antisymmetric = 0.5 * (s - s.transpose());
  const double total = s.squaredNorm();
  if (!(total > 0.0))
    throw std::invalid_argument("exchange_decompose: zero state");
  parts.antisymmetric_fraction = parts.antisymmetric.squaredNorm() / total;
  return parts;
}

}  // namespace photon_reshape
