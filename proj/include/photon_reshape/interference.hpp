#pragma once

#include <cmath>
#include <vector>

#include "photon_reshape/biphoton.hpp"
#include "photon_reshape/errors.hpp"

namespace photon_reshape {

/// Two-photon coincidence rate versus arrival-time difference, normalized so
/// the classical plateau sits at 1 (raw R(dt) = (1 - Re W)/2 rescaled by 2).
struct HomFringe {
  ArrayXd delays;  // s, strictly increasing
  ArrayXd rates;   // dimensionless
  double r_classical = 0.0;  // plateau estimate: mean of the outer 10% of delays
  double r_extremum = 0.0;   // strongest excursion within the inner 20%
};

enum class FringeKind { dip, bump, flat };

struct VisibilityResult {
  double value = 0.0;
  FringeKind kind = FringeKind::flat;
};

namespace detail {

/// Exchange-overlap diagonal sums: W(dt) = sum_m G_m exp(i m dw dt) / N with
/// G_m = sum_{j-k=m} S(j,k) conj(S(k,j)) dw^2.
struct ExchangeKernel {
  std::vector<complexd> g;  // index m + (n-1)
  double dw = 0.0;
  double norm = 0.0;
  int n = 0;

  explicit ExchangeKernel(const JointSpectralAmplitude& jsa) {
    if (jsa.grid_s() != jsa.grid_i())
      throw std::invalid_argument("hom_fringe: arm grids must match");
    norm = jsa.total_norm();
    if (!(norm > 0.0)) throw std::invalid_argument("hom_fringe: zero state");
    n = jsa.grid_s().n;
    dw = jsa.grid_s().spacing;
    const auto& s = jsa.amplitude();
    g.assign(static_cast<size_t>(2 * n - 1), complexd(0.0, 0.0));
    const double measure = jsa.measure();
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        g[static_cast<size_t>(j - k + n - 1)] +=
            s(j, k) * std::conj(s(k, j)) * measure;
  }

  complexd w(double delay) const {
    complexd acc(0.0, 0.0);
    for (int m = -(n - 1); m <= n - 1; ++m) {
      const complexd term = g[static_cast<size_t>(m + n - 1)];
      if (term == complexd(0.0, 0.0)) continue;
      acc += term * std::exp(complexd(0.0, m * dw * delay));
    }
    return acc / norm;
  }
};

}  // namespace detail

/// R(dt) = 1 - Re W(dt) with W the exchange overlap
/// W(dt) = (1/N) sum S(w1,w2) conj(S(w2,w1)) exp(i (w1-w2) dt) dw^2.
inline HomFringe hom_fringe(const JointSpectralAmplitude& jsa,
                            const std::vector<double>& delays) {
  if (delays.size() < 4)
    throw std::invalid_argument("hom_fringe: need at least 4 delays");
  for (size_t i = 1; i < delays.size(); ++i)
    if (!(delays[i] > delays[i - 1]))
      throw std::invalid_argument("hom_fringe: delays must be strictly increasing");

  const detail::ExchangeKernel kernel(jsa);
  const auto count = static_cast<Eigen::Index>(delays.size());
  HomFringe fringe;
  fringe.delays = ArrayXd(count);
  fringe.rates = ArrayXd(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const complexd w = kernel.w(delays[static_cast<size_t>(i)]);
    if (std::abs(w) > 1.0 + 1e-8)
      throw numerics_error("hom_fringe: |W| exceeds 1 beyond numerical tolerance");
    fringe.delays[i] = delays[static_cast<size_t>(i)];
    fringe.rates[i] = std::max(0.0, 1.0 - w.real());
  }

  const auto per_side = std::max<Eigen::Index>(1, (count + 10) / 20);  // ~5% each side
  double outer = 0.0;
  for (Eigen::Index i = 0; i < per_side; ++i)
    outer += fringe.rates[i] + fringe.rates[count - 1 - i];
  fringe.r_classical = outer / static_cast<double>(2 * per_side);

  const double mid = 0.5 * (fringe.delays[0] + fringe.delays[count - 1]);
  const double inner_half = 0.1 * (fringe.delays[count - 1] - fringe.delays[0]);
  double extremum = fringe.rates[count / 2];
  double strongest = -1.0;
  for (Eigen::Index i = 0; i < count; ++i) {
    if (std::abs(fringe.delays[i] - mid) > inner_half) continue;
    const double dev = std::abs(fringe.rates[i] - fringe.r_classical);
    if (dev > strongest) {
      strongest = dev;
      extremum = fringe.rates[i];
    }
  }
  fringe.r_extremum = extremum;
  return fringe;
}

/// V = |r_classical - r_extremum| / r_classical, tagged dip or bump.
inline VisibilityResult visibility(const HomFringe& fringe) {
  if (!(fringe.r_classical > 0.0))
    throw std::invalid_argument("visibility: zero classical rate");
  const double dev = fringe.r_extremum - fringe.r_classical;
  VisibilityResult v;
  v.value = std::abs(dev) / fringe.r_classical;
  if (v.value < 1e-12)
    v.kind = FringeKind::flat;
  else
    v.kind = (dev < 0.0) ? FringeKind::dip : FringeKind::bump;
  return v;
}

/// Bump visibility evaluated at the delay closest to zero, the antibunching
/// figure of merit: max(0, (R(0) - r_classical) / r_classical). Positive
/// exactly when the antisymmetric exchange component dominates.
inline double bump_visibility(const HomFringe& fringe) {
  if (!(fringe.r_classical > 0.0))
    throw std::invalid_argument("bump_visibility: zero classical rate");
  Eigen::Index nearest = 0;
  for (Eigen::Index i = 1; i < fringe.delays.size(); ++i)
    if (std::abs(fringe.delays[i]) < std::abs(fringe.delays[nearest])) nearest = i;
  return std::max(0.0, (fringe.rates[nearest] - fringe.r_classical) /
                           fringe.r_classical);
}

/// Phase-free upper bound on the dip visibility from the JSI alone:
/// V_ub = sum sqrt(J(w1,w2) J(w2,w1)) / sum J. Requires a square map.
inline double jsi_visibility_bound(const MatrixXd& jsi_map) {
  if (jsi_map.rows() != jsi_map.cols())
    throw std::invalid_argument("jsi_visibility_bound: need a square JSI");
  if (jsi_map.minCoeff() < 0.0)
    throw std::invalid_argument("jsi_visibility_bound: negative entries");
  const double total = jsi_map.sum();
  if (!(total > 0.0)) throw std::invalid_argument("jsi_visibility_bound: zero JSI");
  double cross = 0.0;
  for (Eigen::Index j = 0; j < jsi_map.rows(); ++j)
    for (Eigen::Index k = 0; k < jsi_map.cols(); ++k)
      cross += std::sqrt(jsi_map(j, k) * jsi_map(k, j));
  return cross / total;
}

/// Adds a flat accidental background b = fraction * r_classical and renorms:
/// rates' = (rates + b) / (1 + b).
inline HomFringe add_accidentals(const HomFringe& fringe, double background_fraction) {
  if (background_fraction < 0.0)
    throw std::invalid_argument("add_accidentals: fraction must be >= 0");
  const double b = background_fraction * fringe.r_classical;
  HomFringe out = fringe;
  out.rates = (fringe.rates + b) / (1.0 + b);
  out.r_classical = (fringe.r_classical + b) / (1.0 + b);
  out.r_extremum = (fringe.r_extremum + b) / (1.0 + b);
  return out;
}

/// Exact inverse of add_accidentals for the same fraction.
inline HomFringe remove_accidentals(const HomFringe& fringe,
                                    double background_fraction) {
  if (background_fraction < 0.0)
    throw std::invalid_argument("remove_accidentals: fraction must be >= 0");
  // r_cl' = r_cl (1 + f) / (1 + f r_cl)  =>  r_cl = r_cl' / (1 + f - f r_cl')
  const double f = background_fraction;
  const double r_cl = fringe.r_classical / (1.0 + f - f * fringe.r_classical);
  const double b = f * r_cl;
  HomFringe out = fringe;
  out.rates = fringe.rates * (1.0 + b) - b;
  out.r_classical = fringe.r_classical * (1.0 + b) - b;
  out.r_extremum = fringe.r_extremum * (1.0 + b) - b;
  return out;
}

}  // namespace photon_reshape
