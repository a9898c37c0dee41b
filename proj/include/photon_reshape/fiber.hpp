#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "photon_reshape/units.hpp"

namespace photon_reshape {

/// One point of a measured group-delay spectrum.
struct GroupDelaySample {
  double wavelength = 0.0;  // m
  double delay = 0.0;       // s/m
};

/// Polynomial group-delay model delay(lambda) = sum c_k (lambda - lambda_ref)^k,
/// valid only on the wavelength range it was fitted over.
class GroupDelayCurve {
 public:
  GroupDelayCurve(std::vector<double> coefficients, double lambda_ref,
                  double lambda_min, double lambda_max)
      : coeffs_(std::move(coefficients)),
        lambda_ref_(lambda_ref),
        lambda_min_(lambda_min),
        lambda_max_(lambda_max) {
    if (coeffs_.empty() || coeffs_.size() > 7)
      throw std::invalid_argument("GroupDelayCurve: degree must be in [0, 6]");
    if (!(lambda_min_ < lambda_max_))
      throw std::invalid_argument("GroupDelayCurve: empty validity range");
  }

  /// Group delay in s/m. Throws outside the validity range.
  double operator()(double lambda) const {
    check_range(lambda);
    const double x = lambda - lambda_ref_;
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  /// d(delay)/d(lambda) in s/m^2, analytic.
  double derivative(double lambda) const {
    check_range(lambda);
    const double x = lambda - lambda_ref_;
    double acc = 0.0;
    for (int k = static_cast<int>(coeffs_.size()) - 1; k >= 1; --k)
      acc = acc * x + coeffs_[static_cast<size_t>(k)] * k;
    return acc;
  }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  double reference_wavelength() const { return lambda_ref_; }
  std::pair<double, double> valid_range() const { return {lambda_min_, lambda_max_}; }

  bool contains(double lambda) const {
    return lambda >= lambda_min_ && lambda <= lambda_max_;
  }

 private:
  void check_range(double lambda) const {
    if (!contains(lambda))
      throw std::out_of_range("GroupDelayCurve: wavelength " +
                              std::to_string(lambda * 1e9) +
                              " nm outside fitted range");
  }

  std::vector<double> coeffs_;
  double lambda_ref_;
  double lambda_min_;
  double lambda_max_;
};

inline GroupDelayCurve bundled_group_delay_curve();

/// Fiber parameters for one propagation run. gamma_control acts on the
/// control via SPM; gamma_signal scales the XPM phase seen by the signal.
/// xpm_factor is 2 for co-polarized fields, 2/3 for orthogonal.
struct FiberSpec {
  double length = 1.0;            // m
  double gamma_control = 0.0;     // 1/(W m)
  double gamma_signal = 0.0;      // 1/(W m)
  double xpm_factor = 2.0;
  GroupDelayCurve delay_curve = bundled_group_delay_curve();
  double transmission = 1.0;

  void validate() const {
    if (!(length > 0.0)) throw std::invalid_argument("FiberSpec: length must be > 0");
    if (gamma_control < 0.0 || gamma_signal < 0.0)
      throw std::invalid_argument("FiberSpec: gamma must be >= 0");
    if (!(xpm_factor > 0.0))
      throw std::invalid_argument("FiberSpec: xpm_factor must be > 0");
    if (!(transmission > 0.0) || transmission > 1.0)
      throw std::invalid_argument("FiberSpec: transmission must be in (0, 1]");
  }
};

struct GroupDelayFit {
  GroupDelayCurve curve;
  double residual_rms = 0.0;  // s/m
};

/// Least-squares polynomial fit of a group-delay spectrum. The abscissa is
/// shifted to the window center and scaled to [-1, 1] before solving, then
/// the coefficients are mapped back to the (lambda - lambda_ref)^k basis.
inline GroupDelayFit fit_group_delay(const std::vector<GroupDelaySample>& samples,
                                     int degree) {
  if (degree < 0 || degree > 6)
    throw std::invalid_argument("fit_group_delay: degree must be in [0, 6]");
  const int m = static_cast<int>(samples.size());
  if (m < degree + 1)
    throw std::invalid_argument("fit_group_delay: need at least degree+1 samples");

  std::vector<double> lams(m);
  for (int i = 0; i < m; ++i) {
    if (!(samples[static_cast<size_t>(i)].wavelength > 0.0) ||
        !std::isfinite(samples[static_cast<size_t>(i)].delay))
      throw std::invalid_argument("fit_group_delay: invalid sample");
    lams[static_cast<size_t>(i)] = samples[static_cast<size_t>(i)].wavelength;
  }
  std::vector<double> sorted = lams;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("fit_group_delay: duplicate wavelengths");

  const double lo = sorted.front(), hi = sorted.back();
  const double lambda_ref = 0.5 * (lo + hi);
  const double scale = (hi > lo) ? 0.5 * (hi - lo) : 1.0;

  Eigen::MatrixXd vand(m, degree + 1);
  Eigen::VectorXd rhs(m);
  for (int i = 0; i < m; ++i) {
    const double x = (samples[static_cast<size_t>(i)].wavelength - lambda_ref) / scale;
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      vand(i, k) = p;
      p *= x;
    }
    rhs(i) = samples[static_cast<size_t>(i)].delay;
  }

  Eigen::VectorXd scaled = vand.colPivHouseholderQr().solve(rhs);
  const double rms = std::sqrt((vand * scaled - rhs).squaredNorm() / m);

  std::vector<double> coeffs(static_cast<size_t>(degree) + 1);
  double inv_pow = 1.0;
  for (int k = 0; k <= degree; ++k) {
    coeffs[static_cast<size_t>(k)] = scaled(k) * inv_pow;
    inv_pow /= scale;
  }
  return {GroupDelayCurve(std::move(coeffs), lambda_ref, lo, hi), rms};
}

/// Group-velocity dispersion beta2 = d(delay)/d(omega) in s^2/m, via the
/// chain rule d(omega) = -(2 pi c / lambda^2) d(lambda).
inline double beta2_at(const GroupDelayCurve& curve, double lambda) {
  return curve.derivative(lambda) * (-(lambda * lambda) / (two_pi * speed_of_light));
}

/// Wavelength in [lo, hi] whose group delay matches delay(lambda_ref),
/// located by bisection on the sign change of the delay difference.
/// Matching tolerance: |delta delay| < 1e-4 ps/m.
inline double find_matched_wavelength(const GroupDelayCurve& curve, double lambda_ref,
                                      double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("find_matched_wavelength: empty window");
  if (!curve.contains(lo) || !curve.contains(hi) || !curve.contains(lambda_ref))
    throw std::out_of_range("find_matched_wavelength: window outside fitted range");
  if (lambda_ref >= lo && lambda_ref <= hi)
    throw std::invalid_argument(
        "find_matched_wavelength: window must exclude the reference wavelength");

  const double target = curve(lambda_ref);
  constexpr double tol = 1e-4 * 1e-12;  // 1e-4 ps/m
  double glo = curve(lo) - target;
  const double ghi = curve(hi) - target;
  if (glo * ghi > 0.0)
    throw std::invalid_argument(
        "find_matched_wavelength: no matched wavelength in the search window");

  double a = lo, b = hi;
  while (b - a > 1e-16) {
    const double mid = 0.5 * (a + b);
    const double g = curve(mid) - target;
    if (g * glo > 0.0) {
      a = mid;
      glo = g;
    } else {
      b = mid;
    }
  }
  const double lam = 0.5 * (a + b);
  if (!(std::abs(curve(lam) - target) < tol))
    throw std::invalid_argument(
        "find_matched_wavelength: sign change does not reach matching tolerance");
  return lam;
}

/// Group-delay difference per unit length between two wavelengths, s/m.
inline double walkoff_per_meter(const GroupDelayCurve& curve, double lambda_a,
                                double lambda_b) {
  return curve(lambda_a) - curve(lambda_b);
}

struct GvdBandwidthLimit {
  double hz = 0.0;
  bool dispersion_free = false;
};

/// First-order estimate of the shift scale at which GVD-induced walk-off of
/// shifted components across the fiber equals the control pulse width:
/// dnu = fwhm / (2 pi |beta2| L). An order-of-magnitude design aid only.
inline GvdBandwidthLimit gvd_bandwidth_limit(const FiberSpec& fiber,
                                             double pulse_fwhm,
                                             double lambda_signal) {
  if (!(pulse_fwhm > 0.0))
    throw std::invalid_argument("gvd_bandwidth_limit: pulse_fwhm must be > 0");
  const double b2 = beta2_at(fiber.delay_curve, lambda_signal);
  if (b2 == 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {pulse_fwhm / (two_pi * std::abs(b2) * fiber.length), false};
}

/// Stand-in for the dispersion-managed PCF: a sixth-order polynomial with a
/// group-delay minimum between the two operating bands, adjusted so that
/// delay(756 nm) == delay(1512 nm) exactly. Qualitative visual approximation
/// of the measured spectrum, not digitized data.
inline GroupDelayCurve bundled_group_delay_curve() {
  constexpr double lambda_ref = 1100e-9;
  constexpr double scale = 400e-9;
  // ps/m in units of x = (lambda - lambda_ref)/scale
  double p[7] = {0.0, 0.0, 6.0, 1.2, 0.8, 0.1, 0.05};
  auto eval = [&p](double x) {
    double acc = 0.0;
    for (int k = 6; k >= 0; --k) acc = acc * x + p[k];
    return acc;
  };
  const double x_c = (756e-9 - lambda_ref) / scale;
  const double x_s = (1512e-9 - lambda_ref) / scale;
  p[1] = -(eval(x_s) - eval(x_c)) / (x_s - x_c);
  // base group delay of the silica core, ~n_g/c
  p[0] = 4.88e3;  // ps/m

  std::vector<double> coeffs(7);
  double inv_pow = 1.0;
  for (int k = 0; k <= 6; ++k) {
    coeffs[static_cast<size_t>(k)] = p[k] * 1e-12 * inv_pow;
    inv_pow /= scale;
  }
  return GroupDelayCurve(std::move(coeffs), lambda_ref, 650e-9, 1650e-9);
}

/// Reads group-delay samples from CSV with the header
/// `wavelength_nm, delay_ps_per_m`. Lines starting with '#' are skipped.
inline std::vector<GroupDelaySample> read_group_delay_csv(std::istream& in) {
  auto strip = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };

  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::vector<GroupDelaySample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = strip(line);
    if (body.empty() || body[0] == '#') continue;
    std::stringstream row(body);
    std::string a, b, extra;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ','))
      throw std::invalid_argument("group-delay CSV line " + std::to_string(line_no) +
                                  ": expected two comma-separated columns");
    if (std::getline(row, extra, ',') && !strip(extra).empty())
      throw std::invalid_argument("group-delay CSV line " + std::to_string(line_no) +
                                  ": expected exactly two columns");
    a = strip(a);
    b = strip(b);
    if (!header_seen) {
      if (a != "wavelength_nm" || b != "delay_ps_per_m")
        throw std::invalid_argument(
            "group-delay CSV line " + std::to_string(line_no) +
            ": header must be `wavelength_nm, delay_ps_per_m`");
      header_seen = true;
      continue;
    }
    try {
      size_t pa = 0, pb = 0;
      const double lam = std::stod(a, &pa);
      const double del = std::stod(b, &pb);
      if (pa != a.size() || pb != b.size()) throw std::invalid_argument("trailing text");
      samples.push_back({lam * nm, del * ps});
    } catch (const std::exception&) {
      throw std::invalid_argument("group-delay CSV line " + std::to_string(line_no) +
                                  ": malformed number");
    }
  }
  if (!header_seen)
    throw std::invalid_argument("group-delay CSV: missing header row");
  return samples;
}

inline std::vector<GroupDelaySample> read_group_delay_csv_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot open group-delay CSV: " + path);
  return read_group_delay_csv(f);
}

}  // namespace photon_reshape
