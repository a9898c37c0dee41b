#pragma once

#include <cmath>

namespace photon_reshape {

/// Vacuum speed of light in m/s.
inline constexpr double speed_of_light = 299792458.0;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

/// Angular frequency (rad/s) of a vacuum wavelength (m).
inline double wavelength_to_omega(double wavelength_m) {
  return two_pi * speed_of_light / wavelength_m;
}

/// Vacuum wavelength (m) of an angular frequency (rad/s).
inline double omega_to_wavelength(double omega_rad_s) {
  return two_pi * speed_of_light / omega_rad_s;
}

/// Wavelength bandwidth (m) at carrier wavelength -> angular-frequency
/// bandwidth (rad/s), first order.
inline double wavelength_width_to_omega(double width_m, double center_m) {
  return two_pi * speed_of_light * width_m / (center_m * center_m);
}

inline constexpr double ps = 1e-12;
inline constexpr double nm = 1e-9;
inline constexpr double mm = 1e-3;
inline constexpr double thz = 1e12;

/// FWHM of a Gaussian with rms width sigma (intensity-domain identity).
inline constexpr double gaussian_fwhm_factor = 2.3548200450309493;  // 2 sqrt(2 ln 2)

/// Intensity FWHM of sech^2(t/T0) in units of T0: 2 acosh(sqrt 2).
inline constexpr double sech2_fwhm_factor = 1.7627471740390861;

}  // namespace photon_reshape
