#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "photon_reshape/fiber.hpp"

using namespace photon_reshape;
using Catch::Approx;

namespace {

std::vector<GroupDelaySample> sample_polynomial(const std::vector<double>& coeffs,
                                                double lambda_ref, double lo,
                                                double hi, int count) {
  std::vector<GroupDelaySample> out;
  for (int i = 0; i < count; ++i) {
    const double lam = lo + (hi - lo) * i / (count - 1);
    double acc = 0.0;
    const double x = lam - lambda_ref;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    out.push_back({lam, acc});
  }
  return out;
}

}  // namespace

TEST_CASE("cubic data is recovered by a cubic fit", "[fiber][oracle]") {
  // synthesize-then-fit: exact polynomial in (lambda - 1e-6)^k
  const std::vector<double> truth = {4.9e-9, 2.0e-5, 3.0e1, 5.0e7};
  auto samples = sample_polynomial(truth, 1.0e-6, 0.7e-6, 1.6e-6, 25);
  auto fit = fit_group_delay(samples, 3);

  for (const auto& s : samples)
    CHECK(fit.curve(s.wavelength) == Approx(s.delay).epsilon(1e-9));
  CHECK(fit.residual_rms < 1e-9 * 4.9e-9);
}

TEST_CASE("two samples define an exact line", "[fiber]") {
  std::vector<GroupDelaySample> samples = {{1.0e-6, 5.0e-9}, {1.5e-6, 6.0e-9}};
  auto fit = fit_group_delay(samples, 1);
  CHECK(fit.curve(1.0e-6) == Approx(5.0e-9).epsilon(1e-12));
  CHECK(fit.curve(1.5e-6) == Approx(6.0e-9).epsilon(1e-12));
  CHECK(fit.curve(1.25e-6) == Approx(5.5e-9).epsilon(1e-12));
}

TEST_CASE("degree-6 fit of noiseless degree-6 data has tiny residual",
          "[fiber][oracle]") {
  std::vector<double> truth = {4.88e-9, -1e-5, 40.0, 1e8, 2e14, 3e20, 5e26};
  auto samples = sample_polynomial(truth, 1.1e-6, 0.65e-6, 1.65e-6, 40);
  auto fit = fit_group_delay(samples, 6);
  CHECK(fit.residual_rms < 1e-10 * 4.88e-9);
}

TEST_CASE("fit rejects bad inputs", "[fiber]") {
  std::vector<GroupDelaySample> dup = {{1.0e-6, 1.0e-9}, {1.0e-6, 2.0e-9}, {1.2e-6, 3e-9}};
  CHECK_THROWS_AS(fit_group_delay(dup, 2), std::invalid_argument);

  std::vector<GroupDelaySample> two = {{1.0e-6, 1.0e-9}, {1.1e-6, 2.0e-9}};
  CHECK_THROWS_AS(fit_group_delay(two, 2), std::invalid_argument);
  CHECK_THROWS_AS(fit_group_delay(two, 7), std::invalid_argument);
}

TEST_CASE("beta2 of linear and constant delay curves", "[fiber]") {
  const double slope = 3.0e-5;  // s/m^2
  GroupDelayCurve line({4.9e-9, slope}, 1.0e-6, 0.5e-6, 2.0e-6);
  const double lam = 1.3e-6;
  CHECK(beta2_at(line, lam) ==
        Approx(slope * (-(lam * lam) / (two_pi * speed_of_light))).epsilon(1e-12));

  GroupDelayCurve flat({4.9e-9}, 1.0e-6, 0.5e-6, 2.0e-6);
  CHECK(beta2_at(flat, lam) == 0.0);
  CHECK_THROWS_AS(beta2_at(flat, 2.5e-6), std::out_of_range);
}

TEST_CASE("beta2 agrees with a finite difference of delay versus omega",
          "[fiber][oracle]") {
  auto curve = bundled_group_delay_curve();
  const double domega = 1e9;  // rad/s
  for (double lam : {0.76e-6, 1.05e-6, 1.3e-6, 1.512e-6}) {
    const double omega = wavelength_to_omega(lam);
    const double lam_p = omega_to_wavelength(omega + domega);
    const double lam_m = omega_to_wavelength(omega - domega);
    const double fd = (curve(lam_p) - curve(lam_m)) / (2.0 * domega);
    CHECK(beta2_at(curve, lam) == Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("matched wavelength on a symmetric parabola", "[fiber]") {
  // delay symmetric about 1.1e-6: matched partner of (1.1-d) is (1.1+d)
  GroupDelayCurve parab({5.0e-9, 0.0, 25.0}, 1.1e-6, 0.6e-6, 1.6e-6);
  const double lam = find_matched_wavelength(parab, 0.9e-6, 1.2e-6, 1.6e-6);
  CHECK(lam == Approx(1.3e-6).epsilon(1e-9));
  CHECK(std::abs(walkoff_per_meter(parab, 0.9e-6, lam)) < 1e-16);
}

TEST_CASE("bundled curve matches 756 nm with 1512 nm", "[fiber][paper]") {
  auto curve = bundled_group_delay_curve();
  const double lam = find_matched_wavelength(curve, 756e-9, 1.2e-6, 1.65e-6);
  CHECK(lam == Approx(1512e-9).margin(0.1e-9));
  CHECK(std::abs(walkoff_per_meter(curve, 756e-9, lam)) < 1e-16);  // < 1e-4 ps/m
}

TEST_CASE("matched wavelength agrees with a dense scan", "[fiber][oracle]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> p2(5.0, 50.0), p3(-10.0, 10.0);
  for (int trial = 0; trial < 10; ++trial) {
    GroupDelayCurve curve({5.0e-9, 0.0, p2(rng), p3(rng)}, 1.1e-6, 0.6e-6, 1.6e-6);
    const double lref = 0.85e-6;
    const double lo = 1.25e-6, hi = 1.6e-6;
    double best = lo, best_diff = std::abs(curve(lo) - curve(lref));
    const int steps = 20000;
    for (int i = 1; i <= steps; ++i) {
      const double lam = lo + (hi - lo) * i / steps;
      const double d = std::abs(curve(lam) - curve(lref));
      if (d < best_diff) {
        best_diff = d;
        best = lam;
      }
    }
    if ((curve(lo) - curve(lref)) * (curve(hi) - curve(lref)) > 0.0) continue;
    const double lam = find_matched_wavelength(curve, lref, lo, hi);
    CHECK(std::abs(lam - best) <= (hi - lo) / steps);
  }
}

TEST_CASE("no sign change means no matched wavelength", "[fiber]") {
  GroupDelayCurve parab({5.0e-9, 0.0, 25.0}, 1.1e-6, 0.6e-6, 1.6e-6);
  CHECK_THROWS_AS(find_matched_wavelength(parab, 1.05e-6, 1.3e-6, 1.6e-6),
                  std::invalid_argument);
  CHECK_THROWS_AS(find_matched_wavelength(parab, 1.4e-6, 1.45e-6, 1.6e-6),
                  std::invalid_argument);
}

TEST_CASE("walkoff identities", "[fiber]") {
  const double slope = 2.0e-5;
  GroupDelayCurve line({4.9e-9, slope}, 1.0e-6, 0.5e-6, 2.0e-6);
  CHECK(walkoff_per_meter(line, 1.2e-6, 1.2e-6) == 0.0);
  CHECK(walkoff_per_meter(line, 1.4e-6, 1.1e-6) == Approx(slope * 0.3e-6).epsilon(1e-12));
}

TEST_CASE("GVD bandwidth limit scales and flags", "[fiber]") {
  GroupDelayCurve flat({4.9e-9}, 1.0e-6, 0.5e-6, 2.0e-6);
  FiberSpec free_fiber{1.0, 0.0, 0.0, 2.0, flat, 1.0};
  auto unlimited = gvd_bandwidth_limit(free_fiber, 0.78e-12, 1.5e-6);
  CHECK(unlimited.dispersion_free);
  CHECK(std::isinf(unlimited.hz));

  const double slope = 3.0e-5;
  GroupDelayCurve line({4.9e-9, slope}, 1.0e-6, 0.5e-6, 2.0e-6);
  FiberSpec one{1.0, 0.0, 0.0, 2.0, line, 1.0};
  FiberSpec twice{2.0, 0.0, 0.0, 2.0, line, 1.0};
  auto est1 = gvd_bandwidth_limit(one, 0.78e-12, 1.5e-6);
  auto est2 = gvd_bandwidth_limit(twice, 0.78e-12, 1.5e-6);
  CHECK(est1.hz == Approx(2.0 * est2.hz).epsilon(1e-12));

  // parameters tuned so the estimate reproduces the observed 0.4 THz ceiling
  const double beta2_abs = 0.78e-12 / (two_pi * 0.4e12);  // ~3.1e-25 s^2/m
  const double lam_s = 1.512e-6;
  const double slope_for = beta2_abs * two_pi * speed_of_light / (lam_s * lam_s);
  GroupDelayCurve tuned({4.9e-9, slope_for}, 1.512e-6, 0.5e-6, 2.0e-6);
  FiberSpec f{1.0, 0.0, 0.0, 2.0, tuned, 1.0};
  CHECK(gvd_bandwidth_limit(f, 0.78e-12, lam_s).hz == Approx(0.4e12).epsilon(1e-9));
}

TEST_CASE("group-delay CSV ingestion", "[fiber]") {
  std::stringstream good(
      "# stand-in measurement\n"
      "wavelength_nm, delay_ps_per_m\n"
      "756.0, 4881.5\n"
      "1512.0, 4881.5\n");
  auto samples = read_group_delay_csv(good);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].wavelength == Approx(756e-9));
  CHECK(samples[0].delay == Approx(4881.5e-12));

  std::stringstream no_header("756.0, 4881.5\n");
  CHECK_THROWS_AS(read_group_delay_csv(no_header), std::invalid_argument);

  std::stringstream bad_cols("wavelength_nm, delay_ps_per_m\n756.0\n");
  CHECK_THROWS_AS(read_group_delay_csv(bad_cols), std::invalid_argument);

  std::stringstream bad_num("wavelength_nm, delay_ps_per_m\n756.0, abc\n");
  CHECK_THROWS_AS(read_group_delay_csv(bad_num), std::invalid_argument);
}

TEST_CASE("shipped group-delay data reproduces the bundled curve", "[fiber]") {
  auto samples = read_group_delay_csv_file(std::string(PHOTON_RESHAPE_DATA_DIR) +
                                           "/pcf_group_delay.csv");
  REQUIRE(samples.size() >= 20);
  auto fit = fit_group_delay(samples, 6);
  auto truth = bundled_group_delay_curve();
  for (double lam = 0.70e-6; lam <= 1.60e-6; lam += 0.05e-6)
    CHECK(fit.curve(lam) == Approx(truth(lam)).epsilon(1e-9));
}

TEST_CASE("polynomial fits recover synthesized curves across degrees",
          "[fiber][property]") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  for (int degree = 0; degree <= 6; ++degree) {
    std::vector<double> truth(static_cast<size_t>(degree) + 1);
    double unit = 4.9e-9;
    for (auto& c : truth) {
      c = coeff(rng) * unit;
      unit /= 0.4e-6;  // keep each order's contribution comparable over the window
    }
    auto samples = sample_polynomial(truth, 1.1e-6, 0.7e-6, 1.5e-6, 30);
    auto fit = fit_group_delay(samples, degree);
    for (const auto& s : samples) {
      CHECK(fit.curve(s.wavelength) == Approx(s.delay).epsilon(1e-9).margin(1e-17));
    }
  }
}
