#include "oracles.hpp"

#include "turbsynth/errors.hpp"
#include "turbsynth/optics.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace turbsynth;

namespace {

// Golden values from an independent script of the closed forms.
constexpr double golden_r0_1e13 = 0.015524384897345093;
constexpr double golden_default_r0 = 0.061803689460655;
constexpr double golden_default_mean_px = 1.7707672985000509;
constexpr double golden_default_std_px = 0.3166566318038919;
constexpr double golden_default_rho = 1.2933209470641818;
constexpr double golden_le_xi025 = 0.8404387540406221;
constexpr double golden_se_xi025 = 0.8789998295824044;
constexpr double golden_rho_w3 = 1.142187853385052;
constexpr double golden_et_w3_xi01 = 0.7020792702383768;

const std::vector<double> tau_grid_ms{0.5, 1, 2, 4, 8, 16, 32, 40};

OpticalConfig moving_limit(OpticalConfig cfg)
{
    // The closed forms depend on exposure only through v * tau; a huge wind
    // speed gives v * tau of 3 m/s over 1e6 s inside the validity window.
    cfg.wind_speed = 3e6 / cfg.exposure_time;
    return cfg;
}

} // namespace

TEST_CASE("fried parameter")
{
    OpticalConfig cfg;
    cfg.cn2 = 1e-13;
    CHECK(fried_parameter(cfg) == doctest::Approx(golden_r0_1e13).epsilon(1e-12));

    OpticalConfig doubled = cfg;
    doubled.cn2 *= 2;
    CHECK(fried_parameter(cfg) / fried_parameter(doubled) == doctest::Approx(std::pow(2.0, 0.6)).epsilon(1e-12));

    OpticalConfig plane = cfg;
    plane.wave_shape = WaveShape::Plane;
    CHECK(fried_parameter(plane) / fried_parameter(cfg) == doctest::Approx(std::pow(3.0 / 8.0, 0.6)).epsilon(1e-12));
    CHECK(fried_parameter(OpticalConfig{}) == doctest::Approx(golden_default_r0).epsilon(1e-12));
}

TEST_CASE("short exposure MTF")
{
    OpticalConfig cfg;
    CHECK(mtf_short_exposure(cfg, 0.0) == 1.0);

    OpticalConfig near = cfg;
    near.field_regime = FieldRegime::Near;
    const double nu_cut = near.aperture() / near.wavelength;
    CHECK(mtf_short_exposure(near, nu_cut) == doctest::Approx(1.0).epsilon(1e-12));

    const double nu = angular_frequency(cfg, 0.25);
    CHECK(mtf_short_exposure(cfg, nu) == doctest::Approx(golden_se_xi025).epsilon(1e-12));

    for (int i = 0; i <= 256; ++i) {
        const double n = angular_frequency(cfg, 0.5 * i / 256.0);
        const double se = mtf_short_exposure(cfg, n);
        CHECK(se >= mtf_long_exposure(cfg, n));
        CHECK(se <= 1.0);
    }
}

TEST_CASE("long exposure MTF")
{
    OpticalConfig cfg;
    CHECK(mtf_long_exposure(cfg, 0.0) == 1.0);
    const double a = 3.0 / 8.0;
    const double nu = std::pow(57.4 * a * cfg.cn2 * cfg.distance * std::pow(cfg.wavelength, -1.0 / 3.0), -0.6);
    CHECK(mtf_long_exposure(cfg, nu) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(mtf_long_exposure(cfg, angular_frequency(cfg, 0.25)) == doctest::Approx(golden_le_xi025).epsilon(1e-12));
    double prev = 2.0;
    for (int i = 0; i < 256; ++i) {
        const double v = mtf_long_exposure(cfg, angular_frequency(cfg, 0.5 * i / 255.0));
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("MTF grids share the same conventions")
{
    OpticalConfig cfg;
    const SampledGrid se = mtf_short_exposure(cfg, Shape{16, 16});
    const SampledGrid le = mtf_long_exposure(cfg, Shape{16, 16});
    CHECK(se.at(0, 0) == 1.0);
    CHECK(le.at(0, 0) == 1.0);
    CHECK(le.at(8, 0) == doctest::Approx(mtf_long_exposure(cfg, angular_frequency(cfg, 0.5))));
    CHECK(le.at(3, 0) == doctest::Approx(le.at(13, 0)));
}

TEST_CASE("gain factor from r0")
{
    OpticalConfig cfg;
    cfg.wind_speed = 0.0;
    CHECK(rho_p(cfg, cfg.aperture()) == doctest::Approx(1.35).epsilon(1e-14));
    CHECK(rho_p(OpticalConfig{}) == doctest::Approx(golden_default_rho).epsilon(1e-12));

    OpticalConfig cfg2;
    const double r0 = fried_parameter(cfg2);
    CHECK(rho_p(cfg2.with_exposure(1e6), r0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(rho_p(cfg2.with_exposure(1e-3)) > rho_p(cfg2.with_exposure(40e-3)));
}

TEST_CASE("blur width from r0")
{
    OpticalConfig cfg;
    CHECK(blur_width_from_r0(cfg, 0.49 * cfg.wavelength * cfg.focal_length) == doctest::Approx(1.0).epsilon(1e-14));
    OpticalConfig twice = cfg;
    twice.focal_length *= 2;
    CHECK(blur_width_from_r0(twice, 0.05) == doctest::Approx(2 * blur_width_from_r0(cfg, 0.05)).epsilon(1e-14));
    CHECK(blur_width_from_r0(cfg, 0.05) == doctest::Approx(1.617e-6).epsilon(1e-12));
    CHECK(r0_from_blur_width(cfg, blur_width_from_r0(cfg, 0.03)) == doctest::Approx(0.03).epsilon(1e-14));
}

TEST_CASE("gain factor from width")
{
    OpticalConfig cfg;
    const double eff = cfg.aperture() + cfg.wind_speed * cfg.exposure_time;
    CHECK(rho_p_from_width(cfg, cfg.wavelength * cfg.focal_length / eff) == doctest::Approx(1.28).epsilon(1e-14));
    CHECK(rho_p_from_width(cfg, 1e3) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(rho_p_from_width_px(cfg, 3.0) == doctest::Approx(golden_rho_w3).epsilon(1e-12));
    CHECK(rho_p_from_width_px(cfg, 3.0) == doctest::Approx(oracle::rho_px(cfg, 3.0)).epsilon(1e-14));

    for (int i = 0; i <= 40; ++i) {
        const double omega = 1e-7 * std::pow(10.0, i / 10.0);
        const double a = rho_p_from_width(cfg, omega);
        const double b = rho_p(cfg, r0_from_blur_width(cfg, omega));
        CHECK(std::abs(a - b) / b <= 0.02);
    }
    CHECK(rho_p_from_width_px_short_limit(cfg, 3.0) > rho_p_from_width_px(cfg, 3.0));
}

TEST_CASE("exposure-time MTF")
{
    OpticalConfig cfg;
    CHECK(mtf_et(cfg, 3.0, 0.0) == 1.0);
    const double rho = rho_p_from_width_px(cfg, 3.0);
    CHECK(mtf_et(cfg, 3.0, 0.49 * rho / 3.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(mtf_et(cfg, 3.0, 0.1) == doctest::Approx(golden_et_w3_xi01).epsilon(1e-12));

    double prev = 2.0;
    for (double t : tau_grid_ms) {
        const double v = mtf_et(cfg.with_exposure(t * 1e-3), 3.0, 0.1);
        CHECK(v < prev);
        prev = v;
    }
    const SampledGrid g = mtf_et(cfg, 3.0, Shape{32, 32});
    CHECK(g.at(0, 0) == 1.0);
    CHECK(g.at(5, 7) == doctest::Approx(mtf_et(cfg, 3.0, std::hypot(5 / 32.0, 7 / 32.0))).epsilon(1e-14));
}

TEST_CASE("PSF from a flat MTF is a delta")
{
    const SampledGrid ones(Shape{9, 9}, GridKind::Mtf, 1.0, std::vector<double>(81, 1.0));
    const SampledGrid psf = psf_from_mtf(ones);
    CHECK(psf.at(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(psf.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fftshift(psf).at(4, 4) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("PSF properties")
{
    OpticalConfig cfg;
    for (double omega : {2.0, 4.0, 8.0, 16.0}) {
        CAPTURE(omega);
        const int n = 128;
        const SampledGrid mtf = mtf_et(cfg, omega, Shape{n, n});
        const SampledGrid psf = psf_from_mtf(mtf);
        CHECK(std::abs(psf.sum() - 1.0) <= 1e-6);
        CHECK(psf.min() >= 0.0);
        double asym = 0.0;
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                asym = std::max(asym, std::abs(psf.at(x, y) - psf.at((n - x) % n, (n - y) % n)));
        CHECK(asym <= 1e-9);

        // Round trip on the raw transform.
        const PsfTransform raw = inverse_mtf_transform(mtf);
        CHECK(raw.max_imaginary < 1e-12);
        const SampledGrid back = forward_real_transform(raw.raw);
        double err = 0.0;
        for (std::size_t i = 0; i < back.values().size(); ++i)
            err = std::max(err, std::abs(back.values()[i] - mtf.values()[i]));
        CHECK(err <= 1e-9);

        const double fwhm = oracle::fwhm_x(psf);
        CHECK(fwhm >= 0.8 * omega);
        CHECK(fwhm <= 1.2 * omega);
    }
}

TEST_CASE("PSF rejects invalid MTF grids")
{
    std::vector<double> v(16, 0.5);
    v[1] = 0.9;
    CHECK_THROWS_AS(psf_from_mtf(SampledGrid(Shape{4, 4}, GridKind::Mtf, 1.0, v)), ValidationError);
    std::vector<double> big(16, 1.5);
    CHECK_THROWS_AS(psf_from_mtf(SampledGrid(Shape{4, 4}, GridKind::Mtf, 1.0, big)), ValidationError);
}

TEST_CASE("mean blur width limits and golden")
{
    OpticalConfig cfg;
    const TurbulenceStats s = turbulence_stats(cfg);
    CHECK(s.mean_blur_width_px == doctest::Approx(golden_default_mean_px).epsilon(1e-12));
    CHECK(s.std_blur_width_px == doctest::Approx(golden_default_std_px).epsilon(1e-12));
    CHECK(s.rho_p == doctest::Approx(golden_default_rho).epsilon(1e-12));

    const double d = cfg.aperture();
    const double diffraction = 2.44 * cfg.wavelength / d;
    OpticalConfig calm = cfg;
    calm.cn2 = 1e-30;
    CHECK(mean_blur_width(calm).mean_blur_width_angular == doctest::Approx(diffraction).epsilon(1e-9));

    const double x = std::pow(d / fried_parameter(cfg), 5.0 / 3.0);
    OpticalConfig still = cfg;
    still.wind_speed = 0.0;
    CHECK(mean_blur_width(still).mean_blur_width_angular ==
          doctest::Approx(diffraction * std::sqrt(1 + 0.268 * x)).epsilon(1e-12));
    CHECK(mean_blur_width(moving_limit(cfg)).mean_blur_width_angular ==
          doctest::Approx(diffraction * std::sqrt(1 + 2.060 * x)).epsilon(1e-4));

    double prev = 0.0;
    for (double t : tau_grid_ms) {
        const double m = mean_blur_width(cfg.with_exposure(t * 1e-3)).mean_blur_width_px;
        CHECK(m >= prev);
        prev = m;
    }
}

TEST_CASE("std blur width limits")
{
    OpticalConfig cfg;
    const double s1 = std_blur_width(cfg.with_exposure(1e-3)).std_blur_width_angular;
    CHECK(std::abs(std_blur_width(moving_limit(cfg.with_exposure(1e-3))).std_blur_width_angular) < 1e-3 * s1);
    CHECK(s1 > std_blur_width(cfg.with_exposure(40e-3)).std_blur_width_angular);

    OpticalConfig still = cfg;
    still.wind_speed = 0.0;
    const double d = cfg.aperture();
    const double r0 = fried_parameter(cfg);
    const double closed = 1.70 * std::cbrt(r0) / cfg.wavelength * std::sqrt(d * cfg.cn2 * cfg.distance);
    CHECK(std_blur_width(still).std_blur_width_angular == doctest::Approx(closed * cfg.wavelength / d).epsilon(1e-12));
}

TEST_CASE("config validation")
{
    OpticalConfig cfg;
    CHECK(config_violations(cfg).empty());
    cfg.f_number = 0.0;
    cfg.exposure_time = 0.5;
    const auto v = config_violations(cfg);
    CHECK(v.size() == 2);
    CHECK_THROWS_AS(require_valid(cfg), ValidationError);
    OpticalConfig bad_dir;
    bad_dir.wind_direction = {1.0, 1.0};
    CHECK(config_violations(bad_dir).size() == 1);
}
