#include "turbsynth/optics.hpp"

#include "turbsynth/errors.hpp"
#include "turbsynth/fft.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace turbsynth {

namespace {

constexpr double five_thirds = 5.0 / 3.0;
constexpr double one_third = 1.0 / 3.0;

bool positive(double v)
{
    return std::isfinite(v) && v > 0.0;
}

void require_positive(double v, const char* what)
{
    if (!positive(v)) {
        std::ostringstream msg;
        msg << what << " must be positive and finite, got " << v;
        throw ValidationError(msg.str());
    }
}

// Radial image frequency (cycles/pixel) of bin (kx, ky) on a wrap-around grid.
double radial_frequency(int kx, int ky, Shape shape)
{
    return std::hypot(fft_frequency(kx, shape.width), fft_frequency(ky, shape.height));
}

template <typename F>
SampledGrid radial_grid(Shape shape, F&& value_at)
{
    SampledGrid grid(shape, GridKind::Mtf, 1.0 / shape.width);
    for (int y = 0; y < shape.height; ++y)
        for (int x = 0; x < shape.width; ++x)
            grid.at(x, y) = value_at(radial_frequency(x, y, shape));
    return grid;
}

// Turbulence strength term shared by the short- and long-exposure MTFs.
double kolmogorov_exponent(const OpticalConfig& cfg, double nu)
{
    return 57.4 * wave_shape_constant(cfg.wave_shape) * cfg.cn2 * cfg.distance * std::pow(cfg.wavelength, -one_third) *
           std::pow(nu, five_thirds);
}

} // namespace

double wave_shape_constant(WaveShape shape)
{
    return shape == WaveShape::Spherical ? 3.0 / 8.0 : 1.0;
}

double field_regime_mu(FieldRegime regime)
{
    return regime == FieldRegime::Far ? 0.5 : 1.0;
}

std::vector<std::string> config_violations(const OpticalConfig& cfg, ExposureWindow window)
{
    std::vector<std::string> out;
    auto check = [&](double v, const char* name) {
        if (!positive(v)) {
            std::ostringstream msg;
            msg << name << " must be positive, got " << v;
            out.push_back(msg.str());
        }
    };
    check(cfg.wavelength, "wavelength");
    check(cfg.focal_length, "focal_length");
    check(cfg.f_number, "f_number");
    check(cfg.distance, "distance");
    check(cfg.cn2, "cn2");
    check(cfg.height, "height");
    check(cfg.exposure_time, "exposure_time");
    check(cfg.pixel_pitch, "pixel_pitch");
    check(cfg.frame_rate, "frame_rate");
    if (!std::isfinite(cfg.wind_speed) || cfg.wind_speed < 0.0) {
        std::ostringstream msg;
        msg << "wind_speed must be non-negative, got " << cfg.wind_speed;
        out.push_back(msg.str());
    }
    const double norm = std::hypot(cfg.wind_direction[0], cfg.wind_direction[1]);
    if (!(std::abs(norm - 1.0) <= 1e-9)) {
        std::ostringstream msg;
        msg << "wind_direction must have unit norm, got norm " << norm;
        out.push_back(msg.str());
    }
    if (positive(cfg.exposure_time) &&
        (cfg.exposure_time < window.min_seconds || cfg.exposure_time > window.max_seconds)) {
        std::ostringstream msg;
        msg << "exposure_time " << cfg.exposure_time * 1e3 << " ms is outside the validity window ["
            << window.min_seconds * 1e3 << ", " << window.max_seconds * 1e3 << "] ms";
        out.push_back(msg.str());
    }
    return out;
}

void require_valid(const OpticalConfig& cfg, ExposureWindow window)
{
    const auto violations = config_violations(cfg, window);
    if (violations.empty())
        return;
    std::string msg = "invalid optical config:";
    for (const auto& v : violations)
        msg += "\n  - " + v;
    throw ValidationError(msg);
}

double angular_to_px(const OpticalConfig& cfg, double radians)
{
    return radians * cfg.focal_length / cfg.pixel_pitch;
}

double meters_to_px(const OpticalConfig& cfg, double meters)
{
    return meters / cfg.pixel_pitch;
}

double fried_parameter(const OpticalConfig& cfg)
{
    require_positive(cfg.cn2, "cn2");
    require_positive(cfg.distance, "distance");
    require_positive(cfg.wavelength, "wavelength");
    const double k = 2.0 * std::numbers::pi / cfg.wavelength;
    return std::pow(0.423 * k * k * cfg.cn2 * cfg.distance * wave_shape_constant(cfg.wave_shape), -0.6);
}

double rho_p(const OpticalConfig& cfg, double r0)
{
    require_positive(r0, "r0");
    const double effective_aperture = cfg.aperture() + cfg.wind_speed * cfg.exposure_time;
    return 1.0 + 0.35 * std::cbrt(r0 / effective_aperture);
}

double rho_p(const OpticalConfig& cfg)
{
    return rho_p(cfg, fried_parameter(cfg));
}

double blur_width_from_r0(const OpticalConfig& cfg, double r0)
{
    require_positive(r0, "r0");
    return 0.49 * cfg.wavelength * cfg.focal_length / r0;
}

double r0_from_blur_width(const OpticalConfig& cfg, double omega)
{
    require_positive(omega, "blur width");
    return 0.49 * cfg.wavelength * cfg.focal_length / omega;
}

double rho_p_from_width(const OpticalConfig& cfg, double omega)
{
    require_positive(omega, "blur width");
    const double effective_aperture = cfg.aperture() + cfg.wind_speed * cfg.exposure_time;
    return 1.0 + 0.28 * std::cbrt(cfg.wavelength * cfg.focal_length / (omega * effective_aperture));
}

double rho_p_from_width_px(const OpticalConfig& cfg, double omega_px)
{
    require_positive(omega_px, "blur width (px)");
    return rho_p_from_width(cfg, omega_px * cfg.pixel_pitch);
}

double rho_p_from_width_px_short_limit(const OpticalConfig& cfg, double omega_px)
{
    require_positive(omega_px, "blur width (px)");
    const double omega = omega_px * cfg.pixel_pitch;
    return 1.0 + 0.28 * std::cbrt(cfg.wavelength * cfg.focal_length / (omega * cfg.aperture()));
}

double angular_frequency(const OpticalConfig& cfg, double cycles_per_px)
{
    return cycles_per_px * cfg.focal_length / cfg.pixel_pitch;
}

double mtf_short_exposure(const OpticalConfig& cfg, double nu)
{
    const double mu = field_regime_mu(cfg.field_regime);
    const double correction = std::max(0.0, 1.0 - mu * std::cbrt(cfg.wavelength * nu / cfg.aperture()));
    return std::exp(-kolmogorov_exponent(cfg, nu) * correction);
}

double mtf_long_exposure(const OpticalConfig& cfg, double nu)
{
    return std::exp(-kolmogorov_exponent(cfg, nu));
}

SampledGrid mtf_short_exposure(const OpticalConfig& cfg, Shape freq_grid)
{
    require_valid(cfg);
    return radial_grid(freq_grid, [&](double xi) { return mtf_short_exposure(cfg, angular_frequency(cfg, xi)); });
}

SampledGrid mtf_long_exposure(const OpticalConfig& cfg, Shape freq_grid)
{
    require_valid(cfg);
    return radial_grid(freq_grid, [&](double xi) { return mtf_long_exposure(cfg, angular_frequency(cfg, xi)); });
}

double mtf_et_value(double omega_px, double rho, double xi_cycles_per_px)
{
    return std::exp(-std::pow(omega_px * xi_cycles_per_px / (0.49 * rho), five_thirds));
}

double mtf_et(const OpticalConfig& cfg, double omega_px, double xi_cycles_per_px)
{
    return mtf_et_value(omega_px, rho_p_from_width_px(cfg, omega_px), xi_cycles_per_px);
}

SampledGrid mtf_et_grid(double omega_px, double rho, Shape freq_grid)
{
    require_positive(omega_px, "blur width (px)");
    return radial_grid(freq_grid, [&](double xi) { return mtf_et_value(omega_px, rho, xi); });
}

SampledGrid mtf_et(const OpticalConfig& cfg, double omega_px, Shape freq_grid)
{
    return mtf_et_grid(omega_px, rho_p_from_width_px(cfg, omega_px), freq_grid);
}

PsfTransform inverse_mtf_transform(const SampledGrid& mtf)
{
    const Shape shape = mtf.shape();
    double asymmetry = 0.0;
    for (int y = 0; y < shape.height; ++y)
        for (int x = 0; x < shape.width; ++x) {
            const int mx = (shape.width - x) % shape.width;
            const int my = (shape.height - y) % shape.height;
            asymmetry = std::max(asymmetry, std::abs(mtf.at(x, y) - mtf.at(mx, my)));
        }
    if (asymmetry > 1e-6) {
        std::ostringstream msg;
        msg << "MTF grid is not point symmetric (max asymmetry " << asymmetry << "); its PSF would be complex";
        throw ValidationError(msg.str());
    }

    std::vector<Complex> spectrum(mtf.values().begin(), mtf.values().end());
    const auto spatial = fft2d(spectrum, shape, FftDirection::Inverse);

    PsfTransform out{SampledGrid(shape, GridKind::Psf, 1.0), 0.0, 0.0};
    for (std::size_t i = 0; i < spatial.size(); ++i) {
        out.raw.values()[i] = spatial[i].real();
        out.max_imaginary = std::max(out.max_imaginary, std::abs(spatial[i].imag()));
    }
    // Enforce exact point symmetry; the input is symmetric so this only
    // removes rounding noise.
    SampledGrid& raw = out.raw;
    for (int y = 0; y < shape.height; ++y)
        for (int x = 0; x < shape.width; ++x) {
            const int mx = (shape.width - x) % shape.width;
            const int my = (shape.height - y) % shape.height;
            if (my > y || (my == y && mx > x)) {
                const double avg = 0.5 * (raw.at(x, y) + raw.at(mx, my));
                raw.at(x, y) = avg;
                raw.at(mx, my) = avg;
            }
        }
    for (double v : raw.values())
        if (v < 0.0)
            out.clamped_mass -= v;
    return out;
}

SampledGrid psf_from_mtf(const SampledGrid& mtf)
{
    if (mtf.min() < -1e-12 || mtf.max() > 1.0 + 1e-12)
        throw ValidationError("MTF grid values must lie in [0, 1]");
    if (!(mtf.at(0, 0) > 0.0))
        throw ValidationError("MTF grid must be positive at DC");
    PsfTransform t = inverse_mtf_transform(mtf);
    SampledGrid psf = std::move(t.raw);
    if (t.clamped_mass > 0.0) {
        double total = 0.0;
        for (double& v : psf.values()) {
            v = std::max(v, 0.0);
            total += v;
        }
        for (double& v : psf.values())
            v /= total;
    } else {
        const double total = psf.sum();
        for (double& v : psf.values())
            v /= total;
    }
    return psf;
}

SampledGrid forward_real_transform(const SampledGrid& grid)
{
    std::vector<Complex> spatial(grid.values().begin(), grid.values().end());
    const auto spectrum = fft2d(spatial, grid.shape(), FftDirection::Forward);
    SampledGrid out(grid.shape(), GridKind::Mtf, 1.0 / grid.width());
    for (std::size_t i = 0; i < spectrum.size(); ++i)
        out.values()[i] = spectrum[i].real();
    return out;
}

TurbulenceStats mean_blur_width(const OpticalConfig& cfg)
{
    require_valid(cfg);
    const double r0 = fried_parameter(cfg);
    const double d = cfg.aperture();
    const double x = std::pow(d / r0, five_thirds);
    const double travel = cfg.wind_speed * cfg.exposure_time;
    // Without motion across the aperture the integrating term vanishes.
    const double integrating = travel > 0.0 ? 1.792 * x / (1.0 + std::pow(6.97 * d / travel, 0.607)) : 0.0;
    TurbulenceStats s;
    s.fried_r0 = r0;
    s.mean_blur_width_angular = (2.44 * cfg.wavelength / d) * std::sqrt(1.0 + 0.268 * x + integrating);
    s.mean_blur_width_px = angular_to_px(cfg, s.mean_blur_width_angular);
    return s;
}

TurbulenceStats std_blur_width(const OpticalConfig& cfg)
{
    require_valid(cfg);
    const double r0 = fried_parameter(cfg);
    const double d = cfg.aperture();
    const double travel = cfg.wind_speed * cfg.exposure_time;
    const double decay = travel > 0.0 ? 1.0 - 1.0 / (1.0 + std::sqrt(4.45 * d / travel)) : 1.0;
    const double dimensionless =
        1.70 * std::cbrt(r0) / cfg.wavelength * std::sqrt(d * cfg.cn2 * cfg.distance) * decay;
    TurbulenceStats s;
    s.fried_r0 = r0;
    s.std_blur_width_angular = dimensionless * cfg.wavelength / d;
    s.std_blur_width_px = angular_to_px(cfg, s.std_blur_width_angular);
    return s;
}

TurbulenceStats turbulence_stats(const OpticalConfig& cfg)
{
    TurbulenceStats s = mean_blur_width(cfg);
    const TurbulenceStats sd = std_blur_width(cfg);
    s.rho_p = rho_p(cfg, s.fried_r0);
    s.std_blur_width_angular = sd.std_blur_width_angular;
    s.std_blur_width_px = sd.std_blur_width_px;
    return s;
}

} // namespace turbsynth
