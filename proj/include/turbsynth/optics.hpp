#pragma once

// Closed-form turbulence optics: Fried parameter, short/long/exposure-time
// MTFs, blur-width statistics and PSF synthesis from the exposure-time MTF.
//
// Unit conventions: SI throughout (meters, seconds, m^(-2/3) for Cn2).
// Image-plane quantities in pixels are obtained as angle * focal_length /
// pixel_pitch.

#include "turbsynth/grid.hpp"

#include <array>
#include <string>
#include <vector>

namespace turbsynth {

enum class WaveShape { Spherical, Plane };
enum class FieldRegime { Far, Near };

/// Wave shape constant a: 3/8 spherical, 1 plane.
double wave_shape_constant(WaveShape shape);
/// Short-exposure correction weight mu: 0.5 far field, 1 near field.
double field_regime_mu(FieldRegime regime);

struct OpticalConfig {
    double wavelength = 550e-9;
    double focal_length = 0.3;
    double f_number = 4.0;
    double distance = 500.0;
    double cn2 = 1e-14;
    double wind_speed = 3.0;
    std::array<double, 2> wind_direction{1.0, 0.0};
    /// Recorded for provenance; no computation depends on it.
    double height = 50.0;
    double exposure_time = 10e-3;
    double pixel_pitch = 4e-6;
    double frame_rate = 30.0;
    WaveShape wave_shape = WaveShape::Spherical;
    FieldRegime field_regime = FieldRegime::Far;

    double aperture() const { return focal_length / f_number; }
    double exposure_ms() const { return exposure_time * 1e3; }
    OpticalConfig with_exposure(double seconds) const
    {
        OpticalConfig out = *this;
        out.exposure_time = seconds;
        return out;
    }

    friend bool operator==(const OpticalConfig&, const OpticalConfig&) = default;
};

struct ExposureWindow {
    double min_seconds = 1e-4;
    double max_seconds = 0.1;
};

/// Throws ValidationError listing every violated invariant.
void require_valid(const OpticalConfig& cfg, ExposureWindow window = {});
/// Human-readable invariant violations; empty when valid.
std::vector<std::string> config_violations(const OpticalConfig& cfg, ExposureWindow window = {});

struct TurbulenceStats {
    double fried_r0 = 0.0;
    double rho_p = 0.0;
    double mean_blur_width_angular = 0.0;
    double std_blur_width_angular = 0.0;
    double mean_blur_width_px = 0.0;
    double std_blur_width_px = 0.0;
};

/// Angle (radians) to image-plane pixels.
double angular_to_px(const OpticalConfig& cfg, double radians);
/// Image-plane meters to pixels.
double meters_to_px(const OpticalConfig& cfg, double meters);

/// r0 = (0.423 k^2 Cn2 L a)^(-3/5), k = 2 pi / lambda.
double fried_parameter(const OpticalConfig& cfg);

/// Exposure-time coherence gain 1 + 0.35 (r0 / (D + v tau))^(1/3).
double rho_p(const OpticalConfig& cfg);
/// Same factor with r0 replaced by an explicit value.
double rho_p(const OpticalConfig& cfg, double r0);

/// FWHM blur width on the image plane (meters): 0.49 lambda f / r0.
double blur_width_from_r0(const OpticalConfig& cfg, double r0);
/// Inverse of blur_width_from_r0.
double r0_from_blur_width(const OpticalConfig& cfg, double omega);

/// Gain factor parameterized by a local image-plane blur width (meters):
/// 1 + 0.28 (lambda f / (omega (D + v tau)))^(1/3).
double rho_p_from_width(const OpticalConfig& cfg, double omega);
/// As above with the width given in pixels.
double rho_p_from_width_px(const OpticalConfig& cfg, double omega_px);
/// tau -> 0 and tau -> infinity limits of rho_p_from_width_px.
double rho_p_from_width_px_short_limit(const OpticalConfig& cfg, double omega_px);
inline constexpr double rho_p_long_limit = 1.0;

/// Angular frequency (cycles/radian) of an image frequency in cycles/pixel.
double angular_frequency(const OpticalConfig& cfg, double cycles_per_px);

/// Short-exposure MTF at angular frequency nu (cycles/rad).
///
/// The correction factor 1 - mu (lambda nu / D)^(1/3) is floored at zero
/// beyond the aperture cutoff so the result stays in [0, 1].
double mtf_short_exposure(const OpticalConfig& cfg, double nu);
/// Long-exposure MTF at angular frequency nu (cycles/rad).
double mtf_long_exposure(const OpticalConfig& cfg, double nu);

/// Grid versions over an image-frequency grid of the given shape
/// (wrap-around layout, DC at (0,0), spacing 1/width cycles/pixel).
SampledGrid mtf_short_exposure(const OpticalConfig& cfg, Shape freq_grid);
SampledGrid mtf_long_exposure(const OpticalConfig& cfg, Shape freq_grid);

/// exp(-(omega_px |xi| / (0.49 rho))^(5/3)) for a radial frequency in cycles/pixel.
double mtf_et_value(double omega_px, double rho, double xi_cycles_per_px);

/// Exposure-time MTF at one radial frequency for the config's exposure.
double mtf_et(const OpticalConfig& cfg, double omega_px, double xi_cycles_per_px);

/// Exposure-time MTF on a wrap-around frequency grid covering [-0.5, 0.5)
/// cycles/pixel in both axes.
SampledGrid mtf_et(const OpticalConfig& cfg, double omega_px, Shape freq_grid);

/// Same grid for an explicit gain factor; used where rho is already known.
SampledGrid mtf_et_grid(double omega_px, double rho, Shape freq_grid);

struct PsfTransform {
    /// Real part of the inverse transform, before clamping (wrap-around layout).
    SampledGrid raw;
    /// Largest |imag| observed before it was discarded.
    double max_imaginary = 0.0;
    /// Total magnitude of negative samples removed by the clamp.
    double clamped_mass = 0.0;
};

/// Inverse DFT of an MTF grid, keeping the raw real part and diagnostics.
/// Throws ValidationError when the grid is not point symmetric (tolerance 1e-6).
PsfTransform inverse_mtf_transform(const SampledGrid& mtf);

/// Tilt-invariant PSF from a symmetric MTF grid.
///
/// Output is in wrap-around layout (center at (0,0)); negatives from
/// truncating the spectrum at Nyquist are clamped to zero and the result is
/// renormalized to unit sum. Use fftshift for a centered view.
SampledGrid psf_from_mtf(const SampledGrid& mtf);

/// Forward DFT of a real, point-symmetric grid (returns the real part).
SampledGrid forward_real_transform(const SampledGrid& grid);

/// Mean local blur width; fills the angular and pixel mean fields.
TurbulenceStats mean_blur_width(const OpticalConfig& cfg);
/// Standard deviation of the local blur width.
///
/// The closed form is dimensionless; it is read in units of the
/// diffraction angle lambda / D.
TurbulenceStats std_blur_width(const OpticalConfig& cfg);

/// All derived quantities for a config.
TurbulenceStats turbulence_stats(const OpticalConfig& cfg);

} // namespace turbsynth
