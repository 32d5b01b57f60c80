#pragma once

// Stochastic spatial structures: correlated Gaussian random fields, the
// blur-width field, tilt displacement fields and frozen-flow advection.

#include "turbsynth/grid.hpp"
#include "turbsynth/optics.hpp"

#include <cstdint>

namespace turbsynth {

struct RandomFieldSpec {
    int width = 0;
    int height = 0;
    /// Standard deviation (pixels) of the Gaussian low-pass; 0 gives white noise.
    double correlation_length = 0.0;
    std::uint64_t seed = 0;

    Shape shape() const { return {width, height}; }
};

/// Zero-mean, unit-variance Gaussian random field.
///
/// White noise from the Philox stream keyed by `spec.seed` is low-pass
/// filtered in the frequency domain (periodic boundary) and then
/// re-standardized to exact sample mean 0 and sample std 1. Grids narrower
/// than 6 correlation lengths are cropped from a larger periodic canvas.
SampledGrid gaussian_random_field(const RandomFieldSpec& spec, GridKind kind = GridKind::Image);

struct BlurWidthField {
    SampledGrid grid;
    double mean_target = 0.0;
    double std_target = 0.0;
    double epsilon = 0.0;
};

/// max(epsilon, mean_px + std_px * R(x)) with R drawn from `spec`.
BlurWidthField blur_width_field(double mean_px, double std_px, const RandomFieldSpec& spec, double epsilon);
/// Blur-width field with the closed-form mean/std of `cfg` in pixels.
BlurWidthField blur_width_field(const OpticalConfig& cfg, const RandomFieldSpec& spec, double epsilon);

struct TiltField {
    SampledGrid dx;
    SampledGrid dy;
    double sigma_tilt = 0.0;
    double correlation_length = 0.0;
};

/// Two independent correlated displacement components scaled to sigma_tilt
/// pixels. Per-axis seeds are derived from spec.seed.
TiltField tilt_field(double sigma_tilt, const RandomFieldSpec& spec);

/// Per-axis tilt std in pixels: sqrt(0.182 (lambda/D)^2 (D/r0)^(5/3)) * f / pitch.
double default_tilt_sigma(const OpticalConfig& cfg);
double default_tilt_sigma(const OpticalConfig& cfg, double r0);
/// Isoplanatic-patch heuristic f * r0 / (L * pitch), in pixels.
double default_tilt_correlation_length(const OpticalConfig& cfg);

struct Displacement {
    double x = 0.0;
    double y = 0.0;
};

/// Frozen-flow image-plane shift f * v * t / L in pixels (signed, per axis).
/// Components within 1e-9 of an integer are snapped to it.
Displacement frozen_flow_shift(const OpticalConfig& cfg, double t);

/// Enlarges the canvas so every shift up to frame n_frames-1 stays inside.
RandomFieldSpec extend_for_wind(const RandomFieldSpec& spec, const OpticalConfig& cfg, int n_frames);

/// Window of `out` pixels from an extended field at time t.
///
/// The t = 0 window sits at the upwind corner of the canvas; at time t
/// the window content equals the t = 0 content translated by
/// frozen_flow_shift(cfg, t). Integer shifts are exact crops; fractional
/// shifts use bilinear interpolation.
SampledGrid frozen_flow_view(const SampledGrid& field, const OpticalConfig& cfg, double t, Shape out);

} // namespace turbsynth
