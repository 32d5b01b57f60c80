#include "turbsynth/fields.hpp"

#include "turbsynth/errors.hpp"
#include "turbsynth/fft.hpp"
#include "turbsynth/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace turbsynth {

namespace {

void require_spec(const RandomFieldSpec& spec)
{
    if (spec.width < 1 || spec.height < 1)
        throw ValidationError("random field needs a non-empty grid, got " + std::to_string(spec.width) + "x" +
                              std::to_string(spec.height));
    if (!(spec.correlation_length >= 0.0) || !std::isfinite(spec.correlation_length))
        throw ValidationError("correlation_length must be >= 0");
}

void gaussian_lowpass(SampledGrid& grid, double sigma)
{
    RealFft2d fft(grid.shape());
    std::vector<Complex> spectrum(fft.spectrum_size());
    fft.forward(grid.values(), spectrum);
    const int sw = fft.spectrum_width();
    const double k = -2.0 * std::numbers::pi * std::numbers::pi * sigma * sigma;
    for (int y = 0; y < grid.height(); ++y) {
        const double fy = fft_frequency(y, grid.height());
        for (int x = 0; x < sw; ++x) {
            const double fx = static_cast<double>(x) / grid.width();
            spectrum[static_cast<std::size_t>(y) * sw + x] *= std::exp(k * (fx * fx + fy * fy));
        }
    }
    fft.inverse(spectrum, grid.values());
}

// The periodic canvas must span several correlation lengths, otherwise the
// low-pass removes every non-DC mode. Small grids are cropped from a larger
// canvas.
int synthesis_extent(int n, double sigma)
{
    return std::max(n, next_fast_size(static_cast<int>(std::ceil(6.0 * sigma))));
}

double snap(double v)
{
    const double r = std::round(v);
    return std::abs(v - r) < 1e-9 ? r : v;
}

int required_extension(double total_shift)
{
    return static_cast<int>(std::ceil(std::abs(total_shift) - 1e-9));
}

} // namespace

SampledGrid gaussian_random_field(const RandomFieldSpec& spec, GridKind kind)
{
    require_spec(spec);
    const Shape canvas{synthesis_extent(spec.width, spec.correlation_length),
                       synthesis_extent(spec.height, spec.correlation_length)};
    SampledGrid grid(canvas, kind, 1.0);
    const Philox4x32 rng(spec.seed);
    auto& white = grid.values();
    for (std::size_t i = 0; i < white.size(); ++i)
        white[i] = rng.normal(i);
    if (spec.correlation_length > 0.0)
        gaussian_lowpass(grid, spec.correlation_length);
    if (canvas != spec.shape())
        grid = grid.crop(0, 0, spec.shape());

    auto& v = grid.values();

    const double mean = grid.mean();
    for (double& s : v)
        s -= mean;
    const double sd = grid.stddev();
    if (sd > 0.0)
        for (double& s : v)
            s /= sd;
    return grid;
}

BlurWidthField blur_width_field(double mean_px, double std_px, const RandomFieldSpec& spec, double epsilon)
{
    if (!(epsilon > 0.0))
        throw ValidationError("blur-width floor epsilon must be positive");
    if (!(mean_px > 0.0) || !(std_px >= 0.0))
        throw ValidationError("blur-width mean must be positive and std non-negative");
    BlurWidthField field{SampledGrid(spec.shape(), GridKind::BlurWidthField, 1.0), mean_px, std_px, epsilon};
    if (std_px == 0.0) {
        require_spec(spec);
        for (double& s : field.grid.values())
            s = std::max(epsilon, mean_px);
        return field;
    }
    const SampledGrid noise = gaussian_random_field(spec);
    for (std::size_t i = 0; i < noise.values().size(); ++i)
        field.grid.values()[i] = std::max(epsilon, mean_px + std_px * noise.values()[i]);
    return field;
}

BlurWidthField blur_width_field(const OpticalConfig& cfg, const RandomFieldSpec& spec, double epsilon)
{
    const TurbulenceStats s = turbulence_stats(cfg);
    return blur_width_field(s.mean_blur_width_px, s.std_blur_width_px, spec, epsilon);
}

TiltField tilt_field(double sigma_tilt, const RandomFieldSpec& spec)
{
    require_spec(spec);
    if (!(sigma_tilt >= 0.0) || !std::isfinite(sigma_tilt))
        throw ValidationError("sigma_tilt must be >= 0");
    TiltField tilt{SampledGrid(spec.shape(), GridKind::DisplacementX, 1.0),
                   SampledGrid(spec.shape(), GridKind::DisplacementY, 1.0), sigma_tilt, spec.correlation_length};
    if (sigma_tilt == 0.0)
        return tilt;
    RandomFieldSpec axis = spec;
    axis.seed = derive_seed(spec.seed, stream::tilt_x);
    tilt.dx = gaussian_random_field(axis, GridKind::DisplacementX);
    axis.seed = derive_seed(spec.seed, stream::tilt_y);
    tilt.dy = gaussian_random_field(axis, GridKind::DisplacementY);
    for (double& v : tilt.dx.values())
        v *= sigma_tilt;
    for (double& v : tilt.dy.values())
        v *= sigma_tilt;
    return tilt;
}

double default_tilt_sigma(const OpticalConfig& cfg, double r0)
{
    if (!(r0 > 0.0))
        throw ValidationError("r0 must be positive");
    if (std::isinf(r0))
        return 0.0;
    const double d = cfg.aperture();
    const double lambda_over_d = cfg.wavelength / d;
    const double variance = 0.182 * lambda_over_d * lambda_over_d * std::pow(d / r0, 5.0 / 3.0);
    return angular_to_px(cfg, std::sqrt(variance));
}

double default_tilt_sigma(const OpticalConfig& cfg)
{
    return default_tilt_sigma(cfg, fried_parameter(cfg));
}

double default_tilt_correlation_length(const OpticalConfig& cfg)
{
    return cfg.focal_length * fried_parameter(cfg) / (cfg.distance * cfg.pixel_pitch);
}

Displacement frozen_flow_shift(const OpticalConfig& cfg, double t)
{
    const double along = cfg.focal_length * cfg.wind_speed * t / (cfg.distance * cfg.pixel_pitch);
    return {snap(along * cfg.wind_direction[0]), snap(along * cfg.wind_direction[1])};
}

RandomFieldSpec extend_for_wind(const RandomFieldSpec& spec, const OpticalConfig& cfg, int n_frames)
{
    if (n_frames < 1)
        throw ValidationError("n_frames must be >= 1");
    RandomFieldSpec out = spec;
    if (n_frames == 1)
        return out;
    const Displacement total = frozen_flow_shift(cfg, static_cast<double>(n_frames - 1) / cfg.frame_rate);
    out.width += required_extension(total.x);
    out.height += required_extension(total.y);
    return out;
}

SampledGrid frozen_flow_view(const SampledGrid& field, const OpticalConfig& cfg, double t, Shape out)
{
    const int spare_x = field.width() - out.width;
    const int spare_y = field.height() - out.height;
    if (spare_x < 0 || spare_y < 0)
        throw RangeError("frozen-flow field is smaller than the requested view");
    const Displacement shift = frozen_flow_shift(cfg, t);
    // Content moves downwind, so the window origin moves upwind.
    const double base_x = cfg.wind_direction[0] > 0.0 ? spare_x : 0.0;
    const double base_y = cfg.wind_direction[1] > 0.0 ? spare_y : 0.0;
    const double ox = base_x - shift.x;
    const double oy = base_y - shift.y;
    const int ix = static_cast<int>(std::floor(ox));
    const int iy = static_cast<int>(std::floor(oy));
    const double fx = ox - ix;
    const double fy = oy - iy;
    const int need_x = ix + out.width + (fx > 0.0 ? 1 : 0) - field.width();
    const int need_y = iy + out.height + (fy > 0.0 ? 1 : 0) - field.height();
    if (ix < 0 || iy < 0 || need_x > 0 || need_y > 0) {
        std::ostringstream msg;
        msg << "frozen-flow window at t=" << t << " s (shift " << shift.x << ", " << shift.y
            << " px) leaves the field; extend the canvas to at least "
            << out.width + required_extension(std::abs(shift.x)) + (fx > 0.0 ? 1 : 0) << "x"
            << out.height + required_extension(std::abs(shift.y)) + (fy > 0.0 ? 1 : 0)
            << " (use extend_for_wind with enough frames)";
        throw RangeError(msg.str());
    }
    if (fx == 0.0 && fy == 0.0)
        return field.crop(ix, iy, out);

    SampledGrid view(out, field.kind(), field.spacing());
    for (int y = 0; y < out.height; ++y) {
        const int y0 = iy + y;
        const int y1 = fy > 0.0 ? y0 + 1 : y0;
        for (int x = 0; x < out.width; ++x) {
            const int x0 = ix + x;
            const int x1 = fx > 0.0 ? x0 + 1 : x0;
            const double top = (1.0 - fx) * field.at(x0, y0) + fx * field.at(x1, y0);
            const double bottom = (1.0 - fx) * field.at(x0, y1) + fx * field.at(x1, y1);
            view.at(x, y) = (1.0 - fy) * top + fy * bottom;
        }
    }
    return view;
}

} // namespace turbsynth
