#include "turbsynth/degrade.hpp"

#include "turbsynth/errors.hpp"
#include "turbsynth/fft.hpp"
#include "turbsynth/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

namespace turbsynth {

namespace {

void require_same_shape(Shape a, Shape b, const char* what)
{
    if (a != b) {
        std::ostringstream msg;
        msg << what << " shape " << b.width << "x" << b.height << " does not match image shape " << a.width << "x"
            << a.height;
        throw ValidationError(msg.str());
    }
}

// Replicate-padded canvas with each channel's spectrum computed once.
class PaddedSpectra {
public:
    PaddedSpectra(const ImageBuffer& img, int pad)
        : image_shape_{img.shape()},
          pad_{pad},
          canvas_{next_fast_size(img.width() + 2 * pad), next_fast_size(img.height() + 2 * pad)},
          fft_{canvas_}
    {
        std::vector<double> buffer(canvas_.area());
        const int w = img.width();
        const int h = img.height();
        for (int c = 0; c < img.channels(); ++c) {
            for (int y = 0; y < canvas_.height; ++y) {
                const int sy = std::clamp(y - pad, 0, h - 1);
                for (int x = 0; x < canvas_.width; ++x) {
                    const int sx = std::clamp(x - pad, 0, w - 1);
                    buffer[static_cast<std::size_t>(y) * canvas_.width + x] = img.at(c, sx, sy);
                }
            }
            spectra_.emplace_back(fft_.spectrum_size());
            fft_.forward(buffer, spectra_.back());
        }
        scratch_.resize(fft_.spectrum_size());
        real_.resize(canvas_.area());
    }

    int channels() const { return static_cast<int>(spectra_.size()); }

    std::vector<Complex> kernel_spectrum(const SampledGrid& kernel)
    {
        const int cx = kernel.width() / 2;
        const int cy = kernel.height() / 2;
        if (cx > pad_ || cy > pad_)
            throw ValidationError("kernel support exceeds the convolution padding");
        std::fill(real_.begin(), real_.end(), 0.0);
        for (int y = 0; y < kernel.height(); ++y) {
            const int wy = ((y - cy) % canvas_.height + canvas_.height) % canvas_.height;
            for (int x = 0; x < kernel.width(); ++x) {
                const int wx = ((x - cx) % canvas_.width + canvas_.width) % canvas_.width;
                real_[static_cast<std::size_t>(wy) * canvas_.width + wx] = kernel.at(x, y);
            }
        }
        std::vector<Complex> spectrum(fft_.spectrum_size());
        fft_.forward(real_, spectrum);
        return spectrum;
    }

    /// Filters channel c and calls sink(x, y, value) for every image pixel.
    template <typename Sink>
    void filter(int c, const std::vector<Complex>& kernel_spectrum, Sink&& sink)
    {
        const auto& s = spectra_[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < s.size(); ++i)
            scratch_[i] = s[i] * kernel_spectrum[i];
        fft_.inverse(scratch_, real_);
        for (int y = 0; y < image_shape_.height; ++y) {
            const double* row = &real_[static_cast<std::size_t>(y + pad_) * canvas_.width + pad_];
            for (int x = 0; x < image_shape_.width; ++x)
                sink(x, y, row[x]);
        }
    }

private:
    Shape image_shape_;
    int pad_;
    Shape canvas_;
    RealFft2d fft_;
    std::vector<std::vector<Complex>> spectra_;
    std::vector<Complex> scratch_;
    std::vector<double> real_;
};

int odd_ceil(double v)
{
    int n = static_cast<int>(std::ceil(v - 1e-12));
    n = std::max(n, 1);
    return n % 2 == 0 ? n + 1 : n;
}

} // namespace

ImageBuffer warp(const ImageBuffer& img, const TiltField& tilt)
{
    require_valid(img);
    require_same_shape(img.shape(), tilt.dx.shape(), "tilt dx");
    require_same_shape(img.shape(), tilt.dy.shape(), "tilt dy");
    const int w = img.width();
    const int h = img.height();
    ImageBuffer out(img.shape(), img.channels());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double px = std::clamp(x - tilt.dx.at(x, y), 0.0, static_cast<double>(w - 1));
            const double py = std::clamp(y - tilt.dy.at(x, y), 0.0, static_cast<double>(h - 1));
            const int x0 = static_cast<int>(std::floor(px));
            const int y0 = static_cast<int>(std::floor(py));
            const double fx = px - x0;
            const double fy = py - y0;
            const int x1 = std::min(x0 + 1, w - 1);
            const int y1 = std::min(y0 + 1, h - 1);
            for (int c = 0; c < img.channels(); ++c) {
                const double top = (1.0 - fx) * img.at(c, x0, y0) + fx * img.at(c, x1, y0);
                const double bottom = (1.0 - fx) * img.at(c, x0, y1) + fx * img.at(c, x1, y1);
                out.at(c, x, y) = (1.0 - fy) * top + fy * bottom;
            }
        }
    return out;
}

double psf_tail_mass(double omega_px, double rho, double radius)
{
    if (!(omega_px > 0.0) || !(rho > 0.0) || !(radius > 0.0))
        throw ValidationError("psf_tail_mass: arguments must be positive");
    // Outside mass of a radial density with characteristic function
    // exp(-(s q)^(5/3)) over a disk of radius R, after integrating by parts
    // and substituting u = v^3:  int_0^inf 5 v^4 exp(-v^5) J0(a v^3) dv,
    // a = 2 pi R / s.
    const double scale = omega_px / (0.49 * rho);
    const double a = 2.0 * std::numbers::pi * radius / scale;
    const double v_max = std::pow(60.0, 0.2);
    int n = std::max(4000, static_cast<int>(std::ceil(60.0 * a * v_max * v_max * v_max / (2.0 * std::numbers::pi))));
    n += n % 2;
    const double step = v_max / n;
    auto f = [a](double v) {
        const double v4 = v * v * v * v;
        return 5.0 * v4 * std::exp(-v4 * v) * std::cyl_bessel_j(0.0, a * v * v * v);
    };
    double acc = f(0.0) + f(v_max);
    for (int i = 1; i < n; ++i)
        acc += (i % 2 == 1 ? 4.0 : 2.0) * f(i * step);
    return std::max(0.0, acc * step / 3.0);
}

int bank_support(double max_width_px, double rho_at_max, const BankOptions& options)
{
    if (!(options.support_scale > 0.0))
        throw ValidationError("support_scale must be positive");
    int support = odd_ceil(options.support_scale * max_width_px);
    if (options.tail_tolerance > 0.0) {
        int half = support / 2;
        while (psf_tail_mass(max_width_px, rho_at_max, half + 0.5) > options.tail_tolerance) {
            half += std::max(1, half / 16);
            if (2 * half + 1 > options.max_support)
                break;
        }
        support = 2 * half + 1;
    }
    if (support > options.max_support) {
        std::ostringstream msg;
        msg << "PSF support " << support << " px exceeds the limit of " << options.max_support << " px";
        throw ValidationError(msg.str());
    }
    return support;
}

SampledGrid exposure_psf_kernel(const OpticalConfig& cfg, double omega_px, int support)
{
    if (support < 1 || support % 2 == 0)
        throw ValidationError("kernel support must be a positive odd number");
    return fftshift(psf_from_mtf(mtf_et(cfg, omega_px, Shape{support, support})));
}

PsfBank build_psf_bank(const OpticalConfig& cfg, double min_width, double max_width, int k_bins,
                       const BankOptions& options)
{
    if (!(min_width > 0.0) || !(max_width >= min_width) || !std::isfinite(max_width))
        throw ValidationError("PSF bank width range must satisfy 0 < min <= max");
    if (k_bins < 1)
        throw ValidationError("PSF bank needs at least one bin");
    require_valid(cfg);

    PsfBank bank;
    if (k_bins == 1 || min_width == max_width) {
        bank.widths.push_back(k_bins == 1 ? std::sqrt(min_width * max_width) : min_width);
    } else {
        const double ratio = max_width / min_width;
        for (int i = 0; i < k_bins; ++i)
            bank.widths.push_back(i + 1 == k_bins ? max_width
                                                  : min_width * std::pow(ratio, static_cast<double>(i) / (k_bins - 1)));
    }
    for (double w : bank.widths)
        bank.rhos.push_back(rho_p_from_width_px(cfg, w));
    bank.support = bank_support(bank.widths.back(), bank.rhos.back(), options);
    for (std::size_t i = 0; i < bank.widths.size(); ++i)
        bank.kernels.push_back(
            fftshift(psf_from_mtf(mtf_et_grid(bank.widths[i], bank.rhos[i], Shape{bank.support, bank.support}))));
    return bank;
}

ImageBuffer convolve(const ImageBuffer& img, const SampledGrid& kernel)
{
    require_valid(img);
    if (kernel.width() % 2 == 0 || kernel.height() % 2 == 0)
        throw ValidationError("convolution kernels must have odd dimensions");
    PaddedSpectra spectra(img, std::max(kernel.width(), kernel.height()) / 2);
    const auto ks = spectra.kernel_spectrum(kernel);
    ImageBuffer out(img.shape(), img.channels());
    for (int c = 0; c < img.channels(); ++c)
        spectra.filter(c, ks, [&](int x, int y, double v) { out.at(c, x, y) = v; });
    return out;
}

ImageBuffer blur_spatially_varying(const ImageBuffer& img, const BlurWidthField& wfield, const PsfBank& bank)
{
    require_valid(img);
    require_same_shape(img.shape(), wfield.grid.shape(), "blur-width field");
    if (bank.widths.empty() || bank.kernels.size() != bank.widths.size())
        throw ValidationError("PSF bank is empty or inconsistent");

    const std::size_t n = img.shape().area();
    const std::size_t k = bank.widths.size();
    std::vector<std::uint32_t> lower(n, 0);
    std::vector<double> frac(n, 0.0);
    std::vector<char> used(k, 0);
    std::size_t clamped = 0;
    const auto& w = wfield.grid.values();
    for (std::size_t i = 0; i < n; ++i) {
        double width = w[i];
        if (width < bank.widths.front() || width > bank.widths.back()) {
            ++clamped;
            width = std::clamp(width, bank.widths.front(), bank.widths.back());
        }
        if (k == 1) {
            used[0] = 1;
            continue;
        }
        auto it = std::upper_bound(bank.widths.begin(), bank.widths.end(), width);
        std::size_t j = static_cast<std::size_t>(it - bank.widths.begin());
        j = std::min(j == 0 ? 0 : j - 1, k - 2);
        const double t = std::clamp(std::log(width / bank.widths[j]) / std::log(bank.widths[j + 1] / bank.widths[j]), 0.0, 1.0);
        lower[i] = static_cast<std::uint32_t>(j);
        frac[i] = t;
        if (t < 1.0)
            used[j] = 1;
        if (t > 0.0)
            used[j + 1] = 1;
    }
    if (clamped > 0)
        std::cerr << "warning: " << clamped << " blur-width samples outside the PSF bank range ["
                  << bank.widths.front() << ", " << bank.widths.back() << "] px were clamped\n";

    PaddedSpectra spectra(img, bank.half_support());
    ImageBuffer out(img.shape(), img.channels());
    const int width_px = img.width();
    for (std::size_t j = 0; j < k; ++j) {
        if (!used[j])
            continue;
        const auto ks = spectra.kernel_spectrum(bank.kernels[j]);
        for (int c = 0; c < img.channels(); ++c) {
            auto plane = out.plane(c);
            spectra.filter(c, ks, [&](int x, int y, double v) {
                const std::size_t i = static_cast<std::size_t>(y) * width_px + x;
                if (k == 1) {
                    plane[i] = v;
                } else if (lower[i] == j) {
                    if (frac[i] < 1.0)
                        plane[i] += (1.0 - frac[i]) * v;
                } else if (lower[i] + 1 == j) {
                    if (frac[i] > 0.0)
                        plane[i] += frac[i] * v;
                }
            });
        }
    }
    return out;
}

ImageBuffer add_exposure_noise(const ImageBuffer& img, const OpticalConfig& cfg, double k_noise, std::uint64_t seed)
{
    if (!(k_noise >= 0.0))
        throw ValidationError("noise constant must be >= 0");
    if (k_noise == 0.0)
        return img;
    require_valid(cfg);
    const double sigma = k_noise / std::sqrt(cfg.exposure_ms());
    const Philox4x32 rng(seed);
    ImageBuffer out = img;
    auto& v = out.values();
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = std::clamp(v[i] + sigma * rng.normal(i), 0.0, 1.0);
    return out;
}

FrameOutputs degrade_frame(const ImageBuffer& img, const TiltField& tilt, const BlurWidthField& wfield,
                           const PsfBank& bank, const OpticalConfig& cfg, std::optional<NoiseParams> noise)
{
    FrameOutputs out;
    out.tilt = warp(img, tilt);
    out.blur = blur_spatially_varying(img, wfield, bank);
    out.turb = blur_spatially_varying(out.tilt, wfield, bank);
    if (noise && noise->k > 0.0)
        out.turb = add_exposure_noise(out.turb, cfg, noise->k, noise->seed);
    return out;
}

VideoResult degrade_video(const std::vector<ImageBuffer>& frames, const OpticalConfig& cfg, std::uint64_t seed,
                          const SynthesisOptions& options)
{
    if (frames.empty())
        throw ValidationError("degrade_video needs at least one frame");
    require_valid(cfg);
    const Shape shape = frames.front().shape();
    for (const auto& f : frames) {
        require_valid(f);
        require_same_shape(shape, f.shape(), "frame");
        if (f.channels() != frames.front().channels())
            throw ValidationError("all frames must have the same channel count");
    }
    const int n = static_cast<int>(frames.size());

    VideoResult result;
    result.stats = turbulence_stats(cfg);
    result.tilt_sigma = options.tilt_sigma.value_or(default_tilt_sigma(cfg));
    result.tilt_correlation_length = options.tilt_correlation_length.value_or(default_tilt_correlation_length(cfg));

    const RandomFieldSpec blur_spec{shape.width, shape.height, options.blur_correlation_length,
                                    derive_seed(seed, stream::blur_width)};
    const BlurWidthField wide_width = blur_width_field(result.stats.mean_blur_width_px, result.stats.std_blur_width_px,
                                                       extend_for_wind(blur_spec, cfg, n), options.epsilon);
    const RandomFieldSpec tilt_spec{shape.width, shape.height, result.tilt_correlation_length, seed};
    const TiltField wide_tilt = tilt_field(result.tilt_sigma, extend_for_wind(tilt_spec, cfg, n));

    const PsfBank bank =
        build_psf_bank(cfg, wide_width.grid.min(), wide_width.grid.max(), options.k_bins, options.bank);
    result.bank_size = static_cast<int>(bank.size());
    result.bank_support = bank.support;

    const std::uint64_t noise_seed = derive_seed(seed, stream::noise);
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / cfg.frame_rate;
        BlurWidthField wfield{frozen_flow_view(wide_width.grid, cfg, t, shape), wide_width.mean_target,
                              wide_width.std_target, wide_width.epsilon};
        TiltField tilt{frozen_flow_view(wide_tilt.dx, cfg, t, shape), frozen_flow_view(wide_tilt.dy, cfg, t, shape),
                       wide_tilt.sigma_tilt, wide_tilt.correlation_length};
        std::optional<NoiseParams> noise;
        if (options.noise_k > 0.0)
            noise = NoiseParams{options.noise_k, derive_seed(noise_seed, static_cast<std::uint64_t>(i))};
        result.frames.push_back(degrade_frame(frames[static_cast<std::size_t>(i)], tilt, wfield, bank, cfg, noise));
        if (options.keep_fields)
            result.fields.push_back({std::move(wfield.grid), std::move(tilt.dx), std::move(tilt.dy)});
    }
    return result;
}

} // namespace turbsynth
