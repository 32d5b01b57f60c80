#pragma once

// Image-space degradation operators. The composed degradation is
// blur(warp(image)): geometric tilt first, exposure-dependent blur second.

#include "turbsynth/fields.hpp"
#include "turbsynth/image.hpp"
#include "turbsynth/optics.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace turbsynth {

/// out(x) = img(x - d(x)), bilinear sampling with clamp-to-edge.
ImageBuffer warp(const ImageBuffer& img, const TiltField& tilt);

struct BankOptions {
    /// Kernel support is odd(ceil(support_scale * max width)) pixels.
    double support_scale = 6.0;
    /// When > 0, the support grows until the continuous-PSF mass outside it
    /// is at most this value for the widest kernel.
    double tail_tolerance = 0.0;
    int max_support = 4097;
};

/// Discretized family of exposure-time PSFs over a width range.
struct PsfBank {
    /// Strictly increasing blur widths in pixels (geometric spacing).
    std::vector<double> widths;
    /// Gain factor used for each width.
    std::vector<double> rhos;
    /// Centered support x support kernels, kernel(h + dx, h + dy) with h = support / 2.
    std::vector<SampledGrid> kernels;
    int support = 1;

    int half_support() const { return support / 2; }
    std::size_t size() const { return widths.size(); }
};

/// Mass of the continuous exposure-time PSF outside a disk of `radius`
/// pixels (an upper bound for the mass outside the inscribed square).
double psf_tail_mass(double omega_px, double rho, double radius);

/// Smallest odd support meeting `options` for a given widest kernel.
int bank_support(double max_width_px, double rho_at_max, const BankOptions& options);

/// Exact kernel for one width on a support x support grid (centered).
SampledGrid exposure_psf_kernel(const OpticalConfig& cfg, double omega_px, int support);

/// K kernels with geometric width spacing over [min_width, max_width]. A
/// single bin uses the geometric midpoint; a degenerate range collapses to
/// one bin.
PsfBank build_psf_bank(const OpticalConfig& cfg, double min_width, double max_width, int k_bins,
                       const BankOptions& options = {});

/// Convolution of every channel with one centered kernel via the frequency
/// domain, using edge-replicate padding of half the kernel support.
ImageBuffer convolve(const ImageBuffer& img, const SampledGrid& kernel);

/// Spatially varying blur: each bank kernel is applied once to the whole
/// image and every pixel blends the two kernels bracketing its local width,
/// with weights linear in log-width. Widths outside the bank are clamped
/// (a warning is logged).
ImageBuffer blur_spatially_varying(const ImageBuffer& img, const BlurWidthField& wfield, const PsfBank& bank);

/// Gaussian noise with std k_noise / sqrt(exposure in ms), clamped to [0, 1].
ImageBuffer add_exposure_noise(const ImageBuffer& img, const OpticalConfig& cfg, double k_noise, std::uint64_t seed);

struct NoiseParams {
    double k = 0.0;
    std::uint64_t seed = 0;
};

struct FrameOutputs {
    ImageBuffer tilt;
    ImageBuffer blur;
    ImageBuffer turb;
};

/// tilt = warp(img); blur = B(img); turb = B(warp(img)) [+ noise].
FrameOutputs degrade_frame(const ImageBuffer& img, const TiltField& tilt, const BlurWidthField& wfield,
                           const PsfBank& bank, const OpticalConfig& cfg, std::optional<NoiseParams> noise = {});

struct SynthesisOptions {
    double epsilon = 0.1;
    double blur_correlation_length = 32.0;
    /// Defaults to default_tilt_sigma / default_tilt_correlation_length.
    std::optional<double> tilt_sigma;
    std::optional<double> tilt_correlation_length;
    int k_bins = 16;
    BankOptions bank;
    /// Exposure noise constant; 0 disables noise.
    double noise_k = 0.0;
    /// Keep the per-frame field views in the result.
    bool keep_fields = false;
};

struct FrameFields {
    SampledGrid blur_width;
    SampledGrid dx;
    SampledGrid dy;
};

struct VideoResult {
    std::vector<FrameOutputs> frames;
    std::vector<FrameFields> fields;
    TurbulenceStats stats;
    double tilt_sigma = 0.0;
    double tilt_correlation_length = 0.0;
    int bank_size = 0;
    int bank_support = 0;
};

/// Per-sequence frozen-flow synthesis. One extended blur-width field and
/// one extended tilt field are drawn from `seed`; frame i views both at
/// t = i / frame_rate. A single frame is the still-image case.
VideoResult degrade_video(const std::vector<ImageBuffer>& frames, const OpticalConfig& cfg, std::uint64_t seed,
                          const SynthesisOptions& options = {});

} // namespace turbsynth
