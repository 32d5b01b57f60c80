#pragma once

// Straightforward reference implementations used to check the library.
// They share no code with it beyond the container types.

#include "turbsynth/grid.hpp"
#include "turbsynth/image.hpp"
#include "turbsynth/optics.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace oracle {

using turbsynth::ImageBuffer;
using turbsynth::OpticalConfig;
using turbsynth::SampledGrid;

/// 1 + 0.28 (lambda f / (omega (D + v tau)))^(1/3), omega given in pixels.
double rho_px(const OpticalConfig& cfg, double omega_px);

/// exp(-(omega xi / (0.49 rho))^(5/3)).
double et_mtf(double omega_px, double rho, double xi);

/// Centered support x support kernel from a direct (separable cosine) DFT
/// of the exposure-time MTF sampled on the support grid, clamped at zero
/// and renormalized.
SampledGrid psf_kernel(double omega_px, double rho, int support);

/// Per-pixel gather: every output pixel uses its own exact kernel.
/// Borders replicate the edge pixel.
ImageBuffer brute_force_blur(const ImageBuffer& img, const SampledGrid& widths, const OpticalConfig& cfg, int support);

/// Direct spatial convolution with a centered kernel, replicate borders.
ImageBuffer direct_convolve(const ImageBuffer& img, const SampledGrid& kernel);

/// Bilinear sample of a grid at (x, y) inside the grid.
double bilinear(const SampledGrid& g, double x, double y);

/// FWHM (pixels) of a PSF in wrap-around layout along the x axis through
/// the peak, from band-limited (trigonometric) interpolation of row 0.
double fwhm_x(const SampledGrid& psf_wrap);

/// Deterministic test scene in [0, 1]: gradients, a disk and a checker
/// patch, with content varied by seed.
ImageBuffer test_image(int width, int height, std::uint64_t seed, int channels = 1);

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

/// Files below root (relative, sorted) with their contents.
std::string tree_digest(const std::filesystem::path& root);

} // namespace oracle
