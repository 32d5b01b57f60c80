#pragma once

// File formats: PNG images and the ETTF float raster.

#include "turbsynth/grid.hpp"
#include "turbsynth/image.hpp"

#include <filesystem>

namespace turbsynth {

struct DecodedImage {
    ImageBuffer image;
    int bit_depth = 8;
};

/// Reads 8- or 16-bit PNG. Palette and low-bit-depth grayscale are expanded,
/// alpha is dropped, gray+alpha becomes 1 channel and RGB(A) 3 channels.
/// Samples are normalized to [0, 1] without gamma conversion.
DecodedImage read_png(const std::filesystem::path& path);

/// Writes an 8- or 16-bit PNG. Samples are clamped to [0, 1] and quantized
/// with round-half-to-even.
void write_png(const std::filesystem::path& path, const ImageBuffer& image, int bit_depth = 8);

/// ETTF raster: magic "ETTF", u32 width, u32 height, u32 kind, then
/// width*height little-endian float32 samples in row-major order.
void write_raster(const std::filesystem::path& path, const SampledGrid& grid);
SampledGrid read_raster(const std::filesystem::path& path);

} // namespace turbsynth
