#pragma once

#include "turbsynth/grid.hpp"

#include <span>
#include <vector>

namespace turbsynth {

/// Planar floating-point image, 1 or 3 channels, nominal range [0, 1].
class ImageBuffer {
public:
    ImageBuffer() = default;
    ImageBuffer(Shape shape, int channels, double fill = 0.0);

    int width() const { return shape_.width; }
    int height() const { return shape_.height; }
    int channels() const { return channels_; }
    Shape shape() const { return shape_; }

    std::span<double> plane(int c);
    std::span<const double> plane(int c) const;

    double& at(int c, int x, int y) { return plane(c)[static_cast<std::size_t>(y) * shape_.width + x]; }
    double at(int c, int x, int y) const { return plane(c)[static_cast<std::size_t>(y) * shape_.width + x]; }

    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    /// Single-channel view as a grid (copy).
    SampledGrid channel_grid(int c) const;
    static ImageBuffer from_grid(const SampledGrid& grid);

    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
    Shape shape_{};
    int channels_ = 0;
    std::vector<double> data_;
};

/// Throws ValidationError when the shape is empty, the channel count is not
/// 1 or 3, or any sample is non-finite.
void require_valid(const ImageBuffer& img);

/// Mean magnitude of forward-difference gradients over all channels; a
/// simple sharpness proxy.
double mean_gradient_magnitude(const ImageBuffer& img);

/// Largest absolute per-sample difference; throws on shape mismatch.
double max_abs_difference(const ImageBuffer& a, const ImageBuffer& b);

} // namespace turbsynth
