#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace turbsynth {

enum class GridKind : std::uint32_t {
    Mtf = 0,
    Psf = 1,
    BlurWidthField = 2,
    DisplacementX = 3,
    DisplacementY = 4,
    Image = 5,
};

std::string_view to_string(GridKind kind);

struct Shape {
    int width = 0;
    int height = 0;

    std::size_t area() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Row-major 2-D raster of real samples with spacing metadata.
///
/// `spacing` is cycles/pixel for frequency grids and pixels for spatial
/// grids. Frequency grids use the wrap-around layout with DC at (0, 0).
class SampledGrid {
public:
    SampledGrid() = default;
    SampledGrid(Shape shape, GridKind kind, double spacing = 1.0);
    SampledGrid(Shape shape, GridKind kind, double spacing, std::vector<double> data);

    int width() const { return shape_.width; }
    int height() const { return shape_.height; }
    Shape shape() const { return shape_; }
    GridKind kind() const { return kind_; }
    double spacing() const { return spacing_; }

    double& at(int x, int y) { return data_[index(x, y)]; }
    double at(int x, int y) const { return data_[index(x, y)]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double sum() const;
    double min() const;
    double max() const;
    double mean() const;
    /// Population standard deviation.
    double stddev() const;

    /// Copy of the `out` window whose top-left corner is (x0, y0).
    SampledGrid crop(int x0, int y0, Shape out) const;

private:
    std::size_t index(int x, int y) const
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(shape_.width) + static_cast<std::size_t>(x);
    }

    Shape shape_{};
    GridKind kind_ = GridKind::Image;
    double spacing_ = 1.0;
    std::vector<double> data_;
};

/// Swap quadrants so the (0, 0) sample moves to (w/2, h/2).
SampledGrid fftshift(const SampledGrid& grid);
/// Inverse of fftshift.
SampledGrid ifftshift(const SampledGrid& grid);

/// Signed frequency (cycles/sample) of FFT bin `k` on an axis of length `n`.
inline double fft_frequency(int k, int n)
{
    const int signed_k = (k <= (n - 1) / 2) ? k : k - n;
    return static_cast<double>(signed_k) / static_cast<double>(n);
}

} // namespace turbsynth
