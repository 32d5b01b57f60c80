#include "turbsynth/image.hpp"

#include "turbsynth/errors.hpp"

#include <algorithm>
#include <cmath>

namespace turbsynth {

ImageBuffer::ImageBuffer(Shape shape, int channels, double fill)
    : shape_{shape}, channels_{channels}, data_(shape.area() * static_cast<std::size_t>(std::max(channels, 0)), fill)
{
    if (shape.width < 1 || shape.height < 1)
        throw ValidationError("image dimensions must be positive");
    if (channels != 1 && channels != 3)
        throw ValidationError("images must have 1 or 3 channels");
}

std::span<double> ImageBuffer::plane(int c)
{
    return std::span<double>(data_).subspan(static_cast<std::size_t>(c) * shape_.area(), shape_.area());
}

std::span<const double> ImageBuffer::plane(int c) const
{
    return std::span<const double>(data_).subspan(static_cast<std::size_t>(c) * shape_.area(), shape_.area());
}

SampledGrid ImageBuffer::channel_grid(int c) const
{
    const auto p = plane(c);
    return SampledGrid(shape_, GridKind::Image, 1.0, std::vector<double>(p.begin(), p.end()));
}

ImageBuffer ImageBuffer::from_grid(const SampledGrid& grid)
{
    ImageBuffer img(grid.shape(), 1);
    std::copy(grid.values().begin(), grid.values().end(), img.data_.begin());
    return img;
}

void require_valid(const ImageBuffer& img)
{
    if (img.width() < 1 || img.height() < 1)
        throw ValidationError("image is empty");
    if (img.channels() != 1 && img.channels() != 3)
        throw ValidationError("images must have 1 or 3 channels");
    for (double v : img.values())
        if (!std::isfinite(v))
            throw ValidationError("image contains non-finite samples");
}

double mean_gradient_magnitude(const ImageBuffer& img)
{
    const int w = img.width();
    const int h = img.height();
    if (w < 2 || h < 2)
        return 0.0;
    double acc = 0.0;
    for (int c = 0; c < img.channels(); ++c)
        for (int y = 0; y + 1 < h; ++y)
            for (int x = 0; x + 1 < w; ++x) {
                const double gx = img.at(c, x + 1, y) - img.at(c, x, y);
                const double gy = img.at(c, x, y + 1) - img.at(c, x, y);
                acc += std::hypot(gx, gy);
            }
    return acc / (static_cast<double>(img.channels()) * (w - 1) * (h - 1));
}

double max_abs_difference(const ImageBuffer& a, const ImageBuffer& b)
{
    if (a.shape() != b.shape() || a.channels() != b.channels())
        throw ValidationError("image shapes differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i)
        m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

} // namespace turbsynth
