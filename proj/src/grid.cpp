#include "turbsynth/grid.hpp"

#include "turbsynth/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace turbsynth {

std::string_view to_string(GridKind kind)
{
    switch (kind) {
    case GridKind::Mtf: return "mtf";
    case GridKind::Psf: return "psf";
    case GridKind::BlurWidthField: return "blur_width_field";
    case GridKind::DisplacementX: return "displacement_x";
    case GridKind::DisplacementY: return "displacement_y";
    case GridKind::Image: return "image";
    }
    return "unknown";
}

SampledGrid::SampledGrid(Shape shape, GridKind kind, double spacing)
    : SampledGrid(shape, kind, spacing, std::vector<double>(shape.area(), 0.0))
{
}

SampledGrid::SampledGrid(Shape shape, GridKind kind, double spacing, std::vector<double> data)
    : shape_{shape}, kind_{kind}, spacing_{spacing}, data_{std::move(data)}
{
    if (shape.width < 1 || shape.height < 1)
        throw ValidationError("grid dimensions must be positive, got " + std::to_string(shape.width) + "x" +
                              std::to_string(shape.height));
    if (data_.size() != shape.area())
        throw ValidationError("grid data length does not match width*height");
}

double SampledGrid::sum() const
{
    return std::accumulate(data_.begin(), data_.end(), 0.0);
}

double SampledGrid::min() const
{
    return *std::min_element(data_.begin(), data_.end());
}

double SampledGrid::max() const
{
    return *std::max_element(data_.begin(), data_.end());
}

double SampledGrid::mean() const
{
    return sum() / static_cast<double>(data_.size());
}

double SampledGrid::stddev() const
{
    const double m = mean();
    double acc = 0.0;
    for (double v : data_)
        acc += (v - m) * (v - m);
    return std::sqrt(acc / static_cast<double>(data_.size()));
}

SampledGrid SampledGrid::crop(int x0, int y0, Shape out) const
{
    if (x0 < 0 || y0 < 0 || x0 + out.width > shape_.width || y0 + out.height > shape_.height)
        throw RangeError("crop window exceeds grid bounds");
    SampledGrid result(out, kind_, spacing_);
    for (int y = 0; y < out.height; ++y)
        std::copy_n(&data_[index(x0, y0 + y)], out.width, &result.at(0, y));
    return result;
}

namespace {

SampledGrid roll(const SampledGrid& grid, int sx, int sy)
{
    SampledGrid out(grid.shape(), grid.kind(), grid.spacing());
    const int w = grid.width();
    const int h = grid.height();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at((x + sx) % w, (y + sy) % h) = grid.at(x, y);
    return out;
}

} // namespace

SampledGrid fftshift(const SampledGrid& grid)
{
    return roll(grid, grid.width() / 2, grid.height() / 2);
}

SampledGrid ifftshift(const SampledGrid& grid)
{
    return roll(grid, (grid.width() + 1) / 2, (grid.height() + 1) / 2);
}

} // namespace turbsynth
