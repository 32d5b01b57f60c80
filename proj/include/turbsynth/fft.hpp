#pragma once

#include "turbsynth/grid.hpp"

#include <complex>
#include <span>
#include <vector>

namespace turbsynth {

using Complex = std::complex<double>;

/// Smallest integer >= n whose prime factors are all in {2, 3, 5, 7}.
int next_fast_size(int n);

/// Real-to-complex 2-D transform pair with a fixed shape.
///
/// The spectrum uses the half-plane layout: height rows of width/2 + 1
/// bins. `inverse` includes the 1/(width*height) normalization. An
/// instance owns its buffers and is not shareable across threads;
/// construct one per worker.
class RealFft2d {
public:
    explicit RealFft2d(Shape shape);
    ~RealFft2d();
    RealFft2d(const RealFft2d&) = delete;
    RealFft2d& operator=(const RealFft2d&) = delete;

    Shape shape() const { return shape_; }
    int spectrum_width() const { return shape_.width / 2 + 1; }
    std::size_t spectrum_size() const
    {
        return static_cast<std::size_t>(spectrum_width()) * static_cast<std::size_t>(shape_.height);
    }

    void forward(std::span<const double> in, std::span<Complex> out);
    void inverse(std::span<const Complex> in, std::span<double> out);

private:
    Shape shape_;
    double* real_ = nullptr;
    void* spectrum_ = nullptr;
    void* forward_plan_ = nullptr;
    void* inverse_plan_ = nullptr;
};

enum class FftDirection { Forward, Inverse };

/// Complex 2-D DFT of a row-major array. Forward is unnormalized;
/// Inverse divides by width*height.
std::vector<Complex> fft2d(std::span<const Complex> in, Shape shape, FftDirection direction);

} // namespace turbsynth
