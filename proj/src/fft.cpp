#include "turbsynth/fft.hpp"

#include "turbsynth/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>

namespace turbsynth {

namespace {

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

} // namespace

int next_fast_size(int n)
{
    if (n <= 1)
        return 1;
    for (int candidate = n;; ++candidate) {
        int r = candidate;
        for (int p : {2, 3, 5, 7})
            while (r % p == 0)
                r /= p;
        if (r == 1)
            return candidate;
    }
}

RealFft2d::RealFft2d(Shape shape) : shape_{shape}
{
    if (shape.width < 1 || shape.height < 1)
        throw ValidationError("FFT shape must be positive");
    real_ = fftw_alloc_real(shape.area());
    auto* spec = fftw_alloc_complex(spectrum_size());
    spectrum_ = spec;
    std::lock_guard lock(planner_mutex());
    forward_plan_ = fftw_plan_dft_r2c_2d(shape.height, shape.width, real_, spec, FFTW_ESTIMATE);
    inverse_plan_ = fftw_plan_dft_c2r_2d(shape.height, shape.width, spec, real_, FFTW_ESTIMATE);
}

RealFft2d::~RealFft2d()
{
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
        fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
    }
    fftw_free(real_);
    fftw_free(spectrum_);
}

void RealFft2d::forward(std::span<const double> in, std::span<Complex> out)
{
    if (in.size() != shape_.area() || out.size() != spectrum_size())
        throw ValidationError("RealFft2d::forward: buffer size mismatch");
    std::copy(in.begin(), in.end(), real_);
    fftw_execute(static_cast<fftw_plan>(forward_plan_));
    std::memcpy(out.data(), spectrum_, out.size_bytes());
}

void RealFft2d::inverse(std::span<const Complex> in, std::span<double> out)
{
    if (out.size() != shape_.area() || in.size() != spectrum_size())
        throw ValidationError("RealFft2d::inverse: buffer size mismatch");
    std::memcpy(spectrum_, in.data(), in.size_bytes());
    fftw_execute(static_cast<fftw_plan>(inverse_plan_));
    const double scale = 1.0 / static_cast<double>(shape_.area());
    std::transform(real_, real_ + shape_.area(), out.begin(), [scale](double v) { return v * scale; });
}

std::vector<Complex> fft2d(std::span<const Complex> in, Shape shape, FftDirection direction)
{
    if (in.size() != shape.area())
        throw ValidationError("fft2d: buffer size mismatch");
    auto* buf = fftw_alloc_complex(shape.area());
    std::memcpy(buf, in.data(), in.size_bytes());
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_2d(shape.height, shape.width, buf, buf,
                                direction == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::vector<Complex> out(shape.area());
    std::memcpy(static_cast<void*>(out.data()), buf, shape.area() * sizeof(Complex));
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);
    if (direction == FftDirection::Inverse) {
        const double scale = 1.0 / static_cast<double>(shape.area());
        for (auto& v : out)
            v *= scale;
    }
    return out;
}

} // namespace turbsynth
