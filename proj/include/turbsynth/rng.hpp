#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace turbsynth {

/// Philox4x32-10 counter-based generator.
///
/// Every output is a pure function of (key, counter), so a stream can be
/// consumed out of order or split across threads without changing any
/// value. Streams are separated by key; see `derive_seed`.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    explicit Philox4x32(std::uint64_t key) : key_{key} {}

    std::uint64_t key() const { return key_; }

    /// Raw 128-bit block for a 128-bit counter (hi, lo).
    Block block(std::uint64_t counter_hi, std::uint64_t counter_lo) const;

    /// Uniform double in [0, 1) with 53 random bits; index selects the sample.
    double uniform(std::uint64_t index) const;
    /// Uniform double in (0, 1]; safe as a logarithm argument.
    double uniform_open_low(std::uint64_t index) const;
    /// Standard normal sample via Box-Muller on one block per pair of indices.
    double normal(std::uint64_t index) const;
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t index, std::uint64_t n) const;

private:
    std::uint64_t key_;
};

/// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x);

/// Child stream seed for a numeric tag. Stream ids compose hierarchically:
/// derive_seed(derive_seed(master, sequence), field) and so on.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag);
/// Child stream seed for a string tag (FNV-1a hashed).
std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag);

/// Fixed tags for the per-sequence stream tree.
namespace stream {
inline constexpr std::uint64_t config = 1;
inline constexpr std::uint64_t blur_width = 2;
inline constexpr std::uint64_t tilt_x = 3;
inline constexpr std::uint64_t tilt_y = 4;
inline constexpr std::uint64_t noise = 5;
inline constexpr std::uint64_t split = 6;
} // namespace stream

} // namespace turbsynth
