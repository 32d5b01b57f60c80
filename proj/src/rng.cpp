#include "turbsynth/rng.hpp"

#include <cmath>
#include <numbers>

namespace turbsynth {

namespace {

constexpr std::uint32_t philox_m0 = 0xD2511F53u;
constexpr std::uint32_t philox_m1 = 0xCD9E8D57u;
constexpr std::uint32_t philox_w0 = 0x9E3779B9u;
constexpr std::uint32_t philox_w1 = 0xBB67AE85u;

constexpr double two_pow_minus_53 = 1.0 / 9007199254740992.0;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline std::uint64_t join(std::uint32_t lo, std::uint32_t hi)
{
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

} // namespace

Philox4x32::Block Philox4x32::block(std::uint64_t counter_hi, std::uint64_t counter_lo) const
{
    Block c{static_cast<std::uint32_t>(counter_lo), static_cast<std::uint32_t>(counter_lo >> 32),
            static_cast<std::uint32_t>(counter_hi), static_cast<std::uint32_t>(counter_hi >> 32)};
    std::uint32_t k0 = static_cast<std::uint32_t>(key_);
    std::uint32_t k1 = static_cast<std::uint32_t>(key_ >> 32);
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(philox_m0, c[0], hi0, lo0);
        mulhilo(philox_m1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
        k0 += philox_w0;
        k1 += philox_w1;
    }
    return c;
}

double Philox4x32::uniform(std::uint64_t index) const
{
    const Block b = block(0, index);
    return static_cast<double>(join(b[0], b[1]) >> 11) * two_pow_minus_53;
}

double Philox4x32::uniform_open_low(std::uint64_t index) const
{
    return 1.0 - uniform(index);
}

double Philox4x32::normal(std::uint64_t index) const
{
    const Block b = block(1, index / 2);
    const double u1 = 1.0 - static_cast<double>(join(b[0], b[1]) >> 11) * two_pow_minus_53;
    const double u2 = static_cast<double>(join(b[2], b[3]) >> 11) * two_pow_minus_53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return (index % 2 == 0) ? r * std::cos(theta) : r * std::sin(theta);
}

std::uint64_t Philox4x32::below(std::uint64_t index, std::uint64_t n) const
{
    const Block b = block(2, index);
    const unsigned __int128 product = static_cast<unsigned __int128>(join(b[0], b[1])) * n;
    return static_cast<std::uint64_t>(product >> 64);
}

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag)
{
    return mix64(parent ^ mix64(tag + 0x632BE59BD9B4E019ull));
}

std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag)
{
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char ch : tag) {
        h ^= ch;
        h *= 0x100000001B3ull;
    }
    return derive_seed(parent, h);
}

} // namespace turbsynth
