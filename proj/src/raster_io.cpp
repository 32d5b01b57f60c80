#include "turbsynth/errors.hpp"
#include "turbsynth/io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace turbsynth {

namespace {

constexpr std::array<char, 4> magic{'E', 'T', 'T', 'F'};

void put_u32(std::ostream& os, std::uint32_t v)
{
    const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    os.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& is)
{
    std::array<unsigned char, 4> b{};
    is.read(reinterpret_cast<char*>(b.data()), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

void write_raster(const std::filesystem::path& path, const SampledGrid& grid)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot open " + path.string());
    os.write(magic.data(), magic.size());
    put_u32(os, static_cast<std::uint32_t>(grid.width()));
    put_u32(os, static_cast<std::uint32_t>(grid.height()));
    put_u32(os, static_cast<std::uint32_t>(grid.kind()));
    for (double v : grid.values())
        put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    if (!os)
        throw IoError("failed writing " + path.string());
}

SampledGrid read_raster(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open " + path.string());
    std::array<char, 4> m{};
    is.read(m.data(), 4);
    if (!is || m != magic)
        throw IoError(path.string() + " is not an ETTF raster");
    const std::uint32_t w = get_u32(is);
    const std::uint32_t h = get_u32(is);
    const std::uint32_t kind = get_u32(is);
    if (!is || w == 0 || h == 0 || kind > static_cast<std::uint32_t>(GridKind::Image))
        throw IoError(path.string() + " has a malformed ETTF header");
    std::vector<double> data(static_cast<std::size_t>(w) * h);
    for (double& v : data)
        v = std::bit_cast<float>(get_u32(is));
    if (!is)
        throw IoError(path.string() + " is truncated");
    return SampledGrid({static_cast<int>(w), static_cast<int>(h)}, static_cast<GridKind>(kind), 1.0, std::move(data));
}

} // namespace turbsynth
