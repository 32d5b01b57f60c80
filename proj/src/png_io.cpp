#include "turbsynth/errors.hpp"
#include "turbsynth/io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <algorithm>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

namespace turbsynth {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode)
{
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f)
        throw IoError("cannot open " + path.string());
    return f;
}

void warning_sink(png_structp, png_const_charp) {}

double quantize_scale(int bit_depth)
{
    return bit_depth == 16 ? 65535.0 : 255.0;
}

} // namespace

DecodedImage read_png(const std::filesystem::path& path)
{
    FilePtr file = open_file(path, "rb");
    png_byte header[8];
    if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
        throw IoError(path.string() + " is not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, warning_sink);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialization failed");
    }
    std::vector<png_byte> pixels;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("failed to decode " + path.string());
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    png_set_strip_alpha(png);
    if (depth == 16)
        png_set_swap(png);
    png_read_update_info(png, info);

    const int channels_in = png_get_channels(png, info);
    depth = png_get_bit_depth(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    pixels.resize(rowbytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y)
        rows[y] = pixels.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const int colour_channels = (channels_in >= 3) ? 3 : 1;
    DecodedImage out{ImageBuffer({static_cast<int>(width), static_cast<int>(height)}, colour_channels), depth};
    const double scale = 1.0 / quantize_scale(depth);
    for (png_uint_32 y = 0; y < height; ++y) {
        const png_byte* row = rows[y];
        for (png_uint_32 x = 0; x < width; ++x)
            for (int c = 0; c < colour_channels; ++c) {
                const std::size_t idx = static_cast<std::size_t>(x) * channels_in + c;
                double v;
                if (depth == 16) {
                    std::uint16_t s;
                    std::memcpy(&s, row + 2 * idx, 2);
                    v = s;
                } else {
                    v = row[idx];
                }
                out.image.at(c, static_cast<int>(x), static_cast<int>(y)) = v * scale;
            }
    }
    return out;
}

void write_png(const std::filesystem::path& path, const ImageBuffer& image, int bit_depth)
{
    if (bit_depth != 8 && bit_depth != 16)
        throw ValidationError("PNG bit depth must be 8 or 16");
    require_valid(image);
    const int w = image.width();
    const int h = image.height();
    const int nc = image.channels();
    const int bytes = bit_depth / 8;
    const double scale = quantize_scale(bit_depth);

    std::vector<png_byte> pixels(static_cast<std::size_t>(w) * h * nc * bytes);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < nc; ++c) {
                const double v = std::clamp(image.at(c, x, y), 0.0, 1.0);
                // nearbyint honours the default round-to-nearest-even mode.
                const auto q = static_cast<std::uint32_t>(std::nearbyint(v * scale));
                const std::size_t idx = ((static_cast<std::size_t>(y) * w + x) * nc + c) * bytes;
                if (bit_depth == 16) {
                    pixels[idx] = static_cast<png_byte>(q >> 8);
                    pixels[idx + 1] = static_cast<png_byte>(q & 0xFF);
                } else {
                    pixels[idx] = static_cast<png_byte>(q);
                }
            }

    FilePtr file = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, warning_sink);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialization failed");
    }
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y)
        rows[y] = pixels.data() + static_cast<std::size_t>(y) * w * nc * bytes;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed to encode " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, w, h, bit_depth, nc == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(file.get()) != 0)
        throw IoError("failed to flush " + path.string());
}

} // namespace turbsynth
