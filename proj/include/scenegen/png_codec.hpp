#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace scenegen {

// RGBA8 raster held in memory; row-major, 4 bytes per pixel.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> rgba;

    static Image solid(int width, int height, uint8_t r, uint8_t g, uint8_t b,
                       uint8_t a = 255);

    bool in_bounds(int x, int y) const {
        return x >= 0 && y >= 0 && x < width && y < height;
    }
    uint8_t* pixel(int x, int y) {
        return rgba.data() + (static_cast<size_t>(y) * width + x) * 4;
    }
    const uint8_t* pixel(int x, int y) const {
        return rgba.data() + (static_cast<size_t>(y) * width + x) * 4;
    }

    bool operator==(const Image&) const = default;
};

// Minimal PNG writer: 8-bit RGB or RGBA, no interlacing, filter type 0 on
// every row, fixed zlib level — byte-stable for equal input.
std::vector<uint8_t> encode_png(const Image& image, bool opaque_rgb = false);

// Reader for the subset this project emits (plus the usual row filters):
// 8-bit RGB/RGBA, non-interlaced.
Image decode_png(const std::vector<uint8_t>& bytes);

void write_png(const Image& image, const std::filesystem::path& path, bool opaque_rgb = false);
Image read_png(const std::filesystem::path& path);

}  // namespace scenegen
