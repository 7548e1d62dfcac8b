#include "scenegen/png_codec.hpp"

#include <zlib.h>

#include <cstring>

#include "scenegen/errors.hpp"
#include "scenegen/util.hpp"

namespace scenegen {

namespace {

constexpr uint8_t kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
constexpr int kZlibLevel = 6;  // fixed: output bytes must be reproducible

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

uint32_t read_u32(const uint8_t* p) {
    return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
           (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
}

void append_chunk(std::vector<uint8_t>& out, const char type[4],
                  const std::vector<uint8_t>& data) {
    put_u32(out, static_cast<uint32_t>(data.size()));
    size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    uint32_t crc = static_cast<uint32_t>(
        ::crc32(0L, out.data() + crc_start, static_cast<uInt>(4 + data.size())));
    put_u32(out, crc);
}

int paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

}  // namespace

Image Image::solid(int width, int height, uint8_t r, uint8_t g, uint8_t b, uint8_t a) {
    Image img;
    img.width = width;
    img.height = height;
    img.rgba.resize(static_cast<size_t>(width) * height * 4);
    for (size_t i = 0; i < img.rgba.size(); i += 4) {
        img.rgba[i] = r;
        img.rgba[i + 1] = g;
        img.rgba[i + 2] = b;
        img.rgba[i + 3] = a;
    }
    return img;
}

std::vector<uint8_t> encode_png(const Image& image, bool opaque_rgb) {
    if (image.width <= 0 || image.height <= 0 ||
        image.rgba.size() != static_cast<size_t>(image.width) * image.height * 4) {
        fail("InvalidArgument", "encode_png: malformed image buffer");
    }
    const int channels = opaque_rgb ? 3 : 4;
    const uint8_t color_type = opaque_rgb ? 2 : 6;

    // Raw scanlines, each prefixed with filter type 0.
    std::vector<uint8_t> raw;
    raw.reserve(static_cast<size_t>(image.height) *
                (1 + static_cast<size_t>(image.width) * channels));
    for (int y = 0; y < image.height; ++y) {
        raw.push_back(0);
        for (int x = 0; x < image.width; ++x) {
            const uint8_t* px = image.pixel(x, y);
            raw.push_back(px[0]);
            raw.push_back(px[1]);
            raw.push_back(px[2]);
            if (!opaque_rgb) raw.push_back(px[3]);
        }
    }

    uLongf compressed_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> compressed(compressed_size);
    if (compress2(compressed.data(), &compressed_size, raw.data(),
                  static_cast<uLong>(raw.size()), kZlibLevel) != Z_OK) {
        fail("IoFailure", "zlib compression failed");
    }
    compressed.resize(compressed_size);

    std::vector<uint8_t> out(kSignature, kSignature + 8);
    std::vector<uint8_t> ihdr;
    put_u32(ihdr, static_cast<uint32_t>(image.width));
    put_u32(ihdr, static_cast<uint32_t>(image.height));
    ihdr.push_back(8);           // bit depth
    ihdr.push_back(color_type);  // 2 = RGB, 6 = RGBA
    ihdr.push_back(0);           // compression
    ihdr.push_back(0);           // filter method
    ihdr.push_back(0);           // no interlacing
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", compressed);
    append_chunk(out, "IEND", {});
    return out;
}

Image decode_png(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kSignature, 8) != 0) {
        fail("MalformedDocument", "not a PNG file");
    }

    int width = 0, height = 0, channels = 0;
    std::vector<uint8_t> idat;
    size_t pos = 8;
    bool saw_ihdr = false;
    while (pos + 8 <= bytes.size()) {
        uint32_t length = read_u32(bytes.data() + pos);
        if (pos + 12 + length > bytes.size()) {
            fail("MalformedDocument", "truncated PNG chunk");
        }
        const char* type = reinterpret_cast<const char*>(bytes.data() + pos + 4);
        const uint8_t* data = bytes.data() + pos + 8;
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (length != 13) fail("MalformedDocument", "bad IHDR length");
            width = static_cast<int>(read_u32(data));
            height = static_cast<int>(read_u32(data + 4));
            uint8_t bit_depth = data[8], color_type = data[9], interlace = data[12];
            if (bit_depth != 8 || (color_type != 2 && color_type != 6) || interlace != 0) {
                fail("MalformedDocument", "unsupported PNG format (need 8-bit RGB/RGBA)");
            }
            channels = color_type == 2 ? 3 : 4;
            saw_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + length);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        pos += 12 + length;
    }
    if (!saw_ihdr || width <= 0 || height <= 0) fail("MalformedDocument", "PNG missing IHDR");

    const size_t stride = static_cast<size_t>(width) * channels;
    std::vector<uint8_t> raw(static_cast<size_t>(height) * (stride + 1));
    uLongf raw_size = static_cast<uLongf>(raw.size());
    if (uncompress(raw.data(), &raw_size, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        raw_size != raw.size()) {
        fail("MalformedDocument", "PNG inflate failed");
    }

    // Undo the per-row filters.
    std::vector<uint8_t> prev(stride, 0);
    Image img;
    img.width = width;
    img.height = height;
    img.rgba.resize(static_cast<size_t>(width) * height * 4);
    std::vector<uint8_t> cur(stride);
    for (int y = 0; y < height; ++y) {
        const uint8_t* row = raw.data() + static_cast<size_t>(y) * (stride + 1);
        uint8_t filter = row[0];
        const uint8_t* src = row + 1;
        for (size_t i = 0; i < stride; ++i) {
            int a = i >= static_cast<size_t>(channels) ? cur[i - channels] : 0;
            int b = prev[i];
            int c = i >= static_cast<size_t>(channels) ? prev[i - channels] : 0;
            int value = src[i];
            switch (filter) {
                case 0: break;
                case 1: value += a; break;
                case 2: value += b; break;
                case 3: value += (a + b) / 2; break;
                case 4: value += paeth(a, b, c); break;
                default: fail("MalformedDocument", "unknown PNG filter type");
            }
            cur[i] = static_cast<uint8_t>(value & 0xff);
        }
        for (int x = 0; x < width; ++x) {
            uint8_t* dst = img.pixel(x, y);
            const uint8_t* s = cur.data() + static_cast<size_t>(x) * channels;
            dst[0] = s[0];
            dst[1] = s[1];
            dst[2] = s[2];
            dst[3] = channels == 4 ? s[3] : 255;
        }
        prev = cur;
    }
    return img;
}

void write_png(const Image& image, const std::filesystem::path& path, bool opaque_rgb) {
    write_binary_file(path, encode_png(image, opaque_rgb));
}

Image read_png(const std::filesystem::path& path) {
    return decode_png(read_binary_file(path));
}

}  // namespace scenegen
