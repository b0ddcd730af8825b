#pragma once

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "phasegen/common.hpp"

namespace phasegen {

// Minimal PNG writer (8-bit grayscale or RGB), enough for heatmaps and
// stick-figure frames without pulling in libpng.
namespace png_detail {

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    out.push_back(static_cast<unsigned char>(v & 0xff));
}

inline void write_chunk(std::ofstream& f, const char type[4],
                        const std::vector<unsigned char>& data) {
    std::vector<unsigned char> head;
    put_u32(head, static_cast<std::uint32_t>(data.size()));
    f.write(reinterpret_cast<const char*>(head.data()), 4);
    f.write(type, 4);
    if (!data.empty()) f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    std::uint32_t crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
    if (!data.empty()) crc = crc32(crc, data.data(), static_cast<uInt>(data.size()));
    std::vector<unsigned char> tail;
    put_u32(tail, crc);
    f.write(reinterpret_cast<const char*>(tail.data()), 4);
}

}  // namespace png_detail

// pixels: row-major, `channels` = 1 (gray) or 3 (RGB), size w*h*channels.
inline void write_png(const std::filesystem::path& path, int width, int height, int channels,
                      const std::vector<unsigned char>& pixels) {
    if (channels != 1 && channels != 3) throw ValidationError("write_png: channels must be 1 or 3");
    if (static_cast<long>(pixels.size()) != static_cast<long>(width) * height * channels)
        throw ValidationError("write_png: pixel buffer size mismatch");

    // raw scanlines, filter byte 0 per row
    std::vector<unsigned char> raw;
    raw.reserve(static_cast<size_t>(height) * (1 + static_cast<size_t>(width) * channels));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);
        const unsigned char* row = pixels.data() + static_cast<size_t>(y) * width * channels;
        raw.insert(raw.end(), row, row + static_cast<size_t>(width) * channels);
    }
    uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> compressed(comp_len);
    if (compress2(compressed.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw IoError("write_png: zlib compression failed");
    compressed.resize(comp_len);

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("write_png: cannot open " + path.string());
    static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    f.write(reinterpret_cast<const char*>(sig), 8);

    std::vector<unsigned char> ihdr;
    png_detail::put_u32(ihdr, static_cast<std::uint32_t>(width));
    png_detail::put_u32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);                                    // bit depth
    ihdr.push_back(channels == 1 ? 0 : 2);                // color type
    ihdr.push_back(0);                                    // compression
    ihdr.push_back(0);                                    // filter
    ihdr.push_back(0);                                    // interlace
    png_detail::write_chunk(f, "IHDR", ihdr);
    png_detail::write_chunk(f, "IDAT", compressed);
    png_detail::write_chunk(f, "IEND", {});
    if (!f) throw IoError("write_png: write failed for " + path.string());
}

// Simple grayscale canvas with Bresenham lines, used by the exporters.
class Canvas {
public:
    Canvas(int width, int height, unsigned char background = 255)
        : width_(width), height_(height), pixels_(static_cast<size_t>(width) * height, background) {}

    int width() const { return width_; }
    int height() const { return height_; }

    void set(int x, int y, unsigned char v) {
        if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
        pixels_[static_cast<size_t>(y) * width_ + x] = v;
    }

    void line(int x0, int y0, int x1, int y1, unsigned char v) {
        int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
        int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        while (true) {
            set(x0, y0, v);
            if (x0 == x1 && y0 == y1) break;
            const int e2 = 2 * err;
            if (e2 >= dy) { err += dy; x0 += sx; }
            if (e2 <= dx) { err += dx; y0 += sy; }
        }
    }

    void disc(int cx, int cy, int r, unsigned char v) {
        for (int y = -r; y <= r; ++y)
            for (int x = -r; x <= r; ++x)
                if (x * x + y * y <= r * r) set(cx + x, cy + y, v);
    }

    void save(const std::filesystem::path& path) const { write_png(path, width_, height_, 1, pixels_); }

private:
    int width_, height_;
    std::vector<unsigned char> pixels_;
};

}  // namespace phasegen
