#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace celltrace {

/// Row-major 2-D image.
template <class T>
struct Image2D {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<T> pixels;

    T& at(std::size_t x, std::size_t y) { return pixels[x + width * y]; }
    const T& at(std::size_t x, std::size_t y) const { return pixels[x + width * y]; }
    bool operator==(const Image2D&) const = default;
};

using Image8 = Image2D<std::uint8_t>;
using Image16 = Image2D<std::uint16_t>;

std::string encode_png(const Image8& image);
std::string encode_png(const Image16& image);
void write_png(const std::filesystem::path& path, const Image16& image);

/// Decodes 8- or 16-bit grayscale PNG data into 16-bit pixels.
Image16 decode_png(const std::string& bytes);

}  // namespace celltrace
