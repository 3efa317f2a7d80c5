#include "celltrace/png_io.hpp"

#include <png.h>

#include <cstring>
#include <fstream>

#include "celltrace/error.hpp"

namespace celltrace {
namespace {

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::string*>(png_get_io_ptr(png));
    out->append(reinterpret_cast<const char*>(data), length);
}

void no_flush(png_structp) {}

[[noreturn]] void png_fail(png_structp, png_const_charp message) {
    throw IoError(std::string("PNG error: ") + message);
}

void png_silent_warning(png_structp, png_const_charp) {}

std::string encode(std::size_t width, std::size_t height, int bit_depth,
                   const std::vector<unsigned char>& rows_be) {
    if (width == 0 || height == 0) throw ParameterError("cannot encode an empty image");
    std::string out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail,
                                              png_silent_warning);
    png_infop info = png_create_info_struct(png);
    try {
        png_set_write_fn(png, &out, append_bytes, no_flush);
        png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                     bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        const std::size_t stride = width * static_cast<std::size_t>(bit_depth / 8);
        for (std::size_t y = 0; y < height; ++y) {
            png_write_row(png, const_cast<png_bytep>(rows_be.data() + y * stride));
        }
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
    return out;
}

struct ReadCursor {
    const std::string* data;
    std::size_t offset;
};

void read_bytes(png_structp png, png_bytep out, png_size_t length) {
    auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cursor->offset + length > cursor->data->size()) throw IoError("truncated PNG data");
    std::memcpy(out, cursor->data->data() + cursor->offset, length);
    cursor->offset += length;
}

}  // namespace

std::string encode_png(const Image8& image) {
    return encode(image.width, image.height, 8,
                  std::vector<unsigned char>(image.pixels.begin(), image.pixels.end()));
}

std::string encode_png(const Image16& image) {
    std::vector<unsigned char> bytes(image.pixels.size() * 2);
    for (std::size_t n = 0; n < image.pixels.size(); ++n) {
        bytes[2 * n] = static_cast<unsigned char>(image.pixels[n] >> 8);
        bytes[2 * n + 1] = static_cast<unsigned char>(image.pixels[n] & 0xff);
    }
    return encode(image.width, image.height, 16, bytes);
}

void write_png(const std::filesystem::path& path, const Image16& image) {
    const std::string bytes = encode_png(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Image16 decode_png(const std::string& bytes) {
    if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8)) {
        throw IoError("not a PNG stream");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail,
                                             png_silent_warning);
    png_infop info = png_create_info_struct(png);
    ReadCursor cursor{&bytes, 0};
    Image16 image;
    try {
        png_set_read_fn(png, &cursor, read_bytes);
        png_read_info(png, info);
        const auto color = png_get_color_type(png, info);
        const int depth = png_get_bit_depth(png, info);
        if (color != PNG_COLOR_TYPE_GRAY || (depth != 8 && depth != 16)) {
            throw IoError("only 8/16-bit grayscale PNG is supported");
        }
        image.width = png_get_image_width(png, info);
        image.height = png_get_image_height(png, info);
        image.pixels.resize(image.width * image.height);
        std::vector<unsigned char> row(png_get_rowbytes(png, info));
        for (std::size_t y = 0; y < image.height; ++y) {
            png_read_row(png, row.data(), nullptr);
            for (std::size_t x = 0; x < image.width; ++x) {
                image.at(x, y) = depth == 8
                                     ? row[x]
                                     : static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
            }
        }
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

}  // namespace celltrace
