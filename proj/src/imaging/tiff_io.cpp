#include "celltrace/tiff_io.hpp"

#include <tiffio.h>

#include <cstring>
#include <memory>
#include <nlohmann/json.hpp>

namespace celltrace {
namespace {

struct TiffCloser {
    void operator()(TIFF* tif) const { TIFFClose(tif); }
};
using TiffHandle = std::unique_ptr<TIFF, TiffCloser>;

void silence_libtiff() {
    static const bool once = [] {
        TIFFSetWarningHandler(nullptr);
        TIFFSetErrorHandler(nullptr);
        return true;
    }();
    (void)once;
}

TiffHandle open(const std::filesystem::path& path, const char* mode) {
    silence_libtiff();
    TiffHandle tif(TIFFOpen(path.string().c_str(), mode));
    if (!tif) throw IoError("cannot open TIFF: " + path.string());
    return tif;
}

std::optional<VoxelSpacing> parse_description(TIFF* tif) {
    char* text = nullptr;
    if (!TIFFGetField(tif, TIFFTAG_IMAGEDESCRIPTION, &text) || text == nullptr) {
        return std::nullopt;
    }
    auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("spacing_um")) {
        return std::nullopt;
    }
    const auto& s = doc["spacing_um"];
    if (!s.is_array() || s.size() != 3) return std::nullopt;
    return VoxelSpacing{s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
}

struct PageHeader {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint16_t bits = 0;
};

PageHeader read_header(TIFF* tif, const std::filesystem::path& path) {
    PageHeader h;
    std::uint16_t spp = 1;
    std::uint16_t format = SAMPLEFORMAT_UINT;
    TIFFGetField(tif, TIFFTAG_IMAGEWIDTH, &h.width);
    TIFFGetField(tif, TIFFTAG_IMAGELENGTH, &h.height);
    TIFFGetFieldDefaulted(tif, TIFFTAG_BITSPERSAMPLE, &h.bits);
    TIFFGetFieldDefaulted(tif, TIFFTAG_SAMPLESPERPIXEL, &spp);
    TIFFGetFieldDefaulted(tif, TIFFTAG_SAMPLEFORMAT, &format);
    if (spp != 1) throw IoError("TIFF is not grayscale: " + path.string());
    if (h.bits != 8 && h.bits != 16) {
        throw IoError("unsupported TIFF bit depth " + std::to_string(h.bits) + ": " +
                      path.string());
    }
    if (format != SAMPLEFORMAT_UINT) throw IoError("TIFF samples are not unsigned: " + path.string());
    return h;
}

}  // namespace

TiffInfo probe_tiff(const std::filesystem::path& path) {
    auto tif = open(path, "r");
    TiffInfo info;
    const PageHeader first = read_header(tif.get(), path);
    info.dims.nx = first.width;
    info.dims.ny = first.height;
    info.bits_per_sample = first.bits;
    info.spacing = parse_description(tif.get());
    std::size_t pages = 1;
    while (TIFFReadDirectory(tif.get())) ++pages;
    info.dims.nz = pages;
    return info;
}

VoxelGrid read_tiff(const std::filesystem::path& path) {
    auto tif = open(path, "r");
    const PageHeader first = read_header(tif.get(), path);
    const auto spacing = parse_description(tif.get()).value_or(VoxelSpacing{});

    std::vector<std::uint16_t> values;
    std::vector<unsigned char> line(static_cast<std::size_t>(TIFFScanlineSize(tif.get())));
    std::size_t pages = 0;
    do {
        const PageHeader h = read_header(tif.get(), path);
        if (h.width != first.width || h.height != first.height || h.bits != first.bits) {
            throw IoError("TIFF pages differ in shape: " + path.string());
        }
        line.resize(static_cast<std::size_t>(TIFFScanlineSize(tif.get())));
        for (std::uint32_t row = 0; row < h.height; ++row) {
            if (TIFFReadScanline(tif.get(), line.data(), row, 0) < 0) {
                throw IoError("corrupt TIFF scanline in " + path.string());
            }
            if (h.bits == 8) {
                values.insert(values.end(), line.begin(), line.begin() + h.width);
            } else {
                for (std::uint32_t x = 0; x < h.width; ++x) {
                    std::uint16_t v;
                    std::memcpy(&v, line.data() + 2 * x, 2);
                    values.push_back(v);
                }
            }
        }
        ++pages;
    } while (TIFFReadDirectory(tif.get()));

    return VoxelGrid(Dims{first.width, first.height, pages}, spacing, std::move(values));
}

void write_tiff(const std::filesystem::path& path, const VoxelGrid& grid, int bits) {
    if (bits != 8 && bits != 16) throw ParameterError("TIFF bit depth must be 8 or 16");
    if (grid.empty()) throw ParameterError("cannot write an empty grid");
    if (bits == 8 && max_value(grid) > 255) {
        throw ParameterError("grid values exceed the 8-bit range");
    }
    auto tif = open(path, "w");
    const auto& d = grid.dims();
    const auto& s = grid.spacing();
    const std::string description =
        nlohmann::json{{"spacing_um", {s.dx, s.dy, s.dz}}}.dump();

    std::vector<unsigned char> line(d.nx * static_cast<std::size_t>(bits / 8));
    for (std::size_t k = 0; k < d.nz; ++k) {
        TIFFSetField(tif.get(), TIFFTAG_IMAGEWIDTH, static_cast<std::uint32_t>(d.nx));
        TIFFSetField(tif.get(), TIFFTAG_IMAGELENGTH, static_cast<std::uint32_t>(d.ny));
        TIFFSetField(tif.get(), TIFFTAG_BITSPERSAMPLE, static_cast<std::uint16_t>(bits));
        TIFFSetField(tif.get(), TIFFTAG_SAMPLESPERPIXEL, static_cast<std::uint16_t>(1));
        TIFFSetField(tif.get(), TIFFTAG_SAMPLEFORMAT, static_cast<std::uint16_t>(SAMPLEFORMAT_UINT));
        TIFFSetField(tif.get(), TIFFTAG_PHOTOMETRIC, static_cast<std::uint16_t>(PHOTOMETRIC_MINISBLACK));
        TIFFSetField(tif.get(), TIFFTAG_PLANARCONFIG, static_cast<std::uint16_t>(PLANARCONFIG_CONTIG));
        TIFFSetField(tif.get(), TIFFTAG_COMPRESSION, static_cast<std::uint16_t>(COMPRESSION_NONE));
        TIFFSetField(tif.get(), TIFFTAG_ROWSPERSTRIP, static_cast<std::uint32_t>(d.ny));
        TIFFSetField(tif.get(), TIFFTAG_SUBFILETYPE, static_cast<std::uint32_t>(FILETYPE_PAGE));
        TIFFSetField(tif.get(), TIFFTAG_PAGENUMBER, static_cast<std::uint16_t>(k),
                     static_cast<std::uint16_t>(d.nz));
        TIFFSetField(tif.get(), TIFFTAG_IMAGEDESCRIPTION, description.c_str());
        for (std::size_t row = 0; row < d.ny; ++row) {
            for (std::size_t x = 0; x < d.nx; ++x) {
                const std::uint16_t v = grid(x, row, k);
                if (bits == 8) {
                    line[x] = static_cast<unsigned char>(v);
                } else {
                    std::memcpy(line.data() + 2 * x, &v, 2);
                }
            }
            if (TIFFWriteScanline(tif.get(), line.data(), static_cast<std::uint32_t>(row), 0) < 0) {
                throw IoError("failed writing TIFF " + path.string());
            }
        }
        if (!TIFFWriteDirectory(tif.get())) throw IoError("failed writing TIFF " + path.string());
    }
}

}  // namespace celltrace
