#pragma once

#include <filesystem>
#include <optional>

#include "celltrace/volume.hpp"

namespace celltrace {

struct TiffInfo {
    Dims dims;
    int bits_per_sample = 0;
    /// Spacing recorded by write_tiff in the image description, if any.
    std::optional<VoxelSpacing> spacing;
};

/// Reads the page headers only.
TiffInfo probe_tiff(const std::filesystem::path& path);

/// Reads a grayscale multi-page TIFF; page k becomes z-slice k. 8- and 16-bit samples.
VoxelGrid read_tiff(const std::filesystem::path& path);

/// Writes one page per z-slice, uncompressed. `bits` is 8 or 16; 8-bit output requires
/// every value to fit.
void write_tiff(const std::filesystem::path& path, const VoxelGrid& grid, int bits = 16);

}  // namespace celltrace
