#pragma once

#include "celltrace/png_io.hpp"
#include "celltrace/volume.hpp"

namespace celltrace {

enum class Axis { x, y, z };

Axis parse_axis(const std::string& text);

/// Maximum along `axis`. Output axes are the remaining two in (x, y, z) order:
/// z → (x, y), y → (x, z), x → (y, z).
Image16 max_intensity_projection(const VoxelGrid& grid, Axis axis);

}  // namespace celltrace
