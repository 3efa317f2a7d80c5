#include "celltrace/volume.hpp"

#include <algorithm>
#include <string>

namespace celltrace {

void VoxelSpacing::validate() const {
    for (double d : {dx, dy, dz}) {
        if (!std::isfinite(d) || d <= 0.0) {
            throw ParameterError("voxel spacing must be positive and finite, got " +
                                 std::to_string(d));
        }
    }
}

std::uint16_t to_intensity(double v) {
    if (!(v > 0.0)) return 0;
    const double r = std::floor(v + 0.5);
    if (r >= 65535.0) return 65535;
    return static_cast<std::uint16_t>(r);
}

RealVolume to_real(const VoxelGrid& grid) {
    std::vector<double> values(grid.values().begin(), grid.values().end());
    return RealVolume(grid.dims(), grid.spacing(), std::move(values));
}

VoxelGrid to_grid(const RealVolume& volume) {
    std::vector<std::uint16_t> values(volume.size());
    std::transform(volume.values().begin(), volume.values().end(), values.begin(), to_intensity);
    return VoxelGrid(volume.dims(), volume.spacing(), std::move(values));
}

std::uint16_t max_value(const VoxelGrid& grid) {
    if (grid.empty()) return 0;
    return *std::max_element(grid.values().begin(), grid.values().end());
}

}  // namespace celltrace
