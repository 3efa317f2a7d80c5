#pragma once

#include <span>

#include "celltrace/volume.hpp"

namespace celltrace::detail {

double squared_voxel_distance(const Index3& a, const Index3& b, const VoxelSpacing& s);
double min_surface_distance(std::span<const Index3> a, std::span<const Index3> b,
                            const VoxelSpacing& s);
bool share_voxel(std::span<const Index3> a, std::span<const Index3> b);

}  // namespace celltrace::detail
