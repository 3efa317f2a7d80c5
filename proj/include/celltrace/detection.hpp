#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "celltrace/convex_hull.hpp"
#include "celltrace/volume.hpp"

namespace celltrace {

using DetectionId = std::int64_t;

/// One segmented cell in one frame.
struct Detection {
    DetectionId id = 0;
    int frame = 0;
    /// Foreground voxel indices in scan order (x fastest).
    std::vector<Index3> voxels;
    Point3 centroid;
    double volume_um3 = 0.0;
    ConvexHull hull;

    std::size_t voxel_count() const { return voxels.size(); }
    bool operator==(const Detection&) const = default;
};

/// Scan-order comparison: z, then y, then x.
inline bool scan_less(const Index3& a, const Index3& b) {
    if (a.k != b.k) return a.k < b.k;
    if (a.j != b.j) return a.j < b.j;
    return a.i < b.i;
}

/// Builds a detection from its voxels (any order); computes centroid, volume and hull.
Detection make_detection(DetectionId id, int frame, std::vector<Index3> voxels,
                         const VoxelSpacing& spacing);

/// Voxels with at least one 6-neighbor outside the set. Only these can realize
/// minimum distances to another disjoint set or be hull vertices.
std::vector<Index3> surface_voxels(std::span<const Index3> voxels);

}  // namespace celltrace
