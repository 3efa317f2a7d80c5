#include "celltrace/detection.hpp"

#include <algorithm>
#include <unordered_set>

namespace celltrace {
namespace {

struct IndexHash {
    std::size_t operator()(const Index3& v) const {
        std::uint64_t h = static_cast<std::uint64_t>(v.i) * 0x9E3779B97F4A7C15ull;
        h ^= static_cast<std::uint64_t>(v.j) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
        h ^= static_cast<std::uint64_t>(v.k) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

}  // namespace

std::vector<Index3> surface_voxels(std::span<const Index3> voxels) {
    const std::unordered_set<Index3, IndexHash> members(voxels.begin(), voxels.end());
    std::vector<Index3> surface;
    for (const auto& v : voxels) {
        const Index3 neighbors[6] = {{v.i - 1, v.j, v.k}, {v.i + 1, v.j, v.k}, {v.i, v.j - 1, v.k},
                                     {v.i, v.j + 1, v.k}, {v.i, v.j, v.k - 1}, {v.i, v.j, v.k + 1}};
        for (const auto& n : neighbors) {
            if (!members.count(n)) {
                surface.push_back(v);
                break;
            }
        }
    }
    return surface;
}

Detection make_detection(DetectionId id, int frame, std::vector<Index3> voxels,
                         const VoxelSpacing& spacing) {
    if (voxels.empty()) throw ParameterError("a detection needs at least one voxel");
    std::sort(voxels.begin(), voxels.end(), scan_less);
    voxels.erase(std::unique(voxels.begin(), voxels.end()), voxels.end());

    Detection d;
    d.id = id;
    d.frame = frame;
    double sx = 0.0, sy = 0.0, sz = 0.0;
    for (const auto& v : voxels) {
        sx += static_cast<double>(v.i);
        sy += static_cast<double>(v.j);
        sz += static_cast<double>(v.k);
    }
    const double n = static_cast<double>(voxels.size());
    d.centroid = {sx / n * spacing.dx, sy / n * spacing.dy, sz / n * spacing.dz};
    d.volume_um3 = n * spacing.voxel_volume();
    d.hull = convex_hull(surface_voxels(voxels), spacing);
    d.voxels = std::move(voxels);
    return d;
}

}  // namespace celltrace
