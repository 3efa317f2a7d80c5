#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "celltrace/volume.hpp"

namespace celltrace {

/// Triangulated convex hull of a voxel set, in physical coordinates.
struct ConvexHull {
    std::vector<Point3> vertices;
    /// Vertex index triples, counter-clockwise seen from outside.
    std::vector<std::array<std::uint32_t, 3>> facets;
    /// Set for point, segment and planar inputs; `facets` then holds a flat fan (planar)
    /// or nothing.
    bool degenerate = false;

    bool operator==(const ConvexHull&) const = default;

    /// Whether `p` lies inside or on the hull, with `tolerance` in micrometers. Only
    /// meaningful for full-dimensional hulls.
    bool contains(const Point3& p, double tolerance = 1e-9) const;
    double volume() const;
};

/// Exact hull of voxel centers: the predicates run on integer indices, the result is
/// scaled by `spacing`. Vertices are a subset of the input, ordered by first occurrence.
ConvexHull convex_hull(std::span<const Index3> voxels, const VoxelSpacing& spacing);

}  // namespace celltrace
