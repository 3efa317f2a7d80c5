#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "celltrace/detection.hpp"
#include "celltrace/volume.hpp"

namespace celltrace {

struct SegmentationConfig {
    double min_volume_um3 = 19.0;
    int closing_radius = 1;
    /// Fixed; present for reporting.
    static constexpr int connectivity = 26;

    void validate() const;
    bool operator==(const SegmentationConfig&) const = default;
};

/// 256 bins when every value fits in 8 bits, else 65536.
std::vector<std::uint64_t> intensity_histogram(const VoxelGrid& grid);

/// Threshold maximizing the between-class variance of [0..t] vs [t+1..]; ties go to the
/// lowest t. Exact integer arithmetic. Throws ParameterError for fewer than two
/// non-empty bins.
int otsu_threshold(std::span<const std::uint64_t> histogram);

/// 1 where value > threshold.
Mask binarize(const VoxelGrid& grid, int threshold);

/// Dilation by the index-space ball of `radius` (zero outside the grid).
Mask dilate(const Mask& mask, int radius);
/// Erosion by the same ball; positions outside the grid do not constrain it.
Mask erode(const Mask& mask, int radius);
/// Dilation followed by erosion; idempotent under these boundary rules.
Mask close(const Mask& mask, int radius);

/// 26-connected components, ordered by their first voxel in scan order.
std::vector<std::vector<Index3>> connected_components(const Mask& mask);

/// Per-voxel Euclidean distance (micrometers) to the nearest foreground voxel center.
struct DistanceMap {
    RealVolume values;
    /// No foreground: every value is +infinity.
    bool empty = true;

    double at(std::size_t i, std::size_t j, std::size_t k) const { return values(i, j, k); }
};

/// Exact anisotropic Euclidean distance transform (separable lower-envelope method).
DistanceMap distance_map(const Mask& vessel_mask);

/// Squared distances with arbitrary per-axis weights; `weights[a]` multiplies squared
/// index differences along axis a. Infinity where there is no foreground.
RealVolume squared_distance_transform(const Mask& mask, const std::array<double, 3>& weights);

/// Otsu threshold, closing, 26-connected components, volume filter and hulls.
/// Detections are sorted by voxel count (descending, ties by scan order) and numbered
/// from `first_id`. A single-valued grid has no foreground and yields no detections.
std::vector<Detection> segment_cell_channel(const VoxelGrid& grid, const SegmentationConfig& config,
                                            int frame = 0, DetectionId first_id = 0);

struct VesselSegmentation {
    Mask mask;
    DistanceMap distances;
};

VesselSegmentation segment_vessel_channel(const VoxelGrid& grid, const SegmentationConfig& config);

}  // namespace celltrace
