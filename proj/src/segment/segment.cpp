#include <algorithm>
#include <cmath>
#include <numeric>

#include "celltrace/segment.hpp"

namespace celltrace {
namespace {

// Otsu foreground; a grid with a single intensity has none.
Mask foreground(const VoxelGrid& grid, int closing_radius) {
    const auto histogram = intensity_histogram(grid);
    const auto occupied =
        std::count_if(histogram.begin(), histogram.end(), [](std::uint64_t c) { return c > 0; });
    if (occupied < 2) return Mask(grid.dims(), grid.spacing(), 0);
    return close(binarize(grid, otsu_threshold(histogram)), closing_radius);
}

}  // namespace

void SegmentationConfig::validate() const {
    if (!std::isfinite(min_volume_um3) || min_volume_um3 < 0.0) {
        throw ParameterError("minimum volume must be non-negative");
    }
    if (closing_radius < 0) throw ParameterError("closing radius must be non-negative");
}

std::vector<Detection> segment_cell_channel(const VoxelGrid& grid, const SegmentationConfig& config,
                                            int frame, DetectionId first_id) {
    config.validate();
    if (grid.empty()) throw ParameterError("cannot segment an empty grid");
    auto components = connected_components(foreground(grid, config.closing_radius));

    const double voxel_volume = grid.spacing().voxel_volume();
    std::erase_if(components, [&](const std::vector<Index3>& c) {
        return static_cast<double>(c.size()) * voxel_volume < config.min_volume_um3;
    });
    // Components arrive in scan order of their first voxel; the stable sort keeps that
    // order among equal sizes.
    std::stable_sort(components.begin(), components.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });

    std::vector<Detection> detections;
    detections.reserve(components.size());
    for (std::size_t n = 0; n < components.size(); ++n) {
        detections.push_back(make_detection(first_id + static_cast<DetectionId>(n), frame,
                                            std::move(components[n]), grid.spacing()));
    }
    return detections;
}

VesselSegmentation segment_vessel_channel(const VoxelGrid& grid, const SegmentationConfig& config) {
    config.validate();
    if (grid.empty()) throw ParameterError("cannot segment an empty grid");
    VesselSegmentation out;
    out.mask = foreground(grid, config.closing_radius);
    out.distances = distance_map(out.mask);
    return out;
}

}  // namespace celltrace
