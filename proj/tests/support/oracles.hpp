#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "celltrace/lineage.hpp"

namespace celltrace::testing {

/// Threshold maximizing w0 * w1 * (mu0 - mu1)^2 in exact rational arithmetic, scanning
/// every bin; the lowest threshold wins ties.
int otsu_oracle(const std::vector<std::uint64_t>& histogram);

/// Nearest-foreground distance per voxel by scanning every foreground voxel.
std::vector<double> distance_oracle(const Mask& mask);

/// Parent by direct enumeration of every track: gate on the candidate's last detection
/// before the birth, cost over the newborn's leading consecutive detections.
std::optional<TrackId> parent_oracle(const Track& newborn, const std::vector<Track>& tracks,
                                     const DetectionIndex& index, const TrackingConfig& tracking,
                                     const LineageConfig& lineage, const VoxelSpacing& spacing);

}  // namespace celltrace::testing
