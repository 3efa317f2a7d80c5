#pragma once

#include <map>
#include <optional>
#include <vector>

#include "celltrace/segment.hpp"
#include "celltrace/track.hpp"

namespace celltrace {

struct LineageConfig {
    /// Centroid distance gate for parent candidates, micrometers.
    double candidate_gate_um = 50.0;
    /// Sample the vessel distance as the minimum over the cell's voxels instead of the centroid voxel.
    bool vessel_min_over_voxels = false;

    void validate() const;
    bool operator==(const LineageConfig&) const = default;
};

struct LineageForest {
    /// Every track id; value is its parent when it has one.
    std::map<TrackId, std::optional<TrackId>> parent;
    /// Track id → id of the root of its tree (trees are named by their root).
    std::map<TrackId, TrackId> tree_of;
    std::optional<TrackId> presented_tree;

    std::vector<TrackId> roots() const;
    std::vector<TrackId> children(TrackId id) const;
    /// Nodes of the tree rooted at `root`, in ascending id order.
    std::vector<TrackId> tree_nodes(TrackId root) const;
    bool operator==(const LineageForest&) const = default;
};

struct VesselDistanceSample {
    int frame = 0;
    double distance_um = 0.0;
    bool operator==(const VesselDistanceSample&) const = default;
};

struct VesselDistanceSeries {
    TrackId track_id = 0;
    std::vector<VesselDistanceSample> samples;
    bool operator==(const VesselDistanceSeries&) const = default;
};

struct CleavagePlane {
    TrackId parent = 0;
    TrackId daughter_a = 0;
    TrackId daughter_b = 0;
    int frame = 0;
    Point3 anchor;
    Point3 normal;
    bool operator==(const CleavagePlane&) const = default;
};

/// Tracks other than `newborn` with a detection in [birth - W, birth - 1] whose last
/// such detection lies within the centroid gate of the newborn's first detection.
std::vector<const Track*> parent_candidates(const Track& newborn, const std::vector<Track>& tracks,
                                            const DetectionIndex& detections,
                                            const TrackingConfig& tracking,
                                            const LineageConfig& config);

/// Cost of extending `candidate` (its last two detections before the newborn's birth)
/// by the newborn's leading consecutive detections, capped at W.
double parent_cost(const Track& candidate, const Track& newborn, const DetectionIndex& detections,
                   const TrackingConfig& tracking, const VoxelSpacing& spacing);

/// Minimum-cost parent among `candidates`; ties go to the lowest track id.
std::optional<TrackId> assign_parent(const Track& newborn, const std::vector<const Track*>& candidates,
                                     const DetectionIndex& detections,
                                     const TrackingConfig& tracking, const VoxelSpacing& spacing);

LineageForest build_lineages(const std::vector<Track>& tracks, const DetectionIndex& detections,
                             const TrackingConfig& tracking, const LineageConfig& config,
                             const VoxelSpacing& spacing);

/// Per-frame vessel distance at each detection. `maps` holds the frames that have a
/// vessel map; frames absent from it are skipped. An empty map is an error.
VesselDistanceSeries vessel_distance_series(const Track& track, const DetectionIndex& detections,
                                            const std::map<int, const DistanceMap*>& maps,
                                            const LineageConfig& config = {});

/// Plane between two daughter centroids: anchor at the midpoint, normal from a to b.
CleavagePlane cleavage_plane(const Point3& centroid_a, const Point3& centroid_b);

/// Plane at the daughters' shared birth frame.
CleavagePlane cleavage_plane(const Track& parent, const Track& daughter_a, const Track& daughter_b,
                             const DetectionIndex& detections);

/// One plane per division in the forest. Two newborns sharing a birth frame under a
/// parent form a division; a single newborn pairs with the parent's own detection at
/// that frame when the parent continues.
std::vector<CleavagePlane> division_planes(const LineageForest& forest, const std::vector<Track>& tracks,
                                           const DetectionIndex& detections);

}  // namespace celltrace
