#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "celltrace/denoise.hpp"
#include "celltrace/lineage.hpp"
#include "celltrace/manifest.hpp"
#include "celltrace/segment.hpp"
#include "celltrace/track.hpp"

namespace celltrace {

struct PipelineConfig {
    CellDenoiseParams denoise;
    SegmentationConfig segmentation;
    TrackingConfig tracking;
    LineageConfig lineage;
    int mrf_max_iterations = 1000;
    /// Seeds k-means initialization for split edits.
    std::uint64_t seed = 0x5eed;

    void validate() const;
    bool operator==(const PipelineConfig&) const = default;
};

enum class EditKind { split, remove, set_track };

EditKind parse_edit_kind(const std::string& text);
std::string to_string(EditKind kind);

struct EditRequest {
    std::uint64_t revision = 0;
    EditKind kind = EditKind::split;
    DetectionId detection_id = 0;
    int n = 2;
    TrackId track_id = -1;
};

/// A downstream detection replaced by an automatic split.
struct PropagationEntry {
    int frame = 0;
    DetectionId detection_id = 0;
    std::vector<DetectionId> products;
    bool operator==(const PropagationEntry&) const = default;
};

struct EditRecord {
    /// Revision produced by this edit.
    std::uint64_t revision = 0;
    EditKind kind = EditKind::split;
    DetectionId detection_id = 0;
    int frame = 0;
    int n = 0;
    TrackId track_id = -1;
    /// Split products at the edited frame.
    std::vector<DetectionId> products;
    std::vector<PropagationEntry> propagation;
    bool operator==(const EditRecord&) const = default;
};

/// Lineage forest plus the per-track features derived from it.
struct LineageView {
    LineageForest forest;
    std::vector<VesselDistanceSeries> vessel_series;  // by track id
    std::vector<CleavagePlane> planes;
    bool operator==(const LineageView&) const = default;
};

struct SessionState {
    ExperimentManifest manifest;
    PipelineConfig config;
    FrameDetections detections;
    /// Vessel distance maps for frames whose vessel channel has foreground.
    std::map<int, DistanceMap> vessel_maps;
    TrackingResult tracking;
    LineageView lineage;
    std::vector<EditRecord> edit_log;
    std::uint64_t revision = 0;
    DetectionId next_detection_id = 0;
    /// User track assignments from set_track edits.
    std::map<DetectionId, TrackId> pins;

    const Detection* find_detection(DetectionId id) const;
};

/// Splits a detection into n by k-means over physical voxel centers (k-means++
/// initialization from `seed`, Lloyd iterations to convergence or 100; best of ten starts
/// by within-cluster sum of squares). Products are ordered by voxel count descending and
/// numbered from `first_id`.
std::vector<Detection> split_detection(const Detection& detection, int n, std::uint64_t seed,
                                       DetectionId first_id, const VoxelSpacing& spacing);

/// Seed for splitting one detection within a session.
std::uint64_t split_seed(std::uint64_t session_seed, DetectionId detection);

/// Vessel MRF denoise, segmentation and distance map for one frame.
VesselSegmentation process_vessel_frame(const VoxelGrid& grid, const PipelineConfig& config);

/// Full batch pipeline: denoise, segment, track, lineage.
SessionState process_experiment(const ExperimentManifest& manifest, const PipelineConfig& config);

/// Rebuilds lineage, vessel-distance series and cleavage planes from the tracks.
LineageView build_lineage_view(const SessionState& state);

/// Applies one edit to a copy of `state`. Throws ConflictError on a stale revision and
/// NotFoundError/ParameterError on an invalid target.
std::pair<SessionState, EditRecord> apply_edit(const SessionState& state, const EditRequest& request);

/// Re-runs the pipeline and applies the logged edits in order.
SessionState replay(const ExperimentManifest& manifest, const PipelineConfig& config,
                    const std::vector<EditRecord>& edit_log);

EditRequest request_for(const EditRecord& record, std::uint64_t revision);

}  // namespace celltrace
