#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "celltrace/detection.hpp"

namespace celltrace {

using TrackId = std::int64_t;

struct TrackingConfig {
    /// Look-ahead window W in frames.
    int window = 4;
    /// Weights for pair terms i = -1 .. W-1 (W + 1 entries).
    std::vector<double> weights{1.0, 3.0, 1.0, 1.0, 1.0};
    /// Frames an unextended track remains a candidate; negative means W - 1.
    int occlusion_patience = -1;

    void validate() const;
    int patience() const { return occlusion_patience < 0 ? window - 1 : occlusion_patience; }
    bool operator==(const TrackingConfig&) const = default;
};

enum class TrackStatus { active, ended };

struct TrackEntry {
    int frame = 0;
    DetectionId detection_id = 0;

    bool operator==(const TrackEntry&) const = default;
};

struct Track {
    TrackId id = 0;
    /// Strictly increasing frames, one detection per frame at most.
    std::vector<TrackEntry> detections;
    TrackStatus status = TrackStatus::active;

    int birth_frame() const { return detections.front().frame; }
    int last_frame() const { return detections.back().frame; }
    /// Detection at `frame`, or -1.
    DetectionId at_frame(int frame) const;
    bool operator==(const Track&) const = default;
};

struct CostEdge {
    TrackId track_id = 0;
    /// The track's last detection before the transition.
    DetectionId from_detection = 0;
    DetectionId to_detection = 0;
    double cost = 0.0;
    bool matching = false;

    bool operator==(const CostEdge&) const = default;
};

/// Edges of one transition into `to_frame`.
struct Transition {
    int to_frame = 0;
    std::vector<CostEdge> edges;

    bool operator==(const Transition&) const = default;
};

struct CostGraph {
    std::vector<Transition> transitions;

    const Transition* find(int to_frame) const;
    bool operator==(const CostGraph&) const = default;
};

/// Minimum Euclidean distance between voxel centers of the two detections, in micrometers.
double d_cc(const Detection& alpha, const Detection& beta, const VoxelSpacing& spacing);

/// Relative size difference (max - min) / max of the voxel counts.
double d_size(const Detection& alpha, const Detection& beta);

/// Weighted multi-frame cost of extending a track whose most recent detections are
/// `tail` (oldest first; one or two entries) by `extension` (consecutive frames).
/// The sum runs over pairs i = -1 .. |extension|-1 in that order, each term
/// w_i * (d_cc + d_size), and is scaled by (W - |extension| + 1). With a single tail
/// detection the i = -1 term is dropped.
double path_cost(std::span<const Detection* const> tail,
                 std::span<const Detection* const> extension, const TrackingConfig& config,
                 const VoxelSpacing& spacing);

struct TrackingResult {
    std::vector<Track> tracks;  // ordered by id
    CostGraph cost_graph;
    TrackId next_track_id = 0;

    const Track* find(TrackId id) const;
    /// Track containing the detection, or nullptr.
    const Track* track_of(DetectionId detection) const;
    bool operator==(const TrackingResult&) const = default;
};

/// Detections indexed per frame; frames[t][n].frame must equal t.
using FrameDetections = std::vector<std::vector<Detection>>;

/// Id → detection lookup over a frame list; the frames must outlive the index.
class DetectionIndex {
public:
    DetectionIndex() = default;
    explicit DetectionIndex(const FrameDetections& frames);

    const Detection* find(DetectionId id) const;
    const Detection& at(DetectionId id) const;

private:
    std::unordered_map<DetectionId, const Detection*> by_id_;
};

/// Full multitemporal association over all frames.
TrackingResult track_sequence(const FrameDetections& frames, const TrackingConfig& config,
                              const VoxelSpacing& spacing);

/// Re-runs association from `from_frame` on. Track assignments and cost-graph
/// transitions before `from_frame` are kept from `previous`; tracks born later are
/// rebuilt, reusing their old id when they start at the same detection. `pins` forces
/// detection → track assignments (a pinned id that does not exist starts a new track).
TrackingResult retrack_from(const FrameDetections& frames, const TrackingResult& previous,
                            int from_frame, const TrackingConfig& config,
                            const VoxelSpacing& spacing,
                            const std::map<DetectionId, TrackId>& pins = {});

/// Cost c_ij of extending a track (tail as in path_cost) through `first` at frame f:
/// the minimum path_cost over every consecutive-frame extension starting at `first`
/// whose length is at most min(W, frames.size() - f).
double extension_cost(std::span<const Detection* const> tail, const Detection& first,
                      const FrameDetections& frames, const TrackingConfig& config,
                      const VoxelSpacing& spacing);

}  // namespace celltrace
