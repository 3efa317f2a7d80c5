#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "celltrace/projection.hpp"
#include "celltrace/session.hpp"

namespace celltrace {

using Json = nlohmann::json;

Json config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const Json& json);

Json edit_record_to_json(const EditRecord& record);
EditRecord edit_record_from_json(const Json& json);
/// Body of POST /api/edits.
EditRequest edit_request_from_json(const Json& json);

Json detection_to_json(const Detection& detection);
Json tracks_to_json(const TrackingResult& tracking);
Json cost_graph_to_json(const CostGraph& graph);
Json lineage_to_json(const SessionState& state);

/// Manifest summary and revision.
Json experiment_summary(const SessionState& state);
/// Detections of frame t with hull outlines projected along `axis` (voxel units) and track/tree ids.
Json frame_detections_summary(const SessionState& state, int t, Axis axis = Axis::z);
/// One lineage tree (named by its root track id) with vessel series and cleavage planes.
Json lineage_tree(const SessionState& state, TrackId tree_id);

/// Writes session.json, detections/, tracks.json, cost_graph.json, lineage.json and
/// edits.jsonl; with `projections`, also the raw z projections of every frame and channel.
void export_results(const SessionState& state, const std::filesystem::path& dir, bool projections = true);

/// Restores a session from an export. Vessel maps are recomputed from the raw frames.
SessionState import_results(const std::filesystem::path& dir);

/// Appends one record to dir/edits.jsonl.
void append_edit_log(const std::filesystem::path& dir, const EditRecord& record);

}  // namespace celltrace
