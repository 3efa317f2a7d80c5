#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "celltrace/error.hpp"
#include "celltrace/session.hpp"

namespace celltrace {

void PipelineConfig::validate() const {
    denoise.validate();
    segmentation.validate();
    tracking.validate();
    lineage.validate();
    if (mrf_max_iterations < 0) throw ParameterError("MRF iteration cap must be >= 0");
}

VesselSegmentation process_vessel_frame(const VoxelGrid& grid, const PipelineConfig& config) {
    MrfOptions options;
    options.max_iterations = config.mrf_max_iterations;
    return segment_vessel_channel(mrf_denoise(grid, options), config.segmentation);
}

namespace {

struct FrameOutput {
    std::vector<Detection> detections;
    std::optional<DistanceMap> vessel;
};

FrameOutput process_frame(const ExperimentManifest& manifest, const PipelineConfig& config, int t,
                          int cell_channel, int vessel_channel) {
    FrameOutput out;
    const VoxelGrid cells = denoise_cell_channel(load_frame(manifest, t, cell_channel), config.denoise);
    out.detections = segment_cell_channel(cells, config.segmentation, t, 0);
    if (vessel_channel >= 0) {
        auto vessels = process_vessel_frame(load_frame(manifest, t, vessel_channel), config);
        if (!vessels.distances.empty) out.vessel = std::move(vessels.distances);
    }
    return out;
}

}  // namespace

SessionState process_experiment(const ExperimentManifest& manifest, const PipelineConfig& config) {
    config.validate();
    const int cell_channel = manifest.first_channel_with_role(ChannelRole::cell);
    if (cell_channel < 0) throw ParameterError("manifest has no cell-role channel");
    const int vessel_channel = manifest.first_channel_with_role(ChannelRole::vessel);

    // Frames are independent up to id assignment, which happens afterwards in frame order.
    std::vector<FrameOutput> outputs(static_cast<std::size_t>(manifest.t_count));
    std::atomic<int> next_frame{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int t = next_frame++; t < manifest.t_count; t = next_frame++) {
            try {
                outputs[static_cast<std::size_t>(t)] =
                    process_frame(manifest, config, t, cell_channel, vessel_channel);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned workers =
        std::max(1u, std::min(std::thread::hardware_concurrency(), static_cast<unsigned>(manifest.t_count)));
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    SessionState state;
    state.manifest = manifest;
    state.config = config;
    for (int t = 0; t < manifest.t_count; ++t) {
        auto& out = outputs[static_cast<std::size_t>(t)];
        for (auto& d : out.detections) d.id = state.next_detection_id++;
        state.detections.push_back(std::move(out.detections));
        if (out.vessel) state.vessel_maps.emplace(t, std::move(*out.vessel));
    }
    state.tracking = track_sequence(state.detections, config.tracking, manifest.spacing);
    state.lineage = build_lineage_view(state);
    return state;
}

LineageView build_lineage_view(const SessionState& state) {
    const DetectionIndex index(state.detections);
    LineageView view;
    view.forest = build_lineages(state.tracking.tracks, index, state.config.tracking, state.config.lineage,
                                 state.manifest.spacing);
    std::map<int, const DistanceMap*> maps;
    for (const auto& [t, m] : state.vessel_maps) maps.emplace(t, &m);
    for (const auto& track : state.tracking.tracks) {
        view.vessel_series.push_back(vessel_distance_series(track, index, maps, state.config.lineage));
    }
    view.planes = division_planes(view.forest, state.tracking.tracks, index);
    return view;
}

}  // namespace celltrace
