#include <algorithm>

#include "celltrace/error.hpp"
#include "celltrace/session.hpp"

namespace celltrace {

EditKind parse_edit_kind(const std::string& text) {
    if (text == "split") return EditKind::split;
    if (text == "delete") return EditKind::remove;
    if (text == "set_track") return EditKind::set_track;
    throw ParameterError("unknown edit kind '" + text + "'");
}

std::string to_string(EditKind kind) {
    switch (kind) {
        case EditKind::split: return "split";
        case EditKind::remove: return "delete";
        case EditKind::set_track: return "set_track";
    }
    return "split";
}

const Detection* SessionState::find_detection(DetectionId id) const {
    for (const auto& frame : detections) {
        auto it = std::lower_bound(frame.begin(), frame.end(), id,
                                   [](const Detection& d, DetectionId v) { return d.id < v; });
        if (it != frame.end() && it->id == id) return &*it;
    }
    return nullptr;
}

namespace {

/// Replaces `id` in its frame by `products` (possibly none), keeping id order.
void replace_detection(SessionState& state, int frame, DetectionId id, std::vector<Detection> products) {
    auto& list = state.detections[static_cast<std::size_t>(frame)];
    std::erase_if(list, [&](const Detection& d) { return d.id == id; });
    for (auto& p : products) list.push_back(std::move(p));
    std::sort(list.begin(), list.end(), [](const Detection& a, const Detection& b) { return a.id < b.id; });
    state.pins.erase(id);
}

std::vector<DetectionId> split_into(SessionState& state, const Detection& target, int n) {
    const Detection original = target;
    auto products = split_detection(original, n, split_seed(state.config.seed, original.id),
                                    state.next_detection_id, state.manifest.spacing);
    state.next_detection_id += n;
    std::vector<DetectionId> ids;
    for (const auto& p : products) ids.push_back(p.id);
    replace_detection(state, original.frame, original.id, std::move(products));
    return ids;
}

void retrack(SessionState& state, int from_frame) {
    state.tracking = retrack_from(state.detections, state.tracking, from_frame, state.config.tracking,
                                  state.manifest.spacing, state.pins);
}

bool all_extend(const SessionState& state, const std::vector<DetectionId>& products, int frame) {
    for (DetectionId p : products) {
        const Track* t = state.tracking.track_of(p);
        if (t == nullptr || t->at_frame(frame) < 0) return false;
    }
    return true;
}

}  // namespace

std::pair<SessionState, EditRecord> apply_edit(const SessionState& state, const EditRequest& request) {
    if (request.revision != state.revision) {
        throw ConflictError("stale revision " + std::to_string(request.revision) + " (current " +
                            std::to_string(state.revision) + ")");
    }
    const Detection* target = state.find_detection(request.detection_id);
    if (target == nullptr) throw NotFoundError("unknown detection " + std::to_string(request.detection_id));

    SessionState next = state;
    EditRecord record;
    record.kind = request.kind;
    record.detection_id = request.detection_id;
    record.frame = target->frame;
    const int t = target->frame;

    switch (request.kind) {
        case EditKind::remove:
            replace_detection(next, t, request.detection_id, {});
            retrack(next, t);
            break;
        case EditKind::set_track:
            if (request.track_id < 0) throw ParameterError("set_track needs a track id >= 0");
            std::erase_if(next.pins, [&](const auto& pin) {
                const Detection* d = next.find_detection(pin.first);
                return pin.second == request.track_id && d != nullptr && d->frame == t;
            });
            next.pins[request.detection_id] = request.track_id;
            record.track_id = request.track_id;
            retrack(next, t);
            break;
        case EditKind::split: {
            if (request.n < 2) throw ParameterError("split needs n >= 2");
            if (static_cast<std::size_t>(request.n) > target->voxel_count()) {
                throw ParameterError("split count exceeds the detection's voxel count");
            }
            record.n = request.n;
            std::vector<TrackEntry> chain;
            if (const Track* original = state.tracking.track_of(request.detection_id)) {
                for (const auto& e : original->detections) {
                    if (e.frame > t) chain.push_back(e);
                }
            }
            record.products = split_into(next, *next.find_detection(request.detection_id), request.n);
            retrack(next, t);

            // Follow the original assignment chain while a split product fails to extend.
            std::vector<DetectionId> products = record.products;
            int f = t;
            for (const auto& link : chain) {
                if (link.frame != f + 1) break;
                if (all_extend(next, products, f + 1)) break;
                const Detection* downstream = next.find_detection(link.detection_id);
                if (downstream == nullptr || downstream->voxel_count() < static_cast<std::size_t>(request.n)) break;
                products = split_into(next, *downstream, request.n);
                record.propagation.push_back({f + 1, link.detection_id, products});
                retrack(next, f + 1);
                ++f;
            }
            break;
        }
    }

    next.lineage = build_lineage_view(next);
    next.revision = state.revision + 1;
    record.revision = next.revision;
    next.edit_log.push_back(record);
    return {std::move(next), std::move(record)};
}

EditRequest request_for(const EditRecord& record, std::uint64_t revision) {
    EditRequest request;
    request.revision = revision;
    request.kind = record.kind;
    request.detection_id = record.detection_id;
    request.n = record.n;
    request.track_id = record.track_id;
    return request;
}

SessionState replay(const ExperimentManifest& manifest, const PipelineConfig& config,
                    const std::vector<EditRecord>& edit_log) {
    SessionState state = process_experiment(manifest, config);
    for (const auto& record : edit_log) {
        auto [next, replayed] = apply_edit(state, request_for(record, state.revision));
        if (replayed != record) {
            throw ConflictError("replaying edit at revision " + std::to_string(record.revision) +
                                " produced a different result");
        }
        state = std::move(next);
    }
    return state;
}

}  // namespace celltrace
