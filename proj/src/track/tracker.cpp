#include <algorithm>
#include <cmath>
#include <optional>
#include <limits>
#include <set>
#include <unordered_map>

#include "celltrace/error.hpp"
#include "celltrace/track.hpp"
#include "geometry.hpp"

namespace celltrace {

void TrackingConfig::validate() const {
    if (window < 1) throw ParameterError("tracking window must be at least 1");
    if (weights.size() != static_cast<std::size_t>(window) + 1) {
        throw ParameterError("tracking needs W + 1 weights (i = -1 .. W-1)");
    }
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("tracking weights must be finite and >= 0");
    }
}

DetectionId Track::at_frame(int frame) const {
    auto it = std::lower_bound(detections.begin(), detections.end(), frame,
                               [](const TrackEntry& e, int f) { return e.frame < f; });
    return it != detections.end() && it->frame == frame ? it->detection_id : -1;
}

const Transition* CostGraph::find(int to_frame) const {
    for (const auto& t : transitions) {
        if (t.to_frame == to_frame) return &t;
    }
    return nullptr;
}

const Track* TrackingResult::find(TrackId id) const {
    auto it = std::lower_bound(tracks.begin(), tracks.end(), id,
                               [](const Track& t, TrackId v) { return t.id < v; });
    return it != tracks.end() && it->id == id ? &*it : nullptr;
}

const Track* TrackingResult::track_of(DetectionId detection) const {
    for (const auto& t : tracks) {
        for (const auto& e : t.detections) {
            if (e.detection_id == detection) return &t;
        }
    }
    return nullptr;
}

DetectionIndex::DetectionIndex(const FrameDetections& frames) {
    for (const auto& frame : frames) {
        for (const auto& d : frame) by_id_.emplace(d.id, &d);
    }
}

const Detection* DetectionIndex::find(DetectionId id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : it->second;
}

const Detection& DetectionIndex::at(DetectionId id) const {
    const Detection* d = find(id);
    if (d == nullptr) throw NotFoundError("unknown detection " + std::to_string(id));
    return *d;
}

namespace {

/// Memoized d_cc + d_size per detection pair.
class PairTerms {
public:
    explicit PairTerms(const VoxelSpacing& spacing) : spacing_(spacing) {}

    double operator()(const Detection& a, const Detection& b) {
        const auto key = std::make_pair(a.id, b.id);
        if (auto it = terms_.find(key); it != terms_.end()) return it->second;
        double dcc = 0.0;
        if (!detail::share_voxel(a.voxels, b.voxels)) {
            dcc = detail::min_surface_distance(surface(a), surface(b), spacing_);
        }
        const double term = dcc + d_size(a, b);
        terms_.emplace(key, term);
        return term;
    }

private:
    struct PairHash {
        std::size_t operator()(const std::pair<DetectionId, DetectionId>& p) const {
            return std::hash<DetectionId>{}(p.first) * 1000003u ^ std::hash<DetectionId>{}(p.second);
        }
    };

    const std::vector<Index3>& surface(const Detection& d) {
        auto it = surfaces_.find(d.id);
        if (it == surfaces_.end()) it = surfaces_.emplace(d.id, surface_voxels(d.voxels)).first;
        return it->second;
    }

    VoxelSpacing spacing_;
    std::unordered_map<DetectionId, std::vector<Index3>> surfaces_;
    std::unordered_map<std::pair<DetectionId, DetectionId>, double, PairHash> terms_;
};

// Sums are accumulated left to right exactly as path_cost does; since floating-point
// addition and positive scaling are monotone, the per-frame minimum equals the minimum
// over every enumerated path.
double extension_cost_impl(std::span<const Detection* const> tail, const Detection& first,
                           const FrameDetections& frames, const TrackingConfig& config,
                           PairTerms& terms) {
    if (tail.empty()) throw ParameterError("extension cost needs at least one track detection");
    const bool has_history = tail.size() >= 2;
    const Detection& last = *tail.back();
    double fixed = 0.0;
    if (has_history) fixed += config.weights[0] * terms(*tail[tail.size() - 2], last);
    fixed += config.weights[1] * terms(last, first);

    const int f = first.frame;
    const int total = static_cast<int>(frames.size());
    const int max_len = std::min(config.window, total - f);
    double best = static_cast<double>(config.window) * fixed;

    std::vector<const Detection*> prev_dets{&first};
    std::vector<double> prev_sums{fixed};
    for (int len = 2; len <= max_len; ++len) {
        const auto& next_frame = frames[static_cast<std::size_t>(f + len - 1)];
        if (next_frame.empty()) break;
        const double w = config.weights[static_cast<std::size_t>(len)];
        std::vector<double> sums(next_frame.size(), std::numeric_limits<double>::infinity());
        for (std::size_t d = 0; d < next_frame.size(); ++d) {
            for (std::size_t p = 0; p < prev_dets.size(); ++p) {
                sums[d] = std::min(sums[d], prev_sums[p] + w * terms(*prev_dets[p], next_frame[d]));
            }
        }
        const double mult = static_cast<double>(config.window - len + 1);
        for (double s : sums) best = std::min(best, mult * s);
        prev_dets.clear();
        for (const auto& d : next_frame) prev_dets.push_back(&d);
        prev_sums = std::move(sums);
    }
    return best;
}

class Tracker {
public:
    Tracker(const FrameDetections& frames, const TrackingConfig& config,
            const VoxelSpacing& spacing, const std::map<DetectionId, TrackId>& pins)
        : frames_(frames), config_(config), terms_(spacing), pins_(pins) {
        for (std::size_t t = 0; t < frames.size(); ++t) {
            for (const auto& d : frames[t]) {
                if (d.frame != static_cast<int>(t)) {
                    throw ParameterError("detection frame does not match its frame list");
                }
                if (!by_id_.emplace(d.id, &d).second) {
                    throw ParameterError("duplicate detection id " + std::to_string(d.id));
                }
            }
        }
    }

    TrackingResult run(const TrackingResult& previous, int from_frame) {
        const int total = static_cast<int>(frames_.size());
        if (from_frame < 0) throw ParameterError("re-tracking frame must be >= 0");
        next_id_ = previous.next_track_id;
        truncate(previous, from_frame);
        for (const auto& t : previous.cost_graph.transitions) {
            if (t.to_frame < from_frame) graph_.transitions.push_back(t);
        }
        for (int f = from_frame; f < total; ++f) {
            if (f == 0) {
                seed_first_frame();
            } else {
                transition(f);
            }
        }
        TrackingResult result;
        for (auto& [id, track] : tracks_) {
            const int patience = config_.patience();
            track.status = track.last_frame() + patience < total - 1 ? TrackStatus::ended : TrackStatus::active;
            result.tracks.push_back(std::move(track));
        }
        result.cost_graph = std::move(graph_);
        result.next_track_id = next_id_;
        return result;
    }

private:
    void truncate(const TrackingResult& previous, int from_frame) {
        for (const auto& track : previous.tracks) {
            Track kept = track;
            std::erase_if(kept.detections, [&](const TrackEntry& e) { return e.frame >= from_frame; });
            if (!kept.detections.empty()) {
                tracks_.emplace(kept.id, std::move(kept));
            } else if (!track.detections.empty()) {
                reusable_.emplace(track.detections.front().detection_id, track.id);
            }
            next_id_ = std::max(next_id_, track.id + 1);
        }
    }

    TrackId new_track_id(DetectionId birth) {
        if (auto it = reusable_.find(birth); it != reusable_.end() && !tracks_.contains(it->second)) {
            return it->second;
        }
        while (tracks_.contains(next_id_)) ++next_id_;
        return next_id_++;
    }

    void start_track(TrackId id, const Detection& d) {
        Track t;
        t.id = id;
        t.detections.push_back({d.frame, d.id});
        tracks_.emplace(id, std::move(t));
        next_id_ = std::max(next_id_, id + 1);
    }

    std::optional<TrackId> pin_for(const Detection& d) const {
        if (auto it = pins_.find(d.id); it != pins_.end()) return it->second;
        return std::nullopt;
    }

    void seed_first_frame() {
        for (const auto& d : frames_[0]) {
            const auto pin = pin_for(d);
            if (pin && tracks_.contains(*pin)) {
                throw ConflictError("track " + std::to_string(*pin) + " already has a detection in frame 0");
            }
            start_track(pin ? *pin : new_track_id(d.id), d);
        }
    }

    std::vector<const Detection*> tail_of(const Track& t) const {
        std::vector<const Detection*> tail;
        const auto n = t.detections.size();
        for (std::size_t k = n >= 2 ? n - 2 : 0; k < n; ++k) {
            tail.push_back(by_id_.at(t.detections[k].detection_id));
        }
        return tail;
    }

    void transition(int f) {
        const auto& dets = frames_[static_cast<std::size_t>(f)];
        const int patience = config_.patience();
        std::vector<Track*> rows;
        for (auto& [id, track] : tracks_) {
            const int last = track.last_frame();
            if (last < f && last >= f - 1 - patience) rows.push_back(&track);
        }

        Transition transition;
        transition.to_frame = f;
        const std::size_t nr = rows.size();
        const std::size_t nc = dets.size();
        std::vector<double> cost(nr * nc);
        for (std::size_t i = 0; i < nr; ++i) {
            const auto tail = tail_of(*rows[i]);
            for (std::size_t j = 0; j < nc; ++j) {
                cost[i * nc + j] = extension_cost_impl(tail, dets[j], frames_, config_, terms_);
            }
        }

        // Pinned detections take their assigned track; they leave the matching problem.
        std::vector<bool> row_taken(nr, false), col_taken(nc, false);
        std::vector<std::pair<TrackId, std::size_t>> forced;
        std::set<TrackId> pinned_tracks;
        for (std::size_t j = 0; j < nc; ++j) {
            const auto pin = pin_for(dets[j]);
            if (!pin) continue;
            if (!pinned_tracks.insert(*pin).second) {
                throw ConflictError("two detections in frame " + std::to_string(f) +
                                    " are pinned to track " + std::to_string(*pin));
            }
            col_taken[j] = true;
            forced.emplace_back(*pin, j);
            for (std::size_t i = 0; i < nr; ++i) {
                if (rows[i]->id == *pin) row_taken[i] = true;
            }
        }

        std::vector<double> row_min(nr, std::numeric_limits<double>::infinity());
        std::vector<double> col_min(nc, std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < nr; ++i) {
            if (row_taken[i]) continue;
            for (std::size_t j = 0; j < nc; ++j) {
                if (col_taken[j]) continue;
                row_min[i] = std::min(row_min[i], cost[i * nc + j]);
                col_min[j] = std::min(col_min[j], cost[i * nc + j]);
            }
        }
        std::vector<bool> matching(nr * nc, false);
        std::vector<std::size_t> matched_row(nc, nr);
        for (std::size_t i = 0; i < nr; ++i) {
            if (row_taken[i]) continue;
            for (std::size_t j = 0; j < nc; ++j) {
                if (col_taken[j] || row_taken[i]) continue;
                const double c = cost[i * nc + j];
                if (c == row_min[i] && c == col_min[j]) {
                    matching[i * nc + j] = true;
                    row_taken[i] = true;
                    col_taken[j] = true;
                    matched_row[j] = i;
                }
            }
        }

        for (std::size_t i = 0; i < nr; ++i) {
            const DetectionId from = rows[i]->detections.back().detection_id;
            for (std::size_t j = 0; j < nc; ++j) {
                bool is_forced = false;
                for (const auto& [id, col] : forced) is_forced |= id == rows[i]->id && col == j;
                transition.edges.push_back(
                    {rows[i]->id, from, dets[j].id, cost[i * nc + j], matching[i * nc + j] || is_forced});
            }
        }

        for (std::size_t j = 0; j < nc; ++j) {
            if (matched_row[j] < nr) rows[matched_row[j]]->detections.push_back({f, dets[j].id});
        }
        for (const auto& [id, j] : forced) {
            auto it = tracks_.find(id);
            if (it == tracks_.end()) {
                start_track(id, dets[j]);
                continue;
            }
            Track& track = it->second;
            if (track.last_frame() >= f) {
                throw ConflictError("track " + std::to_string(id) + " already has a detection in frame " +
                                    std::to_string(f));
            }
            const bool candidate = std::any_of(rows.begin(), rows.end(), [&](Track* r) { return r->id == id; });
            if (!candidate) {
                const auto tail = tail_of(track);
                transition.edges.push_back({id, track.detections.back().detection_id, dets[j].id,
                                            extension_cost_impl(tail, dets[j], frames_, config_, terms_),
                                            true});
            }
            track.detections.push_back({f, dets[j].id});
        }
        for (std::size_t j = 0; j < nc; ++j) {
            if (!col_taken[j]) start_track(new_track_id(dets[j].id), dets[j]);
        }
        graph_.transitions.push_back(std::move(transition));
    }

    const FrameDetections& frames_;
    const TrackingConfig& config_;
    PairTerms terms_;
    const std::map<DetectionId, TrackId>& pins_;
    std::unordered_map<DetectionId, const Detection*> by_id_;
    std::map<TrackId, Track> tracks_;
    std::unordered_map<DetectionId, TrackId> reusable_;
    CostGraph graph_;
    TrackId next_id_ = 0;
};

}  // namespace

double extension_cost(std::span<const Detection* const> tail, const Detection& first,
                      const FrameDetections& frames, const TrackingConfig& config,
                      const VoxelSpacing& spacing) {
    config.validate();
    PairTerms terms(spacing);
    return extension_cost_impl(tail, first, frames, config, terms);
}

TrackingResult track_sequence(const FrameDetections& frames, const TrackingConfig& config,
                              const VoxelSpacing& spacing) {
    return retrack_from(frames, TrackingResult{}, 0, config, spacing);
}

TrackingResult retrack_from(const FrameDetections& frames, const TrackingResult& previous,
                            int from_frame, const TrackingConfig& config,
                            const VoxelSpacing& spacing,
                            const std::map<DetectionId, TrackId>& pins) {
    config.validate();
    Tracker tracker(frames, config, spacing, pins);
    return tracker.run(previous, from_frame);
}

}  // namespace celltrace
