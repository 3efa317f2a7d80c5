#include "celltrace/lineage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "celltrace/error.hpp"

namespace celltrace {

void LineageConfig::validate() const {
    if (!(candidate_gate_um >= 0.0)) throw ParameterError("candidate gate must be >= 0");
}

std::vector<TrackId> LineageForest::roots() const {
    std::vector<TrackId> out;
    for (const auto& [id, p] : parent) {
        if (!p) out.push_back(id);
    }
    return out;
}

std::vector<TrackId> LineageForest::children(TrackId id) const {
    std::vector<TrackId> out;
    for (const auto& [child, p] : parent) {
        if (p && *p == id) out.push_back(child);
    }
    return out;
}

std::vector<TrackId> LineageForest::tree_nodes(TrackId root) const {
    std::vector<TrackId> out;
    for (const auto& [id, r] : tree_of) {
        if (r == root) out.push_back(id);
    }
    return out;
}

namespace {

/// Last detection of `track` strictly before `frame`, or -1.
int last_index_before(const Track& track, int frame) {
    int idx = -1;
    for (std::size_t n = 0; n < track.detections.size(); ++n) {
        if (track.detections[n].frame < frame) idx = static_cast<int>(n);
    }
    return idx;
}

std::size_t nearest_index(double coordinate, double step, std::size_t extent) {
    const double v = std::floor(coordinate / step + 0.5);
    if (v <= 0.0) return 0;
    const auto i = static_cast<std::size_t>(v);
    return std::min(i, extent - 1);
}

}  // namespace

std::vector<const Track*> parent_candidates(const Track& newborn, const std::vector<Track>& tracks,
                                            const DetectionIndex& detections,
                                            const TrackingConfig& tracking,
                                            const LineageConfig& config) {
    const int birth = newborn.birth_frame();
    const Point3 origin = detections.at(newborn.detections.front().detection_id).centroid;
    std::vector<const Track*> out;
    for (const auto& t : tracks) {
        if (t.id == newborn.id) continue;
        const int idx = last_index_before(t, birth);
        if (idx < 0) continue;
        const auto& entry = t.detections[static_cast<std::size_t>(idx)];
        if (entry.frame < birth - tracking.window) continue;
        const Point3 c = detections.at(entry.detection_id).centroid;
        if (norm(c - origin) <= config.candidate_gate_um) out.push_back(&t);
    }
    return out;
}

double parent_cost(const Track& candidate, const Track& newborn, const DetectionIndex& detections,
                   const TrackingConfig& tracking, const VoxelSpacing& spacing) {
    const int birth = newborn.birth_frame();
    const int idx = last_index_before(candidate, birth);
    if (idx < 0) throw ParameterError("parent candidate has no detection before the birth frame");
    std::vector<const Detection*> tail;
    for (int n = std::max(0, idx - 1); n <= idx; ++n) {
        tail.push_back(&detections.at(candidate.detections[static_cast<std::size_t>(n)].detection_id));
    }
    std::vector<const Detection*> head;
    for (const auto& e : newborn.detections) {
        if (e.frame != birth + static_cast<int>(head.size())) break;
        if (head.size() == static_cast<std::size_t>(tracking.window)) break;
        head.push_back(&detections.at(e.detection_id));
    }
    return path_cost(tail, head, tracking, spacing);
}

std::optional<TrackId> assign_parent(const Track& newborn, const std::vector<const Track*>& candidates,
                                     const DetectionIndex& detections,
                                     const TrackingConfig& tracking, const VoxelSpacing& spacing) {
    std::optional<TrackId> best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (const Track* c : candidates) {
        const double cost = parent_cost(*c, newborn, detections, tracking, spacing);
        if (!best || cost < best_cost || (cost == best_cost && c->id < *best)) {
            best = c->id;
            best_cost = cost;
        }
    }
    return best;
}

LineageForest build_lineages(const std::vector<Track>& tracks, const DetectionIndex& detections,
                             const TrackingConfig& tracking, const LineageConfig& config,
                             const VoxelSpacing& spacing) {
    tracking.validate();
    config.validate();
    LineageForest forest;
    for (const auto& t : tracks) {
        std::optional<TrackId> p;
        if (t.birth_frame() > 0) {
            p = assign_parent(t, parent_candidates(t, tracks, detections, tracking, config), detections,
                              tracking, spacing);
        }
        forest.parent[t.id] = p;
    }
    // Parents are born strictly earlier, so the parent chain always terminates.
    for (const auto& [id, p] : forest.parent) {
        TrackId root = id;
        while (const auto& up = forest.parent.at(root)) root = *up;
        forest.tree_of[id] = root;
    }
    std::map<TrackId, std::size_t> sizes;
    for (const auto& [id, root] : forest.tree_of) ++sizes[root];
    std::size_t best = 0;
    for (const auto& [root, n] : sizes) {
        if (n > best) {
            best = n;
            forest.presented_tree = root;
        }
    }
    return forest;
}

VesselDistanceSeries vessel_distance_series(const Track& track, const DetectionIndex& detections,
                                            const std::map<int, const DistanceMap*>& maps,
                                            const LineageConfig& config) {
    VesselDistanceSeries series;
    series.track_id = track.id;
    for (const auto& e : track.detections) {
        auto it = maps.find(e.frame);
        if (it == maps.end()) continue;
        const DistanceMap& map = *it->second;
        if (map.empty) {
            throw ParameterError("vessel map at frame " + std::to_string(e.frame) + " has no foreground");
        }
        const Detection& d = detections.at(e.detection_id);
        double value = 0.0;
        if (config.vessel_min_over_voxels) {
            value = std::numeric_limits<double>::infinity();
            for (const auto& v : d.voxels) value = std::min(value, map.values.clamped(v.i, v.j, v.k));
        } else {
            const auto dims = map.values.dims();
            const auto& s = map.values.spacing();
            value = map.values(nearest_index(d.centroid.x, s.dx, dims.nx),
                               nearest_index(d.centroid.y, s.dy, dims.ny),
                               nearest_index(d.centroid.z, s.dz, dims.nz));
        }
        series.samples.push_back({e.frame, value});
    }
    return series;
}

CleavagePlane cleavage_plane(const Point3& centroid_a, const Point3& centroid_b) {
    const Point3 diff = centroid_b - centroid_a;
    const double len = norm(diff);
    if (!(len > 0.0)) throw ParameterError("daughter centroids coincide");
    CleavagePlane plane;
    plane.anchor = 0.5 * (centroid_a + centroid_b);
    plane.normal = (1.0 / len) * diff;
    return plane;
}

CleavagePlane cleavage_plane(const Track& parent, const Track& daughter_a, const Track& daughter_b,
                             const DetectionIndex& detections) {
    const int frame = daughter_a.birth_frame();
    if (daughter_b.birth_frame() != frame) throw ParameterError("daughters have different birth frames");
    CleavagePlane plane = cleavage_plane(detections.at(daughter_a.detections.front().detection_id).centroid,
                                         detections.at(daughter_b.detections.front().detection_id).centroid);
    plane.parent = parent.id;
    plane.daughter_a = daughter_a.id;
    plane.daughter_b = daughter_b.id;
    plane.frame = frame;
    return plane;
}

std::vector<CleavagePlane> division_planes(const LineageForest& forest, const std::vector<Track>& tracks,
                                           const DetectionIndex& detections) {
    std::map<TrackId, const Track*> by_id;
    for (const auto& t : tracks) by_id[t.id] = &t;
    std::vector<CleavagePlane> planes;
    for (const auto& [pid, ptrack] : by_id) {
        std::map<int, std::vector<const Track*>> by_birth;
        for (TrackId c : forest.children(pid)) by_birth[by_id.at(c)->birth_frame()].push_back(by_id.at(c));
        for (const auto& [frame, kids] : by_birth) {
            if (kids.size() >= 2) {
                const Point3 a = detections.at(kids[0]->detections.front().detection_id).centroid;
                const Point3 b = detections.at(kids[1]->detections.front().detection_id).centroid;
                if (a == b) continue;
                planes.push_back(cleavage_plane(*ptrack, *kids[0], *kids[1], detections));
                continue;
            }
            const DetectionId cont = ptrack->at_frame(frame);
            if (cont < 0) continue;
            const Point3 a = detections.at(cont).centroid;
            const Point3 b = detections.at(kids[0]->detections.front().detection_id).centroid;
            if (a == b) continue;
            CleavagePlane plane = cleavage_plane(a, b);
            plane.parent = pid;
            plane.daughter_a = pid;
            plane.daughter_b = kids[0]->id;
            plane.frame = frame;
            planes.push_back(plane);
        }
    }
    return planes;
}

}  // namespace celltrace
