#include "mat_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace celltrace::testing {

double oracle_d_cc(const Detection& a, const Detection& b, const VoxelSpacing& s) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : a.voxels) {
        for (const auto& q : b.voxels) {
            const double x = static_cast<double>(p.i - q.i) * s.dx;
            const double y = static_cast<double>(p.j - q.j) * s.dy;
            const double z = static_cast<double>(p.k - q.k) * s.dz;
            best = std::min(best, std::sqrt(x * x + y * y + z * z));
        }
    }
    return best;
}

double oracle_d_size(const Detection& a, const Detection& b) {
    const double hi = static_cast<double>(std::max(a.voxel_count(), b.voxel_count()));
    const double lo = static_cast<double>(std::min(a.voxel_count(), b.voxel_count()));
    return (hi - lo) / hi;
}

double oracle_path_cost(const std::vector<const Detection*>& tail, const std::vector<const Detection*>& extension,
                        const TrackingConfig& config, const VoxelSpacing& s) {
    std::vector<const Detection*> chain(tail.begin(), tail.end());
    chain.insert(chain.end(), extension.begin(), extension.end());
    // Weight index of the first pair: 0 (i = -1) with two tail detections, else 1.
    const std::size_t first_weight = tail.size() == 2 ? 0 : 1;
    double sum = 0.0;
    for (std::size_t n = 0; n + 1 < chain.size(); ++n) {
        const double term = oracle_d_cc(*chain[n], *chain[n + 1], s) + oracle_d_size(*chain[n], *chain[n + 1]);
        sum += config.weights[first_weight + n] * term;
    }
    return static_cast<double>(config.window - static_cast<int>(extension.size()) + 1) * sum;
}

double oracle_extension_cost(const std::vector<const Detection*>& tail, const Detection& first,
                             const FrameDetections& frames, const TrackingConfig& config, const VoxelSpacing& s) {
    const int t_count = static_cast<int>(frames.size());
    const int max_len = std::min(config.window, t_count - first.frame);
    double best = std::numeric_limits<double>::infinity();
    std::vector<const Detection*> ext{&first};
    std::function<void()> walk = [&] {
        best = std::min(best, oracle_path_cost(tail, ext, config, s));
        if (static_cast<int>(ext.size()) == max_len) return;
        for (const auto& next : frames[static_cast<std::size_t>(first.frame) + ext.size()]) {
            ext.push_back(&next);
            walk();
            ext.pop_back();
        }
    };
    walk();
    return best;
}

OracleReport check_tracking(const FrameDetections& frames, const TrackingResult& result,
                            const TrackingConfig& config, const VoxelSpacing& s) {
    OracleReport report;
    std::map<DetectionId, const Detection*> by_id;
    for (const auto& frame : frames)
        for (const auto& d : frame) by_id[d.id] = &d;
    auto fail = [&](std::size_t& counter, const std::string& what) {
        ++counter;
        if (report.first_failure.empty()) report.first_failure = what;
    };

    // Each detection in at most one track, frames strictly increasing.
    std::set<DetectionId> claimed;
    for (const auto& track : result.tracks) {
        for (std::size_t n = 0; n < track.detections.size(); ++n) {
            if (!claimed.insert(track.detections[n].detection_id).second) fail(report.structure_errors, "detection in two tracks");
            if (n > 0 && track.detections[n].frame <= track.detections[n - 1].frame) fail(report.structure_errors, "frames not increasing");
        }
    }
    if (claimed.size() != by_id.size()) fail(report.structure_errors, "detection without track");

    const int patience = config.patience();
    for (int f = 1; f < static_cast<int>(frames.size()); ++f) {
        // Candidates: tracks whose latest detection before f lies within the patience horizon.
        std::map<TrackId, std::vector<const Detection*>> tails;
        for (const auto& track : result.tracks) {
            std::vector<const Detection*> before;
            for (const auto& e : track.detections)
                if (e.frame < f) before.push_back(by_id.at(e.detection_id));
            if (before.empty() || before.back()->frame < f - 1 - patience) continue;
            if (before.size() > 2) before.erase(before.begin(), before.end() - 2);
            tails[track.id] = before;
        }
        const auto& dets = frames[static_cast<std::size_t>(f)];
        const Transition* tr = result.cost_graph.find(f);
        const std::size_t expected = tails.size() * dets.size();
        const std::size_t actual = tr ? tr->edges.size() : 0;
        if (expected != actual) {
            std::ostringstream msg;
            msg << "frame " << f << ": " << actual << " edges, expected " << expected;
            fail(report.structure_errors, msg.str());
            continue;
        }
        if (!tr) continue;
        std::map<TrackId, double> row_min;
        std::map<DetectionId, double> col_min;
        for (const auto& e : tr->edges) {
            ++report.edges_checked;
            const auto it = tails.find(e.track_id);
            if (it == tails.end() || it->second.back()->id != e.from_detection) {
                fail(report.structure_errors, "edge from a non-candidate");
                continue;
            }
            const double expect = oracle_extension_cost(it->second, *by_id.at(e.to_detection), frames, config, s);
            if (expect != e.cost) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "frame " << f << " track " << e.track_id << " -> " << e.to_detection << ": " << e.cost
                    << " vs oracle " << expect;
                fail(report.cost_mismatches, msg.str());
            }
            auto r = row_min.try_emplace(e.track_id, e.cost).first;
            r->second = std::min(r->second, e.cost);
            auto c = col_min.try_emplace(e.to_detection, e.cost).first;
            c->second = std::min(c->second, e.cost);
        }
        std::set<TrackId> matched_rows;
        std::set<DetectionId> matched_cols;
        for (const auto& e : tr->edges) {
            if (!e.matching) continue;
            if (e.cost > row_min[e.track_id] || e.cost > col_min[e.to_detection])
                fail(report.structure_errors, "matching edge is not a mutual minimum");
            if (!matched_rows.insert(e.track_id).second || !matched_cols.insert(e.to_detection).second)
                fail(report.structure_errors, "two matching edges share an endpoint");
            const Track* t = result.find(e.track_id);
            if (!t || t->at_frame(f) != e.to_detection) fail(report.structure_errors, "matching edge not followed");
        }
        for (const auto& track : result.tracks) {
            const DetectionId d = track.at_frame(f);
            if (d < 0 || track.birth_frame() == f) continue;
            if (!matched_rows.contains(track.id)) fail(report.structure_errors, "extension without matching edge");
        }
    }
    return report;
}

}  // namespace celltrace::testing
