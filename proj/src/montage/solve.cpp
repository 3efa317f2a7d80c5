#include <algorithm>
#include <numeric>
#include <queue>
#include <set>
#include <string>

#include "celltrace/montage.hpp"

namespace celltrace {
namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent_[std::max(a, b)] = std::min(a, b);
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<std::size_t> max_spanning_tree(const std::vector<OverlapEdge>& edges) {
    std::vector<int> ids;
    for (const auto& e : edges) {
        ids.push_back(e.tile_a);
        ids.push_back(e.tile_b);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    auto slot = [&](int id) {
        return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };

    std::vector<std::size_t> order(edges.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        const auto& a = edges[x];
        const auto& b = edges[y];
        if (a.score != b.score) return a.score > b.score;
        const auto ka = std::minmax(a.tile_a, a.tile_b);
        const auto kb = std::minmax(b.tile_a, b.tile_b);
        if (ka != kb) return ka < kb;
        return x < y;
    });

    DisjointSets sets(ids.size());
    std::vector<std::size_t> kept;
    for (std::size_t idx : order) {
        if (sets.unite(slot(edges[idx].tile_a), slot(edges[idx].tile_b))) kept.push_back(idx);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

MontageSolution solve_from_edges(const std::map<int, Index3>& stage_positions,
                                 const std::vector<OverlapEdge>& edges) {
    if (stage_positions.empty()) throw ParameterError("montage needs at least one tile");
    for (const auto& e : edges) {
        if (!stage_positions.count(e.tile_a) || !stage_positions.count(e.tile_b)) {
            throw ParameterError("overlap edge references an unknown tile");
        }
    }

    MontageSolution solution;
    for (std::size_t idx : max_spanning_tree(edges)) solution.tree_edges.push_back(edges[idx]);

    // Root: largest total stage-predicted overlap, lowest id on ties.
    std::map<int, std::int64_t> overlap_total;
    for (const auto& [id, pos] : stage_positions) overlap_total[id] = 0;
    for (const auto& e : edges) {
        overlap_total[e.tile_a] += e.stage_overlap_voxels;
        overlap_total[e.tile_b] += e.stage_overlap_voxels;
    }
    solution.root = stage_positions.begin()->first;
    for (const auto& [id, total] : overlap_total) {
        if (total > overlap_total[solution.root]) solution.root = id;
    }

    std::map<int, std::vector<const OverlapEdge*>> adjacency;
    for (const auto& e : solution.tree_edges) {
        adjacency[e.tile_a].push_back(&e);
        adjacency[e.tile_b].push_back(&e);
    }
    solution.final_positions[solution.root] = stage_positions.at(solution.root);
    std::queue<int> pending;
    pending.push(solution.root);
    while (!pending.empty()) {
        const int current = pending.front();
        pending.pop();
        const Index3 here = solution.final_positions.at(current);
        for (const OverlapEdge* e : adjacency[current]) {
            const bool forward = e->tile_a == current;
            const int next = forward ? e->tile_b : e->tile_a;
            if (solution.final_positions.count(next)) continue;
            const Index3 stage_delta = stage_positions.at(next) - stage_positions.at(current);
            solution.final_positions[next] =
                here + stage_delta + (forward ? e->best_offset : -e->best_offset);
            pending.push(next);
        }
    }

    if (solution.final_positions.size() != stage_positions.size()) {
        std::string missing;
        for (const auto& [id, pos] : stage_positions) {
            if (!solution.final_positions.count(id)) {
                missing += (missing.empty() ? "" : ", ") + std::to_string(id);
            }
        }
        throw ParameterError("overlap graph is disconnected; tiles not reachable from root " +
                             std::to_string(solution.root) + ": " + missing);
    }
    return solution;
}

MontageSolution solve_montage(const std::vector<Tile>& tiles, int channel, int window) {
    if (tiles.empty()) throw ParameterError("montage needs at least one tile");
    std::map<int, Index3> stage;
    for (const auto& t : tiles) {
        if (!stage.emplace(t.id, t.stage_position).second) {
            throw ParameterError("duplicate tile id " + std::to_string(t.id));
        }
    }
    return solve_from_edges(stage, register_all(tiles, channel, window));
}

}  // namespace celltrace
