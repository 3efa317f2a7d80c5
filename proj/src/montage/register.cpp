#include <algorithm>
#include <string>

#include "celltrace/montage.hpp"
#include "normcov_sums.hpp"

namespace celltrace {
namespace {

// Summed-volume table with a zero border: entry (i,j,k) holds the sum over [0,i)x[0,j)x[0,k).
class IntegralVolume {
public:
    IntegralVolume(const VoxelGrid& grid, bool squared)
        : nx_(grid.dims().nx + 1), ny_(grid.dims().ny + 1), nz_(grid.dims().nz + 1),
          table_(nx_ * ny_ * nz_, 0) {
        const auto& d = grid.dims();
        for (std::size_t k = 0; k < d.nz; ++k) {
            for (std::size_t j = 0; j < d.ny; ++j) {
                for (std::size_t i = 0; i < d.nx; ++i) {
                    std::uint64_t v = grid(i, j, k);
                    if (squared) v *= v;
                    at(i + 1, j + 1, k + 1) = v + at(i, j + 1, k + 1) + at(i + 1, j, k + 1) +
                                              at(i + 1, j + 1, k) - at(i, j, k + 1) -
                                              at(i, j + 1, k) - at(i + 1, j, k) + at(i, j, k);
                }
            }
        }
    }

    /// Sum over the local box [lo, hi).
    std::uint64_t sum(const Index3& lo, const Index3& hi) const {
        const auto i0 = static_cast<std::size_t>(lo.i), i1 = static_cast<std::size_t>(hi.i);
        const auto j0 = static_cast<std::size_t>(lo.j), j1 = static_cast<std::size_t>(hi.j);
        const auto k0 = static_cast<std::size_t>(lo.k), k1 = static_cast<std::size_t>(hi.k);
        return at(i1, j1, k1) - at(i0, j1, k1) - at(i1, j0, k1) - at(i1, j1, k0) +
               at(i0, j0, k1) + at(i0, j1, k0) + at(i1, j0, k0) - at(i0, j0, k0);
    }

private:
    std::uint64_t& at(std::size_t i, std::size_t j, std::size_t k) {
        return table_[i + nx_ * (j + ny_ * k)];
    }
    const std::uint64_t& at(std::size_t i, std::size_t j, std::size_t k) const {
        return table_[i + nx_ * (j + ny_ * k)];
    }

    std::size_t nx_, ny_, nz_;
    std::vector<std::uint64_t> table_;
};

std::uint64_t cross_sum(const VoxelGrid& a, const Index3& a_lo, const VoxelGrid& b,
                        const Index3& b_lo, const Index3& extent) {
    std::uint64_t total = 0;
    const auto width = static_cast<std::size_t>(extent.i);
    for (std::int64_t k = 0; k < extent.k; ++k) {
        for (std::int64_t j = 0; j < extent.j; ++j) {
            const std::uint16_t* pa =
                &a(static_cast<std::size_t>(a_lo.i), static_cast<std::size_t>(a_lo.j + j),
                   static_cast<std::size_t>(a_lo.k + k));
            const std::uint16_t* pb =
                &b(static_cast<std::size_t>(b_lo.i), static_cast<std::size_t>(b_lo.j + j),
                   static_cast<std::size_t>(b_lo.k + k));
            std::uint64_t row = 0;
            for (std::size_t i = 0; i < width; ++i) {
                row += static_cast<std::uint32_t>(pa[i]) * static_cast<std::uint32_t>(pb[i]);
            }
            total += row;
        }
    }
    return total;
}

bool better(double score, const Index3& offset, double best_score, const Index3& best_offset) {
    if (score != best_score) return score > best_score;
    const auto mag = offset.i * offset.i + offset.j * offset.j + offset.k * offset.k;
    const auto best_mag = best_offset.i * best_offset.i + best_offset.j * best_offset.j +
                          best_offset.k * best_offset.k;
    if (mag != best_mag) return mag < best_mag;
    return offset < best_offset;
}

}  // namespace

Box intersect(const Box& a, const Box& b) {
    return {{std::max(a.lo.i, b.lo.i), std::max(a.lo.j, b.lo.j), std::max(a.lo.k, b.lo.k)},
            {std::min(a.hi.i, b.hi.i), std::min(a.hi.j, b.hi.j), std::min(a.hi.k, b.hi.k)}};
}

const Dims& Tile::dims() const {
    if (grids.empty()) throw ParameterError("tile " + std::to_string(id) + " has no channels");
    return grids.begin()->second.dims();
}

Box Tile::stage_box() const {
    const auto& d = dims();
    return {stage_position,
            stage_position + Index3{static_cast<std::int64_t>(d.nx),
                                    static_cast<std::int64_t>(d.ny),
                                    static_cast<std::int64_t>(d.nz)}};
}

OverlapEdge register_pair(const Tile& a, const Tile& b, int channel, int window) {
    if (window < 0) throw ParameterError("search window must be non-negative");
    const auto ga_it = a.grids.find(channel);
    const auto gb_it = b.grids.find(channel);
    if (ga_it == a.grids.end() || gb_it == b.grids.end()) {
        throw NotFoundError("registration channel " + std::to_string(channel) +
                            " missing from a tile");
    }
    const VoxelGrid& ga = ga_it->second;
    const VoxelGrid& gb = gb_it->second;

    const Box box_a = a.stage_box();
    const Box stage_overlap = intersect(box_a, b.stage_box());
    if (stage_overlap.empty()) {
        throw ParameterError("tiles " + std::to_string(a.id) + " and " + std::to_string(b.id) +
                             " do not overlap at their stage positions");
    }

    const IntegralVolume sum_a(ga, false), sq_a(ga, true), sum_b(gb, false), sq_b(gb, true);

    OverlapEdge edge;
    edge.tile_a = a.id;
    edge.tile_b = b.id;
    edge.stage_overlap_voxels = stage_overlap.volume();
    bool found = false;
    for (int dz = -window; dz <= window; ++dz) {
        for (int dy = -window; dy <= window; ++dy) {
            for (int dx = -window; dx <= window; ++dx) {
                const Index3 offset{dx, dy, dz};
                Box box_b = b.stage_box();
                box_b.lo = box_b.lo + offset;
                box_b.hi = box_b.hi + offset;
                const Box ov = intersect(box_a, box_b);
                if (ov.volume() < 2) continue;

                const Index3 a_lo = ov.lo - a.stage_position;
                const Index3 a_hi = ov.hi - a.stage_position;
                const Index3 b_lo = ov.lo - box_b.lo;
                const Index3 b_hi = ov.hi - box_b.lo;
                ProductSums s;
                s.count = static_cast<std::uint64_t>(ov.volume());
                s.a = sum_a.sum(a_lo, a_hi);
                s.aa = sq_a.sum(a_lo, a_hi);
                s.b = sum_b.sum(b_lo, b_hi);
                s.bb = sq_b.sum(b_lo, b_hi);
                s.ab = cross_sum(ga, a_lo, gb, b_lo, ov.hi - ov.lo);
                const double score = normcov_from_sums(s);
                if (!found || better(score, offset, edge.score, edge.best_offset)) {
                    edge.score = score;
                    edge.best_offset = offset;
                    found = true;
                }
            }
        }
    }
    if (!found) {
        throw ParameterError("tiles " + std::to_string(a.id) + " and " + std::to_string(b.id) +
                             " have no overlap at any searched offset");
    }
    return edge;
}

std::vector<OverlapEdge> register_all(const std::vector<Tile>& tiles, int channel, int window) {
    std::vector<OverlapEdge> edges;
    for (std::size_t x = 0; x < tiles.size(); ++x) {
        for (std::size_t y = x + 1; y < tiles.size(); ++y) {
            const Tile* a = &tiles[x];
            const Tile* b = &tiles[y];
            if (b->id < a->id) std::swap(a, b);
            if (intersect(a->stage_box(), b->stage_box()).empty()) continue;
            edges.push_back(register_pair(*a, *b, channel, window));
        }
    }
    return edges;
}

}  // namespace celltrace
