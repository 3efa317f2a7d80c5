#include <algorithm>
#include <limits>

#include "celltrace/montage.hpp"

namespace celltrace {

Composite composite(const std::vector<Tile>& tiles, const MontageSolution& solution) {
    if (tiles.empty()) throw ParameterError("nothing to composite");
    constexpr auto lowest = std::numeric_limits<std::int64_t>::min();
    constexpr auto highest = std::numeric_limits<std::int64_t>::max();
    Index3 lo{highest, highest, highest};
    Index3 hi{lowest, lowest, lowest};
    for (const auto& t : tiles) {
        const auto it = solution.final_positions.find(t.id);
        if (it == solution.final_positions.end()) {
            throw ParameterError("solution has no position for tile " + std::to_string(t.id));
        }
        const Index3 p = it->second;
        const auto& d = t.dims();
        lo = {std::min(lo.i, p.i), std::min(lo.j, p.j), std::min(lo.k, p.k)};
        hi = {std::max(hi.i, p.i + static_cast<std::int64_t>(d.nx)),
              std::max(hi.j, p.j + static_cast<std::int64_t>(d.ny)),
              std::max(hi.k, p.k + static_cast<std::int64_t>(d.nz))};
    }

    Composite out;
    out.origin = lo;
    const Dims extent{static_cast<std::size_t>(hi.i - lo.i), static_cast<std::size_t>(hi.j - lo.j),
                      static_cast<std::size_t>(hi.k - lo.k)};
    for (const auto& t : tiles) {
        const Index3 p = solution.final_positions.at(t.id) - lo;
        for (const auto& [channel, grid] : t.grids) {
            auto [it, inserted] = out.channels.try_emplace(channel, extent, grid.spacing(), 0);
            VoxelGrid& target = it->second;
            const auto& d = grid.dims();
            for (std::size_t k = 0; k < d.nz; ++k) {
                for (std::size_t j = 0; j < d.ny; ++j) {
                    for (std::size_t i = 0; i < d.nx; ++i) {
                        auto& dst = target(static_cast<std::size_t>(p.i) + i,
                                           static_cast<std::size_t>(p.j) + j,
                                           static_cast<std::size_t>(p.k) + k);
                        dst = std::max(dst, grid(i, j, k));
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace celltrace
