#include <algorithm>
#include <cmath>
#include <limits>

#include "celltrace/error.hpp"
#include "celltrace/track.hpp"
#include "geometry.hpp"

namespace celltrace {
namespace detail {

bool share_voxel(std::span<const Index3> a, std::span<const Index3> b) {
    // Both are in scan order.
    auto x = a.begin();
    auto y = b.begin();
    while (x != a.end() && y != b.end()) {
        if (scan_less(*x, *y)) {
            ++x;
        } else if (scan_less(*y, *x)) {
            ++y;
        } else {
            return true;
        }
    }
    return false;
}

double squared_voxel_distance(const Index3& a, const Index3& b, const VoxelSpacing& s) {
    const double dx = static_cast<double>(a.i - b.i) * s.dx;
    const double dy = static_cast<double>(a.j - b.j) * s.dy;
    const double dz = static_cast<double>(a.k - b.k) * s.dz;
    return dx * dx + dy * dy + dz * dz;
}

double min_surface_distance(std::span<const Index3> a, std::span<const Index3> b,
                            const VoxelSpacing& s) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : a) {
        for (const auto& q : b) best = std::min(best, squared_voxel_distance(p, q, s));
    }
    return std::sqrt(best);
}

}  // namespace detail

double d_cc(const Detection& alpha, const Detection& beta, const VoxelSpacing& spacing) {
    if (alpha.voxels.empty() || beta.voxels.empty()) {
        throw ParameterError("connected-component distance of an empty detection");
    }
    if (detail::share_voxel(alpha.voxels, beta.voxels)) return 0.0;
    // For disjoint sets the closest pair always lies on both surfaces.
    return detail::min_surface_distance(surface_voxels(alpha.voxels), surface_voxels(beta.voxels), spacing);
}

double d_size(const Detection& alpha, const Detection& beta) {
    const auto a = alpha.voxel_count();
    const auto b = beta.voxel_count();
    if (a == 0 || b == 0) throw ParameterError("size distance of an empty detection");
    const double hi = static_cast<double>(std::max(a, b));
    const double lo = static_cast<double>(std::min(a, b));
    return (hi - lo) / hi;
}

double path_cost(std::span<const Detection* const> tail,
                 std::span<const Detection* const> extension, const TrackingConfig& config,
                 const VoxelSpacing& spacing) {
    config.validate();
    if (tail.empty()) throw ParameterError("path cost needs at least one track detection");
    if (extension.empty() || extension.size() > static_cast<std::size_t>(config.window)) {
        throw ParameterError("extension length must lie in [1, W]");
    }
    // Chain rho_{-1}, rho_0, rho_1 .. rho_|rho|; a missing rho_{-1} drops that term.
    std::vector<const Detection*> chain;
    const bool has_history = tail.size() >= 2;
    if (has_history) chain.push_back(tail[tail.size() - 2]);
    chain.push_back(tail.back());
    chain.insert(chain.end(), extension.begin(), extension.end());

    double sum = 0.0;
    const std::size_t first_weight = has_history ? 0 : 1;
    for (std::size_t n = 0; n + 1 < chain.size(); ++n) {
        const double term = d_cc(*chain[n], *chain[n + 1], spacing) + d_size(*chain[n], *chain[n + 1]);
        sum += config.weights[first_weight + n] * term;
    }
    const double multiplier = static_cast<double>(config.window - static_cast<int>(extension.size()) + 1);
    return multiplier * sum;
}

}  // namespace celltrace
