#include <algorithm>
#include <cmath>
#include <set>

#include "celltrace/denoise.hpp"

namespace celltrace {
namespace {

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

double euclidean_distance(const RealVolume& a, const RealVolume& b) {
    double acc = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
        const double diff = a[n] - b[n];
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

}  // namespace

double estimate_noise_variance(const RealVolume& volume) {
    const auto& d = volume.dims();
    if (d.nx < 3 || d.ny < 3 || d.nz < 3) {
        throw ParameterError("grid too small for an interior voxel");
    }
    const std::size_t interior = (d.nx - 2) * (d.ny - 2) * (d.nz - 2);
    if (interior < 2) throw ParameterError("noise estimate needs at least two interior voxels");

    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t k = 1; k + 1 < d.nz; ++k) {
        for (std::size_t j = 1; j + 1 < d.ny; ++j) {
            for (std::size_t i = 1; i + 1 < d.nx; ++i) {
                const double r = volume(i - 1, j, k) + volume(i + 1, j, k) + volume(i, j - 1, k) +
                                 volume(i, j + 1, k) + volume(i, j, k - 1) + volume(i, j, k + 1) -
                                 6.0 * volume(i, j, k);
                sum += r;
                sum_sq += r * r;
            }
        }
    }
    const double n = static_cast<double>(interior);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return std::sqrt(var) / std::sqrt(42.0);
}

double estimate_noise_variance(const VoxelGrid& grid) { return estimate_noise_variance(to_real(grid)); }

double minimum_value_step(const RealVolume& volume) {
    std::vector<double> values(volume.values().begin(), volume.values().end());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    if (values.size() < 2) return 0.0;
    double best = values[1] - values[0];
    for (std::size_t n = 2; n < values.size(); ++n) best = std::min(best, values[n] - values[n - 1]);
    return best;
}

RealVolume mrf_step(const RealVolume& current, double delta) {
    const auto& d = current.dims();
    RealVolume next(d, current.spacing());
    for (std::size_t k = 0; k < d.nz; ++k) {
        for (std::size_t j = 0; j < d.ny; ++j) {
            for (std::size_t i = 0; i < d.nx; ++i) {
                const auto si = static_cast<std::int64_t>(i);
                const auto sj = static_cast<std::int64_t>(j);
                const auto sk = static_cast<std::int64_t>(k);
                const double v = current(i, j, k);
                const int bracket = sgn(current.clamped(si - 1, sj, sk) - v) +
                                    sgn(v - current.clamped(si + 1, sj, sk)) +
                                    sgn(current.clamped(si, sj - 1, sk) - v) +
                                    sgn(v - current.clamped(si, sj + 1, sk)) +
                                    sgn(current.clamped(si, sj, sk - 1) - v) +
                                    sgn(v - current.clamped(si, sj, sk + 1));
                next(i, j, k) = v + delta * sgn(static_cast<double>(bracket));
            }
        }
    }
    return next;
}

MrfResult mrf_iterate(const RealVolume& original, const MrfOptions& options) {
    if (original.empty()) throw ParameterError("cannot denoise an empty grid");
    MrfResult result;
    result.image = original;
    result.delta = minimum_value_step(original);
    if (result.delta == 0.0) return result;  // constant input: nothing to diffuse
    const auto& d = original.dims();
    const bool has_interior = d.nx >= 3 && d.ny >= 3 && d.nz >= 3 &&
                              (d.nx - 2) * (d.ny - 2) * (d.nz - 2) >= 2;
    // Without interior voxels the estimate is taken as zero, so no step is accepted.
    result.sigma_hat = has_interior ? estimate_noise_variance(original) : 0.0;

    result.converged = false;
    for (int n = 0; n < options.max_iterations; ++n) {
        RealVolume candidate = mrf_step(result.image, result.delta);
        if (options.observer) options.observer(result.image, candidate);
        const double distance = euclidean_distance(candidate, original);
        if (distance > result.sigma_hat) {
            result.converged = true;
            break;
        }
        if (candidate == result.image) {
            result.converged = true;
            break;
        }
        result.image = std::move(candidate);
        result.iterations = n + 1;
        result.distance_to_original = distance;
    }
    return result;
}

VoxelGrid mrf_denoise(const VoxelGrid& grid, const MrfOptions& options) {
    return to_grid(mrf_iterate(to_real(grid), options).image);
}

}  // namespace celltrace
