#pragma once

#include <cstddef>
#include <functional>

#include "celltrace/volume.hpp"

namespace celltrace {

/// Cell-channel background/shot-noise model parameters.
struct CellDenoiseParams {
    double gaussian_sigma_um = 10.0;
    int median_radius = 1;

    void validate() const;
    bool operator==(const CellDenoiseParams&) const = default;
};

/// Separable Gaussian low-pass with physical sigma, replicate-edge boundaries.
/// Axes with a single voxel are left untouched. Throws ParameterError when the
/// sigma (in voxels) exceeds the extent of any non-singleton axis.
RealVolume gaussian_lowpass(const RealVolume& volume, double sigma_um);

/// Cubic-window median of side 2r+1, replicate-edge boundaries.
RealVolume median_filter(const RealVolume& volume, int radius);

/// Background-subtracted, median-filtered signal: median(grid - lowpass(grid)) with
/// negative residuals clamped to zero, rounded to the 16-bit intensity domain.
VoxelGrid denoise_cell_channel(const VoxelGrid& grid, const CellDenoiseParams& params);

/// Noise estimate from the 6-connected Laplacian response over interior voxels,
/// normalized by sqrt(42).
double estimate_noise_variance(const RealVolume& volume);
double estimate_noise_variance(const VoxelGrid& grid);

/// Smallest positive gap between distinct values; 0 for a constant volume.
double minimum_value_step(const RealVolume& volume);

/// One synchronous sign-diffusion step with replicate-edge neighbors.
RealVolume mrf_step(const RealVolume& current, double delta);

struct MrfOptions {
    int max_iterations = 1000;
    /// Called with (previous iterate, candidate iterate) for every step computed,
    /// including the final candidate rejected by the stopping bound.
    std::function<void(const RealVolume&, const RealVolume&)> observer;
};

struct MrfResult {
    RealVolume image;
    double sigma_hat = 0.0;
    double delta = 0.0;
    /// Number of accepted iterations; `image` is the iterate with this index.
    int iterations = 0;
    /// False when the iteration cap was reached before the stopping bound fired.
    bool converged = true;
    /// Euclidean distance between `image` and the input.
    double distance_to_original = 0.0;
};

/// Iterates the sign-diffusion update from `original` and keeps the last iterate
/// whose Euclidean distance to the original stays within the Laplacian noise estimate.
MrfResult mrf_iterate(const RealVolume& original, const MrfOptions& options = {});

/// Vessel-channel denoise: mrf_iterate on the grid, clamped back into 16-bit range.
VoxelGrid mrf_denoise(const VoxelGrid& grid, const MrfOptions& options = {});

}  // namespace celltrace
