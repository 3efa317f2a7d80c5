#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "celltrace/denoise.hpp"

namespace celltrace {
namespace {

std::vector<double> gaussian_kernel(double sigma_vox) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_vox)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int n = -radius; n <= radius; ++n) {
        const double w = std::exp(-0.5 * (n * n) / (sigma_vox * sigma_vox));
        kernel[n + radius] = w;
        sum += w;
    }
    for (double& w : kernel) w /= sum;
    return kernel;
}

// Convolves along one axis with replicate-edge boundaries.
RealVolume convolve_axis(const RealVolume& in, int axis, const std::vector<double>& kernel) {
    const auto& d = in.dims();
    const int radius = static_cast<int>(kernel.size() / 2);
    RealVolume out(d, in.spacing());
    const auto n_axis = static_cast<std::int64_t>(d[axis]);
    std::vector<double> line(d[axis]);
    const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? d.nx : d.nx * d.ny);

    // Iterate over every line parallel to `axis`.
    for (std::size_t k = 0; k < (axis == 2 ? 1 : d.nz); ++k) {
        for (std::size_t j = 0; j < (axis == 1 ? 1 : d.ny); ++j) {
            for (std::size_t i = 0; i < (axis == 0 ? 1 : d.nx); ++i) {
                const std::size_t base = in.linear(i, j, k);
                for (std::int64_t p = 0; p < n_axis; ++p) line[p] = in[base + p * stride];
                for (std::int64_t p = 0; p < n_axis; ++p) {
                    double acc = 0.0;
                    for (int q = -radius; q <= radius; ++q) {
                        const std::int64_t src = std::clamp<std::int64_t>(p + q, 0, n_axis - 1);
                        acc += kernel[q + radius] * line[src];
                    }
                    out[base + p * stride] = acc;
                }
            }
        }
    }
    return out;
}

}  // namespace

void CellDenoiseParams::validate() const {
    if (!std::isfinite(gaussian_sigma_um) || !(gaussian_sigma_um > 0.0)) {
        throw ParameterError("gaussian sigma must be positive");
    }
    if (median_radius < 1) throw ParameterError("median radius must be at least 1");
}

RealVolume gaussian_lowpass(const RealVolume& volume, double sigma_um) {
    if (volume.empty()) throw ParameterError("cannot filter an empty volume");
    if (!(sigma_um > 0.0)) throw ParameterError("gaussian sigma must be positive");
    RealVolume current = volume;
    for (int axis = 0; axis < 3; ++axis) {
        const std::size_t extent = volume.dims()[axis];
        if (extent == 1) continue;
        const double sigma_vox = sigma_um / volume.spacing()[axis];
        if (sigma_vox > static_cast<double>(extent)) {
            throw ParameterError("gaussian sigma of " + std::to_string(sigma_um) +
                                 " um spans more than the grid along axis " +
                                 std::to_string(axis));
        }
        current = convolve_axis(current, axis, gaussian_kernel(sigma_vox));
    }
    return current;
}

RealVolume median_filter(const RealVolume& volume, int radius) {
    if (radius < 1) throw ParameterError("median radius must be at least 1");
    const auto& d = volume.dims();
    RealVolume out(d, volume.spacing());
    const int side = 2 * radius + 1;
    std::vector<double> window(static_cast<std::size_t>(side) * side * side);
    for (std::size_t k = 0; k < d.nz; ++k) {
        for (std::size_t j = 0; j < d.ny; ++j) {
            for (std::size_t i = 0; i < d.nx; ++i) {
                std::size_t n = 0;
                for (int c = -radius; c <= radius; ++c) {
                    for (int b = -radius; b <= radius; ++b) {
                        for (int a = -radius; a <= radius; ++a) {
                            window[n++] = volume.clamped(static_cast<std::int64_t>(i) + a,
                                                         static_cast<std::int64_t>(j) + b,
                                                         static_cast<std::int64_t>(k) + c);
                        }
                    }
                }
                auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
                std::nth_element(window.begin(), mid, window.end());
                out(i, j, k) = *mid;
            }
        }
    }
    return out;
}

}  // namespace celltrace
