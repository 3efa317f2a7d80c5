#include <algorithm>

#include "celltrace/denoise.hpp"

namespace celltrace {

VoxelGrid denoise_cell_channel(const VoxelGrid& grid, const CellDenoiseParams& params) {
    params.validate();
    if (grid.empty()) throw ParameterError("cannot denoise an empty grid");
    const RealVolume observed = to_real(grid);
    const RealVolume background = gaussian_lowpass(observed, params.gaussian_sigma_um);

    RealVolume residual(observed.dims(), observed.spacing());
    for (std::size_t n = 0; n < residual.size(); ++n) {
        residual[n] = std::max(0.0, observed[n] - background[n]);
    }
    return to_grid(median_filter(residual, params.median_radius));
}

}  // namespace celltrace
