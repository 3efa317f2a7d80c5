#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>

#include "celltrace/segment.hpp"

namespace celltrace {

using boost::multiprecision::int512_t;

std::vector<std::uint64_t> intensity_histogram(const VoxelGrid& grid) {
    const std::size_t bins = max_value(grid) <= 255 ? 256 : 65536;
    std::vector<std::uint64_t> histogram(bins, 0);
    for (std::uint16_t v : grid.values()) ++histogram[v];
    return histogram;
}

int otsu_threshold(std::span<const std::uint64_t> histogram) {
    const auto occupied =
        std::count_if(histogram.begin(), histogram.end(), [](std::uint64_t c) { return c > 0; });
    if (occupied < 2) throw ParameterError("degenerate histogram: fewer than two occupied bins");

    // Between-class variance up to the positive factor 1/N^2:
    //   (s0*n1 - s1*n0)^2 / (n0*n1)
    // compared as cross-multiplied integers so that ties are exact.
    int512_t total_count = 0;
    int512_t total_sum = 0;
    for (std::size_t v = 0; v < histogram.size(); ++v) {
        total_count += histogram[v];
        total_sum += int512_t(histogram[v]) * v;
    }

    int best_t = 0;
    int512_t best_num = 0;
    int512_t best_den = 1;
    int512_t n0 = 0;
    int512_t s0 = 0;
    for (std::size_t t = 0; t + 1 < histogram.size(); ++t) {
        n0 += histogram[t];
        s0 += int512_t(histogram[t]) * t;
        const int512_t n1 = total_count - n0;
        if (n0 == 0 || n1 == 0) continue;
        const int512_t s1 = total_sum - s0;
        const int512_t diff = s0 * n1 - s1 * n0;
        const int512_t num = diff * diff;
        const int512_t den = n0 * n1;
        if (num * best_den > best_num * den) {
            best_num = num;
            best_den = den;
            best_t = static_cast<int>(t);
        }
    }
    return best_t;
}

Mask binarize(const VoxelGrid& grid, int threshold) {
    Mask mask(grid.dims(), grid.spacing(), 0);
    for (std::size_t n = 0; n < grid.size(); ++n) mask[n] = grid[n] > threshold ? 1 : 0;
    return mask;
}

}  // namespace celltrace
