#include <cmath>

#include "celltrace/montage.hpp"
#include "normcov_sums.hpp"

namespace celltrace {

double normcov_from_sums(const ProductSums& s) {
    using i128 = __int128;
    const i128 n = s.count;
    const i128 cov = n * static_cast<i128>(s.ab) - static_cast<i128>(s.a) * static_cast<i128>(s.b);
    const i128 var_a = n * static_cast<i128>(s.aa) - static_cast<i128>(s.a) * static_cast<i128>(s.a);
    const i128 var_b = n * static_cast<i128>(s.bb) - static_cast<i128>(s.b) * static_cast<i128>(s.b);
    if (var_a <= 0 || var_b <= 0) return 0.0;
    const long double denom = std::sqrt(static_cast<long double>(var_a)) *
                              std::sqrt(static_cast<long double>(var_b));
    const long double r = static_cast<long double>(cov) / denom;
    return static_cast<double>(std::fmax(-1.0L, std::fmin(1.0L, r)));
}

double normcov(const VoxelGrid& patch_a, const VoxelGrid& patch_b) {
    if (patch_a.dims() != patch_b.dims()) throw ParameterError("normcov patches differ in shape");
    if (patch_a.size() < 2) throw ParameterError("normcov needs at least two voxels");
    ProductSums s;
    s.count = patch_a.size();
    for (std::size_t n = 0; n < patch_a.size(); ++n) {
        const std::uint64_t a = patch_a[n];
        const std::uint64_t b = patch_b[n];
        s.a += a;
        s.b += b;
        s.aa += a * a;
        s.bb += b * b;
        s.ab += a * b;
    }
    return normcov_from_sums(s);
}

double normcov(const RealVolume& patch_a, const RealVolume& patch_b) {
    if (patch_a.dims() != patch_b.dims()) throw ParameterError("normcov patches differ in shape");
    if (patch_a.size() < 2) throw ParameterError("normcov needs at least two voxels");
    const double n = static_cast<double>(patch_a.size());
    double mean_a = 0.0;
    double mean_b = 0.0;
    for (std::size_t v = 0; v < patch_a.size(); ++v) {
        mean_a += patch_a[v];
        mean_b += patch_b[v];
    }
    mean_a /= n;
    mean_b /= n;
    double cov = 0.0;
    double var_a = 0.0;
    double var_b = 0.0;
    for (std::size_t v = 0; v < patch_a.size(); ++v) {
        const double da = patch_a[v] - mean_a;
        const double db = patch_b[v] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a <= 0.0 || var_b <= 0.0) return 0.0;
    return std::fmax(-1.0, std::fmin(1.0, cov / std::sqrt(var_a * var_b)));
}

}  // namespace celltrace
