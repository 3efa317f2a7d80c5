#include <algorithm>
#include <cmath>
#include <limits>

#include "celltrace/segment.hpp"

namespace celltrace {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas w*(p-q)^2 + f(q) over sites q with finite f.
void transform_line(std::vector<double>& f, double w, std::vector<std::size_t>& sites,
                    std::vector<double>& bounds, std::vector<double>& out) {
    const std::size_t n = f.size();
    std::ptrdiff_t k = -1;
    for (std::size_t q = 0; q < n; ++q) {
        if (f[q] == kInf) continue;
        const double fq = f[q] + w * static_cast<double>(q) * static_cast<double>(q);
        double s = -kInf;
        while (k >= 0) {
            const std::size_t v = sites[k];
            const double fv = f[v] + w * static_cast<double>(v) * static_cast<double>(v);
            s = (fq - fv) / (2.0 * w * static_cast<double>(q - v));
            if (s <= bounds[k]) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        sites[k] = q;
        bounds[k] = k == 0 ? -kInf : s;
        bounds[k + 1] = kInf;
    }
    if (k < 0) {
        std::fill(out.begin(), out.end(), kInf);
        return;
    }
    std::ptrdiff_t j = 0;
    for (std::size_t p = 0; p < n; ++p) {
        while (bounds[j + 1] < static_cast<double>(p)) ++j;
        const double delta = static_cast<double>(p) - static_cast<double>(sites[j]);
        out[p] = w * delta * delta + f[sites[j]];
    }
}

}  // namespace

RealVolume squared_distance_transform(const Mask& mask, const std::array<double, 3>& weights) {
    const auto& d = mask.dims();
    RealVolume dist(d, mask.spacing(), kInf);
    for (std::size_t n = 0; n < mask.size(); ++n) {
        if (mask[n]) dist[n] = 0.0;
    }
    for (int axis = 0; axis < 3; ++axis) {
        const std::size_t len = d[axis];
        const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? d.nx : d.nx * d.ny);
        std::vector<double> line(len), out(len), bounds(len + 1);
        std::vector<std::size_t> sites(len);
        for (std::size_t k = 0; k < (axis == 2 ? 1 : d.nz); ++k) {
            for (std::size_t j = 0; j < (axis == 1 ? 1 : d.ny); ++j) {
                for (std::size_t i = 0; i < (axis == 0 ? 1 : d.nx); ++i) {
                    const std::size_t base = dist.linear(i, j, k);
                    for (std::size_t p = 0; p < len; ++p) line[p] = dist[base + p * stride];
                    transform_line(line, weights[axis], sites, bounds, out);
                    for (std::size_t p = 0; p < len; ++p) dist[base + p * stride] = out[p];
                }
            }
        }
    }
    return dist;
}

DistanceMap distance_map(const Mask& vessel_mask) {
    if (vessel_mask.empty()) throw ParameterError("distance map needs a non-empty volume");
    const auto& s = vessel_mask.spacing();
    DistanceMap map;
    map.values = squared_distance_transform(vessel_mask, {s.dx * s.dx, s.dy * s.dy, s.dz * s.dz});
    map.empty = true;
    for (double& v : map.values.storage()) {
        if (v != kInf) {
            map.empty = false;
            v = std::sqrt(v);
        }
    }
    return map;
}

}  // namespace celltrace
