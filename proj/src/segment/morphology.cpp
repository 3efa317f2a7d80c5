#include "celltrace/segment.hpp"

namespace celltrace {
namespace {

Mask within_ball(const Mask& seeds, int radius) {
    // Ball membership is decided on exact integer squared distances in index space.
    const RealVolume d2 = squared_distance_transform(seeds, {1.0, 1.0, 1.0});
    const double limit = static_cast<double>(radius) * radius;
    Mask out(seeds.dims(), seeds.spacing(), 0);
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = d2[n] <= limit ? 1 : 0;
    return out;
}

}  // namespace

Mask dilate(const Mask& mask, int radius) {
    if (radius < 0) throw ParameterError("structuring element radius must be non-negative");
    if (radius == 0) return mask;
    return within_ball(mask, radius);
}

Mask erode(const Mask& mask, int radius) {
    if (radius < 0) throw ParameterError("structuring element radius must be non-negative");
    if (radius == 0) return mask;
    Mask complement(mask.dims(), mask.spacing(), 0);
    for (std::size_t n = 0; n < mask.size(); ++n) complement[n] = mask[n] ? 0 : 1;
    Mask grown = within_ball(complement, radius);
    for (std::size_t n = 0; n < grown.size(); ++n) grown[n] = grown[n] ? 0 : 1;
    return grown;
}

Mask close(const Mask& mask, int radius) { return erode(dilate(mask, radius), radius); }

}  // namespace celltrace
