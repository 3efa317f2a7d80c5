#include "celltrace/transfer.hpp"

#include <cmath>
#include <string>

#include "celltrace/error.hpp"

namespace celltrace {

void TransferFunction::validate() const {
    if (!std::isfinite(floor) || !std::isfinite(ceiling) || !(floor < ceiling)) {
        throw ParameterError("transfer function needs floor < ceiling");
    }
    if (!std::isfinite(gamma) || !(gamma > 0.0)) {
        throw ParameterError("transfer function gamma must be positive");
    }
    if (!(alpha_multiplier >= 0.0 && alpha_multiplier <= 2.0)) {
        throw ParameterError("alpha multiplier must lie in [0, 2]");
    }
}

std::uint8_t apply_transfer(double v, const TransferFunction& tf) {
    tf.validate();
    if (v <= tf.floor) return 0;
    if (v >= tf.ceiling) return 255;
    const double normalized = (v - tf.floor) / (tf.ceiling - tf.floor);
    const double mapped = 255.0 * std::pow(normalized, tf.gamma);
    const double rounded = std::floor(mapped + 0.5);
    return static_cast<std::uint8_t>(std::min(255.0, std::max(0.0, rounded)));
}

Image8 apply_transfer(const Image16& image, const TransferFunction& tf) {
    tf.validate();
    // Sample values are 16-bit, so a lookup table covers every input.
    std::vector<std::uint8_t> lut(65536);
    for (std::size_t v = 0; v < lut.size(); ++v) lut[v] = apply_transfer(static_cast<double>(v), tf);
    Image8 out{image.width, image.height, std::vector<std::uint8_t>(image.pixels.size())};
    for (std::size_t n = 0; n < image.pixels.size(); ++n) out.pixels[n] = lut[image.pixels[n]];
    return out;
}

}  // namespace celltrace
