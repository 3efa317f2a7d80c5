#pragma once

#include <cstdint>

#include "celltrace/png_io.hpp"

namespace celltrace {

/// Display mapping: floor/ceiling clamp and a gamma curve in between.
struct TransferFunction {
    double floor = 0.0;
    double ceiling = 255.0;
    double gamma = 1.0;
    /// Per-channel alpha scale, [0, 2]. Display-side only.
    double alpha_multiplier = 1.0;

    void validate() const;
};

std::uint8_t apply_transfer(double v, const TransferFunction& tf);

Image8 apply_transfer(const Image16& image, const TransferFunction& tf);

}  // namespace celltrace
