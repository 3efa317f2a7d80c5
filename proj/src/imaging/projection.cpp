#include "celltrace/projection.hpp"

#include <algorithm>

namespace celltrace {

Axis parse_axis(const std::string& text) {
    if (text == "x") return Axis::x;
    if (text == "y") return Axis::y;
    if (text == "z") return Axis::z;
    throw ParameterError("axis must be x, y or z, got '" + text + "'");
}

Image16 max_intensity_projection(const VoxelGrid& grid, Axis axis) {
    if (grid.empty()) throw ParameterError("cannot project an empty grid");
    const auto& d = grid.dims();
    Image16 out;
    switch (axis) {
        case Axis::z: out.width = d.nx; out.height = d.ny; break;
        case Axis::y: out.width = d.nx; out.height = d.nz; break;
        case Axis::x: out.width = d.ny; out.height = d.nz; break;
    }
    out.pixels.assign(out.width * out.height, 0);
    for (std::size_t k = 0; k < d.nz; ++k) {
        for (std::size_t j = 0; j < d.ny; ++j) {
            for (std::size_t i = 0; i < d.nx; ++i) {
                const std::uint16_t v = grid(i, j, k);
                std::uint16_t* px = nullptr;
                switch (axis) {
                    case Axis::z: px = &out.at(i, j); break;
                    case Axis::y: px = &out.at(i, k); break;
                    case Axis::x: px = &out.at(j, k); break;
                }
                *px = std::max(*px, v);
            }
        }
    }
    return out;
}

}  // namespace celltrace
