#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "celltrace/error.hpp"

namespace celltrace {

/// Micrometers per voxel along x, y and z.
struct VoxelSpacing {
    double dx = 1.0;
    double dy = 1.0;
    double dz = 1.0;

    void validate() const;
    double voxel_volume() const { return dx * dy * dz; }
    double operator[](int axis) const { return axis == 0 ? dx : (axis == 1 ? dy : dz); }
    bool operator==(const VoxelSpacing&) const = default;
};

struct Dims {
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::size_t nz = 0;

    std::size_t count() const { return nx * ny * nz; }
    std::size_t operator[](int axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
    bool operator==(const Dims&) const = default;
};

/// Integer voxel index. Signed so that offsets and neighbors can go negative.
struct Index3 {
    std::int64_t i = 0;
    std::int64_t j = 0;
    std::int64_t k = 0;

    auto operator<=>(const Index3&) const = default;
};

/// Physical point in micrometers.
struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool operator==(const Point3&) const = default;
};

inline Point3 operator+(Point3 a, Point3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3 operator-(Point3 a, Point3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point3 operator*(double s, Point3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(Point3 a, Point3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Point3 a) { return std::sqrt(dot(a, a)); }

/// Voxel-center coordinates. Voxel (0,0,0) is centered at the origin.
inline Point3 physical(const Index3& v, const VoxelSpacing& s) {
    return {static_cast<double>(v.i) * s.dx, static_cast<double>(v.j) * s.dy,
            static_cast<double>(v.k) * s.dz};
}

/// Dense 3-D array, x fastest.
template <class T>
class Volume {
public:
    using value_type = T;

    Volume() = default;
    Volume(Dims dims, VoxelSpacing spacing, T fill = T{})
        : dims_(dims), spacing_(spacing), data_(dims.count(), fill) {}
    Volume(Dims dims, VoxelSpacing spacing, std::vector<T> values)
        : dims_(dims), spacing_(spacing), data_(std::move(values)) {
        if (data_.size() != dims_.count()) {
            throw ParameterError("volume value count does not match dimensions");
        }
    }

    const Dims& dims() const { return dims_; }
    const VoxelSpacing& spacing() const { return spacing_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::size_t linear(std::size_t i, std::size_t j, std::size_t k) const {
        return i + dims_.nx * (j + dims_.ny * k);
    }
    bool contains(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return i >= 0 && j >= 0 && k >= 0 && static_cast<std::size_t>(i) < dims_.nx &&
               static_cast<std::size_t>(j) < dims_.ny && static_cast<std::size_t>(k) < dims_.nz;
    }
    Index3 index_of(std::size_t linear_index) const {
        const auto i = linear_index % dims_.nx;
        const auto rest = linear_index / dims_.nx;
        return {static_cast<std::int64_t>(i), static_cast<std::int64_t>(rest % dims_.ny),
                static_cast<std::int64_t>(rest / dims_.ny)};
    }

    T& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[linear(i, j, k)]; }
    const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[linear(i, j, k)];
    }
    T& operator[](std::size_t n) { return data_[n]; }
    const T& operator[](std::size_t n) const { return data_[n]; }

    /// Replicate-edge access: indices outside the grid are clamped to the border.
    const T& clamped(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return data_[linear(clamp_axis(i, dims_.nx), clamp_axis(j, dims_.ny),
                            clamp_axis(k, dims_.nz))];
    }

    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }
    std::vector<T>& storage() { return data_; }
    const std::vector<T>& storage() const { return data_; }

    bool operator==(const Volume&) const = default;

private:
    static std::size_t clamp_axis(std::int64_t v, std::size_t n) {
        if (v < 0) return 0;
        if (static_cast<std::size_t>(v) >= n) return n - 1;
        return static_cast<std::size_t>(v);
    }

    Dims dims_;
    VoxelSpacing spacing_;
    std::vector<T> data_;
};

/// One channel of one time point, as loaded (8- or 16-bit samples widened to 16 bits).
using VoxelGrid = Volume<std::uint16_t>;
using RealVolume = Volume<double>;
using Mask = Volume<std::uint8_t>;

/// Round-half-up conversion to the 16-bit storage domain with saturation.
std::uint16_t to_intensity(double v);

RealVolume to_real(const VoxelGrid& grid);
VoxelGrid to_grid(const RealVolume& volume);

std::uint16_t max_value(const VoxelGrid& grid);

}  // namespace celltrace
