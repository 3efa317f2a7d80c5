#include "celltrace/convex_hull.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>
#include <unordered_map>

namespace celltrace {
namespace {

struct Vec {
    std::int64_t x, y, z;
};

Vec operator-(const Vec& a, const Vec& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec cross(const Vec& a, const Vec& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
std::int64_t dot(const Vec& a, const Vec& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

// Positive when p lies on the side of triangle (a, b, c) its normal points to.
std::int64_t orient(const Vec& a, const Vec& b, const Vec& c, const Vec& p) {
    return dot(cross(b - a, c - a), p - a);
}

Point3 cross(const Point3& a, const Point3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

std::uint64_t edge_key(std::uint32_t u, std::uint32_t v) {
    return (static_cast<std::uint64_t>(u) << 32) | v;
}

using Facet = std::array<std::uint32_t, 3>;

// Keeps only referenced vertices, renumbered in input order.
ConvexHull finish(const std::vector<Vec>& pts, const std::vector<Facet>& facets,
                  std::vector<std::uint32_t> used, const VoxelSpacing& s, bool degenerate) {
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    std::unordered_map<std::uint32_t, std::uint32_t> remap;
    ConvexHull hull;
    hull.degenerate = degenerate;
    for (std::uint32_t idx : used) {
        remap[idx] = static_cast<std::uint32_t>(hull.vertices.size());
        const Vec& p = pts[idx];
        hull.vertices.push_back(physical(Index3{p.x, p.y, p.z}, s));
    }
    for (const Facet& f : facets) hull.facets.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
    return hull;
}

ConvexHull collinear_hull(const std::vector<Vec>& pts, const VoxelSpacing& s) {
    const Vec dir = pts[1] - pts[0];
    std::uint32_t lo = 0, hi = 0;
    for (std::uint32_t n = 0; n < pts.size(); ++n) {
        const auto t = dot(pts[n] - pts[0], dir);
        if (t < dot(pts[lo] - pts[0], dir)) lo = n;
        if (t > dot(pts[hi] - pts[0], dir)) hi = n;
    }
    return finish(pts, {}, {lo, hi}, s, true);
}

// Strict convex polygon of the coplanar points `idx`, counter-clockwise about `normal`.
std::vector<std::uint32_t> polygon_ring(const std::vector<Vec>& pts, std::vector<std::uint32_t> idx,
                                        const Vec& normal) {
    // Project along the dominant normal axis; this is an affine bijection on the plane.
    const auto ax = std::llabs(normal.x), ay = std::llabs(normal.y), az = std::llabs(normal.z);
    const int drop = (ax >= ay && ax >= az) ? 0 : (ay >= az ? 1 : 2);
    auto uv = [&](const Vec& p) -> std::pair<std::int64_t, std::int64_t> {
        if (drop == 0) return {p.y, p.z};
        if (drop == 1) return {p.z, p.x};
        return {p.x, p.y};
    };
    std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
        return uv(pts[a]) < uv(pts[b]) || (uv(pts[a]) == uv(pts[b]) && a < b);
    });
    auto turn = [&](std::uint32_t o, std::uint32_t a, std::uint32_t b) {
        const auto [ou, ov] = uv(pts[o]);
        const auto [au, av] = uv(pts[a]);
        const auto [bu, bv] = uv(pts[b]);
        return (au - ou) * (bv - ov) - (av - ov) * (bu - ou);
    };
    std::vector<std::uint32_t> ring(2 * idx.size());
    std::size_t k = 0;
    for (std::uint32_t i : idx) {
        while (k >= 2 && turn(ring[k - 2], ring[k - 1], i) <= 0) --k;
        ring[k++] = i;
    }
    for (std::size_t n = idx.size() - 1, lower = k + 1; n-- > 0;) {
        const std::uint32_t i = idx[n];
        while (k >= lower && turn(ring[k - 2], ring[k - 1], i) <= 0) --k;
        ring[k++] = i;
    }
    ring.resize(k - 1);

    const auto& a = pts[ring[0]];
    const auto& b = pts[ring[1]];
    const auto& c = pts[ring[2]];
    if (dot(cross(b - a, c - a), normal) < 0) std::reverse(ring.begin() + 1, ring.end());
    // Start the fan at the lowest input index so the output does not depend on projection.
    std::rotate(ring.begin(), std::min_element(ring.begin(), ring.end()), ring.end());
    return ring;
}

void append_fan(const std::vector<std::uint32_t>& ring, std::vector<Facet>& facets) {
    for (std::size_t n = 1; n + 1 < ring.size(); ++n) facets.push_back({ring[0], ring[n], ring[n + 1]});
}

ConvexHull planar_hull(const std::vector<Vec>& pts, const Vec& normal, const VoxelSpacing& s) {
    std::vector<std::uint32_t> all(pts.size());
    for (std::uint32_t n = 0; n < all.size(); ++n) all[n] = n;
    const auto ring = polygon_ring(pts, std::move(all), normal);
    std::vector<Facet> facets;
    append_fan(ring, facets);
    return finish(pts, facets, ring, s, true);
}

Vec reduced(Vec n) {
    std::int64_t g = std::gcd(std::gcd(std::llabs(n.x), std::llabs(n.y)), std::llabs(n.z));
    return {n.x / g, n.y / g, n.z / g};
}

}  // namespace

ConvexHull convex_hull(std::span<const Index3> voxels, const VoxelSpacing& spacing) {
    if (voxels.empty()) throw ParameterError("convex hull of an empty voxel set");
    std::vector<Index3> sorted(voxels.begin(), voxels.end());
    std::sort(sorted.begin(), sorted.end(), [](const Index3& a, const Index3& b) {
        if (a.k != b.k) return a.k < b.k;
        if (a.j != b.j) return a.j < b.j;
        return a.i < b.i;
    });
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<Vec> pts;
    pts.reserve(sorted.size());
    for (const auto& v : sorted) pts.push_back({v.i, v.j, v.k});

    if (pts.size() == 1) return finish(pts, {}, {0}, spacing, true);

    const std::uint32_t i0 = 0;
    std::uint32_t i1 = 0, i2 = 0, i3 = 0;
    std::int64_t best = 0;
    for (std::uint32_t n = 0; n < pts.size(); ++n) {
        const Vec d = pts[n] - pts[i0];
        if (dot(d, d) > best) best = dot(d, d), i1 = n;
    }
    best = 0;
    for (std::uint32_t n = 0; n < pts.size(); ++n) {
        const Vec c = cross(pts[i1] - pts[i0], pts[n] - pts[i0]);
        if (dot(c, c) > best) best = dot(c, c), i2 = n;
    }
    if (best == 0) return collinear_hull(pts, spacing);
    best = 0;
    for (std::uint32_t n = 0; n < pts.size(); ++n) {
        const auto o = std::llabs(orient(pts[i0], pts[i1], pts[i2], pts[n]));
        if (o > best) best = o, i3 = n;
    }
    const Vec normal = cross(pts[i1] - pts[i0], pts[i2] - pts[i0]);
    if (best == 0) return planar_hull(pts, normal, spacing);

    std::vector<Facet> faces;
    std::vector<char> alive;
    std::unordered_map<std::uint64_t, std::uint32_t> edge_face;
    auto add_face = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c) {
        const auto f = static_cast<std::uint32_t>(faces.size());
        faces.push_back({a, b, c});
        alive.push_back(1);
        edge_face[edge_key(a, b)] = f;
        edge_face[edge_key(b, c)] = f;
        edge_face[edge_key(c, a)] = f;
    };

    const std::array<std::uint32_t, 4> tet{i0, i1, i2, i3};
    const std::array<std::array<int, 4>, 4> layout{{{0, 1, 2, 3}, {0, 2, 3, 1}, {0, 3, 1, 2}, {1, 3, 2, 0}}};
    for (const auto& l : layout) {
        std::uint32_t a = tet[l[0]], b = tet[l[1]], c = tet[l[2]];
        if (orient(pts[a], pts[b], pts[c], pts[tet[l[3]]]) > 0) std::swap(b, c);
        add_face(a, b, c);
    }

    std::vector<char> visible;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> horizon;
    for (std::uint32_t p = 0; p < pts.size(); ++p) {
        if (p == i0 || p == i1 || p == i2 || p == i3) continue;
        visible.assign(faces.size(), 0);
        bool any = false;
        for (std::uint32_t f = 0; f < faces.size(); ++f) {
            if (alive[f] && orient(pts[faces[f][0]], pts[faces[f][1]], pts[faces[f][2]], pts[p]) > 0) {
                visible[f] = 1;
                any = true;
            }
        }
        if (!any) continue;

        horizon.clear();
        for (std::uint32_t f = 0; f < faces.size(); ++f) {
            if (!visible[f]) continue;
            for (int e = 0; e < 3; ++e) {
                const std::uint32_t u = faces[f][e];
                const std::uint32_t v = faces[f][(e + 1) % 3];
                if (!visible[edge_face.at(edge_key(v, u))]) horizon.emplace_back(u, v);
            }
        }
        for (std::uint32_t f = 0; f < faces.size(); ++f) {
            if (!visible[f]) continue;
            alive[f] = 0;
            for (int e = 0; e < 3; ++e) edge_face.erase(edge_key(faces[f][e], faces[f][(e + 1) % 3]));
        }
        for (const auto& [u, v] : horizon) add_face(u, v, p);
    }

    // Coplanar triangles form one polygonal face; retriangulating it drops points that
    // the incremental pass left on face interiors or edges.
    std::map<std::array<std::int64_t, 4>, std::vector<std::uint32_t>> planes;
    std::vector<std::array<std::int64_t, 4>> plane_order;
    for (std::uint32_t f = 0; f < faces.size(); ++f) {
        if (!alive[f]) continue;
        const Vec& a = pts[faces[f][0]];
        const Vec n = reduced(cross(pts[faces[f][1]] - a, pts[faces[f][2]] - a));
        const std::array<std::int64_t, 4> key{n.x, n.y, n.z, dot(n, a)};
        auto [it, fresh] = planes.try_emplace(key);
        if (fresh) plane_order.push_back(key);
        it->second.insert(it->second.end(), faces[f].begin(), faces[f].end());
    }
    std::vector<Facet> kept;
    std::vector<std::uint32_t> used;
    for (const auto& key : plane_order) {
        auto idx = planes.at(key);
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        const auto ring = polygon_ring(pts, std::move(idx), {key[0], key[1], key[2]});
        append_fan(ring, kept);
        used.insert(used.end(), ring.begin(), ring.end());
    }
    return finish(pts, kept, used, spacing, false);
}

bool ConvexHull::contains(const Point3& p, double tolerance) const {
    if (vertices.empty()) return false;
    if (facets.empty()) {
        // Point or segment.
        const Point3 a = vertices.front();
        const Point3 b = vertices.back();
        const Point3 ab = b - a;
        const double len2 = dot(ab, ab);
        double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        return norm(p - (a + t * ab)) <= tolerance;
    }
    if (degenerate) {
        // Flat fan: stay in the plane and inside every boundary edge.
        const Point3 a = vertices[facets[0][0]];
        const Point3 n = cross(vertices[facets[0][1]] - a, vertices[facets[0][2]] - a);
        const double n_len = norm(n);
        if (std::abs(dot(n, p - a)) > tolerance * n_len) return false;
        std::vector<std::uint32_t> ring{facets[0][0], facets[0][1]};
        for (const auto& f : facets) ring.push_back(f[2]);
        for (std::size_t e = 0; e < ring.size(); ++e) {
            const Point3 u = vertices[ring[e]];
            const Point3 v = vertices[ring[(e + 1) % ring.size()]];
            const Point3 outward = cross(v - u, n);
            const double len = norm(outward);
            if (len > 0.0 && dot(outward, p - u) > tolerance * len) return false;
        }
        return true;
    }
    for (const auto& f : facets) {
        const Point3 a = vertices[f[0]];
        const Point3 n = cross(vertices[f[1]] - a, vertices[f[2]] - a);
        const double len = norm(n);
        if (len > 0.0 && dot(n, p - a) > tolerance * len) return false;
    }
    return true;
}

double ConvexHull::volume() const {
    if (degenerate) return 0.0;
    double six_v = 0.0;
    for (const auto& f : facets) {
        six_v += dot(vertices[f[0]], cross(vertices[f[1]], vertices[f[2]]));
    }
    return six_v / 6.0;
}

}  // namespace celltrace
