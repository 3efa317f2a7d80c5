#include <algorithm>
#include <limits>
#include <random>

#include "celltrace/error.hpp"
#include "celltrace/session.hpp"

namespace celltrace {
namespace {

/// Independent k-means++ starts; the lowest within-cluster sum of squares wins.
constexpr int kRestarts = 10;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Uniform in [0, 1) from the top 53 bits.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double dist2(const Point3& a, const Point3& b) {
    const Point3 d = a - b;
    return dot(d, d);
}

/// Index of the nearest center; ties go to the lower index.
std::size_t nearest(const Point3& p, const std::vector<Point3>& centers) {
    std::size_t best = 0;
    double best_d = dist2(p, centers[0]);
    for (std::size_t c = 1; c < centers.size(); ++c) {
        const double d = dist2(p, centers[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

std::vector<Point3> kmeanspp(const std::vector<Point3>& points, std::size_t k, std::mt19937_64& rng) {
    std::vector<Point3> centers;
    const std::size_t first = std::min(points.size() - 1, static_cast<std::size_t>(unit(rng) * points.size()));
    centers.push_back(points[first]);
    std::vector<double> d2(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) d2[p] = dist2(points[p], centers[0]);
    while (centers.size() < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        const double target = unit(rng) * total;
        double acc = 0.0;
        std::size_t pick = points.size();
        std::size_t last_positive = 0;
        for (std::size_t p = 0; p < points.size(); ++p) {
            if (d2[p] <= 0.0) continue;
            last_positive = p;
            acc += d2[p];
            if (acc > target) {
                pick = p;
                break;
            }
        }
        if (pick == points.size()) pick = last_positive;
        centers.push_back(points[pick]);
        for (std::size_t p = 0; p < points.size(); ++p) d2[p] = std::min(d2[p], dist2(points[p], centers.back()));
    }
    return centers;
}

/// Lloyd iterations from a k-means++ start; returns the cluster label per point.
std::vector<std::size_t> lloyd(const std::vector<Point3>& points, std::size_t k, std::mt19937_64& rng) {
    std::vector<Point3> centers = kmeanspp(points, k, rng);
    std::vector<std::size_t> label(points.size(), 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = iter == 0;
        for (std::size_t p = 0; p < points.size(); ++p) {
            const std::size_t c = nearest(points[p], centers);
            changed |= c != label[p];
            label[p] = c;
        }
        // An emptied cluster takes the point farthest from its current center.
        std::vector<std::size_t> counts(k, 0);
        for (auto l : label) ++counts[l];
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t p = 0; p < points.size(); ++p) {
                if (counts[label[p]] < 2) continue;
                const double d = dist2(points[p], centers[label[p]]);
                if (d > far_d) {
                    far_d = d;
                    far = p;
                }
            }
            --counts[label[far]];
            label[far] = c;
            counts[c] = 1;
            changed = true;
        }
        if (!changed) break;
        std::vector<Point3> sums(k);
        for (std::size_t p = 0; p < points.size(); ++p) sums[label[p]] = sums[label[p]] + points[p];
        for (std::size_t c = 0; c < k; ++c) centers[c] = (1.0 / static_cast<double>(counts[c])) * sums[c];
    }
    return label;
}

double within_cluster_sse(const std::vector<Point3>& points, const std::vector<std::size_t>& label, std::size_t k) {
    std::vector<Point3> sums(k);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t p = 0; p < points.size(); ++p) {
        sums[label[p]] = sums[label[p]] + points[p];
        ++counts[label[p]];
    }
    double total = 0.0;
    for (std::size_t p = 0; p < points.size(); ++p) {
        total += dist2(points[p], (1.0 / static_cast<double>(counts[label[p]])) * sums[label[p]]);
    }
    return total;
}

}  // namespace

std::uint64_t split_seed(std::uint64_t session_seed, DetectionId detection) {
    return splitmix64(session_seed ^ splitmix64(static_cast<std::uint64_t>(detection)));
}

std::vector<Detection> split_detection(const Detection& detection, int n, std::uint64_t seed,
                                       DetectionId first_id, const VoxelSpacing& spacing) {
    if (n < 2) throw ParameterError("split needs n >= 2");
    if (static_cast<std::size_t>(n) > detection.voxel_count()) {
        throw ParameterError("split count exceeds the detection's voxel count");
    }
    const std::size_t k = static_cast<std::size_t>(n);
    std::vector<Point3> points;
    points.reserve(detection.voxels.size());
    for (const auto& v : detection.voxels) points.push_back(physical(v, spacing));

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> label;
    double best = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < kRestarts; ++restart) {
        auto candidate = lloyd(points, k, rng);
        const double e = within_cluster_sse(points, candidate, k);
        if (e < best) {
            best = e;
            label = std::move(candidate);
        }
    }

    std::vector<std::vector<Index3>> groups(k);
    for (std::size_t p = 0; p < points.size(); ++p) groups[label[p]].push_back(detection.voxels[p]);
    // Voxels are in scan order, so each group's front is its first scan-order voxel.
    std::stable_sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return scan_less(a.front(), b.front());
    });
    std::vector<Detection> out;
    for (std::size_t c = 0; c < k; ++c) {
        out.push_back(make_detection(first_id + static_cast<DetectionId>(c), detection.frame,
                                     std::move(groups[c]), spacing));
    }
    return out;
}

}  // namespace celltrace
