#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "celltrace/tiff_io.hpp"

namespace fs = std::filesystem;

namespace celltrace::testing {

TempDir::TempDir(const std::string& prefix) {
    std::random_device rd;
    const auto base = fs::temp_directory_path();
    for (;;) {
        path = base / (prefix + "_" + std::to_string(rd()));
        if (fs::create_directories(path)) break;
    }
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

std::vector<Index3> ball(const Point3& c, double r) {
    std::vector<Index3> out;
    const auto lo = [&](double v) { return static_cast<std::int64_t>(std::floor(v - r)); };
    const auto hi = [&](double v) { return static_cast<std::int64_t>(std::ceil(v + r)); };
    for (auto k = lo(c.z); k <= hi(c.z); ++k) {
        for (auto j = lo(c.y); j <= hi(c.y); ++j) {
            for (auto i = lo(c.x); i <= hi(c.x); ++i) {
                const Point3 d{static_cast<double>(i) - c.x, static_cast<double>(j) - c.y,
                               static_cast<double>(k) - c.z};
                if (dot(d, d) <= r * r) out.push_back({i, j, k});
            }
        }
    }
    return out;
}

std::vector<Index3> random_blob(std::mt19937_64& rng, Index3 seed, std::size_t size, std::int64_t extent,
                                std::vector<std::uint8_t>& occupied) {
    auto idx = [&](const Index3& v) { return static_cast<std::size_t>(v.i + extent * (v.j + extent * v.k)); };
    auto inside = [&](const Index3& v) {
        return v.i >= 0 && v.j >= 0 && v.k >= 0 && v.i < extent && v.j < extent && v.k < extent;
    };
    std::vector<Index3> blob;
    if (!inside(seed) || occupied[idx(seed)]) return blob;
    blob.push_back(seed);
    occupied[idx(seed)] = 1;
    static const Index3 steps[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (int attempts = 0; blob.size() < size && attempts < 200; ++attempts) {
        const Index3 from = blob[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(blob.size()) - 1))];
        const Index3& s = steps[uniform_int(rng, 0, 5)];
        const Index3 v{from.i + s.i, from.j + s.j, from.k + s.k};
        if (!inside(v) || occupied[idx(v)]) continue;
        occupied[idx(v)] = 1;
        blob.push_back(v);
    }
    return blob;
}

FrameDetections random_instance(std::mt19937_64& rng, int frames, int max_per_frame, const VoxelSpacing& spacing,
                                bool allow_empty) {
    constexpr std::int64_t extent = 20;
    FrameDetections out(static_cast<std::size_t>(frames));
    DetectionId id = 0;
    for (int t = 0; t < frames; ++t) {
        std::vector<std::uint8_t> occupied(extent * extent * extent, 0);
        const int count = static_cast<int>(uniform_int(rng, allow_empty ? 0 : 1, max_per_frame));
        for (int n = 0; n < count; ++n) {
            const Index3 seed{uniform_int(rng, 0, extent - 1), uniform_int(rng, 0, extent - 1),
                              uniform_int(rng, 0, extent - 1)};
            auto voxels = random_blob(rng, seed, static_cast<std::size_t>(uniform_int(rng, 1, 12)), extent, occupied);
            if (voxels.empty()) continue;
            out[static_cast<std::size_t>(t)].push_back(make_detection(id++, t, std::move(voxels), spacing));
        }
    }
    return out;
}

SessionState state_from_detections(FrameDetections frames, const VoxelSpacing& spacing,
                                   const PipelineConfig& config) {
    SessionState state;
    state.manifest.spacing = spacing;
    state.manifest.dims = {64, 64, 64};
    state.manifest.t_count = static_cast<int>(frames.size());
    state.manifest.channels.push_back({0, "cells", ChannelRole::cell});
    state.config = config;
    for (const auto& f : frames) {
        for (const auto& d : f) state.next_detection_id = std::max(state.next_detection_id, d.id + 1);
    }
    state.detections = std::move(frames);
    state.tracking = track_sequence(state.detections, config.tracking, spacing);
    state.lineage = build_lineage_view(state);
    return state;
}

namespace {

double distance_to_segment(const Point3& p, const Point3& a, const Point3& b) {
    const Point3 ab = b - a;
    const double len2 = dot(ab, ab);
    const double s = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    return norm(p - (a + s * ab));
}

}  // namespace

fs::path write_experiment(const SyntheticExperiment& ex, const fs::path& dir) {
    fs::create_directories(dir);
    std::mt19937_64 rng(ex.seed);
    ExperimentManifest manifest;
    manifest.spacing = ex.spacing;
    manifest.dims = ex.dims;
    manifest.frame_interval_min = 20.0;
    manifest.t_count = ex.t_count;
    manifest.channels.push_back({0, "cells", ChannelRole::cell});
    if (!ex.vessels.empty()) manifest.channels.push_back({1, "vessels", ChannelRole::vessel});

    auto noisy = [&](double v) {
        return to_intensity(std::max(0.0, v + ex.noise * (2.0 * uniform01(rng) - 1.0)));
    };
    for (int t = 0; t < ex.t_count; ++t) {
        VoxelGrid cells(ex.dims, ex.spacing, 0);
        std::vector<std::uint8_t> inside(ex.dims.count(), 0);
        for (const auto& c : ex.cells) {
            const auto& center = c.centers[static_cast<std::size_t>(t)];
            if (!center) continue;
            for (const auto& v : ball(*center, c.radius)) {
                if (cells.contains(v.i, v.j, v.k)) {
                    inside[cells.linear(static_cast<std::size_t>(v.i), static_cast<std::size_t>(v.j),
                                        static_cast<std::size_t>(v.k))] = 1;
                }
            }
        }
        for (std::size_t n = 0; n < cells.size(); ++n) {
            cells[n] = noisy(ex.background + (inside[n] ? ex.cells.front().intensity : 0.0));
        }
        const fs::path cell_path = dir / ("cells_t" + std::to_string(t) + ".tif");
        write_tiff(cell_path, cells);
        manifest.frames[{t, 0}] = cell_path;

        if (!ex.vessels.empty()) {
            VoxelGrid vessels(ex.dims, ex.spacing, 0);
            for (std::size_t n = 0; n < vessels.size(); ++n) {
                const Index3 v = vessels.index_of(n);
                const Point3 p{static_cast<double>(v.i), static_cast<double>(v.j), static_cast<double>(v.k)};
                double value = ex.background;
                for (const auto& s : ex.vessels) {
                    if (distance_to_segment(p, s.a, s.b) <= s.radius) value = ex.background + s.intensity;
                }
                vessels[n] = noisy(value);
            }
            const fs::path vessel_path = dir / ("vessels_t" + std::to_string(t) + ".tif");
            write_tiff(vessel_path, vessels);
            manifest.frames[{t, 1}] = vessel_path;
        }
    }
    const fs::path manifest_path = dir / "manifest.json";
    save_manifest(manifest, manifest_path);
    return manifest_path;
}

SyntheticExperiment undersegmentation_experiment() {
    SyntheticExperiment ex;
    ex.t_count = 7;
    const double xa[] = {14, 14, 20, 20, 20, 15, 15};
    const double xb[] = {32, 32, 27, 27, 27, 33, 33};
    SyntheticCell a, b;
    for (int t = 0; t < ex.t_count; ++t) {
        a.centers.push_back(Point3{xa[t], 24, 6});
        b.centers.push_back(Point3{xb[t], 24, 6});
    }
    ex.cells = {a, b};
    ex.vessels.push_back({{42, 0, 6}, {42, 47, 6}, 2.0, 800.0});
    ex.seed = 7;
    return ex;
}

FrameDetections undersegmentation_detections() {
    const VoxelSpacing unit{1, 1, 1};
    const double xa[] = {10, 10, 14, 14, 14, 11, 11};
    const double xb[] = {22, 22, 19, 19, 19, 23, 23};
    FrameDetections frames(7);
    DetectionId id = 0;
    for (int t = 0; t < 7; ++t) {
        auto va = ball({xa[t], 20, 10}, 3.0);
        auto vb = ball({xb[t], 20, 10}, 3.0);
        if (t >= 2 && t <= 4) {
            std::set<Index3> merged(va.begin(), va.end());
            merged.insert(vb.begin(), vb.end());
            frames[static_cast<std::size_t>(t)].push_back(
                make_detection(id++, t, std::vector<Index3>(merged.begin(), merged.end()), unit));
        } else {
            frames[static_cast<std::size_t>(t)].push_back(make_detection(id++, t, std::move(va), unit));
            frames[static_cast<std::size_t>(t)].push_back(make_detection(id++, t, std::move(vb), unit));
        }
    }
    return frames;
}

std::optional<std::string> first_difference(const fs::path& a, const fs::path& b) {
    auto listing = [](const fs::path& root) {
        std::set<std::string> files;
        for (const auto& e : fs::recursive_directory_iterator(root)) {
            if (e.is_regular_file()) files.insert(fs::relative(e.path(), root).generic_string());
        }
        return files;
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const auto fa = listing(a);
    const auto fb = listing(b);
    if (fa != fb) {
        for (const auto& f : fa) {
            if (!fb.contains(f)) return f;
        }
        for (const auto& f : fb) {
            if (!fa.contains(f)) return f;
        }
    }
    for (const auto& f : fa) {
        if (slurp(a / f) != slurp(b / f)) return f;
    }
    return std::nullopt;
}

}  // namespace celltrace::testing

namespace celltrace::testing {

PointCellSequence smooth_point_cells(std::mt19937_64& rng, int cells, int frames, double ratio) {
    constexpr double kPi = 3.14159265358979323846;
    for (;;) {
        PointCellSequence seq;
        seq.positions.resize(static_cast<std::size_t>(cells));
        for (auto& path : seq.positions) {
            const Point3 start{20 + 160 * uniform01(rng), 20 + 160 * uniform01(rng), 10 + 40 * uniform01(rng)};
            const double theta = 2 * kPi * uniform01(rng);
            const double speed = 1.0 + 2.0 * uniform01(rng);
            const Point3 v{speed * std::cos(theta), speed * std::sin(theta), 0.3 * (uniform01(rng) - 0.5)};
            const double sway = 1.5 * uniform01(rng), phase = 2 * kPi * uniform01(rng);
            for (int t = 0; t < frames; ++t) {
                const Point3 p = start + static_cast<double>(t) * v +
                                 (sway * std::sin(0.3 * t + phase)) * Point3{-std::sin(theta), std::cos(theta), 0};
                path.push_back({std::llround(p.x), std::llround(p.y), std::llround(p.z)});
            }
        }
        auto dist = [](Index3 a, Index3 b) {
            return norm(Point3{static_cast<double>(a.i - b.i), static_cast<double>(a.j - b.j),
                               static_cast<double>(a.k - b.k)});
        };
        seq.min_gap = std::numeric_limits<double>::infinity();
        for (int t = 0; t < frames; ++t) {
            for (std::size_t a = 0; a < seq.positions.size(); ++a) {
                if (t > 0) seq.max_step = std::max(seq.max_step, dist(seq.positions[a][t], seq.positions[a][t - 1]));
                for (std::size_t b = a + 1; b < seq.positions.size(); ++b)
                    seq.min_gap = std::min(seq.min_gap, dist(seq.positions[a][t], seq.positions[b][t]));
            }
        }
        if (seq.max_step < ratio * seq.min_gap) return seq;
    }
}

FrameDetections point_cell_frames(const PointCellSequence& sequence, const VoxelSpacing& spacing) {
    const std::size_t frames = sequence.positions.empty() ? 0 : sequence.positions.front().size();
    FrameDetections out(frames);
    DetectionId id = 0;
    for (std::size_t t = 0; t < frames; ++t) {
        for (const auto& path : sequence.positions) {
            out[t].push_back(make_detection(id++, static_cast<int>(t), {path[t]}, spacing));
        }
    }
    return out;
}

}  // namespace celltrace::testing
