#include <doctest.h>

#include <cmath>
#include <random>

#include "celltrace/lineage.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace celltrace;
using namespace celltrace::testing;

namespace {

// Hand-built tracks of point detections.
struct Scene {
    FrameDetections frames;
    std::vector<Track> tracks;
    DetectionId next_id = 0;
    VoxelSpacing spacing{};

    explicit Scene(int t_count) : frames(static_cast<std::size_t>(t_count)) {}

    void add(TrackId id, int birth, const std::vector<Index3>& path) {
        Track t;
        t.id = id;
        for (std::size_t n = 0; n < path.size(); ++n) {
            const int f = birth + static_cast<int>(n);
            frames[static_cast<std::size_t>(f)].push_back(make_detection(next_id, f, {path[n]}, spacing));
            t.detections.push_back({f, next_id++});
        }
        tracks.push_back(t);
        std::sort(tracks.begin(), tracks.end(), [](const Track& a, const Track& b) { return a.id < b.id; });
    }
};

std::vector<Index3> still(Index3 p, int n) { return std::vector<Index3>(static_cast<std::size_t>(n), p); }

}  // namespace

TEST_CASE("mitosis builds one three-node tree") {
    Scene s(8);
    s.add(0, 0, still({10, 10, 10}, 4));
    s.add(1, 4, still({7, 10, 10}, 4));
    s.add(2, 4, still({13, 10, 10}, 4));
    const DetectionIndex index(s.frames);
    const auto forest = build_lineages(s.tracks, index, {}, {}, s.spacing);
    CHECK(forest.roots() == std::vector<TrackId>{0});
    CHECK(forest.parent.at(1) == std::optional<TrackId>(0));
    CHECK(forest.parent.at(2) == std::optional<TrackId>(0));
    CHECK(forest.tree_nodes(0).size() == 3);
    CHECK(forest.presented_tree == std::optional<TrackId>(0));
    CHECK(forest.children(0) == std::vector<TrackId>{1, 2});

    const auto planes = division_planes(forest, s.tracks, index);
    REQUIRE(planes.size() == 1);
    CHECK(planes[0].parent == 0);
    CHECK(planes[0].daughter_a == 1);
    CHECK(planes[0].daughter_b == 2);
    CHECK(planes[0].frame == 4);
    CHECK(planes[0].anchor == Point3{10, 10, 10});
    CHECK(planes[0].normal == Point3{1, 0, 0});
}

TEST_CASE("tracked division pairs the newborn with the continuing parent") {
    Scene s(8);
    s.add(0, 0, {{10, 10, 10}, {10, 10, 10}, {10, 10, 10}, {10, 10, 10}, {8, 10, 10}, {7, 10, 10}, {7, 10, 10}, {7, 10, 10}});
    s.add(1, 4, still({13, 10, 10}, 4));
    const auto tracked = track_sequence(s.frames, {}, s.spacing);
    REQUIRE(tracked.tracks.size() == 2);
    CHECK(tracked.tracks[1].birth_frame() == 4);
    const DetectionIndex index(s.frames);
    const auto forest = build_lineages(tracked.tracks, index, {}, {}, s.spacing);
    CHECK(forest.parent.at(1) == std::optional<TrackId>(0));
    const auto planes = division_planes(forest, tracked.tracks, index);
    REQUIRE(planes.size() == 1);
    CHECK(planes[0].daughter_a == 0);
    CHECK(planes[0].daughter_b == 1);
    CHECK(planes[0].anchor == Point3{10.5, 10, 10});
}

TEST_CASE("forest shapes and presented tree") {
    SUBCASE("frame-zero tracks are singleton roots") {
        Scene s(3);
        s.add(0, 0, still({1, 1, 1}, 3));
        s.add(1, 0, still({9, 9, 9}, 3));
        const DetectionIndex index(s.frames);
        const auto forest = build_lineages(s.tracks, index, {}, {}, s.spacing);
        CHECK(forest.roots() == std::vector<TrackId>{0, 1});
        CHECK(forest.presented_tree == std::optional<TrackId>(0));
    }
    SUBCASE("largest family is presented") {
        Scene s(9);
        s.add(0, 0, still({0, 0, 0}, 3));
        s.add(2, 3, still({2, 0, 0}, 3));
        s.add(3, 3, still({0, 2, 0}, 3));
        s.add(1, 0, still({200, 0, 0}, 3));
        s.add(4, 3, still({202, 0, 0}, 3));
        s.add(5, 3, still({198, 0, 0}, 3));
        s.add(6, 6, still({204, 0, 0}, 3));
        s.add(7, 6, still({196, 0, 0}, 3));
        const DetectionIndex index(s.frames);
        const auto forest = build_lineages(s.tracks, index, {}, {}, s.spacing);
        CHECK(forest.tree_nodes(0).size() == 3);
        CHECK(forest.tree_nodes(1).size() == 5);
        CHECK(forest.presented_tree == std::optional<TrackId>(1));
        CHECK(forest.parent.at(6) == std::optional<TrackId>(4));
        CHECK(forest.parent.at(7) == std::optional<TrackId>(5));
        CHECK(forest.tree_of.at(7) == 1);
    }
    SUBCASE("equal sizes prefer the lowest root") {
        Scene s(4);
        s.add(3, 0, still({0, 0, 0}, 2));
        s.add(5, 2, still({1, 0, 0}, 2));
        s.add(1, 0, still({300, 0, 0}, 2));
        s.add(4, 2, still({301, 0, 0}, 2));
        const DetectionIndex index(s.frames);
        const auto forest = build_lineages(s.tracks, index, {}, {}, s.spacing);
        CHECK(forest.presented_tree == std::optional<TrackId>(1));
    }
    SUBCASE("no tracks") {
        FrameDetections none(2);
        const auto forest = build_lineages({}, DetectionIndex(none), {}, {}, {});
        CHECK_FALSE(forest.presented_tree.has_value());
    }
}

TEST_CASE("parent selection") {
    Scene s(6);
    s.add(0, 0, still({0, 0, 0}, 3));
    s.add(1, 0, still({6, 0, 0}, 3));
    s.add(2, 3, still({1, 0, 0}, 3));
    s.add(3, 0, still({300, 0, 0}, 3));
    const DetectionIndex index(s.frames);
    const TrackingConfig tc;
    const auto cands = parent_candidates(s.tracks[2], s.tracks, index, tc, {});
    REQUIRE(cands.size() == 2);
    CHECK(cands[0]->id == 0);
    CHECK(cands[1]->id == 1);
    CHECK(parent_cost(s.tracks[0], s.tracks[2], index, tc, s.spacing) <
          parent_cost(s.tracks[1], s.tracks[2], index, tc, s.spacing));
    CHECK(assign_parent(s.tracks[2], cands, index, tc, s.spacing) == std::optional<TrackId>(0));
    CHECK(assign_parent(s.tracks[2], {cands[1]}, index, tc, s.spacing) == std::optional<TrackId>(1));
    CHECK_FALSE(assign_parent(s.tracks[2], {}, index, tc, s.spacing).has_value());
    CHECK(parent_candidates(s.tracks[0], s.tracks, index, tc, {}).empty());

    LineageConfig narrow;
    narrow.candidate_gate_um = 2.0;
    CHECK(parent_candidates(s.tracks[2], s.tracks, index, tc, narrow).size() == 1);
}

TEST_CASE("parents match the brute-force argmin") {
    std::mt19937_64 rng(99);
    const VoxelSpacing sp{0.8, 0.8, 1.0};
    int with_parent = 0;
    for (int trial = 0; trial < 80; ++trial) {
        const auto frames = random_instance(rng, 6, 4, sp);
        const TrackingConfig tc;
        LineageConfig lc;
        if (trial % 2) lc.candidate_gate_um = 6.0;
        const auto tracked = track_sequence(frames, tc, sp);
        const DetectionIndex index(frames);
        const auto forest = build_lineages(tracked.tracks, index, tc, lc, sp);
        std::size_t largest = 0;
        for (auto root : forest.roots()) largest = std::max(largest, forest.tree_nodes(root).size());
        REQUIRE(forest.presented_tree.has_value());
        CHECK(forest.tree_nodes(*forest.presented_tree).size() == largest);
        for (const auto& t : tracked.tracks) {
            const auto expect = parent_oracle(t, tracked.tracks, index, tc, lc, sp);
            CHECK(forest.parent.at(t.id) == expect);
            if (expect) {
                ++with_parent;
                CHECK(tracked.find(*expect)->birth_frame() < t.birth_frame());
            }
            TrackId root = t.id;
            for (int hops = 0; forest.parent.at(root); ++hops) {
                REQUIRE(hops < 100);
                root = *forest.parent.at(root);
            }
            CHECK(forest.tree_of.at(t.id) == root);
        }
    }
    CHECK(with_parent > 20);
}

TEST_CASE("vessel distance series") {
    const VoxelSpacing unit{};
    Mask vessel({8, 8, 2}, unit, 0);
    vessel(0, 0, 0) = 1;
    const auto map = distance_map(vessel);
    Scene s(5);
    s.add(0, 0, still({3, 4, 0}, 5));
    s.add(1, 0, still({0, 0, 0}, 2));
    const DetectionIndex index(s.frames);
    std::map<int, const DistanceMap*> maps;
    for (int t = 0; t < 5; ++t) maps[t] = &map;

    const auto series = vessel_distance_series(s.tracks[0], index, maps);
    REQUIRE(series.samples.size() == 5);
    for (const auto& sample : series.samples) CHECK(sample.distance_um == 5.0);
    CHECK(vessel_distance_series(s.tracks[1], index, maps).samples[0].distance_um == 0.0);

    maps.erase(2);
    CHECK(vessel_distance_series(s.tracks[0], index, maps).samples.size() == 4);

    const auto empty = distance_map(Mask({8, 8, 2}, unit, 0));
    maps[1] = &empty;
    CHECK_THROWS_AS(vessel_distance_series(s.tracks[0], index, maps), ParameterError);

    // Centroid sampling versus the closest voxel of a two-voxel cell.
    FrameDetections wide(1);
    wide[0].push_back(make_detection(0, 0, {{1, 0, 0}, {5, 0, 0}}, unit));
    Track t;
    t.detections.push_back({0, 0});
    const DetectionIndex wide_index(wide);
    LineageConfig min_cfg;
    min_cfg.vessel_min_over_voxels = true;
    const std::map<int, const DistanceMap*> one{{0, &map}};
    CHECK(vessel_distance_series(t, wide_index, one).samples[0].distance_um == 3.0);
    CHECK(vessel_distance_series(t, wide_index, one, min_cfg).samples[0].distance_um == 1.0);
}

TEST_CASE("cleavage planes") {
    const auto p = cleavage_plane(Point3{0, 0, 0}, Point3{2, 0, 0});
    CHECK(p.anchor == Point3{1, 0, 0});
    CHECK(p.normal == Point3{1, 0, 0});
    CHECK_THROWS_AS(cleavage_plane(Point3{0, 0, 0}, Point3{0, 0, 0}), ParameterError);
    const auto d = cleavage_plane(Point3{0, 0, 0}, Point3{1, 1, 0});
    CHECK(d.normal.x == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(d.normal.y == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(d.normal.z == 0.0);

    std::mt19937_64 rng(1);
    for (int n = 0; n < 50; ++n) {
        const Point3 a{uniform01(rng) * 10, uniform01(rng) * 10, uniform01(rng) * 10};
        const Point3 b{uniform01(rng) * 10, uniform01(rng) * 10, uniform01(rng) * 10};
        const auto ab = cleavage_plane(a, b);
        const auto ba = cleavage_plane(b, a);
        CHECK(norm(ab.normal) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(norm(ab.anchor - a) == doctest::Approx(norm(ab.anchor - b)).epsilon(1e-12));
        CHECK(ba.anchor == ab.anchor);
        CHECK(ba.normal == -1.0 * ab.normal);
    }

    Scene s(4);
    s.add(0, 0, still({5, 5, 5}, 2));
    s.add(1, 2, still({3, 5, 5}, 2));
    s.add(2, 3, still({7, 5, 5}, 1));
    const DetectionIndex index(s.frames);
    CHECK_THROWS_AS(cleavage_plane(s.tracks[0], s.tracks[1], s.tracks[2], index), ParameterError);
}
