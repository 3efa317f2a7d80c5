#include "celltrace/results_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "celltrace/error.hpp"
#include "celltrace/png_io.hpp"

namespace fs = std::filesystem;

namespace celltrace {
namespace {

Json point_json(const Point3& p) { return Json::array({p.x, p.y, p.z}); }

std::string axis_name(Axis axis) {
    switch (axis) {
        case Axis::x: return "x";
        case Axis::y: return "y";
        case Axis::z: return "z";
    }
    return "z";
}

std::string frame_file(int t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%04d.json", t);
    return buf;
}

std::string projection_file(int t, int channel) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "frame_%04d_c%d.png", t, channel);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json(const fs::path& path) {
    try {
        return Json::parse(read_text(path));
    } catch (const Json::exception& e) {
        throw IoError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const Json& json) { write_text(path, json.dump(1) + "\n"); }

/// Voxels as x-runs [x0, y, z, length]; input is in scan order.
Json voxel_runs(const std::vector<Index3>& voxels) {
    Json runs = Json::array();
    std::size_t n = 0;
    while (n < voxels.size()) {
        std::size_t m = n + 1;
        while (m < voxels.size() && voxels[m].k == voxels[n].k && voxels[m].j == voxels[n].j &&
               voxels[m].i == voxels[m - 1].i + 1) {
            ++m;
        }
        runs.push_back({voxels[n].i, voxels[n].j, voxels[n].k, m - n});
        n = m;
    }
    return runs;
}

std::vector<Index3> voxels_from_runs(const Json& runs) {
    std::vector<Index3> voxels;
    for (const auto& r : runs) {
        const auto x0 = r.at(0).get<std::int64_t>();
        const auto len = r.at(3).get<std::int64_t>();
        for (std::int64_t x = x0; x < x0 + len; ++x) {
            voxels.push_back({x, r.at(1).get<std::int64_t>(), r.at(2).get<std::int64_t>()});
        }
    }
    return voxels;
}

/// Outline of the hull seen along `axis`, in voxel index units, counter-clockwise.
std::vector<std::array<std::int64_t, 2>> projected_outline(const Detection& d, const VoxelSpacing& s,
                                                            Axis axis) {
    using P = std::array<std::int64_t, 2>;
    std::vector<P> pts;
    for (const auto& v : d.hull.vertices) {
        const auto i = std::llround(v.x / s.dx);
        const auto j = std::llround(v.y / s.dy);
        const auto k = std::llround(v.z / s.dz);
        switch (axis) {
            case Axis::z: pts.push_back({i, j}); break;
            case Axis::y: pts.push_back({i, k}); break;
            case Axis::x: pts.push_back({j, k}); break;
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    auto cross = [](const P& o, const P& a, const P& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<P> hull(2 * pts.size());
    std::size_t h = 0;
    for (const auto& p : pts) {
        while (h >= 2 && cross(hull[h - 2], hull[h - 1], p) <= 0) --h;
        hull[h++] = p;
    }
    for (std::size_t n = pts.size() - 1, lower = h + 1; n-- > 0;) {
        while (h >= lower && cross(hull[h - 2], hull[h - 1], pts[n]) <= 0) --h;
        hull[h++] = pts[n];
    }
    hull.resize(h - 1);
    return hull;
}

Json series_json(const VesselDistanceSeries& s) {
    Json samples = Json::array();
    for (const auto& v : s.samples) samples.push_back({{"t", v.frame}, {"distance_um", v.distance_um}});
    return {{"track_id", s.track_id}, {"samples", samples}};
}

Json plane_json(const CleavagePlane& p) {
    return {{"parent", p.parent},     {"daughter_a", p.daughter_a},   {"daughter_b", p.daughter_b},
            {"t", p.frame},           {"anchor", point_json(p.anchor)}, {"normal", point_json(p.normal)}};
}

Json optional_id(const std::optional<TrackId>& id) { return id ? Json(*id) : Json(nullptr); }

std::string status_name(TrackStatus s) { return s == TrackStatus::active ? "active" : "ended"; }

Json node_json(const Track& track, const LineageForest& forest) {
    return {{"track_id", track.id},
            {"parent", optional_id(forest.parent.at(track.id))},
            {"tree_id", forest.tree_of.at(track.id)},
            {"birth_frame", track.birth_frame()},
            {"last_frame", track.last_frame()},
            {"status", status_name(track.status)}};
}

}  // namespace

Json config_to_json(const PipelineConfig& c) {
    return {{"cell_sigma_um", c.denoise.gaussian_sigma_um},
            {"median_radius", c.denoise.median_radius},
            {"min_volume_um3", c.segmentation.min_volume_um3},
            {"closing_radius", c.segmentation.closing_radius},
            {"window", c.tracking.window},
            {"weights", c.tracking.weights},
            {"occlusion_patience", c.tracking.patience()},
            {"candidate_gate_um", c.lineage.candidate_gate_um},
            {"vessel_min_over_voxels", c.lineage.vessel_min_over_voxels},
            {"mrf_max_iterations", c.mrf_max_iterations},
            {"seed", c.seed}};
}

PipelineConfig config_from_json(const Json& j) {
    PipelineConfig c;
    c.denoise.gaussian_sigma_um = j.at("cell_sigma_um").get<double>();
    c.denoise.median_radius = j.at("median_radius").get<int>();
    c.segmentation.min_volume_um3 = j.at("min_volume_um3").get<double>();
    c.segmentation.closing_radius = j.at("closing_radius").get<int>();
    c.tracking.window = j.at("window").get<int>();
    c.tracking.weights = j.at("weights").get<std::vector<double>>();
    c.tracking.occlusion_patience = j.at("occlusion_patience").get<int>();
    if (c.tracking.occlusion_patience == c.tracking.window - 1) c.tracking.occlusion_patience = -1;
    c.lineage.candidate_gate_um = j.at("candidate_gate_um").get<double>();
    c.lineage.vessel_min_over_voxels = j.at("vessel_min_over_voxels").get<bool>();
    c.mrf_max_iterations = j.at("mrf_max_iterations").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
}

Json edit_record_to_json(const EditRecord& r) {
    Json prop = Json::array();
    for (const auto& p : r.propagation) {
        prop.push_back({{"t", p.frame}, {"detection_id", p.detection_id}, {"products", p.products}});
    }
    Json j = {{"revision", r.revision},
              {"kind", to_string(r.kind)},
              {"detection_id", r.detection_id},
              {"t", r.frame},
              {"products", r.products},
              {"propagation", prop}};
    if (r.kind == EditKind::split) j["n"] = r.n;
    if (r.kind == EditKind::set_track) j["track_id"] = r.track_id;
    return j;
}

EditRecord edit_record_from_json(const Json& j) {
    EditRecord r;
    r.revision = j.at("revision").get<std::uint64_t>();
    r.kind = parse_edit_kind(j.at("kind").get<std::string>());
    r.detection_id = j.at("detection_id").get<DetectionId>();
    r.frame = j.at("t").get<int>();
    r.products = j.at("products").get<std::vector<DetectionId>>();
    for (const auto& p : j.at("propagation")) {
        r.propagation.push_back({p.at("t").get<int>(), p.at("detection_id").get<DetectionId>(),
                                 p.at("products").get<std::vector<DetectionId>>()});
    }
    if (r.kind == EditKind::split) r.n = j.at("n").get<int>();
    if (r.kind == EditKind::set_track) r.track_id = j.at("track_id").get<TrackId>();
    return r;
}

EditRequest edit_request_from_json(const Json& j) {
    try {
        EditRequest r;
        r.revision = j.at("revision").get<std::uint64_t>();
        r.kind = parse_edit_kind(j.at("kind").get<std::string>());
        r.detection_id = j.at("detection_id").get<DetectionId>();
        if (r.kind == EditKind::split) r.n = j.value("n", 2);
        if (r.kind == EditKind::set_track) r.track_id = j.at("track_id").get<TrackId>();
        return r;
    } catch (const Json::exception& e) {
        throw ParameterError(std::string("malformed edit request: ") + e.what());
    }
}

Json detection_to_json(const Detection& d) {
    Json vertices = Json::array();
    for (const auto& v : d.hull.vertices) vertices.push_back(point_json(v));
    return {{"id", d.id},
            {"t", d.frame},
            {"voxel_count", d.voxel_count()},
            {"volume_um3", d.volume_um3},
            {"centroid", point_json(d.centroid)},
            {"runs", voxel_runs(d.voxels)},
            {"hull", {{"vertices", vertices}, {"facets", d.hull.facets}, {"degenerate", d.hull.degenerate}}}};
}

Json tracks_to_json(const TrackingResult& tracking) {
    Json tracks = Json::array();
    for (const auto& t : tracking.tracks) {
        Json dets = Json::array();
        for (const auto& e : t.detections) dets.push_back({{"t", e.frame}, {"detection_id", e.detection_id}});
        tracks.push_back({{"id", t.id}, {"detections", dets}, {"status", status_name(t.status)}});
    }
    return {{"next_track_id", tracking.next_track_id}, {"tracks", tracks}};
}

Json cost_graph_to_json(const CostGraph& graph) {
    Json transitions = Json::array();
    for (const auto& t : graph.transitions) {
        Json edges = Json::array();
        for (const auto& e : t.edges) {
            edges.push_back({{"track_id", e.track_id},
                             {"from_detection", e.from_detection},
                             {"detection_id", e.to_detection},
                             {"cost", e.cost},
                             {"matching", e.matching}});
        }
        transitions.push_back({{"to_frame", t.to_frame}, {"edges", edges}});
    }
    return {{"transitions", transitions}};
}

Json lineage_to_json(const SessionState& state) {
    const auto& view = state.lineage;
    Json nodes = Json::array();
    for (const auto& t : state.tracking.tracks) nodes.push_back(node_json(t, view.forest));
    Json series = Json::array();
    for (const auto& s : view.vessel_series) series.push_back(series_json(s));
    Json planes = Json::array();
    for (const auto& p : view.planes) planes.push_back(plane_json(p));
    return {{"presented_tree", optional_id(view.forest.presented_tree)},
            {"nodes", nodes},
            {"vessel_distance_series", series},
            {"cleavage_planes", planes}};
}

Json experiment_summary(const SessionState& state) {
    const auto& m = state.manifest;
    Json channels = Json::array();
    for (const auto& c : m.channels) {
        channels.push_back({{"index", c.index}, {"name", c.name}, {"role", to_string(c.role)}});
    }
    std::size_t detections = 0;
    for (const auto& f : state.detections) detections += f.size();
    return {{"dims", {m.dims.nx, m.dims.ny, m.dims.nz}},
            {"spacing_um", {m.spacing.dx, m.spacing.dy, m.spacing.dz}},
            {"frame_interval_min", m.frame_interval_min},
            {"t_count", m.t_count},
            {"channels", channels},
            {"revision", state.revision},
            {"detection_count", detections},
            {"track_count", state.tracking.tracks.size()},
            {"presented_tree", optional_id(state.lineage.forest.presented_tree)}};
}

Json frame_detections_summary(const SessionState& state, int t, Axis axis) {
    if (t < 0 || t >= static_cast<int>(state.detections.size())) {
        throw NotFoundError("frame " + std::to_string(t) + " out of range");
    }
    Json list = Json::array();
    for (const auto& d : state.detections[static_cast<std::size_t>(t)]) {
        const Track* track = state.tracking.track_of(d.id);
        Json outline = Json::array();
        for (const auto& p : projected_outline(d, state.manifest.spacing, axis)) outline.push_back(p);
        Json entry = {{"id", d.id},
                      {"track_id", track ? Json(track->id) : Json(nullptr)},
                      {"tree_id", track ? Json(state.lineage.forest.tree_of.at(track->id)) : Json(nullptr)},
                      {"centroid", point_json(d.centroid)},
                      {"volume_um3", d.volume_um3},
                      {"voxel_count", d.voxel_count()},
                      {"outline", outline}};
        list.push_back(entry);
    }
    return {{"t", t}, {"axis", axis_name(axis)}, {"revision", state.revision}, {"detections", list}};
}

Json lineage_tree(const SessionState& state, TrackId tree_id) {
    const auto& forest = state.lineage.forest;
    auto root = forest.tree_of.find(tree_id);
    if (root == forest.tree_of.end() || root->second != tree_id) {
        throw NotFoundError("no lineage tree " + std::to_string(tree_id));
    }
    Json nodes = Json::array();
    Json series = Json::array();
    for (const auto& t : state.tracking.tracks) {
        if (forest.tree_of.at(t.id) != tree_id) continue;
        Json node = node_json(t, forest);
        Json dets = Json::array();
        for (const auto& e : t.detections) dets.push_back({{"t", e.frame}, {"detection_id", e.detection_id}});
        node["detections"] = dets;
        nodes.push_back(node);
    }
    for (const auto& s : state.lineage.vessel_series) {
        if (forest.tree_of.at(s.track_id) == tree_id) series.push_back(series_json(s));
    }
    Json planes = Json::array();
    for (const auto& p : state.lineage.planes) {
        if (forest.tree_of.at(p.parent) == tree_id) planes.push_back(plane_json(p));
    }
    return {{"tree_id", tree_id},
            {"revision", state.revision},
            {"nodes", nodes},
            {"vessel_distance_series", series},
            {"cleavage_planes", planes}};
}

void export_results(const SessionState& state, const fs::path& dir, bool projections) {
    fs::create_directories(dir / "detections");
    Json pins = Json::array();
    for (const auto& [d, t] : state.pins) pins.push_back({d, t});
    Json session = {{"format", "celltrace-results"},
                    {"version", 1},
                    {"manifest", Json::parse(manifest_to_json(state.manifest, dir))},
                    {"config", config_to_json(state.config)},
                    {"revision", state.revision},
                    {"next_detection_id", state.next_detection_id},
                    {"pins", pins}};
    write_json(dir / "session.json", session);

    for (std::size_t t = 0; t < state.detections.size(); ++t) {
        Json list = Json::array();
        for (const auto& d : state.detections[t]) list.push_back(detection_to_json(d));
        write_json(dir / "detections" / frame_file(static_cast<int>(t)),
                   {{"t", t}, {"detections", list}});
    }
    write_json(dir / "tracks.json", tracks_to_json(state.tracking));
    write_json(dir / "cost_graph.json", cost_graph_to_json(state.tracking.cost_graph));
    write_json(dir / "lineage.json", lineage_to_json(state));
    std::string log;
    for (const auto& r : state.edit_log) log += edit_record_to_json(r).dump() + "\n";
    write_text(dir / "edits.jsonl", log);

    if (projections) {
        fs::create_directories(dir / "projections");
        for (const auto& [key, path] : state.manifest.frames) {
            const auto grid = load_frame(state.manifest, key.first, key.second);
            write_png(dir / "projections" / projection_file(key.first, key.second),
                      max_intensity_projection(grid, Axis::z));
        }
    }
}

void append_edit_log(const fs::path& dir, const EditRecord& record) {
    std::ofstream out(dir / "edits.jsonl", std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to " + (dir / "edits.jsonl").string());
    out << edit_record_to_json(record).dump() << "\n";
}

SessionState import_results(const fs::path& dir) {
    const Json session = read_json(dir / "session.json");
    if (session.value("format", "") != "celltrace-results") {
        throw IoError(dir.string() + " is not a results directory");
    }
    SessionState state;
    try {
        state.manifest = parse_manifest(session.at("manifest").dump(), dir);
        state.config = config_from_json(session.at("config"));
        state.revision = session.at("revision").get<std::uint64_t>();
        state.next_detection_id = session.at("next_detection_id").get<DetectionId>();
        for (const auto& p : session.at("pins")) state.pins[p.at(0).get<DetectionId>()] = p.at(1).get<TrackId>();

        for (int t = 0; t < state.manifest.t_count; ++t) {
            const Json frame = read_json(dir / "detections" / frame_file(t));
            std::vector<Detection> list;
            for (const auto& d : frame.at("detections")) {
                list.push_back(make_detection(d.at("id").get<DetectionId>(), t, voxels_from_runs(d.at("runs")),
                                              state.manifest.spacing));
            }
            state.detections.push_back(std::move(list));
        }

        const Json tracks = read_json(dir / "tracks.json");
        state.tracking.next_track_id = tracks.at("next_track_id").get<TrackId>();
        for (const auto& t : tracks.at("tracks")) {
            Track track;
            track.id = t.at("id").get<TrackId>();
            for (const auto& e : t.at("detections")) {
                track.detections.push_back({e.at("t").get<int>(), e.at("detection_id").get<DetectionId>()});
            }
            track.status = t.at("status").get<std::string>() == "active" ? TrackStatus::active : TrackStatus::ended;
            state.tracking.tracks.push_back(std::move(track));
        }
        const Json graph = read_json(dir / "cost_graph.json");
        for (const auto& tr : graph.at("transitions")) {
            Transition transition;
            transition.to_frame = tr.at("to_frame").get<int>();
            for (const auto& e : tr.at("edges")) {
                transition.edges.push_back({e.at("track_id").get<TrackId>(), e.at("from_detection").get<DetectionId>(),
                                            e.at("detection_id").get<DetectionId>(), e.at("cost").get<double>(),
                                            e.at("matching").get<bool>()});
            }
            state.tracking.cost_graph.transitions.push_back(std::move(transition));
        }
        std::istringstream log(read_text(dir / "edits.jsonl"));
        for (std::string line; std::getline(log, line);) {
            if (!line.empty()) state.edit_log.push_back(edit_record_from_json(Json::parse(line)));
        }
    } catch (const Json::exception& e) {
        throw IoError("malformed results in " + dir.string() + ": " + e.what());
    }

    const int vessel = state.manifest.first_channel_with_role(ChannelRole::vessel);
    if (vessel >= 0) {
        for (int t = 0; t < state.manifest.t_count; ++t) {
            auto seg = process_vessel_frame(load_frame(state.manifest, t, vessel), state.config);
            if (!seg.distances.empty) state.vessel_maps.emplace(t, std::move(seg.distances));
        }
    }
    state.lineage = build_lineage_view(state);
    return state;
}

}  // namespace celltrace
