#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "celltrace/montage.hpp"
#include "celltrace/tiff_io.hpp"

namespace celltrace {

using nlohmann::json;

TileSet load_tile_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("missing tile manifest: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const auto base = std::filesystem::absolute(path).parent_path();

    TileSet set;
    try {
        const json doc = json::parse(buffer.str());
        const auto& s = doc.at("spacing_um");
        set.spacing = {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
        set.spacing.validate();
        set.frame_interval_min = doc.value("frame_interval_min", 0.0);

        std::set<int> ids;
        std::set<int> channel_indices;
        for (const auto& t : doc.at("tiles")) {
            Tile tile;
            tile.id = t.at("id").get<int>();
            if (!ids.insert(tile.id).second) {
                throw ParameterError("duplicate tile id " + std::to_string(tile.id));
            }
            const auto& p = t.at("stage_position_vox");
            tile.stage_position = {p.at(0).get<std::int64_t>(), p.at(1).get<std::int64_t>(),
                                   p.at(2).get<std::int64_t>()};
            for (const auto& c : t.at("channels")) {
                const int index = c.at("index").get<int>();
                std::filesystem::path image = c.at("path").get<std::string>();
                if (image.is_relative()) image = base / image;
                if (!std::filesystem::exists(image)) {
                    throw IoError("missing image file: " + image.string());
                }
                VoxelGrid raw = read_tiff(image);
                VoxelGrid grid(raw.dims(), set.spacing, std::move(raw.storage()));
                if (!tile.grids.empty() && tile.grids.begin()->second.dims() != grid.dims()) {
                    throw IoError("channels of tile " + std::to_string(tile.id) +
                                  " differ in dimensions");
                }
                if (!tile.grids.emplace(index, std::move(grid)).second) {
                    throw ParameterError("duplicate channel in tile " + std::to_string(tile.id));
                }
                channel_indices.insert(index);
            }
            if (tile.grids.empty()) {
                throw ParameterError("tile " + std::to_string(tile.id) + " lists no channels");
            }
            set.tiles.push_back(std::move(tile));
        }
        if (set.tiles.empty()) throw ParameterError("tile manifest lists no tiles");
        for (const auto& tile : set.tiles) {
            for (int index : channel_indices) {
                if (!tile.grids.count(index)) {
                    throw ParameterError("tile " + std::to_string(tile.id) + " lacks channel " +
                                         std::to_string(index));
                }
            }
        }

        std::map<int, ChannelSpec> specs;
        for (int index : channel_indices) {
            specs[index] = {index, "channel" + std::to_string(index), ChannelRole::other};
        }
        if (doc.contains("channels")) {
            for (const auto& c : doc["channels"]) {
                const int index = c.at("index").get<int>();
                if (!specs.count(index)) continue;
                specs[index].name = c.value("name", specs[index].name);
                specs[index].role = parse_channel_role(c.value("role", std::string("other")));
            }
        }
        for (const auto& [index, spec] : specs) set.channels.push_back(spec);
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed tile manifest: ") + e.what());
    }
    return set;
}

int default_registration_channel(const TileSet& set) {
    for (const auto& c : set.channels) {
        if (c.role == ChannelRole::vessel) return c.index;
    }
    return set.channels.front().index;
}

void write_montage(const TileSet& set, const MontageSolution& solution,
                   const std::vector<OverlapEdge>& all_edges, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const Composite fused = composite(set.tiles, solution);

    ExperimentManifest manifest;
    manifest.spacing = set.spacing;
    manifest.frame_interval_min = set.frame_interval_min;
    manifest.channels = set.channels;
    manifest.t_count = 1;
    for (const auto& [channel, grid] : fused.channels) {
        manifest.dims = grid.dims();
        const auto file = out_dir / ("fused_c" + std::to_string(channel) + ".tif");
        write_tiff(file, grid, max_value(grid) <= 255 ? 8 : 16);
        manifest.frames[{0, channel}] = std::filesystem::absolute(file);
    }
    save_manifest(manifest, out_dir / "manifest.json");

    auto edge_json = [](const OverlapEdge& e) {
        return json{{"tile_a", e.tile_a},
                    {"tile_b", e.tile_b},
                    {"best_offset_vox", {e.best_offset.i, e.best_offset.j, e.best_offset.k}},
                    {"score", e.score},
                    {"stage_overlap_voxels", e.stage_overlap_voxels}};
    };
    json report;
    report["root"] = solution.root;
    report["origin_vox"] = {fused.origin.i, fused.origin.j, fused.origin.k};
    report["edges"] = json::array();
    for (const auto& e : all_edges) report["edges"].push_back(edge_json(e));
    report["tree_edges"] = json::array();
    for (const auto& e : solution.tree_edges) report["tree_edges"].push_back(edge_json(e));
    report["final_positions_vox"] = json::array();
    for (const auto& [id, p] : solution.final_positions) {
        report["final_positions_vox"].push_back({{"id", id}, {"position", {p.i, p.j, p.k}}});
    }
    std::ofstream out(out_dir / "registration.json", std::ios::binary);
    if (!out) throw IoError("cannot write registration report");
    out << report.dump(2) << "\n";
}

}  // namespace celltrace
