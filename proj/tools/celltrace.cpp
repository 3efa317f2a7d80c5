#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "celltrace/error.hpp"
#include "celltrace/montage.hpp"
#include "celltrace/results_io.hpp"
#include "celltrace/server.hpp"
#include "celltrace/session.hpp"

using namespace celltrace;

namespace {

std::vector<double> parse_weights(const std::string& text) {
    std::vector<double> weights;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            weights.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ParameterError("bad weight '" + item + "'");
        }
    }
    return weights;
}

struct ProcessArgs {
    std::string manifest;
    std::string out;
    std::string weights = "1,3,1,1,1";
    bool no_projections = false;
    PipelineConfig config;
};

int run_process(ProcessArgs& args) {
    args.config.tracking.weights = parse_weights(args.weights);
    const auto manifest = load_manifest(args.manifest);
    const auto state = process_experiment(manifest, args.config);
    export_results(state, args.out, !args.no_projections);
    std::size_t detections = 0;
    for (const auto& f : state.detections) detections += f.size();
    std::printf("%d frames, %zu detections, %zu tracks -> %s\n", manifest.t_count, detections,
                state.tracking.tracks.size(), args.out.c_str());
    return 0;
}

struct MontageArgs {
    std::string tiles;
    std::string out;
    int channel = -1;
    int window = 8;
};

int run_montage(const MontageArgs& args) {
    const auto set = load_tile_set(args.tiles);
    const int channel = args.channel >= 0 ? args.channel : default_registration_channel(set);
    const auto edges = register_all(set.tiles, channel, args.window);
    std::map<int, Index3> stage;
    for (const auto& t : set.tiles) stage[t.id] = t.stage_position;
    const auto solution = solve_from_edges(stage, edges);
    write_montage(set, solution, edges, args.out);
    for (const auto& [id, p] : solution.final_positions) {
        std::printf("tile %d -> (%lld, %lld, %lld)\n", id, static_cast<long long>(p.i),
                    static_cast<long long>(p.j), static_cast<long long>(p.k));
    }
    return 0;
}

struct ServeArgs {
    std::string results;
    std::string host = "127.0.0.1";
    int port = 8080;
};

int run_serve(const ServeArgs& args) {
    SessionService service(import_results(args.results), std::filesystem::path(args.results));
    ApiServer server(service);
    const int port = server.bind(args.host, args.port);
    std::printf("serving %s on http://%s:%d\n", args.results.c_str(), args.host.c_str(), port);
    std::fflush(stdout);
    server.listen();
    return 0;
}

struct EditArgs {
    std::string results;
    std::string kind;
    DetectionId detection = -1;
    int n = 2;
    TrackId track = -1;
    long long revision = -1;
};

int run_edit(const EditArgs& args) {
    SessionService service(import_results(args.results), std::filesystem::path(args.results));
    EditRequest request;
    request.revision = args.revision >= 0 ? static_cast<std::uint64_t>(args.revision) : service.snapshot()->revision;
    request.kind = parse_edit_kind(args.kind);
    request.detection_id = args.detection;
    request.n = args.n;
    request.track_id = args.track;
    std::cout << edit_record_to_json(service.submit(request)).dump() << "\n";
    return 0;
}

struct ReplayArgs {
    std::string results;
    std::string out;
    bool no_projections = false;
};

int run_replay(const ReplayArgs& args) {
    const auto saved = import_results(args.results);
    const auto state = replay(saved.manifest, saved.config, saved.edit_log);
    export_results(state, args.out, !args.no_projections);
    std::printf("replayed %zu edits -> %s\n", saved.edit_log.size(), args.out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"celltrace: 5-D live-cell segmentation, tracking and lineage analysis"};
    app.require_subcommand(1);

    ProcessArgs process;
    auto* p = app.add_subcommand("process", "Run the batch pipeline on an experiment manifest");
    p->add_option("--manifest", process.manifest, "Experiment manifest (JSON)")->required()->check(CLI::ExistingFile);
    p->add_option("--out", process.out, "Results directory")->required();
    p->add_option("--cell-sigma-um", process.config.denoise.gaussian_sigma_um, "Background low-pass sigma (um)")
        ->capture_default_str();
    p->add_option("--median-radius", process.config.denoise.median_radius, "Median filter radius (voxels)")
        ->capture_default_str();
    p->add_option("--min-volume-um3", process.config.segmentation.min_volume_um3, "Smallest kept cell (um^3)")
        ->capture_default_str();
    p->add_option("--window", process.config.tracking.window, "Tracking window W (frames)")->capture_default_str();
    p->add_option("--weights", process.weights, "Comma-separated weights for i = -1 .. W-1")->capture_default_str();
    p->add_option("--patience", process.config.tracking.occlusion_patience,
                  "Frames an unextended track stays a candidate (default W-1)");
    p->add_option("--gate-um", process.config.lineage.candidate_gate_um, "Parent candidate gate (um)")
        ->capture_default_str();
    p->add_flag("--vessel-min-over-voxels", process.config.lineage.vessel_min_over_voxels,
                "Vessel distance as minimum over the cell's voxels");
    p->add_option("--mrf-max-iters", process.config.mrf_max_iterations, "Vessel MRF iteration cap")
        ->capture_default_str();
    p->add_option("--seed", process.config.seed, "Seed for split edits")->capture_default_str();
    p->add_flag("--no-projections", process.no_projections, "Skip per-frame projection images");

    MontageArgs montage;
    auto* m = app.add_subcommand("montage", "Register and fuse overlapping tiles");
    m->add_option("--tiles", montage.tiles, "Tile manifest (JSON)")->required()->check(CLI::ExistingFile);
    m->add_option("--channel", montage.channel, "Registration channel (default: vessel channel)");
    m->add_option("--window", montage.window, "Search window (voxels per axis)")->capture_default_str();
    m->add_option("--out", montage.out, "Output directory")->required();

    ServeArgs serve;
    auto* s = app.add_subcommand("serve", "Serve a results directory over HTTP");
    s->add_option("--results", serve.results, "Results directory")->required()->check(CLI::ExistingDirectory);
    s->add_option("--host", serve.host, "Bind address")->capture_default_str();
    s->add_option("--port", serve.port, "Port (0 picks a free one)")->capture_default_str();

    EditArgs edit;
    auto* e = app.add_subcommand("edit", "Apply one correction to a results directory");
    e->add_option("--results", edit.results, "Results directory")->required()->check(CLI::ExistingDirectory);
    e->add_option("--kind", edit.kind, "split | delete | set_track")
        ->required()
        ->check(CLI::IsMember({"split", "delete", "set_track"}));
    e->add_option("--detection", edit.detection, "Target detection id")->required();
    e->add_option("--n", edit.n, "Split count")->capture_default_str();
    e->add_option("--track", edit.track, "Track id for set_track");
    e->add_option("--revision", edit.revision, "Expected revision (default: current)");

    ReplayArgs replay_args;
    auto* r = app.add_subcommand("replay", "Re-run processing and the edit log of a results directory");
    r->add_option("--results", replay_args.results, "Results directory")->required()->check(CLI::ExistingDirectory);
    r->add_option("--out", replay_args.out, "Output directory")->required();
    r->add_flag("--no-projections", replay_args.no_projections, "Skip per-frame projection images");

    CLI11_PARSE(app, argc, argv);
    try {
        if (p->parsed()) return run_process(process);
        if (m->parsed()) return run_montage(montage);
        if (s->parsed()) return run_serve(serve);
        if (e->parsed()) return run_edit(edit);
        if (r->parsed()) return run_replay(replay_args);
    } catch (const ConflictError& ex) {
        std::fprintf(stderr, "conflict: %s\n", ex.what());
        return 3;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 0;
}
