#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "celltrace/projection.hpp"
#include "celltrace/results_io.hpp"
#include "celltrace/server.hpp"
#include "celltrace/transfer.hpp"
#include "synthetic.hpp"

using namespace celltrace;
using namespace celltrace::testing;

namespace {

struct Fixture {
    TempDir dir{"celltrace-server"};
    ExperimentManifest manifest;
    std::unique_ptr<SessionService> service;
    std::unique_ptr<ApiServer> server;
    int port = 0;

    Fixture() {
        manifest = load_manifest(write_experiment(undersegmentation_experiment(), dir.path / "raw"));
        auto state = process_experiment(manifest, {});
        export_results(state, dir.path / "results");
        service = std::make_unique<SessionService>(import_results(dir.path / "results"), dir.path / "results");
        server = std::make_unique<ApiServer>(*service);
        port = server->bind("127.0.0.1", 0);
        server->start();
    }

    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(60, 0);
        return c;
    }
};

Json get_json(httplib::Client& c, const std::string& path, int expect = 200) {
    auto res = c.Get(path);
    REQUIRE(res);
    CHECK(res->status == expect);
    return Json::parse(res->body);
}

httplib::Result post_edit(httplib::Client& c, const Json& body) {
    return c.Post("/api/edits", body.dump(), "application/json");
}

}  // namespace

TEST_CASE("read endpoints") {
    Fixture fx;
    auto c = fx.client();

    const auto exp = get_json(c, "/api/experiment");
    CHECK(exp["t_count"] == 7);
    CHECK(exp["revision"] == 0);
    CHECK(exp["dims"] == Json::array({48, 48, 12}));
    CHECK(exp["channels"].size() == 2);
    CHECK(exp["channels"][1]["role"] == "vessel");

    const auto frame = get_json(c, "/api/frames/2/detections");
    REQUIRE(frame["detections"].size() == 1);
    const auto& det = frame["detections"][0];
    CHECK(det["outline"].size() >= 3);
    CHECK_FALSE(det["track_id"].is_null());
    CHECK_FALSE(det["tree_id"].is_null());
    CHECK(get_json(c, "/api/frames/0/detections?axis=x")["axis"] == "x");
    get_json(c, "/api/frames/7/detections", 404);
    get_json(c, "/api/frames/0/detections?axis=w", 400);

    const auto tree = get_json(c, "/api/lineage/presented");
    CHECK(tree["nodes"].size() >= 1);
    CHECK(tree["vessel_distance_series"].is_array());
    CHECK(tree["cleavage_planes"].is_array());
    const auto tree_id = tree["tree_id"].get<TrackId>();
    CHECK(get_json(c, "/api/lineage/" + std::to_string(tree_id)) == tree);
    get_json(c, "/api/lineage/9999", 404);

    CHECK(get_json(c, "/api/edits").empty());
}

TEST_CASE("projection endpoint") {
    Fixture fx;
    auto c = fx.client();
    auto res = c.Get("/api/frames/3/projection?channel=0&axis=z&floor=120&ceiling=900&gamma=0.5");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Content-Type") == "image/png");
    const auto png = decode_png(res->body);
    TransferFunction tf;
    tf.floor = 120;
    tf.ceiling = 900;
    tf.gamma = 0.5;
    const auto expect = apply_transfer(max_intensity_projection(load_frame(fx.manifest, 3, 0), Axis::z), tf);
    REQUIRE(png.width == 48);
    REQUIRE(png.height == 48);
    CHECK(std::equal(png.pixels.begin(), png.pixels.end(), expect.pixels.begin()));

    auto side = c.Get("/api/frames/0/projection?channel=1&axis=y");
    REQUIRE(side);
    CHECK(side->status == 200);
    CHECK(decode_png(side->body).height == 12);

    CHECK(c.Get("/api/frames/9/projection")->status == 404);
    CHECK(c.Get("/api/frames/0/projection?channel=4")->status == 404);
    CHECK(c.Get("/api/frames/0/projection?floor=500&ceiling=100")->status == 400);
    CHECK(c.Get("/api/frames/0/projection?gamma=abc")->status == 400);
}

TEST_CASE("edits over HTTP") {
    Fixture fx;
    auto c = fx.client();
    const auto merged = get_json(c, "/api/frames/2/detections")["detections"][0]["id"].get<DetectionId>();

    // Readers keep getting answers while the edit runs.
    std::atomic<bool> done{false};
    std::atomic<int> reads{0}, failures{0};
    std::thread reader([&] {
        auto rc = fx.client();
        while (!done) {
            auto r = rc.Get("/api/experiment");
            if (r && r->status == 200) ++reads; else ++failures;
        }
    });
    auto res = post_edit(c, {{"revision", 0}, {"kind", "split"}, {"detection_id", merged}, {"n", 2}});
    done = true;
    reader.join();
    CHECK(failures == 0);
    CHECK(reads > 0);
    REQUIRE(res);
    REQUIRE(res->status == 200);
    const auto record = Json::parse(res->body);
    CHECK(record["revision"] == 1);
    CHECK(record["products"].size() == 2);
    CHECK(record["propagation"].size() == 2);

    auto stale = post_edit(c, {{"revision", 0}, {"kind", "delete"}, {"detection_id", merged}});
    REQUIRE(stale);
    CHECK(stale->status == 409);
    CHECK(get_json(c, "/api/experiment")["revision"] == 1);

    CHECK(post_edit(c, {{"revision", 1}, {"kind", "delete"}, {"detection_id", 123456}})->status == 404);
    CHECK(post_edit(c, {{"revision", 1}, {"kind", "merge"}, {"detection_id", merged}})->status == 400);
    CHECK(c.Post("/api/edits", "{not json", "application/json")->status == 400);

    const auto log = get_json(c, "/api/edits");
    REQUIRE(log.size() == 1);
    CHECK(log[0] == record);
    CHECK(get_json(c, "/api/frames/3/detections")["detections"].size() == 2);

    // The results directory follows the committed state.
    std::ifstream in(fx.dir.path / "results" / "edits.jsonl");
    std::string line;
    std::getline(in, line);
    CHECK(Json::parse(line) == record);
    CHECK_FALSE(std::getline(in, line));
    const auto reloaded = import_results(fx.dir.path / "results");
    CHECK(reloaded.revision == 1);
    CHECK(reloaded.tracking == fx.service->snapshot()->tracking);
}
