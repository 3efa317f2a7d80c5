#include "celltrace/server.hpp"

#include <httplib.h>

#include <algorithm>
#include <thread>

#include "celltrace/error.hpp"
#include "celltrace/projection.hpp"
#include "celltrace/results_io.hpp"
#include "celltrace/transfer.hpp"

namespace celltrace {

SessionService::SessionService(SessionState state, std::optional<std::filesystem::path> results_dir)
    : state_(std::make_shared<const SessionState>(std::move(state))), results_dir_(std::move(results_dir)) {}

std::shared_ptr<const SessionState> SessionService::snapshot() const {
    std::lock_guard lock(snapshot_mutex_);
    return state_;
}

EditRecord SessionService::submit(const EditRequest& request) {
    std::lock_guard writer(write_mutex_);
    auto current = snapshot();
    auto [next, record] = apply_edit(*current, request);
    auto committed = std::make_shared<const SessionState>(std::move(next));
    if (results_dir_) export_results(*committed, *results_dir_, false);
    std::lock_guard lock(snapshot_mutex_);
    state_ = std::move(committed);
    return record;
}

namespace {

void send_json(httplib::Response& res, const Json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <class F>
void guarded(httplib::Response& res, F&& handler) {
    try {
        handler();
    } catch (const ConflictError& e) {
        send_json(res, {{"error", e.what()}}, 409);
    } catch (const NotFoundError& e) {
        send_json(res, {{"error", e.what()}}, 404);
    } catch (const ParameterError& e) {
        send_json(res, {{"error", e.what()}}, 400);
    } catch (const std::exception& e) {
        send_json(res, {{"error", e.what()}}, 500);
    }
}

int int_param(const httplib::Request& req, const std::string& name, int fallback) {
    if (!req.has_param(name)) return fallback;
    try {
        return std::stoi(req.get_param_value(name));
    } catch (const std::exception&) {
        throw ParameterError("query parameter '" + name + "' must be an integer");
    }
}

std::optional<double> real_param(const httplib::Request& req, const std::string& name) {
    if (!req.has_param(name) || req.get_param_value(name).empty()) return std::nullopt;
    try {
        return std::stod(req.get_param_value(name));
    } catch (const std::exception&) {
        throw ParameterError("query parameter '" + name + "' must be a number");
    }
}

std::int64_t path_int(const httplib::Request& req, std::size_t n) {
    try {
        return std::stoll(req.matches[static_cast<int>(n)].str());
    } catch (const std::exception&) {
        throw ParameterError("bad path parameter");
    }
}

}  // namespace

struct ApiServer::Impl {
    SessionService& service;
    httplib::Server server;
    std::thread thread;

    explicit Impl(SessionService& s) : service(s) { routes(); }

    void routes() {
        server.Get("/api/experiment", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] { send_json(res, experiment_summary(*service.snapshot())); });
        });

        server.Get(R"(/api/frames/(-?\d+)/projection)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const auto state = service.snapshot();
                const int t = static_cast<int>(path_int(req, 1));
                if (t < 0 || t >= state->manifest.t_count) throw NotFoundError("frame out of range");
                const int channel = int_param(req, "channel", state->manifest.channels.front().index);
                if (!state->manifest.has_channel(channel)) throw NotFoundError("unknown channel");
                const Axis axis = parse_axis(req.has_param("axis") ? req.get_param_value("axis") : "z");
                const Image16 mip = max_intensity_projection(load_frame(state->manifest, t, channel), axis);
                TransferFunction tf;
                tf.floor = real_param(req, "floor").value_or(0.0);
                const double peak = mip.pixels.empty() ? 0.0 : *std::max_element(mip.pixels.begin(), mip.pixels.end());
                tf.ceiling = real_param(req, "ceiling").value_or(std::max(peak, tf.floor + 1.0));
                tf.gamma = real_param(req, "gamma").value_or(1.0);
                tf.validate();
                res.set_content(encode_png(apply_transfer(mip, tf)), "image/png");
            });
        });

        server.Get(R"(/api/frames/(-?\d+)/detections)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const Axis axis = parse_axis(req.has_param("axis") ? req.get_param_value("axis") : "z");
                send_json(res, frame_detections_summary(*service.snapshot(), static_cast<int>(path_int(req, 1)), axis));
            });
        });

        server.Get("/api/lineage/presented", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] {
                const auto state = service.snapshot();
                const auto& presented = state->lineage.forest.presented_tree;
                if (!presented) throw NotFoundError("no lineage trees");
                send_json(res, lineage_tree(*state, *presented));
            });
        });

        server.Get(R"(/api/lineage/(-?\d+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, lineage_tree(*service.snapshot(), path_int(req, 1))); });
        });

        server.Post("/api/edits", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                Json body;
                try {
                    body = Json::parse(req.body);
                } catch (const Json::exception&) {
                    throw ParameterError("request body is not JSON");
                }
                send_json(res, edit_record_to_json(service.submit(edit_request_from_json(body))));
            });
        });

        server.Get("/api/edits", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] {
                Json log = Json::array();
                for (const auto& r : service.snapshot()->edit_log) log.push_back(edit_record_to_json(r));
                send_json(res, log);
            });
        });
    }
};

ApiServer::ApiServer(SessionService& service) : impl_(std::make_unique<Impl>(service)) {}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw IoError("cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void ApiServer::listen() { impl_->server.listen_after_bind(); }

void ApiServer::start() {
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void ApiServer::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace celltrace
