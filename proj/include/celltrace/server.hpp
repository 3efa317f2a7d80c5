#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "celltrace/session.hpp"

namespace celltrace {

/// Holds the committed session. Edits are serialized; readers take an immutable snapshot
/// and never wait for an edit in progress.
class SessionService {
public:
    explicit SessionService(SessionState state, std::optional<std::filesystem::path> results_dir = {});

    std::shared_ptr<const SessionState> snapshot() const;

    /// Applies and commits an edit; with a results directory the export is updated.
    /// Throws ConflictError on a stale revision.
    EditRecord submit(const EditRequest& request);

private:
    mutable std::mutex snapshot_mutex_;
    std::mutex write_mutex_;
    std::shared_ptr<const SessionState> state_;
    std::optional<std::filesystem::path> results_dir_;
};

/// JSON-over-HTTP API on top of a SessionService.
class ApiServer {
public:
    explicit ApiServer(SessionService& service);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds to `port` (0 picks a free one) and returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop(); blocking.
    void listen();
    /// Serves on a background thread.
    void start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace celltrace
