#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "topicrel/adjudication.hpp"

namespace topicrel {

// HTTP/JSON front end of an AdjudicationStore:
//   GET  /api/queue/next?annotator=<id>   candidate JSON or 204
//   POST /api/verdicts                    {"status": ...}
//   GET  /api/progress                    {"pending","accepted","rejected","total"}
//   GET  /api/export                      finalized same-as pairs as JSONL
// Static review-ui assets are served from `static_dir` when given.
class AdjudicationServer {
public:
    explicit AdjudicationServer(AdjudicationStore& store,
                                std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~AdjudicationServer();

    AdjudicationServer(const AdjudicationServer&) = delete;
    AdjudicationServer& operator=(const AdjudicationServer&) = delete;

    // Binds the socket; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);

    // Serves on a background thread until stop().
    void start();
    // Serves on the calling thread until stop() is called elsewhere.
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::thread worker_;
};

}  // namespace topicrel
