#include "topicrel/adjudication_server.hpp"

#include <httplib.h>

#include "topicrel/error.hpp"

namespace topicrel {

struct AdjudicationServer::Impl {
    explicit Impl(AdjudicationStore& s) : store(s) {}
    AdjudicationStore& store;
    httplib::Server server;
};

namespace {

void send_error(httplib::Response& res, int status, const Error& e) {
    res.status = status;
    res.set_content(nlohmann::json{{"error", e.kind()}, {"message", e.what()}}.dump(),
                    "application/json");
}

}  // namespace

AdjudicationServer::AdjudicationServer(AdjudicationStore& store,
                                       std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(store)) {
    auto& server = impl_->server;
    auto& st = impl_->store;

    server.Get("/api/queue/next", [&st](const httplib::Request& req, httplib::Response& res) {
        const std::string annotator = req.get_param_value("annotator");
        if (annotator.empty()) {
            send_error(res, 400, InvalidArgument("annotator query parameter is required"));
            return;
        }
        const auto next = st.next_pending(annotator);
        if (!next) {
            res.status = 204;
            return;
        }
        auto doc = to_json(*next);
        doc["status"] = to_string(CandidateStatus::pending);
        res.set_content(doc.dump(), "application/json");
    });

    server.Post("/api/verdicts", [&st](const httplib::Request& req, httplib::Response& res) {
        Verdict verdict;
        try {
            const auto body = nlohmann::json::parse(req.body);
            verdict = verdict_from_json(body);
            verdict.timestamp.clear();  // server clock is authoritative
        } catch (const nlohmann::json::exception& e) {
            send_error(res, 400, FormatError(e.what()));
            return;
        } catch (const FormatError& e) {
            send_error(res, 400, e);
            return;
        }
        try {
            const auto status = st.record_verdict(std::move(verdict));
            res.set_content(nlohmann::json{{"status", to_string(status)}}.dump(), "application/json");
        } catch (const UnknownPair& e) {
            send_error(res, 404, e);
        } catch (const InvalidArgument& e) {
            send_error(res, 400, e);
        }
    });

    server.Get("/api/progress", [&st](const httplib::Request&, httplib::Response& res) {
        const auto p = st.progress();
        nlohmann::ordered_json doc;
        doc["pending"] = p.pending;
        doc["accepted"] = p.accepted;
        doc["rejected"] = p.rejected;
        doc["total"] = p.total;
        res.set_content(doc.dump(), "application/json");
    });

    server.Get("/api/export", [&st](const httplib::Request&, httplib::Response& res) {
        res.set_content(to_jsonl(st.finalize()), "application/x-ndjson");
    });

    if (static_dir) {
        if (!server.set_mount_point("/", static_dir->string()))
            throw IoError("static asset directory " + static_dir->string() + " does not exist");
    }
}

AdjudicationServer::~AdjudicationServer() { stop(); }

int AdjudicationServer::bind(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void AdjudicationServer::start() {
    worker_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void AdjudicationServer::listen() { impl_->server.listen_after_bind(); }

void AdjudicationServer::stop() {
    if (impl_) impl_->server.stop();
    if (worker_.joinable()) worker_.join();
}

}  // namespace topicrel
