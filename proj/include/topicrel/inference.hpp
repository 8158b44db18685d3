#pragma once

#include <cstddef>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "topicrel/labels.hpp"

namespace topicrel {

enum class EndpointDialect { simple_generate, chat_completions, mock };

std::string_view to_string(EndpointDialect dialect) noexcept;
EndpointDialect endpoint_dialect_from_string(std::string_view text);

// `base_url` is the full URL requests are POSTed to, e.g.
// http://localhost:5001/api/v1/generate or http://host/v1/chat/completions.
struct EndpointConfig {
    std::string base_url;
    EndpointDialect dialect = EndpointDialect::simple_generate;
    std::optional<std::string> model_name;
    std::optional<std::string> auth_env_var;
    double temperature = 0.0;
    int max_new_tokens = 256;
    std::vector<std::string> stop_sequences;
    double timeout_seconds = 60.0;
    int retries = 3;
    double backoff_base_seconds = 0.5;
    std::size_t max_in_flight = 4;

    void validate() const;
};

EndpointConfig endpoint_from_json(const nlohmann::json& doc);
nlohmann::ordered_json to_json(const EndpointConfig& config);

enum class MockMode { oracle, scripted, fixed };

// Deterministic backend used in place of a live endpoint.
//
// oracle: answers from gold labels keyed by pair_id (see request tags below).
// scripted: looks the prompt text up in `script`, then the request tag;
//           unknown keys throw UnknownScriptKey.
// fixed: always answers `fixed_response`.
struct MockScript {
    MockMode mode = MockMode::fixed;
    std::map<std::string, std::string> script;
    std::string fixed_response;
    std::map<std::string, RelationLabel> gold;

    std::string respond(std::string_view prompt, std::string_view request_tag) const;
};

// Request tags. A standard run uses the bare pair_id; a bidirectional run
// adds a direction and stage suffix: `<pair_id>#ab.1`, `#ab.2`, `#ba.1`, `#ba.2`.
struct RequestTag {
    std::string pair_id;
    bool reversed = false;  // true for the (B, A) direction
    int stage = 0;          // 0 for standard, 1 or 2 for chain-of-thought

    std::string str() const;
    static RequestTag parse(std::string_view tag);
};

struct GenerationResult {
    std::string text;
    std::optional<std::string> error;  // "<Kind>: message" when the request failed
    int attempts = 0;

    bool ok() const noexcept { return !error.has_value(); }
};

// Uniform, thread-safe client over the supported wire dialects.
class InferenceClient {
public:
    explicit InferenceClient(EndpointConfig config, std::optional<MockScript> mock = std::nullopt);
    ~InferenceClient();

    InferenceClient(const InferenceClient&) = delete;
    InferenceClient& operator=(const InferenceClient&) = delete;

    // Blocking single request with retries. Throws TransportError,
    // HttpStatusError, MalformedResponseBody, MissingAuthToken or
    // UnknownScriptKey.
    std::string generate(std::string_view prompt, std::string_view request_tag) const;

    // Runs every prompt with at most max_in_flight concurrent requests.
    // Per-tag failures are isolated in the returned map.
    std::map<std::string, GenerationResult> generate_batch(
        const std::vector<std::pair<std::string, std::string>>& tagged_prompts) const;

    // Append one JSON line per request (tag, prompt, response or error).
    void enable_audit_log(const std::string& path);

    const EndpointConfig& config() const noexcept { return config_; }

    // Builds the exact request body for the configured dialect.
    nlohmann::json request_body(std::string_view prompt) const;
    // Extracts the generated text from a response body for the dialect.
    std::string extract_text(std::string_view body) const;

private:
    std::string attempt_once(std::string_view prompt, std::string_view request_tag) const;
    std::string generate_counted(std::string_view prompt, std::string_view request_tag,
                                 int& attempts) const;
    void audit(std::string_view tag, std::string_view prompt, const GenerationResult& result) const;

    EndpointConfig config_;
    std::optional<MockScript> mock_;
    std::string auth_token_;
    struct Url;
    std::unique_ptr<Url> url_;
    mutable std::mutex audit_mutex_;
    std::unique_ptr<std::ofstream> audit_out_;
};

}  // namespace topicrel
