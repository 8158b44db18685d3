#include "topicrel/inference.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <set>
#include <thread>

#include <httplib.h>

#include "topicrel/error.hpp"

namespace topicrel {

std::string_view to_string(EndpointDialect dialect) noexcept {
    switch (dialect) {
        case EndpointDialect::simple_generate: return "simple-generate";
        case EndpointDialect::chat_completions: return "chat-completions";
        case EndpointDialect::mock: return "mock";
    }
    return "mock";
}

EndpointDialect endpoint_dialect_from_string(std::string_view text) {
    if (text == "simple-generate") return EndpointDialect::simple_generate;
    if (text == "chat-completions") return EndpointDialect::chat_completions;
    if (text == "mock") return EndpointDialect::mock;
    throw FormatError("unknown endpoint dialect '" + std::string(text) + "'");
}

void EndpointConfig::validate() const {
    if (!(temperature >= 0.0)) throw InvalidArgument("temperature must be >= 0");
    if (max_in_flight < 1) throw InvalidArgument("max_in_flight must be >= 1");
    if (retries < 0) throw InvalidArgument("retries must be >= 0");
    if (max_new_tokens < 1) throw InvalidArgument("max_new_tokens must be >= 1");
    if (dialect != EndpointDialect::mock && base_url.empty())
        throw InvalidArgument("base_url is required for dialect " + std::string(to_string(dialect)));
}

EndpointConfig endpoint_from_json(const nlohmann::json& doc) {
    try {
        EndpointConfig c;
        c.dialect = endpoint_dialect_from_string(doc.value("dialect", "simple-generate"));
        c.base_url = doc.value("base_url", "");
        if (doc.contains("model_name")) c.model_name = doc.at("model_name").get<std::string>();
        if (doc.contains("auth_env_var")) c.auth_env_var = doc.at("auth_env_var").get<std::string>();
        c.temperature = doc.value("temperature", c.temperature);
        c.max_new_tokens = doc.value("max_new_tokens", c.max_new_tokens);
        c.stop_sequences = doc.value("stop_sequences", c.stop_sequences);
        c.timeout_seconds = doc.value("timeout", c.timeout_seconds);
        c.retries = doc.value("retries", c.retries);
        c.backoff_base_seconds = doc.value("backoff_base", c.backoff_base_seconds);
        c.max_in_flight = doc.value("max_in_flight", c.max_in_flight);
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("endpoint config: ") + e.what());
    }
}

nlohmann::ordered_json to_json(const EndpointConfig& c) {
    nlohmann::ordered_json doc;
    doc["base_url"] = c.base_url;
    doc["dialect"] = to_string(c.dialect);
    if (c.model_name) doc["model_name"] = *c.model_name;
    if (c.auth_env_var) doc["auth_env_var"] = *c.auth_env_var;
    doc["temperature"] = c.temperature;
    doc["max_new_tokens"] = c.max_new_tokens;
    doc["stop_sequences"] = c.stop_sequences;
    doc["timeout"] = c.timeout_seconds;
    doc["retries"] = c.retries;
    doc["backoff_base"] = c.backoff_base_seconds;
    doc["max_in_flight"] = c.max_in_flight;
    return doc;
}

// ---- request tags ----

std::string RequestTag::str() const {
    if (stage == 0) return pair_id;
    return pair_id + (reversed ? "#ba." : "#ab.") + std::to_string(stage);
}

RequestTag RequestTag::parse(std::string_view tag) {
    RequestTag out;
    const auto hash = tag.rfind('#');
    if (hash == std::string_view::npos || tag.size() - hash != 5) {
        out.pair_id = std::string(tag);
        return out;
    }
    const auto suffix = tag.substr(hash + 1);
    const bool ab = suffix.substr(0, 3) == "ab.";
    const bool ba = suffix.substr(0, 3) == "ba.";
    const char stage = suffix[3];
    if ((!ab && !ba) || (stage != '1' && stage != '2')) {
        out.pair_id = std::string(tag);
        return out;
    }
    out.pair_id = std::string(tag.substr(0, hash));
    out.reversed = ba;
    out.stage = stage - '0';
    return out;
}

// ---- mock backend ----

std::string MockScript::respond(std::string_view prompt, std::string_view request_tag) const {
    switch (mode) {
        case MockMode::fixed: return fixed_response;
        case MockMode::scripted: {
            if (auto it = script.find(std::string(prompt)); it != script.end()) return it->second;
            if (auto it = script.find(std::string(request_tag)); it != script.end()) return it->second;
            throw UnknownScriptKey("no scripted response for request '" + std::string(request_tag) + "'");
        }
        case MockMode::oracle: {
            const auto tag = RequestTag::parse(request_tag);
            const auto it = gold.find(tag.pair_id);
            if (it == gold.end()) throw UnknownScriptKey("no gold label for pair '" + tag.pair_id + "'");
            if (tag.stage == 1) {
                return "Both topics are defined and used together in a sentence; "
                       "their relationship is considered in the next step.";
            }
            const RelationLabel label = tag.reversed ? invert_label(it->second) : it->second;
            return "relationship: " + std::string(to_string(label));
        }
    }
    throw UnknownScriptKey("unsupported mock mode");
}

// ---- client ----

struct InferenceClient::Url {
    std::string scheme_host_port;
    std::string path;
};

InferenceClient::InferenceClient(EndpointConfig config, std::optional<MockScript> mock)
    : config_(std::move(config)), mock_(std::move(mock)) {
    config_.validate();
    if (config_.dialect == EndpointDialect::mock) {
        if (!mock_) throw InvalidArgument("mock dialect requires a mock script");
        return;
    }
    if (config_.auth_env_var) {
        const char* token = std::getenv(config_.auth_env_var->c_str());
        if (!token || !*token)
            throw MissingAuthToken("environment variable " + *config_.auth_env_var + " is not set");
        auth_token_ = token;
    }
    const auto scheme_end = config_.base_url.find("://");
    if (scheme_end == std::string::npos) throw InvalidArgument("base_url needs a scheme: " + config_.base_url);
    const auto path_start = config_.base_url.find('/', scheme_end + 3);
    url_ = std::make_unique<Url>();
    if (path_start == std::string::npos) {
        url_->scheme_host_port = config_.base_url;
        url_->path = "/";
    } else {
        url_->scheme_host_port = config_.base_url.substr(0, path_start);
        url_->path = config_.base_url.substr(path_start);
    }
}

InferenceClient::~InferenceClient() = default;

void InferenceClient::enable_audit_log(const std::string& path) {
    std::lock_guard lock(audit_mutex_);
    audit_out_ = std::make_unique<std::ofstream>(path, std::ios::app);
    if (!*audit_out_) throw IoError("cannot open audit log " + path);
}

nlohmann::json InferenceClient::request_body(std::string_view prompt) const {
    nlohmann::json body;
    if (config_.dialect == EndpointDialect::chat_completions) {
        if (config_.model_name) body["model"] = *config_.model_name;
        body["messages"] = nlohmann::json::array(
            {nlohmann::json{{"role", "user"}, {"content", std::string(prompt)}}});
        body["temperature"] = config_.temperature;
        body["max_tokens"] = config_.max_new_tokens;
    } else {
        body["prompt"] = std::string(prompt);
        body["max_new_tokens"] = config_.max_new_tokens;
        body["temperature"] = config_.temperature;
        body["stop"] = config_.stop_sequences;
    }
    return body;
}

std::string InferenceClient::extract_text(std::string_view body) const {
    try {
        const auto doc = nlohmann::json::parse(body);
        if (config_.dialect == EndpointDialect::chat_completions) {
            return doc.at("choices").at(0).at("message").at("content").get<std::string>();
        }
        if (doc.contains("text")) return doc.at("text").get<std::string>();
        // KoboldAI-style servers wrap the text in results[0].
        return doc.at("results").at(0).at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw MalformedResponseBody(std::string("unexpected response body: ") + e.what());
    }
}

std::string InferenceClient::attempt_once(std::string_view prompt, std::string_view) const {
    httplib::Client http(url_->scheme_host_port);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(config_.timeout_seconds));
    http.set_connection_timeout(timeout);
    http.set_read_timeout(timeout);
    http.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!auth_token_.empty()) headers.emplace("Authorization", "Bearer " + auth_token_);
    const auto result = http.Post(url_->path, headers, request_body(prompt).dump(), "application/json");
    if (!result) throw TransportError(httplib::to_string(result.error()));
    if (result->status < 200 || result->status >= 300) throw HttpStatusError(result->status);
    return extract_text(result->body);
}

std::string InferenceClient::generate_counted(std::string_view prompt, std::string_view request_tag,
                                              int& attempts) const {
    attempts = 0;
    if (config_.dialect == EndpointDialect::mock) {
        attempts = 1;
        return mock_->respond(prompt, request_tag);
    }
    for (int attempt = 0;; ++attempt) {
        try {
            ++attempts;
            return attempt_once(prompt, request_tag);
        } catch (const HttpStatusError& e) {
            const bool retryable = e.status() >= 500 || e.status() == 429;
            if (!retryable || attempt >= config_.retries) throw;
        } catch (const TransportError&) {
            if (attempt >= config_.retries) throw;
        }
        const double delay = config_.backoff_base_seconds * std::pow(2.0, attempt);
        std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
}

std::string InferenceClient::generate(std::string_view prompt, std::string_view request_tag) const {
    int attempts = 0;
    GenerationResult result;
    try {
        result.text = generate_counted(prompt, request_tag, attempts);
    } catch (const Error& e) {
        result.error = e.kind() + ": " + e.what();
        result.attempts = attempts;
        audit(request_tag, prompt, result);
        throw;
    }
    result.attempts = attempts;
    audit(request_tag, prompt, result);
    return result.text;
}

std::map<std::string, GenerationResult> InferenceClient::generate_batch(
    const std::vector<std::pair<std::string, std::string>>& tagged_prompts) const {
    {
        std::set<std::string_view> tags;
        for (const auto& [tag, _] : tagged_prompts) {
            if (!tags.insert(tag).second) throw InvalidArgument("duplicate request tag '" + tag + "'");
        }
    }
    std::vector<GenerationResult> results(tagged_prompts.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tagged_prompts.size(); i = next++) {
            const auto& [tag, prompt] = tagged_prompts[i];
            auto& r = results[i];
            try {
                r.text = generate_counted(prompt, tag, r.attempts);
            } catch (const Error& e) {
                r.error = e.kind() + ": " + e.what();
            } catch (const std::exception& e) {
                r.error = std::string("Error: ") + e.what();
            }
            audit(tag, prompt, r);
        }
    };
    const std::size_t workers = std::min(config_.max_in_flight, tagged_prompts.size());
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    std::map<std::string, GenerationResult> out;
    for (std::size_t i = 0; i < tagged_prompts.size(); ++i) {
        out.emplace(tagged_prompts[i].first, std::move(results[i]));
    }
    return out;
}

void InferenceClient::audit(std::string_view tag, std::string_view prompt,
                            const GenerationResult& result) const {
    std::lock_guard lock(audit_mutex_);
    if (!audit_out_) return;
    nlohmann::ordered_json line;
    line["tag"] = std::string(tag);
    line["prompt"] = std::string(prompt);
    if (result.ok()) line["response"] = result.text;
    else line["error"] = *result.error;
    line["attempts"] = result.attempts;
    *audit_out_ << line.dump() << '\n';
    audit_out_->flush();
}

}  // namespace topicrel
