#include "topicrel/finetune.hpp"

#include <nlohmann/json.hpp>

#include "topicrel/error.hpp"
#include "topicrel/prompt.hpp"
#include "topicrel/text.hpp"

namespace topicrel {

namespace {
constexpr std::string_view kAnswerPrefix = "relationship: ";
}

ConversationRecord make_conversation(const LabeledPair& pair) {
    return ConversationRecord{{
        {"user", render(finetune_template(), pair.topic_a, pair.topic_b)},
        {"assistant", std::string(kAnswerPrefix) + std::string(to_string(pair.label))},
    }};
}

std::string to_json_line(const ConversationRecord& record) {
    nlohmann::ordered_json messages = nlohmann::ordered_json::array();
    for (const auto& m : record.messages) {
        nlohmann::ordered_json msg;
        msg["role"] = m.role;
        msg["content"] = m.content;
        messages.push_back(std::move(msg));
    }
    nlohmann::ordered_json doc;
    doc["messages"] = std::move(messages);
    return doc.dump();
}

ConversationRecord parse_conversation_line(std::string_view line) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("not JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.size() != 1 || !doc.contains("messages") ||
        !doc["messages"].is_array())
        throw FormatError("record must be an object with only a messages array");
    const auto& messages = doc["messages"];
    if (messages.size() != 2) throw FormatError("expected exactly two messages");

    ConversationRecord record;
    for (const auto& m : messages) {
        if (!m.is_object() || m.size() != 2 || !m.contains("role") || !m.contains("content") ||
            !m["role"].is_string() || !m["content"].is_string())
            throw FormatError("message must hold string role and content only");
        record.messages.push_back({m["role"].get<std::string>(), m["content"].get<std::string>()});
    }
    if (record.messages[0].role != "user" || record.messages[1].role != "assistant")
        throw FormatError("roles must be user then assistant");

    static constexpr std::string_view head = "Classify the relationship between '";
    static constexpr std::string_view middle = "' and '";
    const std::string_view user = record.messages[0].content;
    if (user.substr(0, head.size()) != head || user.empty() || user.back() != '\'' ||
        user.find(middle, head.size()) == std::string_view::npos)
        throw FormatError("user content does not match the classification prompt");

    const std::string_view answer = record.messages[1].content;
    if (answer.substr(0, kAnswerPrefix.size()) != kAnswerPrefix ||
        !label_from_string(answer.substr(kAnswerPrefix.size())))
        throw FormatError("assistant content must be 'relationship: <label>'");
    return record;
}

std::string export_conversations_text(const std::vector<LabeledPair>& pairs) {
    std::string out;
    for (const auto& p : pairs) {
        out += to_json_line(make_conversation(p));
        out += '\n';
    }
    return out;
}

std::filesystem::path conversation_path(const std::filesystem::path& dir, const std::string& name,
                                        Split split) {
    return dir / (name + "." + std::string(split_file_tag(split)) + ".chat.jsonl");
}

ExportResult export_conversations(const DatasetBundle& bundle, Split split,
                                  const std::filesystem::path& dir) {
    const auto& pairs = bundle.split(split);
    write_file_atomic(conversation_path(dir, bundle.name, split).string(),
                      export_conversations_text(pairs));
    return {pairs.size(), pairs.empty()};
}

}  // namespace topicrel
