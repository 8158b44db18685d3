#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "topicrel/dataset.hpp"

namespace topicrel {

struct ChatMessage {
    std::string role;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

// One training conversation: a user prompt and the assistant's answer.
struct ConversationRecord {
    std::vector<ChatMessage> messages;

    bool operator==(const ConversationRecord&) const = default;
};

ConversationRecord make_conversation(const LabeledPair& pair);

// JSON line without the trailing newline.
std::string to_json_line(const ConversationRecord& record);

// Parses one exported line and checks the record invariants. Throws
// FormatError describing the first violation.
ConversationRecord parse_conversation_line(std::string_view line);

std::string export_conversations_text(const std::vector<LabeledPair>& pairs);

struct ExportResult {
    std::size_t written = 0;
    bool empty_split = false;  // file still written, zero lines
};

// Writes <dir>/<bundle.name>.<split>.chat.jsonl.
ExportResult export_conversations(const DatasetBundle& bundle, Split split,
                                  const std::filesystem::path& dir);

std::filesystem::path conversation_path(const std::filesystem::path& dir, const std::string& name,
                                        Split split);

}  // namespace topicrel
