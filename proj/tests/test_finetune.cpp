#include <gtest/gtest.h>

#include "support.hpp"
#include "topicrel/error.hpp"
#include "topicrel/finetune.hpp"
#include "topicrel/prompt.hpp"
#include "topicrel/text.hpp"

using namespace topicrel;

namespace {

LabeledPair pair(std::string a, std::string b, RelationLabel label, std::string id = "s:br:00001") {
    return {std::move(id), std::move(a), std::move(b), label, "s", Provenance::hierarchy_edge};
}

}  // namespace

TEST(Conversation, PaperExampleByteExact) {
    const auto line = to_json_line(make_conversation(pair("Biology", "Genetics", RelationLabel::broader)));
    EXPECT_EQ(line,
              R"({"messages":[{"role":"user","content":"Classify the relationship between 'Biology' and 'Genetics'"},)"
              R"({"role":"assistant","content":"relationship: broader"}]})");
}

TEST(Conversation, SameAsVocabulary) {
    const auto rec = make_conversation(pair("A", "B", RelationLabel::same_as));
    EXPECT_EQ(rec.messages.at(1).content, "relationship: same-as");
}

TEST(Conversation, UserContentMatchesPromptEngine) {
    const auto p = pair("Ontology alignment", "ontology matching", RelationLabel::same_as);
    EXPECT_EQ(make_conversation(p).messages.at(0).content, render(finetune_template(), p.topic_a, p.topic_b));
}

TEST(Conversation, NonAsciiAndQuotesSurviveRoundTrip) {
    const auto rec = make_conversation(pair("Schr\xC3\xB6" "dinger \"cat\"", "quantum\\mechanics", RelationLabel::other));
    EXPECT_EQ(parse_conversation_line(to_json_line(rec)), rec);
}

TEST(Conversation, ParserRejectsViolations) {
    EXPECT_THROW(parse_conversation_line("not json"), FormatError);
    EXPECT_THROW(parse_conversation_line(R"({"messages":[]})"), FormatError);
    EXPECT_THROW(parse_conversation_line(
                     R"({"messages":[{"role":"assistant","content":"relationship: other"},{"role":"user","content":"Classify the relationship between 'a' and 'b'"}]})"),
                 FormatError);
    EXPECT_THROW(parse_conversation_line(
                     R"({"messages":[{"role":"user","content":"Classify the relationship between 'a' and 'b'"},{"role":"assistant","content":"relationship: related"}]})"),
                 FormatError);
    EXPECT_THROW(parse_conversation_line(
                     R"({"messages":[{"role":"user","content":"What links 'a' and 'b'"},{"role":"assistant","content":"relationship: other"}]})"),
                 FormatError);
}

TEST(Export, FileLayoutCountsAndDeterminism) {
    testsupport::TempDir dir("ft");
    DatasetBundle bundle;
    bundle.name = "physh";
    for (int i = 0; i < 7; ++i)
        bundle.train.push_back(pair("a" + std::to_string(i), "b" + std::to_string(i), kAllLabels[i % 4],
                                    "physh:x:" + std::to_string(i)));
    const auto result = export_conversations(bundle, Split::train, dir.path());
    EXPECT_EQ(result.written, 7u);
    EXPECT_FALSE(result.empty_split);
    const auto path = conversation_path(dir.path(), "physh", Split::train);
    EXPECT_EQ(path.filename(), "physh.train.chat.jsonl");
    const auto first = read_file(path.string());
    EXPECT_EQ(first.back(), '\n');
    EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 7);
    export_conversations(bundle, Split::train, dir.path());
    EXPECT_EQ(read_file(path.string()), first);

    const auto empty = export_conversations(bundle, Split::validation, dir.path());
    EXPECT_TRUE(empty.empty_split);
    EXPECT_TRUE(std::filesystem::exists(conversation_path(dir.path(), "physh", Split::validation)));
    EXPECT_EQ(std::filesystem::file_size(conversation_path(dir.path(), "physh", Split::validation)), 0u);
}
