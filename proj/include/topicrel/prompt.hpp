#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "topicrel/dataset.hpp"
#include "topicrel/inference.hpp"
#include "topicrel/labels.hpp"

namespace topicrel {

enum class PromptStrategy { standard, cot_stage1, cot_stage2 };

std::string_view to_string(PromptStrategy strategy) noexcept;

inline constexpr std::string_view kTopicA = "[TOPIC-A]";
inline constexpr std::string_view kTopicB = "[TOPIC-B]";
inline constexpr std::string_view kStage1Response = "[STAGE1-RESPONSE]";

class PromptTemplate {
public:
    // Throws InvalidTemplate unless every placeholder the strategy needs
    // appears exactly once.
    PromptTemplate(std::string id, PromptStrategy strategy, std::string body);

    static PromptTemplate from_file(const std::string& path, PromptStrategy strategy);

    const std::string& id() const noexcept { return id_; }
    PromptStrategy strategy() const noexcept { return strategy_; }
    const std::string& body() const noexcept { return body_; }

private:
    std::string id_;
    PromptStrategy strategy_;
    std::string body_;
};

// Substitutes the placeholders in one pass; inserted text is never rescanned.
std::string render(const PromptTemplate& tmpl, std::string_view topic_a, std::string_view topic_b,
                   std::optional<std::string_view> stage1_response = std::nullopt);

// Built-in templates. The fine-tune template is the bare
// `Classify the relationship between '[TOPIC-A]' and '[TOPIC-B]'` line shared
// with the conversation exporter.
const PromptTemplate& finetune_template();
const PromptTemplate& default_standard_template();
const PromptTemplate& default_cot_stage1_template();
const PromptTemplate& default_cot_stage2_template();

ParsedLabel parse_label(std::string_view response);

enum class RefereeRule {
    not_applicable,
    single_parse,
    double_failure,
    agreement,
    other_override,
    hierarchy_contradiction,
    hierarchy_over_equivalence,
};

enum class Confidence { agreed, resolved, contradiction };

std::string_view to_string(RefereeRule rule) noexcept;
std::string_view to_string(Confidence confidence) noexcept;
RefereeRule referee_rule_from_string(std::string_view text);
Confidence confidence_from_string(std::string_view text);

struct RefereeDecision {
    ParsedLabel label;  // never nullopt: failures collapse to other
    RefereeRule rule = RefereeRule::not_applicable;
    Confidence confidence = Confidence::agreed;

    bool operator==(const RefereeDecision&) const = default;
};

// Reconciles the (A, B) prediction with the (B, A) prediction, which is
// inverted into the (A, B) orientation before comparison.
RefereeDecision referee(const ParsedLabel& label_ab, const ParsedLabel& label_ba) noexcept;

enum class ClassificationStrategy { standard, bidirectional_cot };

std::string_view to_string(ClassificationStrategy strategy) noexcept;
ClassificationStrategy classification_strategy_from_string(std::string_view text);

struct DirectionRun {
    std::vector<std::string> responses;  // one for standard, stage1 + stage2 for CoT
    ParsedLabel label;
    std::optional<std::string> error;

    bool operator==(const DirectionRun&) const = default;
};

struct ClassificationOutcome {
    std::string pair_id;
    std::string topic_a;
    std::string topic_b;
    ClassificationStrategy strategy = ClassificationStrategy::standard;
    ParsedLabel final_label;
    DirectionRun run_ab;
    std::optional<DirectionRun> run_ba;
    RefereeRule referee_rule = RefereeRule::not_applicable;
    std::optional<Confidence> confidence;
    std::optional<RelationLabel> gold;

    bool has_request_error() const noexcept;
    bool operator==(const ClassificationOutcome&) const = default;
};

nlohmann::ordered_json to_json(const ClassificationOutcome& outcome);
ClassificationOutcome outcome_from_json(const nlohmann::json& doc);

struct CotTemplates {
    PromptTemplate stage1 = default_cot_stage1_template();
    PromptTemplate stage2 = default_cot_stage2_template();
};

// Topics and identity of one pair to classify; gold is carried through to the
// outcome when known.
struct PairInput {
    std::string pair_id;
    std::string topic_a;
    std::string topic_b;
    std::optional<RelationLabel> gold;

    static PairInput from(const LabeledPair& pair);
};

ClassificationOutcome run_standard(const PairInput& pair, const InferenceClient& client,
                                   const PromptTemplate& tmpl);

ClassificationOutcome run_bidirectional_cot(const PairInput& pair, const InferenceClient& client,
                                            const CotTemplates& templates);

// Classifies many pairs, batching requests through the client's concurrency
// window. Output order follows input order.
std::vector<ClassificationOutcome> classify_pairs(const std::vector<PairInput>& pairs,
                                                  const InferenceClient& client,
                                                  ClassificationStrategy strategy,
                                                  const PromptTemplate& standard_template,
                                                  const CotTemplates& cot_templates);

}  // namespace topicrel
