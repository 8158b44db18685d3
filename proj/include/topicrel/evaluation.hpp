#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "topicrel/labels.hpp"

namespace topicrel {

struct PredictionRecord {
    std::string pair_id;
    RelationLabel gold = RelationLabel::other;
    ParsedLabel predicted;

    bool operator==(const PredictionRecord&) const = default;
};

nlohmann::ordered_json to_json(const PredictionRecord& record);
PredictionRecord prediction_from_json(const nlohmann::json& doc);

std::vector<PredictionRecord> predictions_from_jsonl(std::string_view text);
std::string to_jsonl(const std::vector<PredictionRecord>& records);

// Column index 4 holds parse failures.
inline constexpr std::size_t kParseFailureColumn = 4;

struct ConfusionMatrix {
    std::array<std::array<std::size_t, 5>, 4> counts{};

    std::size_t& at(RelationLabel gold, const ParsedLabel& predicted);
    std::size_t at(RelationLabel gold, const ParsedLabel& predicted) const;
    std::size_t total() const noexcept;
    std::size_t diagonal() const noexcept;

    bool operator==(const ConfusionMatrix&) const = default;
};

// Throws DuplicatePairId. Empty input is rejected with InvalidArgument.
ConfusionMatrix confusion_matrix(const std::vector<PredictionRecord>& records);

enum class FailurePolicy { as_other, as_own_column };

std::string_view to_string(FailurePolicy policy) noexcept;
FailurePolicy failure_policy_from_string(std::string_view text);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;

    bool operator==(const ClassMetrics&) const = default;
};

struct AveragedMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    bool operator==(const AveragedMetrics&) const = default;
};

using PerClassMetrics = std::array<ClassMetrics, 4>;  // indexed by index_of(label)

PerClassMetrics per_class_metrics(const ConfusionMatrix& matrix,
                                  FailurePolicy policy = FailurePolicy::as_other);

// Unweighted mean over the four classes.
AveragedMetrics macro_average(const PerClassMetrics& per_class);

// Support-weighted mean over the four classes.
AveragedMetrics weighted_average(const PerClassMetrics& per_class);

struct EvaluationReport {
    ConfusionMatrix matrix;
    FailurePolicy policy = FailurePolicy::as_other;
    PerClassMetrics per_class{};
    AveragedMetrics macro;
    AveragedMetrics weighted;
    double micro_accuracy = 0.0;
    std::size_t records = 0;
    std::size_t parse_failures = 0;

    bool operator==(const EvaluationReport&) const = default;
};

EvaluationReport evaluate(const std::vector<PredictionRecord>& records,
                          FailurePolicy policy = FailurePolicy::as_other);

nlohmann::ordered_json to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& doc);

std::string render_json(const EvaluationReport& report);
std::string render_markdown(const EvaluationReport& report, std::string_view title = {});

}  // namespace topicrel
