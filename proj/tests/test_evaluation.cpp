#include <gtest/gtest.h>

#include "topicrel/error.hpp"
#include "topicrel/evaluation.hpp"
#include "topicrel/random.hpp"

using namespace topicrel;

namespace {

constexpr auto BR = RelationLabel::broader;
constexpr auto NR = RelationLabel::narrower;
constexpr auto SA = RelationLabel::same_as;
constexpr auto OT = RelationLabel::other;

std::vector<PredictionRecord> always_other() {
    std::vector<PredictionRecord> records;
    for (auto label : kAllLabels)
        for (int i = 0; i < 10; ++i)
            records.push_back({std::string(short_tag(label)) + std::to_string(i), label, OT});
    return records;
}

}  // namespace

TEST(ConfusionMatrix, Examples) {
    const auto m = confusion_matrix({{"1", BR, BR}, {"2", BR, SA}});
    EXPECT_EQ(m.at(BR, BR), 1u);
    EXPECT_EQ(m.at(BR, SA), 1u);
    EXPECT_EQ(m.total(), 2u);

    const auto diag = confusion_matrix({{"1", BR, BR}, {"2", NR, NR}, {"3", OT, OT}});
    EXPECT_EQ(diag.diagonal(), diag.total());

    const auto pf = confusion_matrix({{"1", SA, std::nullopt}});
    EXPECT_EQ(pf.counts[index_of(SA)][kParseFailureColumn], 1u);
}

TEST(ConfusionMatrix, Errors) {
    EXPECT_THROW(confusion_matrix({{"1", BR, BR}, {"1", NR, NR}}), DuplicatePairId);
    EXPECT_THROW(confusion_matrix({}), InvalidArgument);
}

TEST(Metrics, AlwaysOther) {
    const auto report = evaluate(always_other());
    const auto& other = report.per_class[index_of(OT)];
    EXPECT_EQ(other.precision, 0.25);
    EXPECT_EQ(other.recall, 1.0);
    EXPECT_EQ(other.f1, 0.4);
    for (auto label : {BR, NR, SA}) {
        EXPECT_EQ(report.per_class[index_of(label)].f1, 0.0);
        EXPECT_EQ(report.per_class[index_of(label)].precision, 0.0);
    }
    EXPECT_EQ(report.macro.f1, 0.1);
}

TEST(Metrics, PerfectPredictions) {
    std::vector<PredictionRecord> records;
    for (auto label : kAllLabels) records.push_back({std::string(to_string(label)), label, label});
    const auto report = evaluate(records);
    for (const auto& c : report.per_class) {
        EXPECT_EQ(c.precision, 1.0);
        EXPECT_EQ(c.recall, 1.0);
        EXPECT_EQ(c.f1, 1.0);
    }
    EXPECT_EQ(report.macro.f1, 1.0);
}

TEST(Metrics, AbsentClassIsZero) {
    const auto report = evaluate({{"1", BR, BR}, {"2", NR, NR}});
    const auto& sa = report.per_class[index_of(SA)];
    EXPECT_EQ(sa.support, 0u);
    EXPECT_EQ(sa.precision, 0.0);
    EXPECT_EQ(sa.recall, 0.0);
    EXPECT_EQ(sa.f1, 0.0);
}

TEST(Metrics, MacroOfIdenticalValues) {
    PerClassMetrics per{};
    for (auto& c : per) c = {0.3, 0.6, 0.4, 5};
    const auto macro = macro_average(per);
    EXPECT_DOUBLE_EQ(macro.precision, 0.3);
    EXPECT_DOUBLE_EQ(macro.f1, 0.4);
}

TEST(Metrics, FailurePolicies) {
    const std::vector<PredictionRecord> records{{"1", OT, std::nullopt}, {"2", BR, BR}};
    const auto merged = evaluate(records, FailurePolicy::as_other);
    EXPECT_EQ(merged.per_class[index_of(OT)].recall, 1.0);
    const auto own = evaluate(records, FailurePolicy::as_own_column);
    EXPECT_EQ(own.per_class[index_of(OT)].recall, 0.0);
    EXPECT_EQ(own.parse_failures, 1u);
}

TEST(MetricsProperty, InvariantsOnRandomSets) {
    SeededRng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(200);
        std::vector<PredictionRecord> records;
        for (std::size_t i = 0; i < n; ++i) {
            const auto gold = kAllLabels[rng.below(4)];
            const auto draw = rng.below(5);
            records.push_back({std::to_string(i), gold, draw == 4 ? ParsedLabel{} : ParsedLabel{kAllLabels[draw]}});
        }
        const auto report = evaluate(records);
        EXPECT_EQ(report.matrix.total(), n);
        double recalled = 0;
        for (const auto& c : report.per_class) {
            recalled += c.recall * static_cast<double>(c.support);
            for (double v : {c.precision, c.recall, c.f1}) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
        }
        // parse failures merge into predicted-other, so that diagonal counts them
        std::size_t hits = 0;
        for (const auto& r : records) hits += r.predicted.value_or(OT) == r.gold;
        EXPECT_NEAR(recalled, static_cast<double>(hits), 1e-9);

        // a jointly relabelled copy keeps micro accuracy
        std::array<RelationLabel, 4> perm{SA, OT, BR, NR};
        auto relabelled = records;
        for (auto& r : relabelled) {
            r.gold = perm[index_of(r.gold)];
            if (r.predicted) r.predicted = perm[index_of(*r.predicted)];
        }
        EXPECT_EQ(evaluate(relabelled, FailurePolicy::as_own_column).micro_accuracy,
                  evaluate(records, FailurePolicy::as_own_column).micro_accuracy);

        // an extra correct record never lowers any recall
        auto more = records;
        const auto extra = kAllLabels[rng.below(4)];
        more.push_back({"extra", extra, extra});
        const auto after = evaluate(more);
        for (std::size_t k = 0; k < 4; ++k) EXPECT_GE(after.per_class[k].recall, report.per_class[k].recall);
    }
}

TEST(Report, JsonRoundTripAndMarkdownShape) {
    auto records = always_other();
    records.push_back({"pf", BR, std::nullopt});
    const auto report = evaluate(records);
    const auto json = render_json(report);
    EXPECT_EQ(render_json(report_from_json(nlohmann::json::parse(json))), json);

    const auto md = render_markdown(report, "run");
    const auto header = md.find("| AVG | BR | NR | OT | SA |");
    EXPECT_NE(header, std::string::npos);
    EXPECT_NE(md.find("parse-failure"), std::string::npos);
    // 4 gold rows with 5 prediction columns
    std::size_t rows = 0;
    for (auto label : kAllLabels) rows += md.find("| " + std::string(to_string(label)) + " |") != std::string::npos;
    EXPECT_EQ(rows, 4u);
}

TEST(Predictions, JsonlRoundTrip) {
    const std::vector<PredictionRecord> records{{"a", BR, NR}, {"b", SA, std::nullopt}};
    const auto text = to_jsonl(records);
    EXPECT_NE(text.find("\"predicted\":\"parse-failure\""), std::string::npos);
    const auto back = predictions_from_jsonl(text);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].predicted, std::nullopt);
    EXPECT_EQ(back[0].predicted, NR);
}
