#include "topicrel/evaluation.hpp"

#include <cstdio>
#include <sstream>
#include <unordered_set>

#include "topicrel/error.hpp"
#include "topicrel/text.hpp"

namespace topicrel {

nlohmann::ordered_json to_json(const PredictionRecord& record) {
    nlohmann::ordered_json doc;
    doc["pair_id"] = record.pair_id;
    doc["gold"] = to_string(record.gold);
    doc["predicted"] = to_string(record.predicted);
    return doc;
}

PredictionRecord prediction_from_json(const nlohmann::json& doc) {
    try {
        PredictionRecord r;
        r.pair_id = doc.at("pair_id").get<std::string>();
        const auto gold = doc.at("gold").get<std::string>();
        const auto parsed = label_from_string(gold);
        if (!parsed) throw FormatError("unknown gold label '" + gold + "'");
        r.gold = *parsed;
        r.predicted = parsed_label_from_string(doc.at("predicted").get<std::string>());
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("prediction record: ") + e.what());
    }
}

std::vector<PredictionRecord> predictions_from_jsonl(std::string_view text) {
    std::vector<PredictionRecord> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        try {
            out.push_back(prediction_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

std::string to_jsonl(const std::vector<PredictionRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += to_json(r).dump();
        out += '\n';
    }
    return out;
}

namespace {
std::size_t column_of(const ParsedLabel& predicted) {
    return predicted ? index_of(*predicted) : kParseFailureColumn;
}
}  // namespace

std::size_t& ConfusionMatrix::at(RelationLabel gold, const ParsedLabel& predicted) {
    return counts[index_of(gold)][column_of(predicted)];
}

std::size_t ConfusionMatrix::at(RelationLabel gold, const ParsedLabel& predicted) const {
    return counts[index_of(gold)][column_of(predicted)];
}

std::size_t ConfusionMatrix::total() const noexcept {
    std::size_t sum = 0;
    for (const auto& row : counts)
        for (auto c : row) sum += c;
    return sum;
}

std::size_t ConfusionMatrix::diagonal() const noexcept {
    std::size_t sum = 0;
    for (std::size_t i = 0; i < kLabelCount; ++i) sum += counts[i][i];
    return sum;
}

ConfusionMatrix confusion_matrix(const std::vector<PredictionRecord>& records) {
    if (records.empty()) throw InvalidArgument("no prediction records");
    std::unordered_set<std::string> seen;
    ConfusionMatrix m;
    for (const auto& r : records) {
        if (!seen.insert(r.pair_id).second)
            throw DuplicatePairId("pair_id '" + r.pair_id + "' predicted twice");
        ++m.at(r.gold, r.predicted);
    }
    return m;
}

std::string_view to_string(FailurePolicy policy) noexcept {
    return policy == FailurePolicy::as_other ? "as-other" : "as-own-column";
}

FailurePolicy failure_policy_from_string(std::string_view text) {
    if (text == "as-other") return FailurePolicy::as_other;
    if (text == "as-own-column") return FailurePolicy::as_own_column;
    throw FormatError("unknown failure policy '" + std::string(text) + "'");
}

namespace {
double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}
double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }
}  // namespace

PerClassMetrics per_class_metrics(const ConfusionMatrix& matrix, FailurePolicy policy) {
    auto counts = matrix.counts;
    if (policy == FailurePolicy::as_other) {
        for (auto& row : counts) {
            row[index_of(RelationLabel::other)] += row[kParseFailureColumn];
            row[kParseFailureColumn] = 0;
        }
    }
    PerClassMetrics out{};
    for (std::size_t c = 0; c < kLabelCount; ++c) {
        const std::size_t tp = counts[c][c];
        std::size_t predicted = 0;
        for (std::size_t g = 0; g < kLabelCount; ++g) predicted += counts[g][c];
        std::size_t support = 0;
        for (auto v : counts[c]) support += v;
        auto& m = out[c];
        m.support = support;
        m.precision = ratio(tp, predicted);
        m.recall = ratio(tp, support);
        m.f1 = harmonic(m.precision, m.recall);
    }
    return out;
}

AveragedMetrics macro_average(const PerClassMetrics& per_class) {
    AveragedMetrics avg;
    for (const auto& m : per_class) {
        avg.precision += m.precision;
        avg.recall += m.recall;
        avg.f1 += m.f1;
    }
    const auto n = static_cast<double>(per_class.size());
    avg.precision /= n;
    avg.recall /= n;
    avg.f1 /= n;
    return avg;
}

AveragedMetrics weighted_average(const PerClassMetrics& per_class) {
    AveragedMetrics avg;
    std::size_t total = 0;
    for (const auto& m : per_class) {
        const auto w = static_cast<double>(m.support);
        avg.precision += w * m.precision;
        avg.recall += w * m.recall;
        avg.f1 += w * m.f1;
        total += m.support;
    }
    if (total == 0) return {};
    const auto t = static_cast<double>(total);
    avg.precision /= t;
    avg.recall /= t;
    avg.f1 /= t;
    return avg;
}

EvaluationReport evaluate(const std::vector<PredictionRecord>& records, FailurePolicy policy) {
    EvaluationReport report;
    report.matrix = confusion_matrix(records);
    report.policy = policy;
    report.per_class = per_class_metrics(report.matrix, policy);
    report.macro = macro_average(report.per_class);
    report.weighted = weighted_average(report.per_class);
    report.records = report.matrix.total();
    for (const auto& row : report.matrix.counts) report.parse_failures += row[kParseFailureColumn];
    report.micro_accuracy = ratio(report.matrix.diagonal(), report.records);
    return report;
}

namespace {

nlohmann::ordered_json averaged_to_json(const AveragedMetrics& m) {
    nlohmann::ordered_json doc;
    doc["precision"] = m.precision;
    doc["recall"] = m.recall;
    doc["f1"] = m.f1;
    return doc;
}

AveragedMetrics averaged_from_json(const nlohmann::json& doc) {
    return {doc.at("precision").get<double>(), doc.at("recall").get<double>(),
            doc.at("f1").get<double>()};
}

std::string column_name(std::size_t column) {
    return column == kParseFailureColumn ? std::string(kParseFailure)
                                         : std::string(to_string(kAllLabels[column]));
}

}  // namespace

nlohmann::ordered_json to_json(const EvaluationReport& report) {
    nlohmann::ordered_json doc;
    doc["policy"] = to_string(report.policy);
    doc["records"] = report.records;
    doc["parse_failures"] = report.parse_failures;
    nlohmann::ordered_json matrix;
    for (auto gold : kAllLabels) {
        nlohmann::ordered_json row;
        for (std::size_t col = 0; col <= kParseFailureColumn; ++col)
            row[column_name(col)] = report.matrix.counts[index_of(gold)][col];
        matrix[std::string(to_string(gold))] = std::move(row);
    }
    doc["matrix"] = std::move(matrix);
    nlohmann::ordered_json per_class;
    for (auto label : kAllLabels) {
        const auto& m = report.per_class[index_of(label)];
        nlohmann::ordered_json entry;
        entry["precision"] = m.precision;
        entry["recall"] = m.recall;
        entry["f1"] = m.f1;
        entry["support"] = m.support;
        per_class[std::string(to_string(label))] = std::move(entry);
    }
    doc["per_class"] = std::move(per_class);
    doc["macro"] = averaged_to_json(report.macro);
    doc["weighted"] = averaged_to_json(report.weighted);
    doc["micro_accuracy"] = report.micro_accuracy;
    return doc;
}

EvaluationReport report_from_json(const nlohmann::json& doc) {
    try {
        EvaluationReport report;
        report.policy = failure_policy_from_string(doc.at("policy").get<std::string>());
        report.records = doc.at("records").get<std::size_t>();
        report.parse_failures = doc.at("parse_failures").get<std::size_t>();
        for (auto gold : kAllLabels) {
            const auto& row = doc.at("matrix").at(std::string(to_string(gold)));
            for (std::size_t col = 0; col <= kParseFailureColumn; ++col)
                report.matrix.counts[index_of(gold)][col] = row.at(column_name(col)).get<std::size_t>();
        }
        for (auto label : kAllLabels) {
            const auto& e = doc.at("per_class").at(std::string(to_string(label)));
            report.per_class[index_of(label)] = {e.at("precision").get<double>(),
                                                 e.at("recall").get<double>(),
                                                 e.at("f1").get<double>(),
                                                 e.at("support").get<std::size_t>()};
        }
        report.macro = averaged_from_json(doc.at("macro"));
        report.weighted = averaged_from_json(doc.at("weighted"));
        report.micro_accuracy = doc.at("micro_accuracy").get<double>();
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("evaluation report: ") + e.what());
    }
}

std::string render_json(const EvaluationReport& report) { return to_json(report).dump(2) + "\n"; }

namespace {
std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
    return buf;
}
}  // namespace

std::string render_markdown(const EvaluationReport& report, std::string_view title) {
    std::ostringstream md;
    if (!title.empty()) md << "# " << title << "\n\n";
    md << "Records: " << report.records << ", parse failures: " << report.parse_failures
       << " (scored " << to_string(report.policy) << ")\n\n";

    md << "## Confusion matrix\n\n| gold \\ predicted |";
    for (std::size_t col = 0; col <= kParseFailureColumn; ++col) md << ' ' << column_name(col) << " |";
    md << "\n|---|";
    for (std::size_t col = 0; col <= kParseFailureColumn; ++col) md << "---:|";
    md << '\n';
    for (auto gold : kAllLabels) {
        md << "| " << to_string(gold) << " |";
        for (std::size_t col = 0; col <= kParseFailureColumn; ++col)
            md << ' ' << report.matrix.counts[index_of(gold)][col] << " |";
        md << '\n';
    }

    // Column order follows the usual results layout: AVG, BR, NR, OT, SA.
    static constexpr std::array<RelationLabel, 4> order{RelationLabel::broader, RelationLabel::narrower,
                                                        RelationLabel::other, RelationLabel::same_as};
    md << "\n## Metrics (%)\n\n| metric | AVG |";
    for (auto l : order) md << ' ' << short_tag(l) << " |";
    md << "\n|---|---:|---:|---:|---:|---:|\n";
    auto row = [&](std::string_view name, double avg, auto field) {
        md << "| " << name << " | " << pct(avg) << " |";
        for (auto l : order) md << ' ' << pct(field(report.per_class[index_of(l)])) << " |";
        md << '\n';
    };
    row("P", report.macro.precision, [](const ClassMetrics& m) { return m.precision; });
    row("R", report.macro.recall, [](const ClassMetrics& m) { return m.recall; });
    row("F1", report.macro.f1, [](const ClassMetrics& m) { return m.f1; });
    md << "\nMicro accuracy: " << pct(report.micro_accuracy)
       << "%, support-weighted F1: " << pct(report.weighted.f1) << "%\n";
    return md.str();
}

}  // namespace topicrel
