#include "topicrel/prompt.hpp"

#include <array>
#include <cctype>

#include "default_templates.hpp"
#include "topicrel/error.hpp"
#include "topicrel/text.hpp"

namespace topicrel {

std::string_view to_string(PromptStrategy strategy) noexcept {
    switch (strategy) {
        case PromptStrategy::standard: return "standard";
        case PromptStrategy::cot_stage1: return "cot-stage1";
        case PromptStrategy::cot_stage2: return "cot-stage2";
    }
    return "standard";
}

namespace {

std::size_t count_occurrences(std::string_view body, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = body.find(needle); pos != std::string_view::npos;
         pos = body.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string id, PromptStrategy strategy, std::string body)
    : id_(std::move(id)), strategy_(strategy), body_(std::move(body)) {
    auto require = [&](std::string_view placeholder, std::size_t expected) {
        const auto found = count_occurrences(body_, placeholder);
        if (found != expected) {
            throw InvalidTemplate("template '" + id_ + "' (" + std::string(to_string(strategy_)) +
                                  ") has " + std::to_string(found) + " occurrences of " +
                                  std::string(placeholder) + ", expected " +
                                  std::to_string(expected));
        }
    };
    require(kTopicA, 1);
    require(kTopicB, 1);
    require(kStage1Response, strategy_ == PromptStrategy::cot_stage2 ? 1 : 0);
}

PromptTemplate PromptTemplate::from_file(const std::string& path, PromptStrategy strategy) {
    return PromptTemplate(path, strategy, read_file(path));
}

std::string render(const PromptTemplate& tmpl, std::string_view topic_a, std::string_view topic_b,
                   std::optional<std::string_view> stage1_response) {
    if (tmpl.strategy() == PromptStrategy::cot_stage2 && !stage1_response) {
        throw MissingPlaceholderValue("template '" + tmpl.id() + "' needs the stage-1 response");
    }
    const std::string_view body = tmpl.body();
    std::string out;
    out.reserve(body.size() + topic_a.size() + topic_b.size() +
                (stage1_response ? stage1_response->size() : 0));
    std::size_t i = 0;
    while (i < body.size()) {
        if (body[i] == '[') {
            const auto rest = body.substr(i);
            if (rest.substr(0, kTopicA.size()) == kTopicA) {
                out += topic_a;
                i += kTopicA.size();
                continue;
            }
            if (rest.substr(0, kTopicB.size()) == kTopicB) {
                out += topic_b;
                i += kTopicB.size();
                continue;
            }
            if (rest.substr(0, kStage1Response.size()) == kStage1Response) {
                out += stage1_response.value_or("");
                i += kStage1Response.size();
                continue;
            }
        }
        out.push_back(body[i++]);
    }
    return out;
}

const PromptTemplate& finetune_template() {
    static const PromptTemplate tmpl("finetune", PromptStrategy::standard,
                                     "Classify the relationship between '[TOPIC-A]' and '[TOPIC-B]'");
    return tmpl;
}

const PromptTemplate& default_standard_template() {
    static const PromptTemplate tmpl("standard", PromptStrategy::standard,
                                     builtin::kStandardTemplate);
    return tmpl;
}

const PromptTemplate& default_cot_stage1_template() {
    static const PromptTemplate tmpl("cot-stage1", PromptStrategy::cot_stage1,
                                     builtin::kCotStage1Template);
    return tmpl;
}

const PromptTemplate& default_cot_stage2_template() {
    static const PromptTemplate tmpl("cot-stage2", PromptStrategy::cot_stage2,
                                     builtin::kCotStage2Template);
    return tmpl;
}

// ---- parsing ----

ParsedLabel parse_label(std::string_view response) {
    static constexpr std::string_view marker = "relationship:";
    const std::string lowered = to_lower(response);
    const auto pos = lowered.rfind(marker);
    if (pos == std::string::npos) return std::nullopt;

    std::string_view rest = std::string_view(lowered).substr(pos + marker.size());
    auto is_word_char = [](char c) {
        return (c >= 'a' && c <= 'z') || c == '-' || c == '_';
    };
    auto skip_noise = [&](std::string_view s) {
        std::size_t k = 0;
        while (k < s.size() && !is_word_char(s[k]) && s[k] != '\n') ++k;
        return s.substr(k);
    };
    auto take_word = [&](std::string_view& s) {
        std::size_t k = 0;
        while (k < s.size() && is_word_char(s[k])) ++k;
        std::string word(s.substr(0, k));
        s = s.substr(k);
        while (!word.empty() && (word.back() == '-' || word.back() == '_')) word.pop_back();
        return word;
    };

    rest = skip_noise(rest);
    std::string word = take_word(rest);
    if (word == "broader") return RelationLabel::broader;
    if (word == "narrower") return RelationLabel::narrower;
    if (word == "other") return RelationLabel::other;
    if (word == "same-as" || word == "same_as" || word == "sameas") return RelationLabel::same_as;
    if (word == "same") {
        std::size_t k = 0;
        while (k < rest.size() && (rest[k] == ' ' || rest[k] == '\t')) ++k;
        rest = rest.substr(k);
        if (take_word(rest) == "as") return RelationLabel::same_as;
    }
    return std::nullopt;
}

// ---- referee ----

std::string_view to_string(RefereeRule rule) noexcept {
    switch (rule) {
        case RefereeRule::not_applicable: return "not-applicable";
        case RefereeRule::single_parse: return "single-parse";
        case RefereeRule::double_failure: return "double-failure";
        case RefereeRule::agreement: return "agreement";
        case RefereeRule::other_override: return "other-override";
        case RefereeRule::hierarchy_contradiction: return "hierarchy-contradiction";
        case RefereeRule::hierarchy_over_equivalence: return "hierarchy-over-equivalence";
    }
    return "not-applicable";
}

std::string_view to_string(Confidence confidence) noexcept {
    switch (confidence) {
        case Confidence::agreed: return "agreed";
        case Confidence::resolved: return "resolved";
        case Confidence::contradiction: return "contradiction";
    }
    return "agreed";
}

RefereeRule referee_rule_from_string(std::string_view text) {
    for (auto r : {RefereeRule::not_applicable, RefereeRule::single_parse, RefereeRule::double_failure,
                   RefereeRule::agreement, RefereeRule::other_override,
                   RefereeRule::hierarchy_contradiction, RefereeRule::hierarchy_over_equivalence}) {
        if (to_string(r) == text) return r;
    }
    throw FormatError("unknown referee rule '" + std::string(text) + "'");
}

Confidence confidence_from_string(std::string_view text) {
    for (auto c : {Confidence::agreed, Confidence::resolved, Confidence::contradiction}) {
        if (to_string(c) == text) return c;
    }
    throw FormatError("unknown confidence flag '" + std::string(text) + "'");
}

RefereeDecision referee(const ParsedLabel& label_ab, const ParsedLabel& label_ba) noexcept {
    const ParsedLabel p = label_ab;
    const ParsedLabel q = invert_label(label_ba);

    if (p.has_value() != q.has_value()) {
        return {p ? p : q, RefereeRule::single_parse, Confidence::resolved};
    }
    if (!p && !q) {
        return {RelationLabel::other, RefereeRule::double_failure, Confidence::contradiction};
    }
    if (*p == *q) return {p, RefereeRule::agreement, Confidence::agreed};
    if (*p == RelationLabel::other || *q == RelationLabel::other) {
        return {*p == RelationLabel::other ? q : p, RefereeRule::other_override,
                Confidence::resolved};
    }
    if (is_hierarchical(*p) && is_hierarchical(*q)) {
        return {RelationLabel::other, RefereeRule::hierarchy_contradiction,
                Confidence::contradiction};
    }
    // One side is same-as, the other hierarchical.
    return {is_hierarchical(*p) ? p : q, RefereeRule::hierarchy_over_equivalence,
            Confidence::resolved};
}

// ---- outcomes ----

std::string_view to_string(ClassificationStrategy strategy) noexcept {
    return strategy == ClassificationStrategy::standard ? "standard" : "bidirectional-cot";
}

ClassificationStrategy classification_strategy_from_string(std::string_view text) {
    if (text == "standard") return ClassificationStrategy::standard;
    if (text == "bidirectional-cot") return ClassificationStrategy::bidirectional_cot;
    throw FormatError("unknown strategy '" + std::string(text) + "'");
}

bool ClassificationOutcome::has_request_error() const noexcept {
    return run_ab.error.has_value() || (run_ba && run_ba->error.has_value());
}

namespace {

nlohmann::ordered_json run_to_json(const DirectionRun& run) {
    nlohmann::ordered_json doc;
    doc["responses"] = run.responses;
    doc["label"] = to_string(run.label);
    if (run.error) doc["error"] = *run.error;
    return doc;
}

DirectionRun run_from_json(const nlohmann::json& doc) {
    DirectionRun run;
    run.responses = doc.at("responses").get<std::vector<std::string>>();
    run.label = parsed_label_from_string(doc.at("label").get<std::string>());
    if (doc.contains("error")) run.error = doc.at("error").get<std::string>();
    return run;
}

}  // namespace

nlohmann::ordered_json to_json(const ClassificationOutcome& o) {
    nlohmann::ordered_json doc;
    doc["pair_id"] = o.pair_id;
    doc["topic_a"] = o.topic_a;
    doc["topic_b"] = o.topic_b;
    doc["strategy"] = to_string(o.strategy);
    doc["final_label"] = to_string(o.final_label);
    doc["run_ab"] = run_to_json(o.run_ab);
    if (o.run_ba) doc["run_ba"] = run_to_json(*o.run_ba);
    doc["referee_rule"] = to_string(o.referee_rule);
    if (o.confidence) doc["confidence_flag"] = to_string(*o.confidence);
    if (o.gold) doc["gold"] = to_string(*o.gold);
    return doc;
}

ClassificationOutcome outcome_from_json(const nlohmann::json& doc) {
    try {
        ClassificationOutcome o;
        o.pair_id = doc.at("pair_id").get<std::string>();
        o.topic_a = doc.at("topic_a").get<std::string>();
        o.topic_b = doc.at("topic_b").get<std::string>();
        o.strategy = classification_strategy_from_string(doc.at("strategy").get<std::string>());
        o.final_label = parsed_label_from_string(doc.at("final_label").get<std::string>());
        o.run_ab = run_from_json(doc.at("run_ab"));
        if (doc.contains("run_ba")) o.run_ba = run_from_json(doc.at("run_ba"));
        o.referee_rule = referee_rule_from_string(doc.at("referee_rule").get<std::string>());
        if (doc.contains("confidence_flag"))
            o.confidence = confidence_from_string(doc.at("confidence_flag").get<std::string>());
        if (doc.contains("gold")) {
            const auto gold = doc.at("gold").get<std::string>();
            o.gold = label_from_string(gold);
            if (!o.gold) throw FormatError("unknown gold label '" + gold + "'");
        }
        return o;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("outcome: ") + e.what());
    }
}

PairInput PairInput::from(const LabeledPair& pair) {
    return {pair.pair_id, pair.topic_a, pair.topic_b, pair.label};
}

// ---- strategies ----

namespace {

DirectionRun direction_from(const GenerationResult& result) {
    DirectionRun run;
    if (result.ok()) {
        run.responses.push_back(result.text);
        run.label = parse_label(result.text);
    } else {
        run.error = result.error;
    }
    return run;
}

}  // namespace

std::vector<ClassificationOutcome> classify_pairs(const std::vector<PairInput>& pairs,
                                                  const InferenceClient& client,
                                                  ClassificationStrategy strategy,
                                                  const PromptTemplate& standard_template,
                                                  const CotTemplates& cot) {
    std::vector<ClassificationOutcome> outcomes;
    outcomes.reserve(pairs.size());

    if (strategy == ClassificationStrategy::standard) {
        std::vector<std::pair<std::string, std::string>> requests;
        for (const auto& p : pairs) {
            requests.emplace_back(RequestTag{p.pair_id, false, 0}.str(),
                                  render(standard_template, p.topic_a, p.topic_b));
        }
        const auto results = client.generate_batch(requests);
        for (const auto& p : pairs) {
            ClassificationOutcome o;
            o.pair_id = p.pair_id;
            o.topic_a = p.topic_a;
            o.topic_b = p.topic_b;
            o.strategy = strategy;
            o.gold = p.gold;
            o.run_ab = direction_from(results.at(RequestTag{p.pair_id, false, 0}.str()));
            o.final_label = o.run_ab.label;
            o.referee_rule = RefereeRule::not_applicable;
            outcomes.push_back(std::move(o));
        }
        return outcomes;
    }

    // Stage 1 for both directions, then stage 2 embedding each stage-1 answer.
    auto ordered = [](const PairInput& p, bool reversed) {
        return reversed ? std::pair{std::string_view(p.topic_b), std::string_view(p.topic_a)}
                        : std::pair{std::string_view(p.topic_a), std::string_view(p.topic_b)};
    };
    std::vector<std::pair<std::string, std::string>> stage1;
    for (const auto& p : pairs) {
        for (bool reversed : {false, true}) {
            const auto [first, second] = ordered(p, reversed);
            stage1.emplace_back(RequestTag{p.pair_id, reversed, 1}.str(),
                                render(cot.stage1, first, second));
        }
    }
    const auto stage1_results = client.generate_batch(stage1);

    std::vector<std::pair<std::string, std::string>> stage2;
    for (const auto& p : pairs) {
        for (bool reversed : {false, true}) {
            const auto& r1 = stage1_results.at(RequestTag{p.pair_id, reversed, 1}.str());
            if (!r1.ok()) continue;
            const auto [first, second] = ordered(p, reversed);
            stage2.emplace_back(RequestTag{p.pair_id, reversed, 2}.str(),
                                render(cot.stage2, first, second, r1.text));
        }
    }
    const auto stage2_results = client.generate_batch(stage2);

    for (const auto& p : pairs) {
        ClassificationOutcome o;
        o.pair_id = p.pair_id;
        o.topic_a = p.topic_a;
        o.topic_b = p.topic_b;
        o.strategy = strategy;
        o.gold = p.gold;
        std::array<DirectionRun, 2> runs;
        for (bool reversed : {false, true}) {
            auto& run = runs[reversed ? 1 : 0];
            const auto& r1 = stage1_results.at(RequestTag{p.pair_id, reversed, 1}.str());
            if (!r1.ok()) {
                run.error = r1.error;
                continue;
            }
            run.responses.push_back(r1.text);
            const auto& r2 = stage2_results.at(RequestTag{p.pair_id, reversed, 2}.str());
            if (!r2.ok()) {
                run.error = r2.error;
                continue;
            }
            run.responses.push_back(r2.text);
            run.label = parse_label(r2.text);
        }
        const auto decision = referee(runs[0].label, runs[1].label);
        o.run_ab = std::move(runs[0]);
        o.run_ba = std::move(runs[1]);
        o.final_label = decision.label;
        o.referee_rule = decision.rule;
        o.confidence = decision.confidence;
        outcomes.push_back(std::move(o));
    }
    return outcomes;
}

ClassificationOutcome run_standard(const PairInput& pair, const InferenceClient& client,
                                   const PromptTemplate& tmpl) {
    return classify_pairs({pair}, client, ClassificationStrategy::standard, tmpl, CotTemplates{})
        .front();
}

ClassificationOutcome run_bidirectional_cot(const PairInput& pair, const InferenceClient& client,
                                            const CotTemplates& templates) {
    return classify_pairs({pair}, client, ClassificationStrategy::bidirectional_cot,
                          default_standard_template(), templates)
        .front();
}

}  // namespace topicrel
