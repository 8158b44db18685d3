#include "topicrel/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "topicrel/error.hpp"
#include "topicrel/random.hpp"
#include "topicrel/text.hpp"

namespace topicrel {

std::string_view to_string(Provenance provenance) noexcept {
    switch (provenance) {
        case Provenance::hierarchy_edge: return "hierarchy-edge";
        case Provenance::adjudicated_candidate: return "adjudicated-candidate";
        case Provenance::related_edge: return "related-edge";
        case Provenance::random_negative: return "random-negative";
        case Provenance::classified: return "classified";
    }
    return "hierarchy-edge";
}

Provenance provenance_from_string(std::string_view text) {
    for (auto p : {Provenance::hierarchy_edge, Provenance::adjudicated_candidate,
                   Provenance::related_edge, Provenance::random_negative,
                   Provenance::classified}) {
        if (to_string(p) == text) return p;
    }
    throw FormatError("unknown provenance '" + std::string(text) + "'");
}

nlohmann::ordered_json to_json(const LabeledPair& pair) {
    nlohmann::ordered_json doc;
    doc["pair_id"] = pair.pair_id;
    doc["topic_a"] = pair.topic_a;
    doc["topic_b"] = pair.topic_b;
    doc["label"] = to_string(pair.label);
    doc["source"] = pair.source;
    doc["provenance"] = to_string(pair.provenance);
    return doc;
}

LabeledPair labeled_pair_from_json(const nlohmann::json& doc) {
    try {
        LabeledPair pair;
        pair.pair_id = doc.at("pair_id").get<std::string>();
        pair.topic_a = doc.at("topic_a").get<std::string>();
        pair.topic_b = doc.at("topic_b").get<std::string>();
        const auto label = doc.at("label").get<std::string>();
        const auto parsed = label_from_string(label);
        if (!parsed) throw FormatError("unknown label '" + label + "'");
        pair.label = *parsed;
        pair.source = doc.at("source").get<std::string>();
        pair.provenance = provenance_from_string(doc.at("provenance").get<std::string>());
        return pair;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("labeled pair: ") + e.what());
    }
}

nlohmann::ordered_json to_json(const CandidatePair& candidate) {
    nlohmann::ordered_json doc;
    doc["pair_id"] = candidate.pair_id;
    doc["topic_a"] = candidate.topic_a;
    doc["topic_b"] = candidate.topic_b;
    doc["source"] = candidate.source;
    doc["context"] = candidate.context;
    return doc;
}

CandidatePair candidate_from_json(const nlohmann::json& doc) {
    try {
        CandidatePair c;
        c.pair_id = doc.at("pair_id").get<std::string>();
        c.topic_a = doc.at("topic_a").get<std::string>();
        c.topic_b = doc.at("topic_b").get<std::string>();
        c.source = doc.value("source", "");
        c.context = doc.value("context", "");
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("candidate pair: ") + e.what());
    }
}

// ---- rationals and splits ----

Rational::Rational(std::int64_t n, std::int64_t d) {
    if (d <= 0 || n < 0) throw InvalidArgument("ratio must be non-negative with positive denominator");
    const auto g = std::gcd(n, d);
    num = g ? n / g : 0;
    den = g ? d / g : 1;
}

Rational Rational::parse(std::string_view text) {
    const std::string t = trim(text);
    auto parse_int = [&](std::string_view digits) {
        std::int64_t value = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
        if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty())
            throw InvalidArgument("bad ratio '" + t + "'");
        return value;
    };
    if (const auto slash = t.find('/'); slash != std::string::npos) {
        return Rational(parse_int(std::string_view(t).substr(0, slash)),
                        parse_int(std::string_view(t).substr(slash + 1)));
    }
    if (const auto dot = t.find('.'); dot != std::string::npos) {
        const std::string_view whole = std::string_view(t).substr(0, dot);
        const std::string_view frac = std::string_view(t).substr(dot + 1);
        if (frac.size() > 15) throw InvalidArgument("ratio '" + t + "' has too many digits");
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        const std::int64_t w = whole.empty() ? 0 : parse_int(whole);
        const std::int64_t f = frac.empty() ? 0 : parse_int(frac);
        return Rational(w * den + f, den);
    }
    return Rational(parse_int(t), 1);
}

std::string_view split_file_tag(Split split) noexcept {
    switch (split) {
        case Split::train: return "train";
        case Split::validation: return "val";
        case Split::test: return "test";
    }
    return "train";
}

Split split_from_string(std::string_view text) {
    if (text == "train") return Split::train;
    if (text == "val" || text == "validation") return Split::validation;
    if (text == "test") return Split::test;
    throw FormatError("unknown split '" + std::string(text) + "'");
}

void SplitSpec::validate() const {
    __int128 num = 0;
    __int128 den = 1;
    for (const auto& r : ratios) {
        num = num * r.den + static_cast<__int128>(r.num) * den;
        den *= r.den;
    }
    if (num != den) throw InvalidArgument("split ratios must sum to exactly 1");
}

SplitSpec SplitSpec::from_weights(std::array<std::int64_t, 3> weights, std::uint64_t seed) {
    const std::int64_t total = weights[0] + weights[1] + weights[2];
    if (total <= 0 || weights[0] < 0 || weights[1] < 0 || weights[2] < 0)
        throw InvalidArgument("split weights must be non-negative with a positive sum");
    SplitSpec spec;
    for (std::size_t i = 0; i < 3; ++i) spec.ratios[i] = Rational(weights[i], total);
    spec.seed = seed;
    return spec;
}

std::array<std::size_t, 3> allocate_counts(std::size_t count, const std::array<Rational, 3>& ratios) {
    std::array<std::size_t, 3> out{};
    std::array<__int128, 3> rem{};
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        const __int128 scaled = static_cast<__int128>(count) * ratios[k].num;
        out[k] = static_cast<std::size_t>(scaled / ratios[k].den);
        rem[k] = scaled % ratios[k].den;
        assigned += out[k];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    // Larger fractional part first; equal parts keep train > validation > test.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return rem[a] * ratios[b].den > rem[b] * ratios[a].den;
    });
    for (std::size_t i = 0; assigned < count && i < 3; ++i, ++assigned) ++out[order[i]];
    return out;
}

const std::vector<LabeledPair>& DatasetBundle::split(Split which) const {
    switch (which) {
        case Split::train: return train;
        case Split::validation: return validation;
        case Split::test: return test;
    }
    return train;
}

std::vector<LabeledPair>& DatasetBundle::split(Split which) {
    return const_cast<std::vector<LabeledPair>&>(std::as_const(*this).split(which));
}

void validate_bundle(const DatasetBundle& bundle, bool tuple_scope_by_source) {
    std::unordered_set<std::string> ids;
    std::set<std::tuple<std::string, std::string, std::string, RelationLabel>> tuples;
    for (auto split : kAllSplits) {
        for (const auto& p : bundle.split(split)) {
            if (!ids.insert(p.pair_id).second)
                throw DuplicatePairId("pair_id '" + p.pair_id + "' appears twice in " + bundle.name);
            if (!tuples.emplace(tuple_scope_by_source ? p.source : std::string{}, p.topic_a,
                                p.topic_b, p.label)
                     .second) {
                throw DuplicateTuple("(" + p.topic_a + ", " + p.topic_b + ", " +
                                     std::string(to_string(p.label)) + ") repeats in " +
                                     bundle.name);
            }
        }
    }
}

// ---- sampling ----

namespace {

std::string make_pair_id(const std::string& source, std::string_view tag, std::size_t n) {
    std::string digits = std::to_string(n);
    if (digits.size() < 5) digits.insert(0, 5 - digits.size(), '0');
    return source + ":" + std::string(tag) + ":" + digits;
}

// Answers "are these two concepts linked?" with memoised ancestor sets.
class LinkIndex {
public:
    LinkIndex(const ConceptGraph& graph, ExclusionPolicy policy)
        : graph_(graph), policy_(policy) {
        for (const auto& [a, b] : graph.hierarchy_edges) parents_[a].push_back(b);
        for (const auto& [id, c] : graph.concepts) {
            auto& names = names_[id];
            names.insert(to_lower(c.pref_label));
            for (const auto& alt : c.alt_labels) names.insert(to_lower(alt));
        }
    }

    bool linked(const std::string& a, const std::string& b) {
        if (a == b) return true;
        if (graph_.hierarchy_edges.count({a, b}) || graph_.hierarchy_edges.count({b, a}))
            return true;
        if (graph_.related_edges.count(make_related_edge(a, b))) return true;
        const auto& na = names_.at(a);
        const auto& nb = names_.at(b);
        for (const auto& name : na) {
            if (nb.count(name)) return true;
        }
        if (policy_.transitive) {
            if (ancestors(a).count(b) || ancestors(b).count(a)) return true;
        }
        return false;
    }

private:
    const std::unordered_set<std::string>& ancestors(const std::string& id) {
        if (auto it = memo_.find(id); it != memo_.end()) return it->second;
        std::unordered_set<std::string> seen;
        std::vector<std::string> stack{id};
        while (!stack.empty()) {
            const std::string cur = std::move(stack.back());
            stack.pop_back();
            const auto it = parents_.find(cur);
            if (it == parents_.end()) continue;
            for (const auto& p : it->second) {
                if (seen.insert(p).second) stack.push_back(p);
            }
        }
        return memo_.emplace(id, std::move(seen)).first->second;
    }

    const ConceptGraph& graph_;
    ExclusionPolicy policy_;
    std::unordered_map<std::string, std::vector<std::string>> parents_;
    std::unordered_map<std::string, std::set<std::string>> names_;
    std::unordered_map<std::string, std::unordered_set<std::string>> memo_;
};

}  // namespace

std::vector<LabeledPair> sample_hierarchical(const ConceptGraph& graph, std::size_t n_per_label,
                                             std::uint64_t seed, const std::string& source) {
    std::vector<HierarchyEdge> edges(graph.hierarchy_edges.begin(), graph.hierarchy_edges.end());
    if (edges.size() < 2 * n_per_label) throw InsufficientEdges(2 * n_per_label, edges.size());
    SeededRng rng(seed);
    rng.shuffle(std::span(edges));

    std::vector<LabeledPair> out;
    out.reserve(2 * n_per_label);
    for (std::size_t i = 0; i < n_per_label; ++i) {
        const auto& [child, parent] = edges[i];
        out.push_back({make_pair_id(source, "br", i + 1), graph.concepts.at(parent).pref_label,
                       graph.concepts.at(child).pref_label, RelationLabel::broader, source,
                       Provenance::hierarchy_edge});
    }
    for (std::size_t i = 0; i < n_per_label; ++i) {
        const auto& [child, parent] = edges[n_per_label + i];
        out.push_back({make_pair_id(source, "nr", i + 1), graph.concepts.at(child).pref_label,
                       graph.concepts.at(parent).pref_label, RelationLabel::narrower, source,
                       Provenance::hierarchy_edge});
    }
    return out;
}

SameAsHarvest extract_sameas_candidates(const ConceptGraph& graph, const std::string& source,
                                        bool auto_accept_related) {
    SameAsHarvest harvest;
    std::size_t n = 0;
    if (graph.dialect == SchemaDialect::skos_core) {
        for (const auto& [id, c] : graph.concepts) {
            for (const auto& alt : c.alt_labels) {
                harvest.pending.push_back({make_pair_id(source, "sa", ++n), c.pref_label, alt,
                                           source, "altLabel of '" + c.pref_label + "' <" + id + ">"});
            }
        }
        return harvest;
    }
    for (const auto& [a, b] : graph.related_edges) {
        const auto& ca = graph.concepts.at(a);
        const auto& cb = graph.concepts.at(b);
        if (ca.pref_label == cb.pref_label) continue;
        const std::string id = make_pair_id(source, "sa", ++n);
        if (auto_accept_related) {
            harvest.accepted.push_back({id, ca.pref_label, cb.pref_label, RelationLabel::same_as,
                                        source, Provenance::related_edge});
        } else {
            harvest.pending.push_back(
                {id, ca.pref_label, cb.pref_label, source, "relatedConcept <" + a + "> <" + b + ">"});
        }
    }
    return harvest;
}

bool pair_is_linked(const ConceptGraph& graph, const std::string& a, const std::string& b,
                    const ExclusionPolicy& policy) {
    return LinkIndex(graph, policy).linked(a, b);
}

std::vector<LabeledPair> sample_other(const ConceptGraph& graph, std::size_t n, std::uint64_t seed,
                                      const ExclusionPolicy& policy, const std::string& source) {
    std::vector<LabeledPair> out;
    if (n == 0) return out;
    std::vector<const Concept*> concepts;
    for (const auto& [_, c] : graph.concepts) concepts.push_back(&c);
    const std::size_t budget = policy.max_attempts ? policy.max_attempts : 100 * n;
    if (concepts.size() < 2) throw ExhaustedCandidates(0, 0, n);

    LinkIndex index(graph, policy);
    SeededRng rng(seed);
    std::set<std::pair<std::size_t, std::size_t>> drawn;
    std::size_t attempts = 0;
    while (out.size() < n) {
        if (attempts >= budget) throw ExhaustedCandidates(attempts, out.size(), n);
        ++attempts;
        const auto i = static_cast<std::size_t>(rng.below(concepts.size()));
        auto j = static_cast<std::size_t>(rng.below(concepts.size() - 1));
        if (j >= i) ++j;
        if (!drawn.emplace(std::min(i, j), std::max(i, j)).second) continue;
        if (index.linked(concepts[i]->id, concepts[j]->id)) continue;
        out.push_back({make_pair_id(source, "ot", out.size() + 1), concepts[i]->pref_label,
                       concepts[j]->pref_label, RelationLabel::other, source,
                       Provenance::random_negative});
    }
    return out;
}

std::vector<LabeledPair> sample_subset(std::vector<LabeledPair> pairs, std::size_t n,
                                       std::uint64_t seed) {
    if (pairs.size() < n)
        throw InvalidArgument("asked for " + std::to_string(n) + " pairs, only " +
                              std::to_string(pairs.size()) + " available");
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.pair_id < b.pair_id; });
    SeededRng rng(seed);
    rng.shuffle(std::span(pairs));
    pairs.resize(n);
    return pairs;
}

DatasetBundle make_splits(std::vector<LabeledPair> pairs, const SplitSpec& spec,
                          const std::string& name) {
    spec.validate();
    std::array<std::vector<LabeledPair>, kLabelCount> by_label;
    for (auto& p : pairs) by_label[index_of(p.label)].push_back(std::move(p));

    DatasetBundle bundle;
    bundle.name = name;
    for (std::size_t l = 0; l < kLabelCount; ++l) {
        auto& block = by_label[l];
        std::sort(block.begin(), block.end(),
                  [](const auto& a, const auto& b) { return a.pair_id < b.pair_id; });
        SeededRng rng(derive_seed(spec.seed, l));
        rng.shuffle(std::span(block));
        const auto counts = allocate_counts(block.size(), spec.ratios);
        std::size_t offset = 0;
        for (auto split : kAllSplits) {
            const std::size_t take = counts[static_cast<std::size_t>(split)];
            auto& dest = bundle.split(split);
            std::move(block.begin() + static_cast<std::ptrdiff_t>(offset),
                      block.begin() + static_cast<std::ptrdiff_t>(offset + take),
                      std::back_inserter(dest));
            offset += take;
        }
    }
    for (auto split : kAllSplits) {
        SeededRng rng(derive_seed(spec.seed, 16 + static_cast<std::uint64_t>(split)));
        rng.shuffle(std::span(bundle.split(split)));
    }
    validate_bundle(bundle);
    return bundle;
}

DatasetBundle merge_bundles(const std::vector<DatasetBundle>& bundles, const std::string& name) {
    DatasetBundle merged;
    merged.name = name;
    for (const auto& b : bundles) {
        for (auto split : kAllSplits) {
            const auto& from = b.split(split);
            auto& to = merged.split(split);
            to.insert(to.end(), from.begin(), from.end());
        }
    }
    validate_bundle(merged, /*tuple_scope_by_source=*/true);
    return merged;
}

// ---- files ----

std::string to_jsonl(const std::vector<LabeledPair>& pairs) {
    std::string out;
    for (const auto& p : pairs) {
        out += to_json(p).dump();
        out += '\n';
    }
    return out;
}

std::vector<LabeledPair> pairs_from_jsonl(std::string_view text) {
    std::vector<LabeledPair> pairs;
    std::size_t line_number = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        try {
            pairs.push_back(labeled_pair_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("line " + std::to_string(line_number) + ": " + e.what());
        }
    }
    return pairs;
}

void write_pairs(const std::filesystem::path& path, const std::vector<LabeledPair>& pairs) {
    write_file_atomic(path.string(), to_jsonl(pairs));
}

std::vector<LabeledPair> read_pairs(const std::filesystem::path& path) {
    return pairs_from_jsonl(read_file(path.string()));
}

std::filesystem::path split_path(const std::filesystem::path& dir, const std::string& name,
                                 Split split) {
    return dir / (name + "." + std::string(split_file_tag(split)) + ".jsonl");
}

void write_bundle(const std::filesystem::path& dir, const DatasetBundle& bundle) {
    for (auto split : kAllSplits) write_pairs(split_path(dir, bundle.name, split), bundle.split(split));
}

DatasetBundle read_bundle(const std::filesystem::path& dir, const std::string& name) {
    DatasetBundle bundle;
    bundle.name = name;
    for (auto split : kAllSplits) bundle.split(split) = read_pairs(split_path(dir, name, split));
    return bundle;
}

}  // namespace topicrel
