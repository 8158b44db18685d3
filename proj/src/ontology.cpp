#include "topicrel/ontology.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <unordered_set>

#include "topicrel/concept_graph.hpp"
#include "topicrel/error.hpp"
#include "topicrel/ntriples.hpp"
#include "topicrel/text.hpp"

namespace topicrel {

std::string_view to_string(RejectReason reason) noexcept {
    switch (reason) {
        case RejectReason::cycle: return "cycle";
        case RejectReason::duplicate: return "duplicate";
        case RejectReason::self_loop: return "self-loop";
        case RejectReason::intra_class: return "intra-class";
    }
    return "cycle";
}

std::string AssembledOntology::representative(const std::string& concept_label) const {
    const auto it = class_of.find(concept_label);
    return it == class_of.end() ? concept_label : it->second;
}

std::string canonical_topic(std::string_view topic) { return collapse_whitespace(topic); }

namespace {

// Union-find whose roots are always the lexicographically smallest member.
class LabelUnion {
public:
    const std::string& find(const std::string& x) {
        auto it = parent_.find(x);
        if (it == parent_.end()) it = parent_.emplace(x, x).first;
        if (it->second == x) return it->first;
        const std::string root = find(it->second);
        it->second = root;
        return parent_.find(root)->first;
    }

    void unite(const std::string& a, const std::string& b) {
        const std::string ra = find(a);
        const std::string rb = find(b);
        if (ra == rb) return;
        if (ra < rb) parent_[rb] = ra;
        else parent_[ra] = rb;
    }

    std::vector<std::string> members() const {
        std::vector<std::string> out;
        for (const auto& [k, _] : parent_) out.push_back(k);
        return out;
    }

private:
    std::map<std::string, std::string> parent_;
};

bool reaches(const std::unordered_map<std::string, std::vector<std::string>>& parents,
             const std::string& from, const std::string& target) {
    std::unordered_set<std::string> seen{from};
    std::vector<std::string> stack{from};
    while (!stack.empty()) {
        const std::string cur = std::move(stack.back());
        stack.pop_back();
        if (cur == target) return true;
        const auto it = parents.find(cur);
        if (it == parents.end()) continue;
        for (const auto& p : it->second) {
            if (seen.insert(p).second) stack.push_back(p);
        }
    }
    return false;
}

}  // namespace

AssembledOntology assemble(std::vector<LabeledPair> pairs) {
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const auto& a, const auto& b) { return a.pair_id < b.pair_id; });
    for (auto& p : pairs) {
        p.topic_a = canonical_topic(p.topic_a);
        p.topic_b = canonical_topic(p.topic_b);
    }

    AssembledOntology onto;
    LabelUnion classes;
    for (const auto& p : pairs) {
        if (p.label != RelationLabel::same_as) continue;
        onto.concepts.insert(p.topic_a);
        onto.concepts.insert(p.topic_b);
        classes.unite(p.topic_a, p.topic_b);
    }
    std::map<std::string, std::set<std::string>> by_root;
    for (const auto& member : classes.members()) {
        const std::string root = classes.find(member);
        by_root[root].insert(member);
        onto.class_of[member] = root;
    }
    for (auto& [_, members] : by_root) onto.equivalences.push_back(std::move(members));

    std::unordered_map<std::string, std::vector<std::string>> parents;
    for (const auto& p : pairs) {
        if (!is_hierarchical(p.label)) continue;
        const bool broader = p.label == RelationLabel::broader;
        const std::string& child = broader ? p.topic_b : p.topic_a;
        const std::string& parent = broader ? p.topic_a : p.topic_b;
        onto.concepts.insert(child);
        onto.concepts.insert(parent);

        auto reject = [&](RejectReason reason) { onto.rejected.push_back({p, reason}); };
        if (child == parent) {
            reject(RejectReason::self_loop);
            continue;
        }
        const std::string rc = onto.representative(child);
        const std::string rp = onto.representative(parent);
        if (rc == rp) {
            reject(RejectReason::intra_class);
        } else if (onto.hierarchy.count({rc, rp})) {
            reject(RejectReason::duplicate);
        } else if (reaches(parents, rp, rc)) {
            reject(RejectReason::cycle);
        } else {
            onto.hierarchy.emplace(rc, rp);
            parents[rc].push_back(rp);
        }
    }
    return onto;
}

std::vector<LabeledPair> pairs_from_outcomes(const std::vector<ClassificationOutcome>& outcomes,
                                             const std::string& source) {
    std::vector<LabeledPair> out;
    for (const auto& o : outcomes) {
        if (!o.final_label) continue;
        out.push_back({o.pair_id, o.topic_a, o.topic_b, *o.final_label, source,
                       Provenance::classified});
    }
    return out;
}

namespace {

struct IndexedDag {
    std::vector<std::string> names;
    std::vector<std::vector<std::size_t>> out;  // child -> parents
};

IndexedDag index_edges(const std::set<std::pair<std::string, std::string>>& edges) {
    IndexedDag dag;
    std::map<std::string, std::size_t> idx;
    auto id = [&](const std::string& s) {
        auto [it, inserted] = idx.emplace(s, dag.names.size());
        if (inserted) {
            dag.names.push_back(s);
            dag.out.emplace_back();
        }
        return it->second;
    };
    for (const auto& [a, b] : edges) {
        const auto ia = id(a);
        const auto ib = id(b);
        dag.out[ia].push_back(ib);
    }
    return dag;
}

// Kahn's algorithm; returns fewer than n nodes when a cycle exists.
std::vector<std::size_t> topological_order(const IndexedDag& dag) {
    const std::size_t n = dag.names.size();
    std::vector<std::size_t> indegree(n, 0);
    for (const auto& succ : dag.out)
        for (auto v : succ) ++indegree[v];
    std::vector<std::size_t> ready, order;
    for (std::size_t v = 0; v < n; ++v)
        if (indegree[v] == 0) ready.push_back(v);
    while (!ready.empty()) {
        const auto v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (auto w : dag.out[v])
            if (--indegree[w] == 0) ready.push_back(w);
    }
    return order;
}

}  // namespace

bool is_acyclic(const std::set<std::pair<std::string, std::string>>& edges) {
    const auto dag = index_edges(edges);
    return topological_order(dag).size() == dag.names.size();
}

AssembledOntology transitive_reduction(const AssembledOntology& ontology) {
    const auto dag = index_edges(ontology.hierarchy);
    const auto order = topological_order(dag);
    if (order.size() != dag.names.size())
        throw InvalidArgument("transitive reduction needs an acyclic hierarchy");

    const std::size_t n = dag.names.size();
    const std::size_t words = (n + 63) / 64;
    std::vector<std::vector<std::uint64_t>> reach(n, std::vector<std::uint64_t>(words, 0));
    auto test = [&](std::size_t u, std::size_t v) { return (reach[u][v / 64] >> (v % 64)) & 1U; };
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const auto u = *it;
        for (auto w : dag.out[u]) {
            reach[u][w / 64] |= std::uint64_t{1} << (w % 64);
            for (std::size_t k = 0; k < words; ++k) reach[u][k] |= reach[w][k];
        }
    }

    AssembledOntology reduced = ontology;
    reduced.hierarchy.clear();
    for (std::size_t u = 0; u < n; ++u) {
        for (auto v : dag.out[u]) {
            bool implied = false;
            for (auto w : dag.out[u]) {
                if (w != v && test(w, v)) {
                    implied = true;
                    break;
                }
            }
            if (!implied) reduced.hierarchy.emplace(dag.names[u], dag.names[v]);
        }
    }
    return reduced;
}

std::string slugify(std::string_view label) {
    std::string slug;
    bool dash = false;
    for (unsigned char c : label) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80;
        if (c >= 'A' && c <= 'Z') {
            if (dash && !slug.empty()) slug.push_back('-');
            dash = false;
            slug.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if (keep) {
            if (dash && !slug.empty()) slug.push_back('-');
            dash = false;
            slug.push_back(static_cast<char>(c));
        } else {
            dash = true;
        }
    }
    return slug.empty() ? "concept" : slug;
}

std::string emit_skos(const AssembledOntology& ontology, std::string_view base_iri,
                      EquivalenceMode mode) {
    const std::string type = std::string(vocab::rdf_type);
    const std::string concept_type = vocab::skos_term("Concept");
    const std::string pref = vocab::skos_term("prefLabel");
    const std::string alt = vocab::skos_term("altLabel");
    const std::string broader = vocab::skos_term("broader");
    const std::string exact = vocab::skos_term("exactMatch");

    std::map<std::string, std::string> iri_of;    // label -> IRI
    std::map<std::string, std::string> owner_of;  // IRI -> label
    auto assign = [&](const std::string& label) {
        const std::string iri = std::string(base_iri) + slugify(label);
        if (auto [it, inserted] = owner_of.emplace(iri, label); !inserted && it->second != label)
            throw SlugCollision("'" + it->second + "' and '" + label + "' both map to " + iri);
        iri_of[label] = iri;
    };
    for (const auto& c : ontology.concepts) {
        const std::string rep = ontology.representative(c);
        if (mode == EquivalenceMode::exact_match || rep == c) assign(c);
    }

    std::vector<std::string> lines;
    auto emit = [&](Triple t) { lines.push_back(format_ntriple(t)); };
    for (const auto& c : ontology.concepts) {
        const std::string rep = ontology.representative(c);
        if (mode == EquivalenceMode::label_merge && rep != c) {
            emit(Triple::with_literal(iri_of.at(rep), alt, c));
            continue;
        }
        emit(Triple::with_iri(iri_of.at(c), type, concept_type));
        emit(Triple::with_literal(iri_of.at(c), pref, c));
        if (rep != c) emit(Triple::with_iri(iri_of.at(rep), exact, iri_of.at(c)));
    }
    for (const auto& [child, parent] : ontology.hierarchy)
        emit(Triple::with_iri(iri_of.at(child), broader, iri_of.at(parent)));

    std::sort(lines.begin(), lines.end());
    lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
    std::string doc;
    for (const auto& l : lines) {
        doc += l;
        doc += '\n';
    }
    return doc;
}

std::string rejected_to_jsonl(const AssembledOntology& ontology) {
    std::string out;
    for (const auto& r : ontology.rejected) {
        auto doc = to_json(r.pair);
        doc["reason"] = to_string(r.reason);
        out += doc.dump();
        out += '\n';
    }
    return out;
}

}  // namespace topicrel
