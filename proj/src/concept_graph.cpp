#include "topicrel/concept_graph.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "topicrel/error.hpp"
#include "topicrel/text.hpp"

namespace topicrel {

std::string_view to_string(SchemaDialect dialect) noexcept {
    return dialect == SchemaDialect::mesh ? "mesh" : "skos-core";
}

SchemaDialect dialect_from_string(std::string_view text) {
    if (text == "skos-core") return SchemaDialect::skos_core;
    if (text == "mesh") return SchemaDialect::mesh;
    throw FormatError("unknown schema dialect '" + std::string(text) + "'");
}

std::string vocab::skos_term(std::string_view local) {
    return std::string(skos) + std::string(local);
}

std::string vocab::mesh_term(std::string_view local) {
    return std::string(mesh) + std::string(local);
}

RelatedEdge make_related_edge(std::string a, std::string b) {
    if (b < a) std::swap(a, b);
    return {std::move(a), std::move(b)};
}

namespace {

bool language_accepted(const Literal& lit, const std::string& wanted) {
    if (wanted.empty() || lit.language.empty()) return true;
    if (lit.language.size() < wanted.size()) return false;
    if (!iequals(std::string_view(lit.language).substr(0, wanted.size()), wanted)) return false;
    return lit.language.size() == wanted.size() || lit.language[wanted.size()] == '-';
}

struct SubjectLabels {
    std::map<std::string, std::set<std::string>> by_predicate;
};

}  // namespace

ConceptGraph build_graph(const std::vector<Triple>& triples, SchemaDialect dialect,
                         const IngestOptions& options, IngestReport* report) {
    IngestReport local;
    IngestReport& rep = report ? *report : local;
    rep = IngestReport{};

    const bool mesh = dialect == SchemaDialect::mesh;
    const std::string skos_broader = vocab::skos_term("broader");
    const std::string skos_narrower = vocab::skos_term("narrower");
    const std::string skos_related = vocab::skos_term("related");
    const std::string skos_pref = vocab::skos_term("prefLabel");
    const std::string skos_alt = vocab::skos_term("altLabel");
    const std::string mesh_broader = vocab::mesh_term("broaderDescriptor");
    const std::string mesh_related = vocab::mesh_term("relatedConcept");

    std::unordered_set<std::string> excluded;
    if (mesh) {
        std::unordered_map<std::string, bool> typed_ok;
        for (const auto& t : triples) {
            if (t.predicate != vocab::rdf_type || !t.object_iri) continue;
            const bool accepted =
                std::find(options.mesh_accepted_types.begin(), options.mesh_accepted_types.end(),
                          *t.object_iri) != options.mesh_accepted_types.end();
            typed_ok[t.subject] = typed_ok[t.subject] || accepted;
        }
        for (const auto& [subject, ok] : typed_ok) {
            if (!ok) excluded.insert(subject);
        }
        rep.ignored_subjects = excluded.size();
    }

    std::unordered_map<std::string, SubjectLabels> labels;
    std::unordered_map<std::string, std::set<std::string>> alt_labels;
    std::vector<HierarchyEdge> raw_hierarchy;
    std::vector<RelatedEdge> raw_related;

    auto add_edge = [&](std::vector<std::pair<std::string, std::string>>& into,
                        const std::string& a, const std::string& b) {
        if (a == b) {
            ++rep.dropped_self_edges;
            return;
        }
        into.emplace_back(a, b);
    };

    for (const auto& t : triples) {
        if (excluded.count(t.subject)) continue;
        if (t.object_literal) {
            const bool label_predicate =
                mesh ? std::find(options.mesh_label_predicates.begin(),
                                 options.mesh_label_predicates.end(),
                                 t.predicate) != options.mesh_label_predicates.end()
                     : (t.predicate == skos_pref || t.predicate == skos_alt);
            if (!label_predicate) continue;
            std::string value = trim(t.object_literal->value);
            if (value.empty() || !language_accepted(*t.object_literal, options.language)) {
                ++rep.skipped_literals;
                continue;
            }
            if (!mesh && t.predicate == skos_alt) {
                alt_labels[t.subject].insert(std::move(value));
            } else {
                labels[t.subject].by_predicate[t.predicate].insert(std::move(value));
            }
            continue;
        }
        if (!t.object_iri) continue;
        const std::string& object = *t.object_iri;
        if (excluded.count(object)) continue;
        if (mesh) {
            if (t.predicate == mesh_broader) add_edge(raw_hierarchy, t.subject, object);
            else if (t.predicate == mesh_related) add_edge(raw_related, t.subject, object);
        } else {
            if (t.predicate == skos_broader) add_edge(raw_hierarchy, t.subject, object);
            else if (t.predicate == skos_narrower) add_edge(raw_hierarchy, object, t.subject);
            else if (t.predicate == skos_related) add_edge(raw_related, t.subject, object);
        }
    }

    ConceptGraph graph;
    graph.dialect = dialect;
    const std::vector<std::string> priority =
        mesh ? options.mesh_label_predicates : std::vector<std::string>{skos_pref};
    for (const auto& [subject, found] : labels) {
        for (const auto& predicate : priority) {
            const auto it = found.by_predicate.find(predicate);
            if (it == found.by_predicate.end() || it->second.empty()) continue;
            if (it->second.size() > 1) {
                throw DuplicatePrefLabelForId("concept " + subject + " has preferred labels '" +
                                              *it->second.begin() + "' and '" +
                                              *std::next(it->second.begin()) + "'");
            }
            Concept c;
            c.id = subject;
            c.pref_label = *it->second.begin();
            if (auto alts = alt_labels.find(subject); alts != alt_labels.end()) {
                for (const auto& alt : alts->second) {
                    if (!iequals(alt, c.pref_label)) c.alt_labels.insert(alt);
                }
            }
            graph.concepts.emplace(subject, std::move(c));
            break;
        }
    }
    if (graph.concepts.empty()) throw EmptyGraph("no labelled concepts recognised");

    auto known = [&](const std::string& id) { return graph.concepts.count(id) > 0; };
    for (auto& [narrower, broader] : raw_hierarchy) {
        if (known(narrower) && known(broader)) graph.hierarchy_edges.emplace(narrower, broader);
        else ++rep.dropped_edges;
    }
    for (auto& [a, b] : raw_related) {
        if (known(a) && known(b)) graph.related_edges.insert(make_related_edge(a, b));
        else ++rep.dropped_edges;
    }
    return graph;
}

namespace {

// Iterative Tarjan; returns the number of components with more than one node.
std::size_t count_cyclic_components(const ConceptGraph& graph) {
    std::unordered_map<std::string, std::size_t> index_of_id;
    std::vector<std::string> ids;
    for (const auto& [id, _] : graph.concepts) {
        index_of_id.emplace(id, ids.size());
        ids.push_back(id);
    }
    const std::size_t n = ids.size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& [a, b] : graph.hierarchy_edges) {
        adj[index_of_id.at(a)].push_back(index_of_id.at(b));
    }

    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, unvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::size_t counter = 0;
    std::size_t cyclic = 0;

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) continue;
        std::vector<std::pair<std::size_t, std::size_t>> frames{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            auto& [v, next] = frames.back();
            if (next < adj[v].size()) {
                const std::size_t w = adj[v][next++];
                if (index[w] == unvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::size_t size = 0;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    ++size;
                } while (w != v);
                if (size > 1) ++cyclic;
            }
            const std::size_t finished = v;
            frames.pop_back();
            if (!frames.empty()) {
                const std::size_t parent = frames.back().first;
                low[parent] = std::min(low[parent], low[finished]);
            }
        }
    }
    return cyclic;
}

}  // namespace

GraphStats graph_stats(const ConceptGraph& graph) {
    GraphStats stats;
    stats.concepts = graph.concepts.size();
    stats.hierarchy_edges = graph.hierarchy_edges.size();
    stats.related_edges = graph.related_edges.size();
    for (const auto& [_, c] : graph.concepts) stats.alt_labels += c.alt_labels.size();
    stats.hierarchy_cycles = count_cyclic_components(graph);
    return stats;
}

nlohmann::ordered_json to_json(const ConceptGraph& graph) {
    nlohmann::ordered_json doc;
    doc["dialect"] = to_string(graph.dialect);
    auto concepts = nlohmann::ordered_json::array();
    for (const auto& [id, c] : graph.concepts) {
        concepts.push_back({{"id", c.id},
                            {"pref_label", c.pref_label},
                            {"alt_labels", std::vector<std::string>(c.alt_labels.begin(),
                                                                    c.alt_labels.end())}});
    }
    doc["concepts"] = std::move(concepts);
    auto hierarchy = nlohmann::ordered_json::array();
    for (const auto& [a, b] : graph.hierarchy_edges) hierarchy.push_back({a, b});
    doc["hierarchy_edges"] = std::move(hierarchy);
    auto related = nlohmann::ordered_json::array();
    for (const auto& [a, b] : graph.related_edges) related.push_back({a, b});
    doc["related_edges"] = std::move(related);
    return doc;
}

ConceptGraph graph_from_json(const nlohmann::json& doc) {
    try {
        ConceptGraph graph;
        graph.dialect = dialect_from_string(doc.at("dialect").get<std::string>());
        for (const auto& c : doc.at("concepts")) {
            Concept concept_entry;
            concept_entry.id = c.at("id").get<std::string>();
            concept_entry.pref_label = c.at("pref_label").get<std::string>();
            for (const auto& alt : c.at("alt_labels")) {
                concept_entry.alt_labels.insert(alt.get<std::string>());
            }
            graph.concepts.emplace(concept_entry.id, std::move(concept_entry));
        }
        auto endpoint = [&](const std::string& id) {
            if (!graph.concepts.count(id)) throw FormatError("edge endpoint '" + id + "' unknown");
            return id;
        };
        for (const auto& e : doc.at("hierarchy_edges")) {
            const auto a = endpoint(e.at(0).get<std::string>());
            const auto b = endpoint(e.at(1).get<std::string>());
            if (a == b) throw FormatError("self edge on '" + a + "'");
            graph.hierarchy_edges.emplace(a, b);
        }
        for (const auto& e : doc.at("related_edges")) {
            const auto a = endpoint(e.at(0).get<std::string>());
            const auto b = endpoint(e.at(1).get<std::string>());
            if (a == b) throw FormatError("self edge on '" + a + "'");
            graph.related_edges.insert(make_related_edge(a, b));
        }
        return graph;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("concept graph json: ") + e.what());
    }
}

}  // namespace topicrel
