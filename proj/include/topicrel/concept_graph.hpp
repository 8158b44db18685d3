#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "topicrel/ntriples.hpp"

namespace topicrel {

enum class SchemaDialect { skos_core, mesh };

std::string_view to_string(SchemaDialect dialect) noexcept;
SchemaDialect dialect_from_string(std::string_view text);

namespace vocab {
inline constexpr std::string_view skos = "http://www.w3.org/2004/02/skos/core#";
inline constexpr std::string_view mesh = "http://id.nlm.nih.gov/mesh/vocab#";
inline constexpr std::string_view rdf_type = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view rdfs_label = "http://www.w3.org/2000/01/rdf-schema#label";

std::string skos_term(std::string_view local);
std::string mesh_term(std::string_view local);
}  // namespace vocab

struct Concept {
    std::string id;
    std::string pref_label;
    std::set<std::string> alt_labels;

    bool operator==(const Concept&) const = default;
};

// (narrower_id, broader_id)
using HierarchyEdge = std::pair<std::string, std::string>;
// Canonical unordered pair: first < second.
using RelatedEdge = std::pair<std::string, std::string>;

RelatedEdge make_related_edge(std::string a, std::string b);

struct ConceptGraph {
    SchemaDialect dialect = SchemaDialect::skos_core;
    std::map<std::string, Concept> concepts;
    std::set<HierarchyEdge> hierarchy_edges;
    std::set<RelatedEdge> related_edges;

    bool operator==(const ConceptGraph&) const = default;
};

// Predicate IRIs consulted while building a graph. The MeSH label predicates
// are listed in priority order: the first one present on a subject supplies
// its preferred label.
struct IngestOptions {
    std::vector<std::string> mesh_label_predicates{
        std::string(vocab::rdfs_label), vocab::mesh_term("prefLabel")};
    // Subjects typed with any rdf:type outside this list are ignored for MeSH
    // (qualifiers, supplementary concept records). Untyped subjects are kept.
    std::vector<std::string> mesh_accepted_types{
        vocab::mesh_term("TopicalDescriptor"), vocab::mesh_term("Concept")};
    // Literal language filter: literals tagged with another language are
    // skipped. Untagged literals are always accepted. Empty accepts all.
    std::string language = "en";
};

struct IngestReport {
    std::size_t dropped_edges = 0;        // endpoint without a preferred label
    std::size_t dropped_self_edges = 0;
    std::size_t skipped_literals = 0;     // wrong language or blank
    std::size_t ignored_subjects = 0;     // MeSH type filter
};

ConceptGraph build_graph(const std::vector<Triple>& triples, SchemaDialect dialect,
                         const IngestOptions& options = {}, IngestReport* report = nullptr);

struct GraphStats {
    std::size_t concepts = 0;
    std::size_t hierarchy_edges = 0;
    std::size_t related_edges = 0;
    std::size_t alt_labels = 0;
    std::size_t hierarchy_cycles = 0;  // non-trivial strongly connected components

    bool operator==(const GraphStats&) const = default;
};

GraphStats graph_stats(const ConceptGraph& graph);

// Interchange format with lexicographically sorted arrays.
nlohmann::ordered_json to_json(const ConceptGraph& graph);
ConceptGraph graph_from_json(const nlohmann::json& doc);

}  // namespace topicrel
