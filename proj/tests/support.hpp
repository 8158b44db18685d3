#pragma once

// Helpers shared by the unit suites and the acceptance runner.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "topicrel/concept_graph.hpp"
#include "topicrel/ntriples.hpp"
#include "topicrel/random.hpp"

namespace testsupport {

namespace fs = std::filesystem;

class TempDir {
public:
    explicit TempDir(const std::string& tag = "t") {
        static std::atomic<int> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = fs::temp_directory_path() /
                ("topicrel-" + tag + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    fs::path path_;
};

struct TaxonomyShape {
    std::string prefix = "topic";
    std::size_t concepts = 100;
    std::size_t roots = 3;
    std::size_t alt_labels = 0;     // concepts 0..alt_labels-1 get one alias each
    std::size_t related = 0;        // related pairs between random unlinked concepts
    std::uint64_t seed = 1;
};

inline std::string concept_iri(const std::string& prefix, std::size_t i) {
    return "http://example.org/" + prefix + "/c" + std::to_string(i);
}

inline std::string concept_label(const std::string& prefix, std::size_t i) {
    return prefix + " concept " + std::to_string(i);
}

// Random forest: concept i >= roots hangs below a uniformly chosen earlier concept,
// so the hierarchy has exactly concepts - roots edges and no cycles.
inline std::vector<topicrel::Triple> synthetic_taxonomy(const TaxonomyShape& shape,
                                                         topicrel::SchemaDialect dialect) {
    using topicrel::Triple;
    namespace v = topicrel::vocab;
    topicrel::SeededRng rng(shape.seed);
    std::vector<Triple> out;
    const bool mesh = dialect == topicrel::SchemaDialect::mesh;
    const std::string type_iri = mesh ? v::mesh_term("TopicalDescriptor") : v::skos_term("Concept");
    const std::string label = mesh ? std::string(v::rdfs_label) : v::skos_term("prefLabel");
    const std::string broader = mesh ? v::mesh_term("broaderDescriptor") : v::skos_term("broader");
    const std::string related = mesh ? v::mesh_term("relatedConcept") : v::skos_term("related");

    for (std::size_t i = 0; i < shape.concepts; ++i) {
        const auto iri = concept_iri(shape.prefix, i);
        out.push_back(Triple::with_iri(iri, std::string(v::rdf_type), type_iri));
        out.push_back(Triple::with_literal(iri, label, concept_label(shape.prefix, i), "en"));
        if (!mesh && i < shape.alt_labels) {
            out.push_back(Triple::with_literal(iri, v::skos_term("altLabel"),
                                               shape.prefix + " alias " + std::to_string(i), "en"));
        }
        if (i >= shape.roots) {
            const auto parent = rng.below(i);
            out.push_back(Triple::with_iri(iri, broader, concept_iri(shape.prefix, parent)));
        }
    }
    std::set<std::pair<std::size_t, std::size_t>> seen;
    while (seen.size() < shape.related) {
        auto a = rng.below(shape.concepts);
        auto b = rng.below(shape.concepts);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (!seen.emplace(a, b).second) continue;
        out.push_back(Triple::with_iri(concept_iri(shape.prefix, a), related,
                                       concept_iri(shape.prefix, b)));
    }
    return out;
}

inline topicrel::ConceptGraph synthetic_graph(const TaxonomyShape& shape,
                                              topicrel::SchemaDialect dialect) {
    return topicrel::build_graph(synthetic_taxonomy(shape, dialect), dialect);
}

inline std::string to_ntriples(const std::vector<topicrel::Triple>& triples) {
    std::string doc;
    for (const auto& t : triples) {
        doc += topicrel::format_ntriple(t);
        doc += '\n';
    }
    return doc;
}

// Reflexive-free reachability over (child, parent) edges by repeated DFS.
inline std::set<std::pair<std::string, std::string>> reachability(
    const std::set<std::pair<std::string, std::string>>& edges) {
    std::map<std::string, std::vector<std::string>> up;
    std::set<std::string> nodes;
    for (const auto& [c, p] : edges) {
        up[c].push_back(p);
        nodes.insert(c);
        nodes.insert(p);
    }
    std::set<std::pair<std::string, std::string>> reach;
    for (const auto& start : nodes) {
        std::vector<std::string> stack{start};
        std::set<std::string> seen;
        while (!stack.empty()) {
            const auto n = stack.back();
            stack.pop_back();
            for (const auto& p : up[n]) {
                if (seen.insert(p).second) {
                    reach.emplace(start, p);
                    stack.push_back(p);
                }
            }
        }
    }
    return reach;
}

// Kahn's algorithm; true when every node can be ordered.
inline bool topologically_sortable(const std::set<std::pair<std::string, std::string>>& edges) {
    std::map<std::string, std::size_t> indegree;
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& [c, p] : edges) {
        indegree[c];
        ++indegree[p];
        out[c].push_back(p);
    }
    std::vector<std::string> ready;
    for (const auto& [n, d] : indegree)
        if (d == 0) ready.push_back(n);
    std::size_t ordered = 0;
    while (!ready.empty()) {
        const auto n = ready.back();
        ready.pop_back();
        ++ordered;
        for (const auto& p : out[n])
            if (--indegree[p] == 0) ready.push_back(p);
    }
    return ordered == indegree.size();
}

}  // namespace testsupport
