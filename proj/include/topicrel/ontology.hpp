#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "topicrel/dataset.hpp"
#include "topicrel/prompt.hpp"

namespace topicrel {

enum class RejectReason { cycle, duplicate, self_loop, intra_class };

std::string_view to_string(RejectReason reason) noexcept;

struct RejectedPair {
    LabeledPair pair;
    RejectReason reason = RejectReason::cycle;

    bool operator==(const RejectedPair&) const = default;
};

// Acyclic hierarchy over equivalence-class representatives. Every concept
// maps to a representative (itself when it belongs to no same-as class).
struct AssembledOntology {
    std::set<std::string> concepts;
    std::set<std::pair<std::string, std::string>> hierarchy;  // (child, parent)
    std::vector<std::set<std::string>> equivalences;           // sorted by representative
    std::vector<RejectedPair> rejected;
    std::map<std::string, std::string> class_of;  // member -> representative

    // Smallest member of the concept's class, or the concept itself.
    std::string representative(const std::string& concept_label) const;
};

// Surface-form canonicalisation applied to every topic (trim + collapse
// internal whitespace).
std::string canonical_topic(std::string_view topic);

// Same-as pairs are merged first, then hierarchy pairs are inserted in
// ascending pair_id order; `other` pairs are ignored.
AssembledOntology assemble(std::vector<LabeledPair> pairs);

// Converts classified outcomes into pairs labelled with their final label.
// Parse failures are dropped.
std::vector<LabeledPair> pairs_from_outcomes(const std::vector<ClassificationOutcome>& outcomes,
                                             const std::string& source);

AssembledOntology transitive_reduction(const AssembledOntology& ontology);

// Returns true when the hierarchy admits a topological order.
bool is_acyclic(const std::set<std::pair<std::string, std::string>>& edges);

enum class EquivalenceMode { label_merge, exact_match };

std::string slugify(std::string_view label);

// N-Triples document, one statement per line, lines sorted. Throws
// SlugCollision when two emitted concepts share an IRI.
std::string emit_skos(const AssembledOntology& ontology, std::string_view base_iri,
                      EquivalenceMode mode = EquivalenceMode::label_merge);

std::string rejected_to_jsonl(const AssembledOntology& ontology);

}  // namespace topicrel
