#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "topicrel/concept_graph.hpp"
#include "topicrel/labels.hpp"

namespace topicrel {

// `classified` marks pairs whose label came from a model prediction; it never
// appears in dataset files.
enum class Provenance {
    hierarchy_edge,
    adjudicated_candidate,
    related_edge,
    random_negative,
    classified,
};

std::string_view to_string(Provenance provenance) noexcept;
Provenance provenance_from_string(std::string_view text);

struct LabeledPair {
    std::string pair_id;
    std::string topic_a;
    std::string topic_b;
    RelationLabel label = RelationLabel::other;
    std::string source;
    Provenance provenance = Provenance::hierarchy_edge;

    bool operator==(const LabeledPair&) const = default;
};

nlohmann::ordered_json to_json(const LabeledPair& pair);
LabeledPair labeled_pair_from_json(const nlohmann::json& doc);

// Non-negative rational with a positive denominator, kept in lowest terms.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d);

    static Rational parse(std::string_view text);  // "7/10", "0.7" or "1"

    bool operator==(const Rational&) const = default;
};

enum class Split { train = 0, validation = 1, test = 2 };

inline constexpr std::array<Split, 3> kAllSplits{Split::train, Split::validation, Split::test};

// File suffix used for a split: train, val, test.
std::string_view split_file_tag(Split split) noexcept;
Split split_from_string(std::string_view text);

struct SplitSpec {
    std::array<Rational, 3> ratios{Rational{7, 10}, Rational{1, 10}, Rational{2, 10}};
    std::uint64_t seed = 0;

    // Throws InvalidArgument unless the ratios sum to exactly 1.
    void validate() const;

    // Ratios from non-negative integer weights, e.g. {7, 1, 2}.
    static SplitSpec from_weights(std::array<std::int64_t, 3> weights, std::uint64_t seed);
};

// Largest-remainder allocation of `count` items over the ratios, with leftover
// items going to train, then validation, then test on equal remainders.
std::array<std::size_t, 3> allocate_counts(std::size_t count,
                                           const std::array<Rational, 3>& ratios);

struct DatasetBundle {
    std::string name;
    std::vector<LabeledPair> train;
    std::vector<LabeledPair> validation;
    std::vector<LabeledPair> test;

    const std::vector<LabeledPair>& split(Split which) const;
    std::vector<LabeledPair>& split(Split which);
    std::size_t size() const noexcept { return train.size() + validation.size() + test.size(); }
};

// Throws DuplicatePairId or DuplicateTuple when a bundle invariant is broken.
// With `tuple_scope_by_source`, a repeated (topic_a, topic_b, label) tuple is
// only an error when it also repeats its source.
void validate_bundle(const DatasetBundle& bundle, bool tuple_scope_by_source = false);

// ---- sampling ----

std::vector<LabeledPair> sample_hierarchical(const ConceptGraph& graph, std::size_t n_per_label,
                                             std::uint64_t seed, const std::string& source);

// A same-as candidate awaiting human review. Its status is not stored here;
// it is derived from the verdict log (see AdjudicationStore).
struct CandidatePair {
    std::string pair_id;
    std::string topic_a;
    std::string topic_b;
    std::string source;
    std::string context;

    bool operator==(const CandidatePair&) const = default;
};

nlohmann::ordered_json to_json(const CandidatePair& candidate);
CandidatePair candidate_from_json(const nlohmann::json& doc);


struct SameAsHarvest {
    std::vector<CandidatePair> pending;
    std::vector<LabeledPair> accepted;  // MeSH related edges under auto-accept
};

SameAsHarvest extract_sameas_candidates(const ConceptGraph& graph, const std::string& source,
                                        bool auto_accept_related = true);

struct ExclusionPolicy {
    // Exclude ancestor/descendant pairs under transitive hierarchy closure.
    // When false only direct edges are excluded.
    bool transitive = true;
    // Rejection budget; 0 means 100 * n.
    std::size_t max_attempts = 0;
};

std::vector<LabeledPair> sample_other(const ConceptGraph& graph, std::size_t n, std::uint64_t seed,
                                      const ExclusionPolicy& policy, const std::string& source);

// True when `a` and `b` (concept ids) share any link excluded by the policy.
// Shared by the sampler and by checks that re-verify its output.
bool pair_is_linked(const ConceptGraph& graph, const std::string& a, const std::string& b,
                    const ExclusionPolicy& policy);

// Seeded subset of `pairs` of size n (InvalidArgument when too few).
std::vector<LabeledPair> sample_subset(std::vector<LabeledPair> pairs, std::size_t n,
                                       std::uint64_t seed);

DatasetBundle make_splits(std::vector<LabeledPair> pairs, const SplitSpec& spec,
                          const std::string& name);

DatasetBundle merge_bundles(const std::vector<DatasetBundle>& bundles, const std::string& name);

// ---- files ----

std::string to_jsonl(const std::vector<LabeledPair>& pairs);
std::vector<LabeledPair> pairs_from_jsonl(std::string_view text);

void write_pairs(const std::filesystem::path& path, const std::vector<LabeledPair>& pairs);
std::vector<LabeledPair> read_pairs(const std::filesystem::path& path);

// <dir>/<name>.train.jsonl, <name>.val.jsonl, <name>.test.jsonl
void write_bundle(const std::filesystem::path& dir, const DatasetBundle& bundle);
DatasetBundle read_bundle(const std::filesystem::path& dir, const std::string& name);

std::filesystem::path split_path(const std::filesystem::path& dir, const std::string& name,
                                 Split split);

}  // namespace topicrel
