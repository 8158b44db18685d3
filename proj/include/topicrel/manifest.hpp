#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "topicrel/adjudication.hpp"
#include "topicrel/concept_graph.hpp"
#include "topicrel/dataset.hpp"
#include "topicrel/evaluation.hpp"
#include "topicrel/inference.hpp"
#include "topicrel/ontology.hpp"
#include "topicrel/prompt.hpp"

namespace topicrel {

// How a source contributes same-as pairs.
enum class SameAsMode {
    adjudicated,  // altLabel candidates reviewed through the adjudication store
    related,      // related edges taken directly (MeSH)
    none,
};

struct SourceSpec {
    std::string name;
    std::filesystem::path path;
    SchemaDialect dialect = SchemaDialect::skos_core;
    std::map<RelationLabel, std::size_t> counts;  // per-label sample sizes
    SameAsMode same_as = SameAsMode::adjudicated;
};

struct MockSettings {
    MockMode mode = MockMode::oracle;
    std::optional<std::filesystem::path> script_path;  // JSON object prompt-key -> response
    std::string fixed_response;
};

struct RunManifest {
    std::string name = "dataset";
    std::uint64_t seed = 0;
    std::vector<SourceSpec> sources;
    std::array<Rational, 3> split_ratios{Rational{7, 10}, Rational{1, 10}, Rational{2, 10}};
    ExclusionPolicy exclusion;
    IngestOptions ingest;

    std::optional<EndpointConfig> endpoint;
    std::optional<MockSettings> mock;
    ClassificationStrategy strategy = ClassificationStrategy::standard;
    std::optional<std::filesystem::path> standard_template;
    std::optional<std::filesystem::path> cot_stage1_template;
    std::optional<std::filesystem::path> cot_stage2_template;

    std::string classify_dataset;  // defaults to `name`
    Split classify_split = Split::test;

    FailurePolicy failure_policy = FailurePolicy::as_other;
    std::optional<std::filesystem::path> predictions_path;

    std::string base_iri = "https://example.org/topics/";
    bool assemble_from_outcomes = true;
    bool reduce = true;
    EquivalenceMode equivalence = EquivalenceMode::label_merge;

    QuorumPolicy quorum;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::filesystem::path> static_dir;

    std::filesystem::path output_dir = "out";

    // Throws ManifestError. Relative paths are resolved against base_dir.
    static RunManifest from_json(const nlohmann::json& doc,
                                 const std::filesystem::path& base_dir = {});
    static RunManifest load(const std::filesystem::path& path);

    // Checks that every referenced input path exists.
    void validate() const;
};

}  // namespace topicrel
