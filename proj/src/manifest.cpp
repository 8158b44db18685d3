#include "topicrel/manifest.hpp"

#include <fstream>

#include "topicrel/error.hpp"
#include "topicrel/text.hpp"

namespace topicrel {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_absolute() || base.empty()) return path;
    return base / path;
}

SameAsMode same_as_mode_from_string(const std::string& text) {
    if (text == "adjudicated") return SameAsMode::adjudicated;
    if (text == "related") return SameAsMode::related;
    if (text == "none") return SameAsMode::none;
    throw ManifestError("unknown same_as mode '" + text + "'");
}

MockMode mock_mode_from_string(const std::string& text) {
    if (text == "oracle") return MockMode::oracle;
    if (text == "scripted") return MockMode::scripted;
    if (text == "fixed") return MockMode::fixed;
    throw ManifestError("unknown mock mode '" + text + "'");
}

}  // namespace

RunManifest RunManifest::from_json(const nlohmann::json& doc, const std::filesystem::path& base) {
    RunManifest m;
    try {
        if (!doc.is_object()) throw ManifestError("manifest must be a JSON object");
        if (!doc.contains("seed") || !doc["seed"].is_number_integer())
            throw ManifestError("manifest needs an integer 'seed'");
        m.seed = doc["seed"].get<std::uint64_t>();
        m.name = doc.value("name", m.name);
        if (m.name.empty()) throw ManifestError("'name' must not be empty");
        m.output_dir = resolve(base, doc.value("output_dir", std::string("out")));

        for (const auto& s : doc.value("sources", nlohmann::json::array())) {
            SourceSpec src;
            src.name = s.at("name").get<std::string>();
            src.path = resolve(base, s.at("path").get<std::string>());
            src.dialect = dialect_from_string(s.value("dialect", "skos-core"));
            src.same_as = same_as_mode_from_string(s.value(
                "same_as", src.dialect == SchemaDialect::mesh ? "related" : "adjudicated"));
            const auto counts = s.value("counts", nlohmann::json::object());
            for (const auto& [key, value] : counts.items()) {
                const auto label = label_from_string(key);
                if (!label) throw ManifestError("unknown label '" + key + "' in counts of " + src.name);
                src.counts[*label] = value.get<std::size_t>();
            }
            if (src.name.empty() || src.name == m.name)
                throw ManifestError("source name '" + src.name + "' must be non-empty and differ from the bundle name");
            m.sources.push_back(std::move(src));
        }

        if (doc.contains("split")) {
            const auto& split = doc["split"];
            if (!split.is_array() || split.size() != 3) throw ManifestError("'split' needs three entries");
            if (split[0].is_number_integer()) {
                m.split_ratios = SplitSpec::from_weights(
                    {split[0].get<std::int64_t>(), split[1].get<std::int64_t>(),
                     split[2].get<std::int64_t>()}, 0).ratios;
            } else {
                for (std::size_t i = 0; i < 3; ++i) m.split_ratios[i] = Rational::parse(split[i].get<std::string>());
            }
            SplitSpec{m.split_ratios, 0}.validate();
        }

        if (doc.contains("exclusion")) {
            const auto& e = doc["exclusion"];
            m.exclusion.transitive = e.value("transitive", true);
            m.exclusion.max_attempts = e.value("max_attempts", std::size_t{0});
        }
        if (doc.contains("ingest")) {
            const auto& i = doc["ingest"];
            m.ingest.language = i.value("language", m.ingest.language);
            m.ingest.mesh_label_predicates = i.value("mesh_label_predicates", m.ingest.mesh_label_predicates);
            m.ingest.mesh_accepted_types = i.value("mesh_accepted_types", m.ingest.mesh_accepted_types);
        }

        if (doc.contains("adjudication")) {
            const auto& a = doc["adjudication"];
            if (a.contains("quorum")) {
                const auto& q = a["quorum"];
                m.quorum.required_accepts = q.value("required_accepts", m.quorum.required_accepts);
                m.quorum.required_rejects = q.value("required_rejects", m.quorum.required_rejects);
                m.quorum.panel_size = q.value("panel_size", m.quorum.panel_size);
            }
            m.quorum.validate();
            m.host = a.value("host", m.host);
            m.port = a.value("port", m.port);
            if (a.contains("static_dir")) m.static_dir = resolve(base, a["static_dir"].get<std::string>());
        }

        if (doc.contains("endpoint")) {
            m.endpoint = endpoint_from_json(doc["endpoint"]);
            if (doc["endpoint"].contains("mock")) {
                const auto& mk = doc["endpoint"]["mock"];
                MockSettings ms;
                ms.mode = mock_mode_from_string(mk.value("mode", "oracle"));
                if (mk.contains("script")) ms.script_path = resolve(base, mk["script"].get<std::string>());
                ms.fixed_response = mk.value("fixed_response", "");
                if (ms.mode == MockMode::scripted && !ms.script_path)
                    throw ManifestError("scripted mock needs a 'script' file");
                m.mock = std::move(ms);
            }
            if (m.endpoint->dialect == EndpointDialect::mock && !m.mock)
                throw ManifestError("mock endpoint needs a 'mock' block");
        }
        m.strategy = classification_strategy_from_string(doc.value("strategy", "standard"));
        if (doc.contains("templates")) {
            const auto& t = doc["templates"];
            if (t.contains("standard")) m.standard_template = resolve(base, t["standard"].get<std::string>());
            if (t.contains("cot_stage1")) m.cot_stage1_template = resolve(base, t["cot_stage1"].get<std::string>());
            if (t.contains("cot_stage2")) m.cot_stage2_template = resolve(base, t["cot_stage2"].get<std::string>());
        }
        m.classify_dataset = m.name;
        if (doc.contains("classify")) {
            const auto& c = doc["classify"];
            m.classify_dataset = c.value("dataset", m.name);
            m.classify_split = split_from_string(c.value("split", "test"));
        }
        if (doc.contains("evaluate")) {
            const auto& e = doc["evaluate"];
            m.failure_policy = failure_policy_from_string(e.value("failure_policy", "as-other"));
            if (e.contains("predictions")) m.predictions_path = resolve(base, e["predictions"].get<std::string>());
        }
        if (doc.contains("assemble")) {
            const auto& a = doc["assemble"];
            m.base_iri = a.value("base_iri", m.base_iri);
            const auto input = a.value("input", std::string("outcomes"));
            if (input != "outcomes" && input != "dataset")
                throw ManifestError("assemble.input must be 'outcomes' or 'dataset'");
            m.assemble_from_outcomes = input == "outcomes";
            m.reduce = a.value("reduce", true);
            const auto eq = a.value("equivalence", std::string("label-merge"));
            if (eq == "label-merge") m.equivalence = EquivalenceMode::label_merge;
            else if (eq == "exact-match") m.equivalence = EquivalenceMode::exact_match;
            else throw ManifestError("assemble.equivalence must be 'label-merge' or 'exact-match'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError(std::string("manifest: ") + e.what());
    } catch (const ManifestError&) {
        throw;
    } catch (const Error& e) {
        throw ManifestError(std::string("manifest: ") + e.what());
    }
    return m;
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ManifestError("cannot open manifest " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError("manifest " + path.string() + " is not valid JSON: " + e.what());
    }
    return from_json(doc, path.parent_path());
}

void RunManifest::validate() const {
    auto must_exist = [](const std::filesystem::path& p, std::string_view what) {
        if (!std::filesystem::exists(p))
            throw ManifestError(std::string(what) + " not found: " + p.string());
    };
    for (const auto& s : sources) must_exist(s.path, "source file");
    if (standard_template) must_exist(*standard_template, "standard template");
    if (cot_stage1_template) must_exist(*cot_stage1_template, "stage-1 template");
    if (cot_stage2_template) must_exist(*cot_stage2_template, "stage-2 template");
    if (mock && mock->script_path) must_exist(*mock->script_path, "mock script");
    if (predictions_path) must_exist(*predictions_path, "predictions file");
    if (static_dir) must_exist(*static_dir, "static asset directory");
}

}  // namespace topicrel
