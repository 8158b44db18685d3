#include "topicrel/cli.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <functional>
#include <map>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "topicrel/adjudication.hpp"
#include "topicrel/adjudication_server.hpp"
#include "topicrel/concept_graph.hpp"
#include "topicrel/dataset.hpp"
#include "topicrel/error.hpp"
#include "topicrel/evaluation.hpp"
#include "topicrel/finetune.hpp"
#include "topicrel/inference.hpp"
#include "topicrel/manifest.hpp"
#include "topicrel/ntriples.hpp"
#include "topicrel/ontology.hpp"
#include "topicrel/prompt.hpp"
#include "topicrel/random.hpp"
#include "topicrel/text.hpp"

namespace topicrel {

namespace fs = std::filesystem;

namespace {

struct StageContext {
    RunManifest manifest;
    fs::path out;
    bool audit = false;
    std::ostream& log;   // summary lines
    std::ostream& diag;  // warnings

    fs::path graphs() const { return out / "graphs"; }
    fs::path adjudication() const { return out / "adjudication"; }
    fs::path datasets() const { return out / "datasets"; }
    fs::path finetune() const { return out / "finetune"; }
    fs::path outcomes() const { return out / "outcomes"; }
    fs::path reports() const { return out / "reports"; }
    fs::path ontology() const { return out / "ontology"; }

    std::string run_key() const {
        return manifest.classify_dataset + "." + std::string(split_file_tag(manifest.classify_split)) +
               "." + std::string(to_string(manifest.strategy));
    }
    fs::path outcome_file() const { return outcomes() / (run_key() + ".jsonl"); }
};

// Stable per-source seed: adding or reordering sources leaves others unchanged.
std::uint64_t source_seed(std::uint64_t seed, const std::string& name, std::uint64_t salt) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return derive_seed(derive_seed(seed, h), salt);
}

void summary(StageContext& ctx, const std::string& stage, nlohmann::ordered_json fields) {
    nlohmann::ordered_json line;
    line["stage"] = stage;
    line["status"] = "ok";
    for (auto& [k, v] : fields.items()) line[k] = v;
    ctx.log << line.dump() << std::endl;
}

int stage_ingest(StageContext& ctx) {
    if (ctx.manifest.sources.empty()) throw ManifestError("no sources to ingest");
    fs::create_directories(ctx.graphs());
    AdjudicationStore store(ctx.adjudication(), ctx.manifest.quorum);
    nlohmann::ordered_json per_source = nlohmann::ordered_json::array();
    for (const auto& src : ctx.manifest.sources) {
        const auto triples = parse_ntriples(read_file(src.path.string()));
        IngestReport report;
        const auto graph = build_graph(triples, src.dialect, ctx.manifest.ingest, &report);
        const auto stats = graph_stats(graph);
        if (stats.hierarchy_cycles > 0)
            ctx.diag << "warning: " << src.name << " hierarchy contains " << stats.hierarchy_cycles
                     << " cycle(s)\n";
        if (report.dropped_edges > 0)
            ctx.diag << "warning: " << src.name << " dropped " << report.dropped_edges
                     << " edge(s) touching unlabelled concepts\n";
        write_file_atomic((ctx.graphs() / (src.name + ".graph.json")).string(), to_json(graph).dump() + "\n");

        std::size_t enqueued = 0;
        if (src.same_as == SameAsMode::adjudicated) {
            const auto harvest = extract_sameas_candidates(graph, src.name, /*auto_accept_related=*/false);
            enqueued = store.enqueue(harvest.pending);
        }
        nlohmann::ordered_json entry;
        entry["source"] = src.name;
        entry["triples"] = triples.size();
        entry["concepts"] = stats.concepts;
        entry["hierarchy_edges"] = stats.hierarchy_edges;
        entry["related_edges"] = stats.related_edges;
        entry["alt_labels"] = stats.alt_labels;
        entry["hierarchy_cycles"] = stats.hierarchy_cycles;
        entry["dropped_edges"] = report.dropped_edges;
        entry["candidates_enqueued"] = enqueued;
        per_source.push_back(std::move(entry));
    }
    summary(ctx, "ingest", {{"sources", per_source}});
    return kExitOk;
}

std::size_t count_for(const SourceSpec& src, RelationLabel label) {
    const auto it = src.counts.find(label);
    return it == src.counts.end() ? 0 : it->second;
}

int stage_sample(StageContext& ctx) {
    const auto& m = ctx.manifest;
    if (m.sources.empty()) throw ManifestError("no sources to sample");
    std::optional<AdjudicationStore> store;
    std::vector<DatasetBundle> bundles;
    nlohmann::ordered_json per_source = nlohmann::ordered_json::array();

    for (const auto& src : m.sources) {
        const auto n_broader = count_for(src, RelationLabel::broader);
        const auto n_narrower = count_for(src, RelationLabel::narrower);
        const auto n_same = count_for(src, RelationLabel::same_as);
        const auto n_other = count_for(src, RelationLabel::other);
        if (n_broader != n_narrower)
            throw ManifestError(src.name + ": broader and narrower counts must match");

        const auto graph_path = ctx.graphs() / (src.name + ".graph.json");
        if (!fs::exists(graph_path)) throw IoError("run ingest first: missing " + graph_path.string());
        const auto graph = graph_from_json(nlohmann::json::parse(read_file(graph_path.string())));

        auto pairs = sample_hierarchical(graph, n_broader, source_seed(m.seed, src.name, 1), src.name);

        std::vector<LabeledPair> same;
        switch (src.same_as) {
            case SameAsMode::adjudicated: {
                if (!store) store.emplace(ctx.adjudication(), m.quorum);
                for (auto& p : store->finalize()) {
                    if (p.source == src.name) same.push_back(std::move(p));
                }
                break;
            }
            case SameAsMode::related:
                same = extract_sameas_candidates(graph, src.name, true).accepted;
                break;
            case SameAsMode::none:
                break;
        }
        if (same.size() < n_same)
            throw InvalidArgument(src.name + ": " + std::to_string(same.size()) +
                                  " same-as pairs available, " + std::to_string(n_same) + " requested");
        same = sample_subset(std::move(same), n_same, source_seed(m.seed, src.name, 2));
        pairs.insert(pairs.end(), same.begin(), same.end());

        auto other = sample_other(graph, n_other, source_seed(m.seed, src.name, 3), m.exclusion, src.name);
        pairs.insert(pairs.end(), other.begin(), other.end());

        SplitSpec spec{m.split_ratios, source_seed(m.seed, src.name, 4)};
        auto bundle = make_splits(std::move(pairs), spec, src.name);
        write_bundle(ctx.datasets(), bundle);

        nlohmann::ordered_json entry;
        entry["source"] = src.name;
        entry["train"] = bundle.train.size();
        entry["val"] = bundle.validation.size();
        entry["test"] = bundle.test.size();
        entry["total"] = bundle.size();
        per_source.push_back(std::move(entry));
        bundles.push_back(std::move(bundle));
    }

    const auto merged = merge_bundles(bundles, m.name);
    write_bundle(ctx.datasets(), merged);
    nlohmann::ordered_json merged_counts;
    merged_counts["name"] = merged.name;
    merged_counts["train"] = merged.train.size();
    merged_counts["val"] = merged.validation.size();
    merged_counts["test"] = merged.test.size();
    merged_counts["total"] = merged.size();
    summary(ctx, "sample", {{"sources", per_source}, {"merged", merged_counts}});
    return kExitOk;
}

std::vector<std::string> bundle_names(const RunManifest& m) {
    std::vector<std::string> names;
    for (const auto& s : m.sources) names.push_back(s.name);
    names.push_back(m.name);
    return names;
}

int stage_export(StageContext& ctx) {
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& name : bundle_names(ctx.manifest)) {
        if (!fs::exists(split_path(ctx.datasets(), name, Split::train))) continue;
        const auto bundle = read_bundle(ctx.datasets(), name);
        for (auto split : kAllSplits) {
            const auto result = export_conversations(bundle, split, ctx.finetune());
            if (result.empty_split)
                ctx.diag << "warning: " << name << "." << split_file_tag(split) << " is empty\n";
            files.push_back({{"file", conversation_path(ctx.finetune(), name, split).filename().string()},
                             {"records", result.written}});
        }
    }
    if (files.empty()) throw IoError("no datasets found; run sample first");
    summary(ctx, "export-finetune", {{"files", files}});
    return kExitOk;
}

PromptTemplate load_template(const std::optional<fs::path>& path, PromptStrategy strategy,
                             const PromptTemplate& fallback) {
    return path ? PromptTemplate::from_file(path->string(), strategy) : fallback;
}

std::vector<LabeledPair> classify_inputs(const StageContext& ctx) {
    const auto path = split_path(ctx.datasets(), ctx.manifest.classify_dataset, ctx.manifest.classify_split);
    if (!fs::exists(path)) throw IoError("dataset split not found: " + path.string());
    return read_pairs(path);
}

int stage_classify(StageContext& ctx) {
    const auto& m = ctx.manifest;
    if (!m.endpoint) throw ManifestError("classify needs an 'endpoint' block");
    const auto pairs = classify_inputs(ctx);

    std::optional<MockScript> mock;
    if (m.mock) {
        MockScript script;
        script.mode = m.mock->mode;
        script.fixed_response = m.mock->fixed_response;
        if (m.mock->script_path) {
            const auto doc = nlohmann::json::parse(read_file(m.mock->script_path->string()));
            script.script = doc.get<std::map<std::string, std::string>>();
        }
        for (const auto& p : pairs) script.gold[p.pair_id] = p.label;
        mock = std::move(script);
    }
    InferenceClient client(*m.endpoint, mock);
    if (ctx.audit) {
        fs::create_directories(ctx.out / "audit");
        client.enable_audit_log((ctx.out / "audit" / (ctx.run_key() + ".jsonl")).string());
    }
    const auto standard = load_template(m.standard_template, PromptStrategy::standard,
                                        default_standard_template());
    const CotTemplates cot{
        load_template(m.cot_stage1_template, PromptStrategy::cot_stage1, default_cot_stage1_template()),
        load_template(m.cot_stage2_template, PromptStrategy::cot_stage2, default_cot_stage2_template())};

    fs::create_directories(ctx.outcomes());
    std::ofstream out(ctx.outcome_file(), std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot write " + ctx.outcome_file().string());

    const std::size_t chunk = std::max<std::size_t>(m.endpoint->max_in_flight * 8, 16);
    std::size_t written = 0, failures = 0, request_errors = 0;
    bool endpoint_down = false;
    for (std::size_t begin = 0; begin < pairs.size(); begin += chunk) {
        std::vector<PairInput> inputs;
        for (std::size_t i = begin; i < std::min(pairs.size(), begin + chunk); ++i)
            inputs.push_back(PairInput::from(pairs[i]));
        const auto outcomes = classify_pairs(inputs, client, m.strategy, standard, cot);
        const bool all_failed = std::all_of(outcomes.begin(), outcomes.end(),
                                            [](const auto& o) { return o.has_request_error(); });
        if (all_failed) {
            endpoint_down = true;
            request_errors += outcomes.size();
            ctx.diag << "error: every request in a batch failed ("
                     << outcomes.front().run_ab.error.value_or("unknown") << "); stopping\n";
            break;
        }
        std::string block;
        for (const auto& o : outcomes) {
            block += to_json(o).dump();
            block += '\n';
            if (!o.final_label) ++failures;
            if (o.has_request_error()) ++request_errors;
        }
        out << block;
        out.flush();
        written += outcomes.size();
    }

    nlohmann::ordered_json fields;
    fields["outcomes"] = ctx.outcome_file().filename().string();
    fields["written"] = written;
    fields["total"] = pairs.size();
    fields["parse_failures"] = failures;
    fields["request_errors"] = request_errors;
    if (endpoint_down || request_errors > 0) {
        fields["status"] = "error";
        summary(ctx, "classify", fields);
        return kExitRuntime;
    }
    summary(ctx, "classify", fields);
    return kExitOk;
}

std::vector<ClassificationOutcome> read_outcomes(const fs::path& path) {
    std::vector<ClassificationOutcome> outcomes;
    std::ifstream in(path);
    if (!in) throw IoError("outcome file not found: " + path.string() + " (run classify first)");
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        outcomes.push_back(outcome_from_json(nlohmann::json::parse(line)));
    }
    return outcomes;
}

int stage_evaluate(StageContext& ctx) {
    const auto& m = ctx.manifest;
    std::vector<PredictionRecord> records;
    std::string key;
    if (m.predictions_path) {
        records = predictions_from_jsonl(read_file(m.predictions_path->string()));
        key = m.predictions_path->stem().string();
    } else {
        key = ctx.run_key();
        std::map<std::string, RelationLabel> gold;
        const auto outcomes = read_outcomes(ctx.outcome_file());
        bool need_dataset = std::any_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return !o.gold; });
        if (need_dataset) {
            for (const auto& p : classify_inputs(ctx)) gold[p.pair_id] = p.label;
        }
        for (const auto& o : outcomes) {
            RelationLabel g;
            if (o.gold) {
                g = *o.gold;
            } else if (auto it = gold.find(o.pair_id); it != gold.end()) {
                g = it->second;
            } else {
                throw UnknownPair("no gold label for outcome '" + o.pair_id + "'");
            }
            records.push_back({o.pair_id, g, o.final_label});
        }
        write_file_atomic((ctx.reports() / (key + ".predictions.jsonl")).string(), to_jsonl(records));
    }
    const auto report = evaluate(records, m.failure_policy);
    write_file_atomic((ctx.reports() / (key + ".report.json")).string(), render_json(report));
    write_file_atomic((ctx.reports() / (key + ".report.md")).string(), render_markdown(report, key));

    nlohmann::ordered_json fields;
    fields["report"] = key + ".report.json";
    fields["records"] = report.records;
    fields["parse_failures"] = report.parse_failures;
    fields["macro_precision"] = report.macro.precision;
    fields["macro_recall"] = report.macro.recall;
    fields["macro_f1"] = report.macro.f1;
    summary(ctx, "evaluate", fields);
    return kExitOk;
}

int stage_assemble(StageContext& ctx) {
    const auto& m = ctx.manifest;
    std::vector<LabeledPair> pairs;
    if (m.assemble_from_outcomes) {
        pairs = pairs_from_outcomes(read_outcomes(ctx.outcome_file()), m.classify_dataset);
    } else {
        const auto bundle = read_bundle(ctx.datasets(), m.classify_dataset);
        for (auto split : kAllSplits) {
            const auto& part = bundle.split(split);
            pairs.insert(pairs.end(), part.begin(), part.end());
        }
    }
    const std::size_t hierarchy_inputs = static_cast<std::size_t>(std::count_if(
        pairs.begin(), pairs.end(), [](const auto& p) { return is_hierarchical(p.label); }));
    auto onto = assemble(std::move(pairs));
    const std::size_t accepted = onto.hierarchy.size();
    if (m.reduce) onto = transitive_reduction(onto);

    const auto nt_path = ctx.ontology() / (m.classify_dataset + ".nt");
    write_file_atomic(nt_path.string(), emit_skos(onto, m.base_iri, m.equivalence));
    write_file_atomic((ctx.ontology() / "rejected.jsonl").string(), rejected_to_jsonl(onto));

    nlohmann::ordered_json fields;
    fields["ontology"] = nt_path.filename().string();
    fields["concepts"] = onto.concepts.size();
    fields["hierarchy_inputs"] = hierarchy_inputs;
    fields["accepted_edges"] = accepted;
    fields["rejected_edges"] = onto.rejected.size();
    fields["edges_after_reduction"] = onto.hierarchy.size();
    fields["equivalence_classes"] = onto.equivalences.size();
    summary(ctx, "assemble", fields);
    return kExitOk;
}

int stage_report(StageContext& ctx) {
    if (!fs::exists(ctx.reports())) throw IoError("no reports directory; run evaluate first");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(ctx.reports())) {
        const auto name = entry.path().filename().string();
        if (name.size() > 12 && name.substr(name.size() - 12) == ".report.json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::string md = "# Evaluation summary\n\n| run | records | parse failures | P | R | F1 |\n|---|---:|---:|---:|---:|---:|\n";
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (const auto& f : files) {
        const auto report = report_from_json(nlohmann::json::parse(read_file(f.string())));
        std::string key = f.filename().string();
        key.resize(key.size() - 12);
        write_file_atomic((ctx.reports() / (key + ".report.md")).string(), render_markdown(report, key));
        char row[256];
        std::snprintf(row, sizeof row, "| %s | %zu | %zu | %.1f | %.1f | %.1f |\n", key.c_str(),
                      report.records, report.parse_failures, report.macro.precision * 100,
                      report.macro.recall * 100, report.macro.f1 * 100);
        md += row;
        runs.push_back({{"run", key}, {"macro_f1", report.macro.f1}});
    }
    write_file_atomic((ctx.reports() / "summary.md").string(), md);
    summary(ctx, "report", {{"runs", runs}, {"summary", "summary.md"}});
    return kExitOk;
}

std::atomic<AdjudicationServer*> g_server{nullptr};

void handle_stop_signal(int) {
    if (auto* s = g_server.load()) s->stop();
}

int stage_adjudicate(StageContext& ctx) {
    const auto& m = ctx.manifest;
    AdjudicationStore store(ctx.adjudication(), m.quorum);
    AdjudicationServer server(store, m.static_dir);
    const int port = server.bind(m.host, m.port);
    g_server = &server;
    std::signal(SIGINT, handle_stop_signal);
    std::signal(SIGTERM, handle_stop_signal);
    const auto p = store.progress();
    ctx.log << nlohmann::ordered_json{{"stage", "adjudicate"}, {"status", "listening"},
                                      {"host", m.host}, {"port", port}, {"pending", p.pending},
                                      {"total", p.total}}.dump()
            << std::endl;
    server.listen();
    g_server = nullptr;
    const auto done = store.progress();
    summary(ctx, "adjudicate",
            {{"pending", done.pending}, {"accepted", done.accepted}, {"rejected", done.rejected}});
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"topicrel: taxonomy relation datasets, LLM classification and ontology assembly"};
    app.require_subcommand(1);

    std::string manifest_path;
    std::string out_dir;
    bool audit = false;
    std::optional<std::uint64_t> seed;

    const std::vector<std::pair<std::string, std::string>> stages{
        {"ingest", "Parse taxonomy sources and queue same-as candidates"},
        {"sample", "Sample labelled pairs and write stratified splits"},
        {"adjudicate", "Serve the same-as review API"},
        {"export-finetune", "Write conversational fine-tuning files"},
        {"classify", "Classify a dataset split through an inference endpoint"},
        {"evaluate", "Score predictions against gold labels"},
        {"assemble", "Build a cycle-free SKOS ontology from relations"},
        {"report", "Summarise evaluation reports"},
    };
    std::map<std::string, CLI::App*> subcommands;
    for (const auto& [name, description] : stages) {
        auto* sub = app.add_subcommand(name, description);
        sub->add_option("--manifest", manifest_path, "Run manifest (JSON)")->required();
        sub->add_option("--out", out_dir, "Output directory (overrides the manifest)");
        sub->add_flag("--audit-log", audit, "Log every inference request to <out>/audit/");
        sub->add_option("--seed", seed, "Override the manifest seed");
        subcommands[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    std::string stage;
    for (const auto& [name, sub] : subcommands) {
        if (sub->parsed()) stage = name;
    }

    auto fail = [&](int code, const std::string& kind, const std::string& message) {
        err << "topicrel " << stage << ": " << message << "\n";
        out << nlohmann::ordered_json{{"stage", stage}, {"status", "error"}, {"error", kind},
                                      {"message", message}}.dump()
            << std::endl;
        return code;
    };

    RunManifest manifest;
    try {
        manifest = RunManifest::load(manifest_path);
        if (seed) manifest.seed = *seed;
        if (!out_dir.empty()) manifest.output_dir = out_dir;
        manifest.validate();
    } catch (const Error& e) {
        return fail(kExitValidation, e.kind(), e.what());
    }

    StageContext ctx{manifest, manifest.output_dir, audit, out, err};
    const std::map<std::string, std::function<int(StageContext&)>> handlers{
        {"ingest", stage_ingest},         {"sample", stage_sample},
        {"adjudicate", stage_adjudicate}, {"export-finetune", stage_export},
        {"classify", stage_classify},     {"evaluate", stage_evaluate},
        {"assemble", stage_assemble},     {"report", stage_report},
    };
    try {
        fs::create_directories(ctx.out);
        return handlers.at(stage)(ctx);
    } catch (const ManifestError& e) {
        return fail(kExitValidation, e.kind(), e.what());
    } catch (const Error& e) {
        return fail(kExitRuntime, e.kind(), e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(kExitRuntime, "FormatError", e.what());
    } catch (const std::exception& e) {
        return fail(kExitRuntime, "Error", e.what());
    }
}

}  // namespace topicrel
