#include "topicrel/adjudication.hpp"

#include <algorithm>

#include "topicrel/error.hpp"
#include "topicrel/text.hpp"

namespace topicrel {

std::string_view to_string(CandidateStatus status) noexcept {
    switch (status) {
        case CandidateStatus::pending: return "pending";
        case CandidateStatus::accepted: return "accepted";
        case CandidateStatus::rejected: return "rejected";
    }
    return "pending";
}

std::string_view to_string(Decision decision) noexcept {
    switch (decision) {
        case Decision::accept: return "accept";
        case Decision::reject: return "reject";
        case Decision::skip: return "skip";
    }
    return "skip";
}

Decision decision_from_string(std::string_view text) {
    if (text == "accept") return Decision::accept;
    if (text == "reject") return Decision::reject;
    if (text == "skip") return Decision::skip;
    throw FormatError("unknown decision '" + std::string(text) + "'");
}

nlohmann::ordered_json to_json(const Verdict& verdict) {
    nlohmann::ordered_json doc;
    doc["pair_id"] = verdict.pair_id;
    doc["annotator"] = verdict.annotator_id;
    doc["decision"] = to_string(verdict.decision);
    doc["timestamp"] = verdict.timestamp;
    doc["note"] = verdict.note;
    return doc;
}

Verdict verdict_from_json(const nlohmann::json& doc) {
    try {
        Verdict v;
        v.pair_id = doc.at("pair_id").get<std::string>();
        v.annotator_id = doc.at("annotator").get<std::string>();
        v.decision = decision_from_string(doc.at("decision").get<std::string>());
        v.timestamp = doc.value("timestamp", "");
        if (doc.contains("note") && !doc.at("note").is_null()) v.note = doc.at("note").get<std::string>();
        return v;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("verdict: ") + e.what());
    }
}

void QuorumPolicy::validate() const {
    if (required_accepts > panel_size || required_rejects > panel_size)
        throw InvalidArgument("quorum thresholds exceed panel size");
    if (required_accepts == 0 || required_rejects == 0)
        throw InvalidArgument("quorum thresholds must be positive");
}

namespace {

CandidateStatus status_from_counts(std::size_t accepts, std::size_t rejects,
                                   const QuorumPolicy& policy) {
    if (accepts >= policy.required_accepts) return CandidateStatus::accepted;
    if (rejects >= policy.required_rejects) return CandidateStatus::rejected;
    return CandidateStatus::pending;
}

void for_each_json_line(const std::filesystem::path& path,
                        const std::function<void(const nlohmann::json&)>& fn) {
    if (!std::filesystem::exists(path)) return;
    std::ifstream in(path);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            // A torn final line from a crash mid-write is dropped; anything
            // earlier is corruption.
            if (in.peek() == std::char_traits<char>::eof()) break;
            throw FormatError(path.string() + " line " + std::to_string(n) + " is not JSON");
        }
        fn(doc);
    }
}

}  // namespace

CandidateStatus derive_status(const std::vector<Verdict>& log_for_pair, const QuorumPolicy& policy) {
    std::map<std::string, Decision> latest;
    for (const auto& v : log_for_pair) {
        if (v.decision != Decision::skip) latest[v.annotator_id] = v.decision;
    }
    std::size_t accepts = 0, rejects = 0;
    for (const auto& [_, d] : latest) {
        if (d == Decision::accept) ++accepts;
        else if (d == Decision::reject) ++rejects;
    }
    return status_from_counts(accepts, rejects, policy);
}

AdjudicationStore::AdjudicationStore(std::filesystem::path dir, QuorumPolicy policy)
    : dir_(std::move(dir)), policy_(policy) {
    policy_.validate();
    std::filesystem::create_directories(dir_);
    const auto candidates_path = dir_ / "candidates.jsonl";
    const auto verdicts_path = dir_ / "verdicts.jsonl";

    for_each_json_line(candidates_path, [&](const nlohmann::json& doc) {
        auto c = candidate_from_json(doc);
        const std::string id = c.pair_id;
        entries_.try_emplace(id, Entry{std::move(c), {}, {}, CandidateStatus::pending});
    });
    for_each_json_line(verdicts_path, [&](const nlohmann::json& doc) {
        auto v = verdict_from_json(doc);
        if (!entries_.count(v.pair_id))
            throw FormatError("verdict log references unknown pair '" + v.pair_id + "'");
        apply(v);
        log_.push_back(std::move(v));
    });

    candidates_out_.open(candidates_path, std::ios::app);
    verdicts_out_.open(verdicts_path, std::ios::app);
    if (!candidates_out_ || !verdicts_out_) throw IoError("cannot open store files in " + dir_.string());
}

CandidateStatus AdjudicationStore::recompute(Entry& entry) const {
    std::size_t accepts = 0, rejects = 0;
    for (const auto& [_, d] : entry.latest) {
        if (d == Decision::accept) ++accepts;
        else if (d == Decision::reject) ++rejects;
    }
    entry.status = status_from_counts(accepts, rejects, policy_);
    return entry.status;
}

void AdjudicationStore::apply(const Verdict& verdict) {
    auto& entry = entries_.at(verdict.pair_id);
    entry.seen_by.insert(verdict.annotator_id);
    if (verdict.decision != Decision::skip) entry.latest[verdict.annotator_id] = verdict.decision;
    recompute(entry);
}

std::size_t AdjudicationStore::enqueue(const std::vector<CandidatePair>& candidates) {
    std::unique_lock lock(mutex_);
    std::map<std::string, const CandidatePair*> fresh;
    for (const auto& c : candidates) {
        if (auto it = entries_.find(c.pair_id); it != entries_.end()) {
            const auto& known = it->second.candidate;
            if (known.topic_a != c.topic_a || known.topic_b != c.topic_b)
                throw ConflictingCandidate("pair_id '" + c.pair_id + "' already holds different topics");
            continue;
        }
        if (auto [it, inserted] = fresh.emplace(c.pair_id, &c); !inserted) {
            if (it->second->topic_a != c.topic_a || it->second->topic_b != c.topic_b)
                throw ConflictingCandidate("pair_id '" + c.pair_id + "' submitted twice with different topics");
        }
    }
    for (const auto& c : candidates) {
        auto it = fresh.find(c.pair_id);
        if (it == fresh.end() || it->second != &c) continue;
        candidates_out_ << to_json(c).dump() << '\n';
        entries_.emplace(c.pair_id, Entry{c, {}, {}, CandidateStatus::pending});
    }
    candidates_out_.flush();
    return fresh.size();
}

std::optional<CandidatePair> AdjudicationStore::next_pending(const std::string& annotator_id) const {
    std::shared_lock lock(mutex_);
    for (const auto& [_, entry] : entries_) {
        if (entry.status == CandidateStatus::pending && !entry.seen_by.count(annotator_id))
            return entry.candidate;
    }
    return std::nullopt;
}

CandidateStatus AdjudicationStore::record_verdict(Verdict verdict) {
    std::unique_lock lock(mutex_);
    if (!entries_.count(verdict.pair_id)) throw UnknownPair("no candidate '" + verdict.pair_id + "'");
    if (verdict.annotator_id.empty()) throw InvalidArgument("annotator id is required");
    if (verdict.timestamp.empty()) verdict.timestamp = utc_now_iso8601();
    verdicts_out_ << to_json(verdict).dump() << '\n';
    verdicts_out_.flush();
    apply(verdict);
    log_.push_back(std::move(verdict));
    return entries_.at(log_.back().pair_id).status;
}

CandidateStatus AdjudicationStore::status(const std::string& pair_id) const {
    std::shared_lock lock(mutex_);
    const auto it = entries_.find(pair_id);
    if (it == entries_.end()) throw UnknownPair("no candidate '" + pair_id + "'");
    return it->second.status;
}

std::vector<LabeledPair> AdjudicationStore::finalize() const {
    std::shared_lock lock(mutex_);
    std::vector<LabeledPair> out;
    for (const auto& [id, entry] : entries_) {
        if (entry.status != CandidateStatus::accepted) continue;
        const auto& c = entry.candidate;
        out.push_back({c.pair_id, c.topic_a, c.topic_b, RelationLabel::same_as, c.source,
                       Provenance::adjudicated_candidate});
    }
    return out;
}

Progress AdjudicationStore::progress() const {
    std::shared_lock lock(mutex_);
    Progress p;
    for (const auto& [_, entry] : entries_) {
        switch (entry.status) {
            case CandidateStatus::pending: ++p.pending; break;
            case CandidateStatus::accepted: ++p.accepted; break;
            case CandidateStatus::rejected: ++p.rejected; break;
        }
    }
    p.total = entries_.size();
    return p;
}

std::vector<CandidatePair> AdjudicationStore::candidates() const {
    std::shared_lock lock(mutex_);
    std::vector<CandidatePair> out;
    for (const auto& [_, entry] : entries_) out.push_back(entry.candidate);
    return out;
}

std::vector<Verdict> AdjudicationStore::verdicts() const {
    std::shared_lock lock(mutex_);
    return log_;
}

}  // namespace topicrel
