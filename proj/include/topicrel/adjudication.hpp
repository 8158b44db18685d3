#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "topicrel/dataset.hpp"

namespace topicrel {

enum class CandidateStatus { pending, accepted, rejected };
enum class Decision { accept, reject, skip };

std::string_view to_string(CandidateStatus status) noexcept;
std::string_view to_string(Decision decision) noexcept;
Decision decision_from_string(std::string_view text);

struct Verdict {
    std::string pair_id;
    std::string annotator_id;
    Decision decision = Decision::skip;
    std::string timestamp;  // filled with the current UTC time when empty
    std::string note;

    bool operator==(const Verdict&) const = default;
};

nlohmann::ordered_json to_json(const Verdict& verdict);
Verdict verdict_from_json(const nlohmann::json& doc);

struct QuorumPolicy {
    std::size_t required_accepts = 2;
    std::size_t required_rejects = 2;
    std::size_t panel_size = 3;

    void validate() const;
};

struct Progress {
    std::size_t pending = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t total = 0;

    bool operator==(const Progress&) const = default;
};

// Status of one candidate from its verdicts. Only the latest non-skip verdict
// of each annotator counts.
CandidateStatus derive_status(const std::vector<Verdict>& log_for_pair,
                              const QuorumPolicy& policy);

// Human validation queue for same-as candidates. State lives in two
// append-only JSONL files (candidates.jsonl, verdicts.jsonl) under `dir`; the
// constructor replays them, so a restarted store resumes exactly.
//
// Writes are serialised; reads take a shared lock and see the state after the
// last completed write.
class AdjudicationStore {
public:
    explicit AdjudicationStore(std::filesystem::path dir, QuorumPolicy policy = {});

    // Returns the number of new candidates. Identical re-submissions are
    // ignored; a known pair_id with different content throws
    // ConflictingCandidate (nothing from the batch is written).
    std::size_t enqueue(const std::vector<CandidatePair>& candidates);

    std::optional<CandidatePair> next_pending(const std::string& annotator_id) const;

    // Throws UnknownPair.
    CandidateStatus record_verdict(Verdict verdict);

    CandidateStatus status(const std::string& pair_id) const;
    std::vector<LabeledPair> finalize() const;
    Progress progress() const;
    std::vector<CandidatePair> candidates() const;
    std::vector<Verdict> verdicts() const;

    const QuorumPolicy& policy() const noexcept { return policy_; }
    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    struct Entry {
        CandidatePair candidate;
        std::map<std::string, Decision> latest;  // annotator -> non-skip decision
        std::set<std::string> seen_by;           // annotators with any verdict
        CandidateStatus status = CandidateStatus::pending;
    };

    void apply(const Verdict& verdict);
    CandidateStatus recompute(Entry& entry) const;

    std::filesystem::path dir_;
    QuorumPolicy policy_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, Entry> entries_;  // ordered by pair_id
    std::vector<Verdict> log_;
    std::ofstream candidates_out_;
    std::ofstream verdicts_out_;
};

}  // namespace topicrel
