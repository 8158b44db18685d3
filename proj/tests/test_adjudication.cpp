#include <gtest/gtest.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <map>

#include "support.hpp"
#include "topicrel/adjudication.hpp"
#include "topicrel/adjudication_server.hpp"
#include "topicrel/error.hpp"
#include "topicrel/text.hpp"

using namespace topicrel;

namespace {

std::vector<CandidatePair> candidates(std::size_t n, const std::string& source = "physh") {
    std::vector<CandidatePair> out;
    for (std::size_t i = 1; i <= n; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "%s:sa:%05zu", source.c_str(), i);
        out.push_back({id, "term " + std::to_string(i), "alias " + std::to_string(i), source,
                       "altLabel of 'term " + std::to_string(i) + "'"});
    }
    return out;
}

Verdict verdict(const std::string& pair, const std::string& who, Decision d, std::string note = {}) {
    return {pair, who, d, {}, std::move(note)};
}

}  // namespace

TEST(AdjudicationStore, EnqueueIsIdempotent) {
    testsupport::TempDir dir("adj");
    AdjudicationStore store(dir.path());
    EXPECT_EQ(store.enqueue(candidates(3)), 3u);
    EXPECT_EQ(store.enqueue(candidates(3)), 0u);
    auto changed = candidates(1);
    changed[0].topic_b = "something else";
    EXPECT_THROW(store.enqueue(changed), ConflictingCandidate);
    EXPECT_EQ(store.progress().total, 3u);
}

TEST(AdjudicationStore, QueueOrderPerAnnotator) {
    testsupport::TempDir dir("adj");
    AdjudicationStore store(dir.path());
    store.enqueue(candidates(2));
    EXPECT_EQ(store.next_pending("ann1")->pair_id, "physh:sa:00001");
    store.record_verdict(verdict("physh:sa:00001", "ann1", Decision::accept));
    EXPECT_EQ(store.next_pending("ann1")->pair_id, "physh:sa:00002");
    store.record_verdict(verdict("physh:sa:00002", "ann1", Decision::skip));
    EXPECT_FALSE(store.next_pending("ann1").has_value());
    EXPECT_EQ(store.next_pending("ann2")->pair_id, "physh:sa:00001");
}

TEST(AdjudicationStore, QuorumRules) {
    testsupport::TempDir dir("adj");
    AdjudicationStore store(dir.path());
    store.enqueue(candidates(2));
    EXPECT_EQ(store.record_verdict(verdict("physh:sa:00001", "a", Decision::accept)), CandidateStatus::pending);
    EXPECT_EQ(store.record_verdict(verdict("physh:sa:00001", "b", Decision::reject)), CandidateStatus::pending);
    EXPECT_EQ(store.record_verdict(verdict("physh:sa:00001", "c", Decision::accept)), CandidateStatus::accepted);
    EXPECT_EQ(store.record_verdict(verdict("physh:sa:00002", "a", Decision::skip)), CandidateStatus::pending);
    EXPECT_EQ(store.record_verdict(verdict("physh:sa:00002", "b", Decision::skip)), CandidateStatus::pending);
    EXPECT_THROW(store.record_verdict(verdict("nope", "a", Decision::accept)), UnknownPair);
}

TEST(AdjudicationStore, LaterVerdictReplacesEarlier) {
    testsupport::TempDir dir("adj");
    AdjudicationStore store(dir.path());
    store.enqueue(candidates(1));
    store.record_verdict(verdict("physh:sa:00001", "a", Decision::accept));
    store.record_verdict(verdict("physh:sa:00001", "a", Decision::accept));
    EXPECT_EQ(store.status("physh:sa:00001"), CandidateStatus::pending);
    store.record_verdict(verdict("physh:sa:00001", "b", Decision::accept));
    EXPECT_EQ(store.status("physh:sa:00001"), CandidateStatus::accepted);
    store.record_verdict(verdict("physh:sa:00001", "b", Decision::reject));
    EXPECT_EQ(store.status("physh:sa:00001"), CandidateStatus::pending);
}

TEST(AdjudicationStore, FinalizeMatchesBruteForceRecount) {
    testsupport::TempDir dir("adj");
    AdjudicationStore store(dir.path());
    const auto cands = candidates(60);
    store.enqueue(cands);
    SeededRng rng(17);
    for (int i = 0; i < 300; ++i) {
        const auto& c = cands[rng.below(cands.size())];
        const std::string who = "ann" + std::to_string(rng.below(3));
        store.record_verdict(verdict(c.pair_id, who, static_cast<Decision>(rng.below(3))));
    }
    // recount from the raw log: latest non-skip decision per annotator
    std::map<std::string, std::map<std::string, Decision>> latest;
    for (const auto& v : store.verdicts())
        if (v.decision != Decision::skip) latest[v.pair_id][v.annotator_id] = v.decision;
    std::set<std::string> expected;
    for (const auto& [pair, by] : latest) {
        std::size_t accepts = 0, rejects = 0;
        for (const auto& [_, d] : by) (d == Decision::accept ? accepts : rejects)++;
        if (accepts >= 2) expected.insert(pair);
    }
    std::set<std::string> got;
    for (const auto& p : store.finalize()) {
        EXPECT_EQ(p.label, RelationLabel::same_as);
        EXPECT_EQ(p.provenance, Provenance::adjudicated_candidate);
        got.insert(p.pair_id);
    }
    EXPECT_EQ(got, expected);
}

TEST(AdjudicationStore, ReplayReproducesStateAndIgnoresTornLine) {
    testsupport::TempDir dir("adj");
    Progress before;
    std::vector<LabeledPair> finalized;
    {
        AdjudicationStore store(dir.path());
        store.enqueue(candidates(5));
        store.record_verdict(verdict("physh:sa:00001", "a", Decision::accept));
        store.record_verdict(verdict("physh:sa:00001", "b", Decision::accept));
        store.record_verdict(verdict("physh:sa:00002", "a", Decision::reject, "not a synonym"));
        store.record_verdict(verdict("physh:sa:00002", "c", Decision::reject));
        before = store.progress();
        finalized = store.finalize();
    }
    {
        std::ofstream torn(dir / "verdicts.jsonl", std::ios::app);
        torn << "{\"pair_id\":\"physh:sa:00003\",\"annot";
    }
    AdjudicationStore reopened(dir.path());
    EXPECT_EQ(reopened.progress(), before);
    EXPECT_EQ(reopened.finalize(), finalized);
    EXPECT_EQ(reopened.verdicts()[2].note, "not a synonym");
}

TEST(QuorumPolicy, Validation) {
    EXPECT_THROW((QuorumPolicy{4, 2, 3}.validate()), InvalidArgument);
    EXPECT_NO_THROW((QuorumPolicy{3, 1, 3}.validate()));
}

class AdjudicationHttp : public ::testing::Test {
protected:
    void SetUp() override {
        store_ = std::make_unique<AdjudicationStore>(dir_.path());
        start();
    }
    void TearDown() override { server_->stop(); }

    void start() {
        server_ = std::make_unique<AdjudicationServer>(*store_);
        port_ = server_->bind("127.0.0.1", 0);
        server_->start();
    }
    void restart() {
        server_->stop();
        server_.reset();
        store_ = std::make_unique<AdjudicationStore>(dir_.path());
        start();
    }
    httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

    httplib::Result post_verdict(const std::string& pair, const std::string& who, const std::string& d,
                                 const std::string& note = "") {
        nlohmann::json body{{"pair_id", pair}, {"annotator", who}, {"decision", d}, {"note", note}};
        return client().Post("/api/verdicts", body.dump(), "application/json");
    }

    testsupport::TempDir dir_{"http"};
    std::unique_ptr<AdjudicationStore> store_;
    std::unique_ptr<AdjudicationServer> server_;
    int port_ = 0;
};

TEST_F(AdjudicationHttp, Endpoints) {
    store_->enqueue(candidates(2));
    auto next = client().Get("/api/queue/next?annotator=ann1");
    ASSERT_TRUE(next);
    EXPECT_EQ(next->status, 200);
    const auto cand = nlohmann::json::parse(next->body);
    EXPECT_EQ(cand["pair_id"], "physh:sa:00001");
    EXPECT_EQ(cand["topic_a"], "term 1");

    auto res = post_verdict("physh:sa:00001", "ann1", "accept");
    ASSERT_TRUE(res);
    EXPECT_EQ(nlohmann::json::parse(res->body)["status"], "pending");
    res = post_verdict("physh:sa:00001", "ann2", "accept");
    EXPECT_EQ(nlohmann::json::parse(res->body)["status"], "accepted");

    EXPECT_EQ(post_verdict("ghost", "ann1", "accept")->status, 404);
    EXPECT_EQ(client().Post("/api/verdicts", "{not json", "application/json")->status, 400);
    EXPECT_EQ(post_verdict("physh:sa:00002", "ann1", "maybe")->status, 400);
    EXPECT_EQ(client().Get("/api/queue/next")->status, 400);

    const auto progress = nlohmann::json::parse(client().Get("/api/progress")->body);
    EXPECT_EQ(progress, (nlohmann::json{{"pending", 1}, {"accepted", 1}, {"rejected", 0}, {"total", 2}}));

    const auto exported = client().Get("/api/export");
    ASSERT_TRUE(exported);
    const auto lines = pairs_from_jsonl(exported->body);
    ASSERT_EQ(lines.size(), 1u);
    EXPECT_EQ(lines[0].label, RelationLabel::same_as);

    post_verdict("physh:sa:00002", "ann1", "skip");
    EXPECT_EQ(client().Get("/api/queue/next?annotator=ann1")->status, 204);
}

TEST_F(AdjudicationHttp, ThreeAnnotatorRoundTripSurvivesRestart) {
    const auto cands = candidates(50);
    store_->enqueue(cands);
    // candidates 1..20 collect two or three accepts; the rest at most one
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const auto& id = cands[i].pair_id;
        if (i < 20) {
            post_verdict(id, "ann1", "accept");
            post_verdict(id, "ann2", "accept");
            post_verdict(id, "ann3", i % 2 ? "accept" : "reject", "checked");
        } else if (i < 35) {
            post_verdict(id, "ann1", "accept");
            post_verdict(id, "ann2", "reject");
            post_verdict(id, "ann3", "reject");
        } else {
            post_verdict(id, "ann1", "skip");
            post_verdict(id, "ann2", "accept");
        }
    }
    const auto progress = client().Get("/api/progress")->body;
    const auto exported = client().Get("/api/export")->body;
    EXPECT_EQ(pairs_from_jsonl(exported).size(), 20u);

    restart();
    EXPECT_EQ(client().Get("/api/progress")->body, progress);
    EXPECT_EQ(client().Get("/api/export")->body, exported);
    EXPECT_EQ(store_->finalize().size(), 20u);
    // verdicts.jsonl carries the note text
    EXPECT_NE(read_file((dir_ / "verdicts.jsonl").string()).find("\"note\":\"checked\""), std::string::npos);
}
