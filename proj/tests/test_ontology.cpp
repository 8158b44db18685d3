#include <gtest/gtest.h>

#include "support.hpp"
#include "topicrel/concept_graph.hpp"
#include "topicrel/error.hpp"
#include "topicrel/ontology.hpp"

using namespace topicrel;

namespace {

constexpr auto BR = RelationLabel::broader;
constexpr auto NR = RelationLabel::narrower;
constexpr auto SA = RelationLabel::same_as;
constexpr auto OT = RelationLabel::other;

LabeledPair rel(std::string id, std::string a, std::string b, RelationLabel label) {
    return {std::move(id), std::move(a), std::move(b), label, "t", Provenance::classified};
}

using Edges = std::set<std::pair<std::string, std::string>>;

}  // namespace

TEST(Assemble, BroaderContributesChildParentEdge) {
    const auto onto = assemble({rel("1", "databases", "distributed databases", BR)});
    EXPECT_EQ(onto.hierarchy, (Edges{{"distributed databases", "databases"}}));
    const auto narrower = assemble({rel("1", "distributed databases", "databases", NR)});
    EXPECT_EQ(narrower.hierarchy, onto.hierarchy);
}

TEST(Assemble, CycleRejected) {
    const auto onto = assemble({rel("1", "A", "B", BR), rel("2", "B", "C", BR), rel("3", "C", "A", BR)});
    EXPECT_EQ(onto.hierarchy.size(), 2u);
    ASSERT_EQ(onto.rejected.size(), 1u);
    EXPECT_EQ(onto.rejected[0].pair.pair_id, "3");
    EXPECT_EQ(onto.rejected[0].reason, RejectReason::cycle);
}

TEST(Assemble, IntraClassRejected) {
    const auto onto = assemble({rel("2", "X", "Y", BR), rel("1", "X", "Y", SA)});
    EXPECT_TRUE(onto.hierarchy.empty());
    ASSERT_EQ(onto.rejected.size(), 1u);
    EXPECT_EQ(onto.rejected[0].reason, RejectReason::intra_class);
}

TEST(Assemble, DuplicateSelfLoopAndOtherIgnored) {
    const auto onto = assemble({rel("1", "A", "B", BR), rel("2", "B", "A", NR), rel("3", "A", " A ", BR),
                                rel("4", "A", "Q", OT)});
    EXPECT_EQ(onto.hierarchy, (Edges{{"B", "A"}}));
    ASSERT_EQ(onto.rejected.size(), 2u);
    EXPECT_EQ(onto.rejected[0].reason, RejectReason::duplicate);
    EXPECT_EQ(onto.rejected[1].reason, RejectReason::self_loop);
    EXPECT_FALSE(onto.concepts.count("Q"));
}

TEST(Assemble, HierarchyOperatesOnRepresentatives) {
    const auto onto = assemble({rel("1", "ontology matching", "ontology alignment", SA),
                                rel("2", "semantic web", "ontology matching", BR)});
    ASSERT_EQ(onto.equivalences.size(), 1u);
    EXPECT_EQ(onto.representative("ontology matching"), "ontology alignment");
    EXPECT_EQ(onto.hierarchy, (Edges{{"ontology alignment", "semantic web"}}));
}

TEST(Assemble, OrderIndependentAfterSorting) {
    std::vector<LabeledPair> pairs{rel("3", "C", "A", BR), rel("1", "A", "B", BR), rel("2", "B", "C", BR)};
    const auto a = assemble(pairs);
    std::reverse(pairs.begin(), pairs.end());
    const auto b = assemble(pairs);
    EXPECT_EQ(a.hierarchy, b.hierarchy);
    EXPECT_EQ(a.rejected, b.rejected);
}

TEST(TransitiveReduction, Examples) {
    auto onto = assemble({rel("1", "A", "B", BR), rel("2", "B", "C", BR), rel("3", "A", "C", BR)});
    EXPECT_EQ(onto.hierarchy.size(), 3u);
    const auto reduced = transitive_reduction(onto);
    EXPECT_EQ(reduced.hierarchy, (Edges{{"B", "A"}, {"C", "B"}}));
    EXPECT_EQ(transitive_reduction(reduced).hierarchy, reduced.hierarchy);
}

TEST(AssemblyProperty, AcyclicConservedReachabilityPreserved) {
    SeededRng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t concepts = 2 + rng.below(11);
        const std::size_t count = rng.below(40);
        std::vector<LabeledPair> pairs;
        std::size_t hierarchical = 0;
        for (std::size_t i = 0; i < count; ++i) {
            const auto label = kAllLabels[rng.below(4)];
            pairs.push_back(rel(std::to_string(1000 + i), "n" + std::to_string(rng.below(concepts)),
                                "n" + std::to_string(rng.below(concepts)), label));
            hierarchical += is_hierarchical(label);
        }
        const auto onto = assemble(pairs);
        EXPECT_TRUE(testsupport::topologically_sortable(onto.hierarchy));
        EXPECT_TRUE(is_acyclic(onto.hierarchy));
        EXPECT_EQ(onto.hierarchy.size() + onto.rejected.size(), hierarchical);
        for (const auto& [c, p] : onto.hierarchy) EXPECT_NE(onto.representative(c), onto.representative(p));
        const auto reduced = transitive_reduction(onto);
        EXPECT_EQ(testsupport::reachability(reduced.hierarchy), testsupport::reachability(onto.hierarchy));
    }
}

TEST(Slugify, Basics) {
    EXPECT_EQ(slugify("Distributed Databases"), "distributed-databases");
    EXPECT_EQ(slugify("  C++ / Rust!! "), "c-rust");
    EXPECT_EQ(slugify("***"), "concept");
}

TEST(EmitSkos, OneBroaderEdge) {
    const auto onto = assemble({rel("1", "databases", "distributed databases", BR)});
    const auto nt = emit_skos(onto, "https://example.org/t/");
    const auto triples = parse_ntriples(nt);
    std::size_t broader = 0;
    for (const auto& t : triples) broader += t.predicate == vocab::skos_term("broader");
    EXPECT_EQ(broader, 1u);
    EXPECT_NE(nt.find("<https://example.org/t/distributed-databases> <http://www.w3.org/2004/02/skos/core#broader> "
                      "<https://example.org/t/databases> ."),
              std::string::npos);
    EXPECT_TRUE(std::is_sorted(triples.begin(), triples.end(), [](const auto& a, const auto& b) {
        return format_ntriple(a) < format_ntriple(b);
    }));
}

TEST(EmitSkos, EquivalenceClassBecomesOneConcept) {
    const auto onto = assemble({rel("1", "ontology alignment", "ontology matching", SA)});
    const auto g = build_graph(parse_ntriples(emit_skos(onto, "urn:x:")), SchemaDialect::skos_core);
    ASSERT_EQ(g.concepts.size(), 1u);
    const auto& c = g.concepts.begin()->second;
    EXPECT_EQ(c.pref_label, "ontology alignment");
    EXPECT_EQ(c.alt_labels, (std::set<std::string>{"ontology matching"}));

    const auto exact = emit_skos(onto, "urn:x:", EquivalenceMode::exact_match);
    EXPECT_NE(exact.find(vocab::skos_term("exactMatch")), std::string::npos);
}

TEST(EmitSkos, SlugCollision) {
    const auto onto = assemble({rel("1", "Data Mining", "data-mining", BR)});
    EXPECT_THROW(emit_skos(onto, "urn:x:"), SlugCollision);
}

TEST(EmitSkos, ReingestReproducesHierarchyAndLabels) {
    const auto onto = transitive_reduction(assemble({rel("1", "science", "biology", BR),
                                                     rel("2", "genetics", "biology", NR),
                                                     rel("3", "genomics", "genetics", NR),
                                                     rel("4", "heredity", "genetics", SA)}));
    const auto g = build_graph(parse_ntriples(emit_skos(onto, "urn:x:")), SchemaDialect::skos_core);
    Edges labelled;
    for (const auto& [c, p] : g.hierarchy_edges)
        labelled.emplace(g.concepts.at(c).pref_label, g.concepts.at(p).pref_label);
    EXPECT_EQ(labelled, onto.hierarchy);
}

TEST(Rejected, JsonlCarriesReason) {
    const auto onto = assemble({rel("1", "A", "B", BR), rel("2", "B", "A", BR)});
    const auto text = rejected_to_jsonl(onto);
    EXPECT_NE(text.find("\"reason\":\"cycle\""), std::string::npos);
    EXPECT_NE(text.find("\"pair_id\":\"2\""), std::string::npos);
}
