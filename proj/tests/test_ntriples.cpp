#include <gtest/gtest.h>

#include "topicrel/error.hpp"
#include "topicrel/ntriples.hpp"

using namespace topicrel;

TEST(NTriples, MinimalStatement) {
    const auto triples = parse_ntriples("<urn:a> <urn:p> <urn:b> .\n");
    ASSERT_EQ(triples.size(), 1u);
    EXPECT_EQ(triples[0], Triple::with_iri("urn:a", "urn:p", "urn:b"));
}

TEST(NTriples, LanguageTaggedLiteral) {
    const auto triples = parse_ntriples("<urn:a> <urn:l> \"databases\"@en .");
    ASSERT_EQ(triples.size(), 1u);
    ASSERT_TRUE(triples[0].is_literal());
    EXPECT_EQ(triples[0].object_literal->value, "databases");
    EXPECT_EQ(triples[0].object_literal->language, "en");
}

TEST(NTriples, MissingObjectReportsLine) {
    try {
        parse_ntriples("<urn:a> <urn:p> .");
        FAIL() << "expected MalformedLine";
    } catch (const MalformedLine& e) {
        EXPECT_EQ(e.line_number(), 1u);
        EXPECT_NE(std::string(e.what()).find("missing object"), std::string::npos);
    }
}

TEST(NTriples, CommentsAndBlankLinesSkipped) {
    const auto triples = parse_ntriples(
        "# header\n\n   \n<urn:a> <urn:p> <urn:b> .\n# trailing\n<urn:b> <urn:p> <urn:c> .\n");
    ASSERT_EQ(triples.size(), 2u);
    EXPECT_EQ(*triples[1].object_iri, "urn:c");
}

TEST(NTriples, FirstErrorAbortsWithItsLineNumber) {
    try {
        parse_ntriples("<urn:a> <urn:p> <urn:b> .\n\n<urn:a> <urn:p> <urn:b>\n<urn:x> .\n");
        FAIL();
    } catch (const MalformedLine& e) {
        EXPECT_EQ(e.line_number(), 3u);
    }
}

TEST(NTriples, EscapesDecoded) {
    const auto triples =
        parse_ntriples(R"(<urn:a> <urn:l> "say \"hi\"\\ \n\tend é" .)");
    ASSERT_EQ(triples.size(), 1u);
    EXPECT_EQ(triples[0].object_literal->value, "say \"hi\"\\ \n\tend \xC3\xA9");
}

TEST(NTriples, DatatypeAndBlankNodes) {
    const auto triples = parse_ntriples(
        "_:b1 <urn:p> \"3\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n"
        "<urn:a> <urn:p> _:b1 .\n");
    ASSERT_EQ(triples.size(), 2u);
    EXPECT_EQ(triples[0].subject, "_:b1");
    EXPECT_EQ(triples[0].object_literal->datatype, "http://www.w3.org/2001/XMLSchema#integer");
    EXPECT_EQ(*triples[1].object_iri, "_:b1");
}

TEST(NTriples, RejectsLiteralSubjectAndTrailingGarbage) {
    EXPECT_THROW(parse_ntriples("\"x\" <urn:p> <urn:b> ."), MalformedLine);
    EXPECT_THROW(parse_ntriples("<urn:a> <urn:p> <urn:b> . extra"), MalformedLine);
    EXPECT_THROW(parse_ntriples("<urn:a> <urn:p> \"open ."), MalformedLine);
    EXPECT_THROW(parse_ntriples("<urn:a> <urn:p> <urn:b>"), MalformedLine);
}

TEST(NTriples, FormatRoundTripsAwkwardLiterals) {
    const std::vector<Triple> triples{
        Triple::with_literal("urn:a", "urn:l", "quote \" backslash \\ newline \n tab \t", "en"),
        Triple::with_literal("urn:a", "urn:l", "Schr\xC3\xB6" "dinger's cat"),
        Triple::with_iri("urn:a", "urn:p", "urn:b"),
    };
    std::string doc;
    for (const auto& t : triples) doc += format_ntriple(t) + "\n";
    EXPECT_EQ(parse_ntriples(doc), triples);
}
