#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace topicrel {

struct Literal {
    std::string value;
    std::string language;  // empty when untagged
    std::string datatype;  // empty when untyped

    bool operator==(const Literal&) const = default;
};

// One N-Triples statement. Exactly one of object_iri / object_literal is set.
// Blank nodes are kept verbatim as `_:label` identifiers.
struct Triple {
    std::string subject;
    std::string predicate;
    std::optional<std::string> object_iri;
    std::optional<Literal> object_literal;

    static Triple with_iri(std::string s, std::string p, std::string o);
    static Triple with_literal(std::string s, std::string p, std::string value,
                               std::string language = {});

    bool is_literal() const noexcept { return object_literal.has_value(); }

    bool operator==(const Triple&) const = default;
};

// Strict line-oriented parse. Blank lines and `#` comment lines are skipped.
// Throws MalformedLine(line, reason) at the first bad statement.
std::vector<Triple> parse_ntriples(std::string_view document);

// Serialises one statement (without trailing newline).
std::string format_ntriple(const Triple& triple);

std::string escape_literal(std::string_view value);

}  // namespace topicrel
