#include "topicrel/ntriples.hpp"

#include <cctype>
#include <cstdint>

#include "topicrel/error.hpp"

namespace topicrel {

Triple Triple::with_iri(std::string s, std::string p, std::string o) {
    Triple t;
    t.subject = std::move(s);
    t.predicate = std::move(p);
    t.object_iri = std::move(o);
    return t;
}

Triple Triple::with_literal(std::string s, std::string p, std::string value,
                            std::string language) {
    Triple t;
    t.subject = std::move(s);
    t.predicate = std::move(p);
    t.object_literal = Literal{std::move(value), std::move(language), {}};
    return t;
}

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

class LineParser {
public:
    LineParser(std::string_view line, std::size_t line_number)
        : line_(line), line_number_(line_number) {}

    // Returns false for blank and comment lines.
    bool parse(Triple& out) {
        skip_ws();
        if (at_end() || peek() == '#') return false;

        out.subject = parse_subject();
        skip_ws();
        if (at_end() || peek() == '.') fail("missing predicate");
        if (peek() != '<') fail("predicate must be an IRI");
        out.predicate = parse_iri();
        skip_ws();
        if (at_end() || peek() == '.') fail("missing object");
        if (peek() == '"') {
            out.object_literal = parse_literal();
        } else if (peek() == '<') {
            out.object_iri = parse_iri();
        } else if (peek() == '_') {
            out.object_iri = parse_blank();
        } else {
            fail("object must be an IRI, blank node or literal");
        }
        skip_ws();
        if (at_end() || peek() != '.') fail("missing terminating '.'");
        ++pos_;
        skip_ws();
        if (!at_end() && peek() != '#') fail("unexpected text after '.'");
        return true;
    }

private:
    [[noreturn]] void fail(const std::string& reason) const {
        throw MalformedLine(line_number_, reason);
    }

    bool at_end() const { return pos_ >= line_.size(); }
    char peek() const { return line_[pos_]; }
    void skip_ws() {
        while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }

    std::string parse_subject() {
        if (peek() == '<') return parse_iri();
        if (peek() == '_') return parse_blank();
        fail("subject must be an IRI or blank node");
    }

    std::uint32_t parse_hex(std::size_t digits) {
        if (pos_ + digits > line_.size()) fail("truncated unicode escape");
        std::uint32_t cp = 0;
        for (std::size_t i = 0; i < digits; ++i) {
            const char c = line_[pos_++];
            cp <<= 4;
            if (c >= '0' && c <= '9') cp |= static_cast<std::uint32_t>(c - '0');
            else if (c >= 'a' && c <= 'f') cp |= static_cast<std::uint32_t>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F') cp |= static_cast<std::uint32_t>(c - 'A' + 10);
            else fail("bad hex digit in unicode escape");
        }
        if (cp > 0x10FFFF) fail("unicode escape out of range");
        return cp;
    }

    std::string parse_iri() {
        ++pos_;  // '<'
        std::string iri;
        while (true) {
            if (at_end()) fail("unterminated IRI");
            const char c = line_[pos_++];
            if (c == '>') break;
            if (c == '\\') {
                if (at_end()) fail("unterminated escape in IRI");
                const char e = line_[pos_++];
                if (e == 'u') append_utf8(iri, parse_hex(4));
                else if (e == 'U') append_utf8(iri, parse_hex(8));
                else fail("invalid escape in IRI");
                continue;
            }
            if (c == ' ' || c == '<' || c == '"' || c == '{' || c == '}' || c == '|' ||
                c == '^' || c == '`') {
                fail(std::string("invalid character '") + c + "' in IRI");
            }
            iri.push_back(c);
        }
        if (iri.empty()) fail("empty IRI");
        return iri;
    }

    std::string parse_blank() {
        if (line_.substr(pos_, 2) != "_:") fail("malformed blank node");
        const std::size_t start = pos_;
        pos_ += 2;
        while (!at_end() && peek() != ' ' && peek() != '\t' && peek() != '.') ++pos_;
        // A label may contain '.', but not as its final character.
        while (!at_end() && peek() == '.' && pos_ + 1 < line_.size() && line_[pos_ + 1] != ' ' &&
               line_[pos_ + 1] != '\t') {
            ++pos_;
            while (!at_end() && peek() != ' ' && peek() != '\t' && peek() != '.') ++pos_;
        }
        if (pos_ - start == 2) fail("empty blank node label");
        return std::string(line_.substr(start, pos_ - start));
    }

    Literal parse_literal() {
        ++pos_;  // opening quote
        Literal lit;
        while (true) {
            if (at_end()) fail("unterminated literal");
            const char c = line_[pos_++];
            if (c == '"') break;
            if (c != '\\') {
                lit.value.push_back(c);
                continue;
            }
            if (at_end()) fail("unterminated escape in literal");
            const char e = line_[pos_++];
            switch (e) {
                case 't': lit.value.push_back('\t'); break;
                case 'b': lit.value.push_back('\b'); break;
                case 'n': lit.value.push_back('\n'); break;
                case 'r': lit.value.push_back('\r'); break;
                case 'f': lit.value.push_back('\f'); break;
                case '"': lit.value.push_back('"'); break;
                case '\'': lit.value.push_back('\''); break;
                case '\\': lit.value.push_back('\\'); break;
                case 'u': append_utf8(lit.value, parse_hex(4)); break;
                case 'U': append_utf8(lit.value, parse_hex(8)); break;
                default: fail(std::string("invalid escape '\\") + e + "' in literal");
            }
        }
        if (!at_end() && peek() == '@') {
            ++pos_;
            const std::size_t start = pos_;
            while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-'))
                ++pos_;
            if (pos_ == start) fail("empty language tag");
            lit.language = std::string(line_.substr(start, pos_ - start));
        } else if (line_.substr(pos_, 2) == "^^") {
            pos_ += 2;
            if (at_end() || peek() != '<') fail("datatype must be an IRI");
            lit.datatype = parse_iri();
        }
        return lit;
    }

    std::string_view line_;
    std::size_t line_number_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<Triple> parse_ntriples(std::string_view document) {
    std::vector<Triple> triples;
    std::size_t line_number = 0;
    std::size_t begin = 0;
    while (begin <= document.size()) {
        std::size_t end = document.find('\n', begin);
        if (end == std::string_view::npos) end = document.size();
        ++line_number;
        std::string_view line = document.substr(begin, end - begin);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        Triple triple;
        if (LineParser(line, line_number).parse(triple)) triples.push_back(std::move(triple));
        if (end == document.size()) break;
        begin = end + 1;
    }
    return triples;
}

std::string escape_literal(std::string_view value) {
    std::string out;
    out.reserve(value.size() + 2);
    for (char c : value) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

namespace {
std::string format_node(const std::string& id) {
    if (id.rfind("_:", 0) == 0) return id;
    return "<" + id + ">";
}
}  // namespace

std::string format_ntriple(const Triple& triple) {
    std::string line = format_node(triple.subject) + " <" + triple.predicate + "> ";
    if (triple.object_literal) {
        const auto& lit = *triple.object_literal;
        line += "\"" + escape_literal(lit.value) + "\"";
        if (!lit.language.empty()) line += "@" + lit.language;
        else if (!lit.datatype.empty()) line += "^^<" + lit.datatype + ">";
    } else {
        line += format_node(triple.object_iri.value_or(""));
    }
    line += " .";
    return line;
}

}  // namespace topicrel
