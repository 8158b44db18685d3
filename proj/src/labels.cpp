#include "topicrel/labels.hpp"

#include "topicrel/error.hpp"

namespace topicrel {

std::string_view to_string(RelationLabel label) noexcept {
    switch (label) {
        case RelationLabel::broader: return "broader";
        case RelationLabel::narrower: return "narrower";
        case RelationLabel::same_as: return "same-as";
        case RelationLabel::other: return "other";
    }
    return "other";
}

std::string_view to_string(const ParsedLabel& label) noexcept {
    return label ? to_string(*label) : kParseFailure;
}

std::string_view short_tag(RelationLabel label) noexcept {
    switch (label) {
        case RelationLabel::broader: return "BR";
        case RelationLabel::narrower: return "NR";
        case RelationLabel::same_as: return "SA";
        case RelationLabel::other: return "OT";
    }
    return "OT";
}

std::optional<RelationLabel> label_from_string(std::string_view text) noexcept {
    for (auto label : kAllLabels) {
        if (to_string(label) == text) return label;
    }
    return std::nullopt;
}

ParsedLabel parsed_label_from_string(std::string_view text) {
    if (text == kParseFailure) return std::nullopt;
    if (auto label = label_from_string(text)) return label;
    throw FormatError("unknown label '" + std::string(text) + "'");
}

}  // namespace topicrel
