#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace topicrel {

// The four relation categories between an ordered topic pair (A, B).
// broader: A subsumes B. narrower: B subsumes A.
enum class RelationLabel : std::uint8_t { broader = 0, narrower = 1, same_as = 2, other = 3 };

inline constexpr std::array<RelationLabel, 4> kAllLabels{
    RelationLabel::broader, RelationLabel::narrower, RelationLabel::same_as,
    RelationLabel::other};

inline constexpr std::size_t kLabelCount = kAllLabels.size();

// A model prediction: nullopt means the response could not be parsed.
using ParsedLabel = std::optional<RelationLabel>;

inline constexpr std::string_view kParseFailure = "parse-failure";

std::string_view to_string(RelationLabel label) noexcept;
std::string_view to_string(const ParsedLabel& label) noexcept;

// Short column tags used in metric tables (BR, NR, SA, OT).
std::string_view short_tag(RelationLabel label) noexcept;

// Strict parse of the dataset vocabulary (`broader|narrower|same-as|other`).
std::optional<RelationLabel> label_from_string(std::string_view text) noexcept;

// Strict parse of the prediction vocabulary (dataset labels + `parse-failure`).
// Throws FormatError on anything else.
ParsedLabel parsed_label_from_string(std::string_view text);

constexpr std::size_t index_of(RelationLabel label) noexcept {
    return static_cast<std::size_t>(label);
}

constexpr RelationLabel invert_label(RelationLabel label) noexcept {
    switch (label) {
        case RelationLabel::broader: return RelationLabel::narrower;
        case RelationLabel::narrower: return RelationLabel::broader;
        default: return label;
    }
}

constexpr ParsedLabel invert_label(const ParsedLabel& label) noexcept {
    if (!label) return std::nullopt;
    return invert_label(*label);
}

constexpr bool is_hierarchical(RelationLabel label) noexcept {
    return label == RelationLabel::broader || label == RelationLabel::narrower;
}

}  // namespace topicrel
