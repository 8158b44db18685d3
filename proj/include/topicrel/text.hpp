#pragma once

#include <string>
#include <string_view>

namespace topicrel {

std::string trim(std::string_view text);

// ASCII lowercase; bytes >= 0x80 are left untouched.
std::string to_lower(std::string_view text);

bool iequals(std::string_view a, std::string_view b) noexcept;

// Trim and collapse internal whitespace runs to a single space.
std::string collapse_whitespace(std::string_view text);

// UTC timestamp as `YYYY-MM-DDTHH:MM:SSZ`.
std::string utc_now_iso8601();

std::string read_file(const std::string& path);

// Replace `path` atomically (write to a sibling temp file, then rename).
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace topicrel
