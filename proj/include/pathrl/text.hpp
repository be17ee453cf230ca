#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pathrl {

std::string trim(std::string_view s);
bool is_blank(std::string_view s);

// Splits into UTF-8 code point substrings. Invalid bytes are passed through
// one byte at a time rather than rejected; corpus files are expected to be
// valid UTF-8.
std::vector<std::string_view> utf8_codepoints(std::string_view s);

// Value escaping for the line-oriented file formats: backslash, tab and
// newline become \\ \t \n. Exact grammar in docs/formats.md.
std::string escape_field(std::string_view s);
std::optional<std::string> unescape_field(std::string_view s);

// Shortest round-trip decimal form via std::to_chars. All floats written to
// checkpoints, corpora and metrics logs go through this so that write-read
// and rerun-compare are both exact.
std::string format_double(double v);
std::optional<double> parse_double(std::string_view s);

std::vector<std::string_view> split_on(std::string_view s, char sep);

bool starts_with(std::string_view s, std::string_view prefix);

}  // namespace pathrl
