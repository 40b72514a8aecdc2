#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tda {

// Splits a line on single ASCII spaces. Consecutive spaces produce empty
// fields so callers can reject malformed input.
std::vector<std::string> split_tokens(std::string_view line);

std::string join_tokens(const std::vector<std::string>& tokens);

// Splits a UTF-8 string into code point substrings. Bytes that do not form
// a valid sequence are passed through one byte at a time.
std::vector<std::string> utf8_chars(std::string_view word);

// Simple locale-free lowercase over ASCII, Latin-1 and Latin Extended-A.
// Other code points are left unchanged.
std::string lowercase(std::string_view text);

}  // namespace tda
