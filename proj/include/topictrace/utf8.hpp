#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace topictrace::utf8 {

// Decodes the code point starting at s[i] and advances i past it. Malformed
// bytes decode as U+FFFD, consuming one byte, so iteration always terminates.
char32_t next_codepoint(std::string_view s, std::size_t& i);

void append_codepoint(std::string& out, char32_t cp);

// Word characters for tokenization: ASCII alphanumerics plus letters of the
// Latin, Greek, Cyrillic and major non-European scripts. Punctuation, symbols
// and emoji are delimiters.
bool is_word_codepoint(char32_t cp);

// Lowercases ASCII, Latin-1 Supplement, Latin Extended-A, Greek and Cyrillic;
// anything else passes through unchanged.
char32_t lower_codepoint(char32_t cp);

std::string lowercase(std::string_view s);

} // namespace topictrace::utf8
