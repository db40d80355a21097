#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace examqa::detail {

// Decodes UTF-8, mapping invalid sequences to U+FFFD. Never throws.
std::u32string decode_utf8(std::string_view bytes);

std::string encode_utf8(char32_t cp);
std::string encode_utf8(std::u32string_view cps);

// Writing-system buckets used for option markers and language checks.
enum class Script { latin, cyrillic, arabic, han, other };

// True for code points that count as "alphabetic" when deciding the
// dominant script of a text. Han ideographs count; digits and
// punctuation do not.
bool is_alphabetic(char32_t cp);

// Script bucket for an alphabetic code point. Callers must check
// is_alphabetic first; non-letters report Script::other.
Script script_of(char32_t cp);

// Word-constituent test used for standalone-token boundaries: ASCII
// alphanumerics plus letters of any known script and the Arabic tatweel
// joiner.
bool is_word_char(char32_t cp);

bool is_ascii_space(char32_t cp);

std::string_view trim_ascii(std::string_view s);

const char* script_name(Script s);

}  // namespace examqa::detail
