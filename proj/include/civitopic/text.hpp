#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 text helpers shared by the corpus, topics and llm modules. Only the
// scripts that matter for the target corpora (Latin, Greek, Cyrillic) get
// case mapping; everything else passes through untouched.
namespace civitopic::text {

std::u32string decode_utf8(std::string_view input);
std::string encode_utf8(std::u32string_view input);
void append_utf8(std::string& out, char32_t cp);

char32_t to_lower(char32_t cp);
bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
bool is_space(char32_t cp);

std::string lowercase(std::string_view input);

/// Number of code points (invalid bytes count as one each).
std::size_t length(std::string_view input);

/// Lowercase, drop every character that is not a letter, digit or space, and
/// collapse whitespace runs to one space. Leading/trailing space removed.
std::string clean(std::string_view input);

/// Lowercase, trim and collapse whitespace; punctuation is kept.
std::string normalize_whitespace_lower(std::string_view input);

/// Lowercase and strip diacritics from Latin letters. Used for lenient
/// comparison of LLM output against controlled-vocabulary options.
std::string fold(std::string_view input);

std::string trim(std::string_view input);
std::vector<std::string> split_whitespace(std::string_view input);
std::string join(std::span<const std::string> parts, std::string_view sep);

/// Keep at most `max_chars` code points; when cutting, back off to the last
/// whitespace at or before the limit (hard cut when there is none).
std::string truncate_at_whitespace(std::string_view input, std::size_t max_chars);

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace civitopic::text
