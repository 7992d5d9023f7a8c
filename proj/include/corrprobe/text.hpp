#pragma once

// UTF-8 text helpers backed by ICU: NFC normalization, whitespace
// canonicalization, word tokenization on Unicode word boundaries, and
// casing classification.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace corrprobe::text {

/// Byte range [begin, end) into a UTF-8 string.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const Span&) const = default;
};

std::string nfc(std::string_view s);

/// Trim and collapse every run of Unicode white space to one ASCII space.
std::string collapse_whitespace(std::string_view s);

/// NFC + collapse_whitespace; the canonical form of request text.
std::string canonical(std::string_view s);

/// Word tokens per the Unicode word-boundary rules (letters, digits and
/// in-word apostrophes form one token; punctuation and spaces are skipped).
std::vector<Span> word_spans(std::string_view s);

std::vector<std::string> words(std::string_view s);

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);

/// Upper-cases the first code point and leaves the rest unchanged.
std::string capitalize_first(std::string_view s);

enum class CaseClass { lower, title, upper, mixed };

/// lower: no upper-case letters. title: first letter upper, rest lower
/// (a single capital letter counts as title). upper: no lower-case letters.
CaseClass classify_case(std::string_view token);

/// Render `replacement` in the casing class of `pattern`; mixed-case
/// patterns yield the lower-case replacement.
std::string apply_casing(std::string_view pattern, std::string_view replacement);

/// Number of Unicode code points.
std::size_t codepoint_count(std::string_view s);

/// Byte offset of code point index `cp` (cp == count gives s.size()).
/// Throws InputError when cp is out of range.
std::size_t byte_offset(std::string_view s, std::size_t cp);

/// Strip UTF-8 BOM and trailing CR.
std::string_view strip_line(std::string_view line);

std::vector<std::string> split(std::string_view s, char sep);

std::string trim(std::string_view s);

}  // namespace corrprobe::text
