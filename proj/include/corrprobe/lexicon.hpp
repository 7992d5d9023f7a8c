#pragma once

// Gender-labeled vocabularies: bidirectional word-pair lists (man <-> woman)
// and name lists filtered by gender dominance, plus casing-aware matching of
// lexicon tokens in running text.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corrprobe/text.hpp"

namespace corrprobe::lexicon {

/// Gender association of a lexicon entry. The shipped data only uses
/// "female" and "male", but any lower-case identifier is admitted.
class GenderLabel {
 public:
  GenderLabel() = default;
  /// Throws InputError unless `value` is a non-empty [a-z0-9_-] identifier.
  explicit GenderLabel(std::string value);

  static GenderLabel female() { return GenderLabel("female"); }
  static GenderLabel male() { return GenderLabel("male"); }

  const std::string& str() const { return value_; }
  bool empty() const { return value_.empty(); }

  auto operator<=>(const GenderLabel&) const = default;

 private:
  std::string value_;
};

struct WordPair {
  std::string word_a;
  GenderLabel label_a;
  std::string word_b;
  GenderLabel label_b;
};

struct PairLookup {
  std::string token;    // lower-cased key, tokens joined by one space
  std::string partner;  // replacement as listed
  GenderLabel label;    // label of `token` itself
  std::size_t pair_index = 0;
};

class PairLexicon {
 public:
  /// Builds the lookup. A token that already has a partner keeps the
  /// first-listed one; later conflicting mappings become warnings.
  static PairLexicon from_pairs(std::vector<WordPair> pairs);

  const std::vector<WordPair>& pairs() const { return pairs_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const std::vector<GenderLabel>& labels() const { return labels_; }

  /// Case-insensitive lookup of a single token or space-joined phrase.
  const PairLookup* lookup(std::string_view token) const;
  /// Lookup by an already lower-cased, NFC, space-joined key.
  const PairLookup* lookup_normalized(const std::string& key) const;
  std::optional<std::string> partner(std::string_view token) const;

  bool contains(std::string_view token) const { return lookup(token) != nullptr; }

  /// Longest entry in tokens (1 for the shipped data).
  std::size_t max_entry_tokens() const { return max_tokens_; }

  /// Every distinct listed token (lower-cased), in listing order.
  std::vector<PairLookup> entries() const;

  /// Replace partners with context-free override rules, read as
  /// `token<TAB>replacement` lines. Unknown tokens are an InputError.
  void apply_overrides(std::istream& in, const std::string& source_name);

 private:
  void add_mapping(const std::string& token, const std::string& partner, const GenderLabel& label,
                   std::size_t index);

  std::vector<WordPair> pairs_;
  std::vector<std::string> order_;
  std::unordered_map<std::string, PairLookup> lookup_;
  std::vector<std::string> warnings_;
  std::vector<GenderLabel> labels_;
  std::size_t max_tokens_ = 1;
};

/// Reads `word_a<TAB>label_a<TAB>word_b<TAB>label_b` records. `#` starts a
/// comment line. Throws InputError on malformed records or empty input.
PairLexicon load_pair_lexicon(std::istream& in, const std::string& source_name = "<stream>");
PairLexicon load_pair_lexicon_file(const std::filesystem::path& path);

struct NameEntry {
  std::string name;
  GenderLabel label;
  double dominance = 0.0;  // share of the dominant gender
  std::int64_t female_count = 0;
  std::int64_t male_count = 0;
};

class NameLexicon {
 public:
  NameLexicon() = default;
  NameLexicon(std::vector<NameEntry> entries, double threshold);

  const std::vector<NameEntry>& entries() const { return entries_; }
  double threshold() const { return threshold_; }
  const NameEntry* find(std::string_view name) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<NameEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  double threshold_ = 0.8;
};

/// Reads `name<TAB>female_count<TAB>male_count` records and keeps names whose
/// dominant-gender share strictly exceeds `threshold` (in (0.5, 1]).
NameLexicon load_name_lexicon(std::istream& in, double threshold,
                              const std::string& source_name = "<stream>");
NameLexicon load_name_lexicon_file(const std::filesystem::path& path, double threshold);

/// Predicate over a name's first letter: inclusive letter ranges such as
/// A-M. "all" accepts every name.
class NameSplit {
 public:
  struct Range {
    char first;
    char last;
  };

  static NameSplit all();
  /// Parses "A-M", "N-Z", "A-C,X-Z", or "all" (case-insensitive).
  static NameSplit parse(std::string_view spec);

  bool contains(std::string_view name) const;
  bool is_all() const { return ranges_.empty(); }
  const std::vector<Range>& ranges() const { return ranges_; }
  std::string describe() const;

 private:
  std::vector<Range> ranges_;
};

/// True when the splits together cover A-Z with no letter in two splits.
bool partitions_alphabet(const std::vector<NameSplit>& splits);

struct TokenMatch {
  text::Span span;
  std::string surface;  // original casing
  PairLookup entry;
};

/// Whole-token, case-insensitive matches of lexicon entries in `sentence`,
/// longest entry first, never overlapping, in text order.
std::vector<TokenMatch> match_gendered_tokens(std::string_view sentence, const PairLexicon& lex);

/// Mirror the casing class of `pattern` onto `replacement`.
inline std::string apply_casing(std::string_view pattern, std::string_view replacement) {
  return text::apply_casing(pattern, replacement);
}

/// Pronoun forms that are excluded when building "the NOUN" person phrases.
bool is_pronoun(std::string_view token);

}  // namespace corrprobe::lexicon
