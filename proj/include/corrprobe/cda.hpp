#pragma once

// Counterfactual data augmentation: gendered-term substitution over a
// sentence-per-record corpus, and name replacement under same/flip/random
// gender policies.

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "corrprobe/lexicon.hpp"

namespace corrprobe::cda {

using lexicon::GenderLabel;

enum class CdaMode { one_sided, two_sided };

CdaMode parse_mode(std::string_view s);  // "one"/"one_sided", "two"/"two_sided"
std::string to_string(CdaMode mode);

enum class NamePolicyKind { same_gender, flip_gender, random_gender };

NamePolicyKind parse_policy(std::string_view s);  // "same", "flip", "random"
std::string to_string(NamePolicyKind kind);

struct NamePolicy {
  NamePolicyKind kind = NamePolicyKind::same_gender;
  lexicon::NameSplit source_split = lexicon::NameSplit::all();
  lexicon::NameLexicon pool;
  std::uint64_t seed = 0;
};

struct NameReplacement {
  text::Span span;
  std::string original;
  std::string replacement;
  GenderLabel original_label;
  GenderLabel replacement_label;
};

/// Name matching and seeded sampling for one policy. Both the names that are
/// replaced and the candidates drawn come from the source split of the pool.
class NameIntervention {
 public:
  explicit NameIntervention(NamePolicy policy);

  const NamePolicy& policy() const { return policy_; }

  /// Replacements for every matching token of `s`; `record` keys the seeded
  /// stream together with the match index.
  std::vector<NameReplacement> plan(std::string_view s, std::uint64_t record) const;
  std::string apply(std::string_view s, std::uint64_t record) const;

  /// Candidate names (original casing) for a label.
  const std::vector<std::string>& candidates(const GenderLabel& label) const;

 private:
  GenderLabel target_label(const GenderLabel& original, std::uint64_t& state) const;

  NamePolicy policy_;
  std::map<std::string, std::size_t> by_lower_;  // lower-cased name -> pool entry
  std::map<GenderLabel, std::vector<std::string>> by_label_;
  std::vector<GenderLabel> labels_;
};

std::string name_intervention(std::string_view s, const NamePolicy& policy, std::uint64_t record = 0);

struct TermRewrite {
  std::string text;
  std::vector<std::size_t> pair_indices;  // one per substituted match
};

/// Every matched gendered token replaced by its partner, casing preserved;
/// absent when nothing matches.
std::optional<TermRewrite> substitute_terms(std::string_view s, const lexicon::PairLexicon& lex);
std::optional<std::string> counterfactual_sentence(std::string_view s, const lexicon::PairLexicon& lex);

struct CdaStats {
  std::uint64_t sentences_read = 0;
  std::uint64_t sentences_with_matches = 0;
  std::uint64_t output_sentences = 0;
  std::uint64_t counterfactuals_emitted = 0;
  std::map<std::string, std::uint64_t> substitutions_per_pair;  // "word_a/word_b"
  std::map<std::string, std::uint64_t> name_replacements_by_label;

  /// Throws InvariantError when the output count disagrees with the mode.
  void check(CdaMode mode) const;
};

struct CdaConfig {
  CdaMode mode = CdaMode::two_sided;
  const lexicon::PairLexicon* lexicon = nullptr;  // null: names only
  std::optional<NamePolicy> names;
  std::uint64_t seed = 0;
  // one_sided only: each matching record emits its counterfactual with this
  // probability and the original otherwise.
  std::optional<double> mix_ratio;
  unsigned threads = 0;  // 0: hardware concurrency
};

enum class RecordFormat { lines, jsonl };

struct CdaRecord {
  std::string id;
  std::string text;
};

struct CdaOutput {
  std::string id;
  std::string text;
  bool counterfactual = false;
};

class CorpusRewriter {
 public:
  explicit CorpusRewriter(CdaConfig cfg);

  /// Output records for input record `index`. Pure given the config.
  std::vector<CdaOutput> rewrite(std::uint64_t index, const CdaRecord& record, CdaStats& stats) const;

 private:
  CdaConfig cfg_;
  std::optional<NameIntervention> names_;
};

/// Streams `in` to `out` in input order. Malformed records raise InputError
/// naming the record index.
CdaStats rewrite_corpus(std::istream& in, std::ostream& out, const CdaConfig& cfg,
                        RecordFormat format = RecordFormat::lines);

/// In-memory convenience over plain sentences.
std::vector<std::string> rewrite_sentences(const std::vector<std::string>& sentences, const CdaConfig& cfg,
                                           CdaStats* stats = nullptr);

/// Approximate splitter for raw text: breaks after . ! ? followed by
/// whitespace, and at newlines.
std::vector<std::string> segment_sentences(std::string_view raw);

}  // namespace corrprobe::cda
