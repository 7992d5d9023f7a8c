#pragma once

// Probe sentence construction: DisCo cloze templates with a person slot and
// a blank, and STS-B sentence-pair templates mined from "A man ..." /
// "A woman ..." sentences.

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "corrprobe/lexicon.hpp"

namespace corrprobe::templates {

inline constexpr std::string_view kPersonSlot = "[PERSON]";
inline constexpr std::string_view kBlankSlot = "[BLANK]";

struct DiscoTemplate {
  std::string id;
  std::string text;  // canonical form with [PERSON] and [BLANK] markers
  std::string variant_group;
};

/// One template per line, either bare text or `id<TAB>variant_group<TAB>text`.
/// Slots may be written `[PERSON]`/`[BLANK]` or as the bare upper-case words
/// PERSON/BLANK. Throws InputError on a missing or repeated slot, empty
/// surrounding text, or a duplicate id.
/// Validates one template; bare PERSON/BLANK markers are bracketed. `where`
/// prefixes error messages.
DiscoTemplate make_disco_template(std::string id, std::string variant_group, std::string_view text,
                                  const std::string& where = "template");

std::vector<DiscoTemplate> load_disco_templates(std::istream& in,
                                                const std::string& source_name = "<stream>");
std::vector<DiscoTemplate> load_disco_templates_file(const std::filesystem::path& path);

/// Fill [PERSON] with `person_surface` and [BLANK] with `mask_token`,
/// capitalize the first letter and end the sentence with punctuation.
std::string instantiate_person(const DiscoTemplate& t, std::string_view person_surface,
                               std::string_view mask_token);

struct StsTemplate {
  std::string id;
  std::string source_sentence;  // "A man is walking."
  std::string subject;          // "man" or "woman"
  std::string body;             // "is walking."
};

struct StsPair {
  std::string template_id;
  std::string gendered_term;
  std::string profession;
  std::string sentence_1;  // "A man is walking."
  std::string sentence_2;  // "A nurse is walking."
};

struct StsPairCouple {
  StsPair man;
  StsPair woman;
};

struct StsTemplateSet {
  std::vector<StsTemplate> templates;
  std::vector<std::string> warnings;
  std::size_t sentences_seen = 0;
  std::size_t candidates = 0;  // sentences starting with "A man " / "A woman "
};

/// Mines STS templates from a benchmark file in the standard layout
/// (tab-separated, sentences in the sixth and seventh columns). Keeps
/// sentences that start with "A man " or "A woman " and whose remainder has
/// no lexicon word or pronoun. Output is deduplicated and sorted by source
/// sentence, so it does not depend on row order.
StsTemplateSet build_sts_templates(std::istream& sts_file, const lexicon::PairLexicon& lex,
                                   const std::string& source_name = "<stream>");

/// The keep/discard rule for one sentence; returns the template on keep.
std::optional<StsTemplate> sts_template_from_sentence(std::string_view sentence,
                                                      const lexicon::PairLexicon& lex);

std::vector<StsPairCouple> instantiate_sts_pairs(const StsTemplate& t,
                                                 const std::vector<std::string>& professions);

/// Occupations with the percentage of women employed in each.
class ProfessionTable {
 public:
  ProfessionTable() = default;
  explicit ProfessionTable(std::map<std::string, double> pct_female);

  bool contains(std::string_view profession) const;
  /// Percentage in [0, 100]. Throws InputError for unknown professions.
  double pct_female(std::string_view profession) const;
  std::vector<std::string> professions() const;
  std::size_t size() const { return pct_.size(); }
  const std::map<std::string, double, std::less<>>& values() const { return pct_; }

 private:
  std::map<std::string, double, std::less<>> pct_;
};

/// CSV `profession,pct_female` with an optional header row and `#` comments.
ProfessionTable load_professions(std::istream& in, const std::string& source_name = "<stream>");
ProfessionTable load_professions_file(const std::filesystem::path& path);

}  // namespace corrprobe::templates
