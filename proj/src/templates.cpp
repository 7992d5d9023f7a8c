#include "corrprobe/templates.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "corrprobe/error.hpp"
#include "corrprobe/text.hpp"

namespace corrprobe::templates {

namespace {

bool is_ascii_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// Rewrite bare PERSON / BLANK words into their bracketed slot markers.
std::string bracket_bare_slots(std::string s) {
  for (std::string_view word : {std::string_view("PERSON"), std::string_view("BLANK")}) {
    const std::string marker = "[" + std::string(word) + "]";
    std::size_t pos = 0;
    while ((pos = s.find(word, pos)) != std::string::npos) {
      const bool bracketed = pos > 0 && s[pos - 1] == '[' && pos + word.size() < s.size() &&
                             s[pos + word.size()] == ']';
      const bool left_ok = pos == 0 || !is_ascii_letter(s[pos - 1]);
      const bool right_ok = pos + word.size() == s.size() || !is_ascii_letter(s[pos + word.size()]);
      if (!bracketed && left_ok && right_ok) {
        s.replace(pos, word.size(), marker);
        pos += marker.size();
      } else {
        pos += word.size();
      }
    }
  }
  return s;
}

std::size_t count_of(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

void replace_first(std::string& s, std::string_view from, std::string_view to) {
  const auto pos = s.find(from);
  if (pos != std::string::npos) s.replace(pos, from.size(), to);
}

bool ends_with_terminal(std::string_view s) {
  if (s.empty()) return false;
  const char c = s.back();
  return c == '.' || c == '!' || c == '?' || c == '"' || c == '\'';
}

}  // namespace

DiscoTemplate make_disco_template(std::string id, std::string variant_group, std::string_view text,
                                  const std::string& where) {
  DiscoTemplate t;
  t.id = std::move(id);
  t.variant_group = variant_group.empty() ? t.id : std::move(variant_group);
  t.text = text::collapse_whitespace(text::nfc(bracket_bare_slots(text::trim(text))));
  const std::size_t persons = count_of(t.text, kPersonSlot);
  const std::size_t blanks = count_of(t.text, kBlankSlot);
  if (persons != 1) {
    throw InputError(where + ": template needs exactly one [PERSON] slot, found " + std::to_string(persons));
  }
  if (blanks != 1) {
    throw InputError(where + ": template needs exactly one [BLANK] slot, found " + std::to_string(blanks));
  }
  std::string rest = t.text;
  replace_first(rest, kPersonSlot, "");
  replace_first(rest, kBlankSlot, "");
  if (text::words(rest).empty()) throw InputError(where + ": template has no text besides slots");
  return t;
}

std::vector<DiscoTemplate> load_disco_templates(std::istream& in, const std::string& source_name) {
  std::vector<DiscoTemplate> out;
  std::set<std::string> ids;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = text::trim(text::strip_line(raw));
    if (line.empty() || line.front() == '#') continue;
    const std::string where = source_name + ":" + std::to_string(line_no);
    DiscoTemplate t;
    const auto fields = text::split(line, '\t');
    if (fields.size() == 3) {
      t.id = text::trim(fields[0]);
      t.variant_group = text::trim(fields[1]);
      t.text = text::trim(fields[2]);
    } else if (fields.size() == 1) {
      t.text = line;
    } else {
      throw InputError(where + ": expected text or id<TAB>variant_group<TAB>text");
    }
    if (t.id.empty()) t.id = "t" + std::string(out.size() + 1 < 10 ? "0" : "") + std::to_string(out.size() + 1);
    t = make_disco_template(t.id, t.variant_group, t.text, where);
    if (!ids.insert(t.id).second) throw InputError(where + ": duplicate template id '" + t.id + "'");
    out.push_back(std::move(t));
  }
  if (out.empty()) throw InputError(source_name + ": no templates");
  return out;
}

std::vector<DiscoTemplate> load_disco_templates_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open templates file '" + path.string() + "'");
  return load_disco_templates(in, path.string());
}

std::string instantiate_person(const DiscoTemplate& t, std::string_view person_surface,
                               std::string_view mask_token) {
  std::string s = t.text;
  replace_first(s, kPersonSlot, person_surface);
  replace_first(s, kBlankSlot, mask_token);
  s = text::capitalize_first(text::trim(s));
  if (!ends_with_terminal(s)) s.push_back('.');
  return s;
}

std::optional<StsTemplate> sts_template_from_sentence(std::string_view sentence,
                                                      const lexicon::PairLexicon& lex) {
  const std::string s = text::collapse_whitespace(text::nfc(sentence));
  StsTemplate t;
  for (std::string_view subject : {std::string_view("man"), std::string_view("woman")}) {
    const std::string prefix = "A " + std::string(subject) + " ";
    if (s.size() > prefix.size() && s.compare(0, prefix.size(), prefix) == 0) {
      t.subject = std::string(subject);
      t.body = s.substr(prefix.size());
      break;
    }
  }
  if (t.subject.empty()) return std::nullopt;
  for (const auto& w : text::words(t.body)) {
    if (lexicon::is_pronoun(w) || lex.contains(w)) return std::nullopt;
  }
  if (!lexicon::match_gendered_tokens(t.body, lex).empty()) return std::nullopt;
  t.source_sentence = s;
  return t;
}

StsTemplateSet build_sts_templates(std::istream& sts_file, const lexicon::PairLexicon& lex,
                                   const std::string& source_name) {
  StsTemplateSet out;
  std::map<std::string, StsTemplate> unique;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(sts_file, raw)) {
    ++line_no;
    const std::string_view line = text::strip_line(raw);
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line, '\t');
    if (f.size() < 7) {
      out.warnings.push_back(source_name + ":" + std::to_string(line_no) + ": expected at least 7 columns, got " +
                             std::to_string(f.size()) + "; row skipped");
      continue;
    }
    for (std::size_t col : {std::size_t{5}, std::size_t{6}}) {
      ++out.sentences_seen;
      const std::string sentence = text::collapse_whitespace(text::nfc(f[col]));
      if (sentence.rfind("A man ", 0) == 0 || sentence.rfind("A woman ", 0) == 0) ++out.candidates;
      if (auto t = sts_template_from_sentence(sentence, lex)) {
        unique.emplace(t->source_sentence, std::move(*t));
      }
    }
  }
  out.templates.reserve(unique.size());
  for (auto& [_, t] : unique) {
    char id[32];
    std::snprintf(id, sizeof(id), "sts-%04zu", out.templates.size() + 1);
    t.id = id;
    out.templates.push_back(std::move(t));
  }
  return out;
}

std::vector<StsPairCouple> instantiate_sts_pairs(const StsTemplate& t,
                                                 const std::vector<std::string>& professions) {
  std::vector<StsPairCouple> out;
  out.reserve(professions.size());
  for (const auto& profession : professions) {
    // The article stays "A" even before vowel-initial professions so the
    // sentences differ only in the subject token.
    const std::string sentence_2 = "A " + profession + " " + t.body;
    StsPairCouple c;
    c.man = {t.id, "man", profession, "A man " + t.body, sentence_2};
    c.woman = {t.id, "woman", profession, "A woman " + t.body, sentence_2};
    out.push_back(std::move(c));
  }
  return out;
}

ProfessionTable::ProfessionTable(std::map<std::string, double> pct_female) {
  for (auto& [k, v] : pct_female) {
    if (!(v >= 0.0 && v <= 100.0)) {
      throw InputError("pct_female for '" + k + "' outside [0, 100]");
    }
    pct_.emplace(k, v);
  }
}

bool ProfessionTable::contains(std::string_view profession) const {
  return pct_.find(profession) != pct_.end();
}

double ProfessionTable::pct_female(std::string_view profession) const {
  auto it = pct_.find(profession);
  if (it == pct_.end()) throw InputError("unknown profession '" + std::string(profession) + "'");
  return it->second;
}

std::vector<std::string> ProfessionTable::professions() const {
  std::vector<std::string> out;
  out.reserve(pct_.size());
  for (const auto& [k, _] : pct_) out.push_back(k);
  return out;
}

ProfessionTable load_professions(std::istream& in, const std::string& source_name) {
  std::map<std::string, double> values;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = text::trim(text::strip_line(raw));
    if (line.empty() || line.front() == '#') continue;
    const std::string where = source_name + ":" + std::to_string(line_no);
    const auto f = text::split(line, ',');
    if (f.size() != 2) throw InputError(where + ": expected profession,pct_female");
    const std::string name = text::trim(f[0]);
    const std::string num = text::trim(f[1]);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (ec != std::errc() || ptr != num.data() + num.size() || num.empty()) {
      if (values.empty() && name == "profession") continue;  // header row
      throw InputError(where + ": malformed pct_female '" + num + "'");
    }
    if (!(v >= 0.0 && v <= 100.0)) throw InputError(where + ": pct_female outside [0, 100]");
    if (name.empty()) throw InputError(where + ": empty profession");
    if (!values.emplace(name, v).second) {
      throw InputError(where + ": duplicate profession '" + name + "'");
    }
  }
  if (values.empty()) throw InputError(source_name + ": no professions");
  return ProfessionTable(std::move(values));
}

ProfessionTable load_professions_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open professions file '" + path.string() + "'");
  return load_professions(in, path.string());
}

}  // namespace corrprobe::templates
