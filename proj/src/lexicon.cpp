#include "corrprobe/lexicon.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>

#include "corrprobe/error.hpp"

namespace corrprobe::lexicon {

GenderLabel::GenderLabel(std::string value) : value_(std::move(value)) {
  const bool ok = !value_.empty() && std::all_of(value_.begin(), value_.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
  if (!ok) throw InputError("invalid gender label '" + value_ + "'");
}

namespace {

// Lower-cased, NFC, tokens joined by a single space.
std::string lookup_key(std::string_view phrase) {
  const std::string normalized = text::to_lower(text::nfc(phrase));
  const auto toks = text::words(normalized);
  std::string key;
  for (const auto& t : toks) {
    if (!key.empty()) key.push_back(' ');
    key += t;
  }
  return key;
}

std::size_t token_count(std::string_view key) {
  return static_cast<std::size_t>(std::count(key.begin(), key.end(), ' ')) + 1;
}

std::string location(const std::string& source, std::size_t line_no) {
  return source + ":" + std::to_string(line_no);
}

bool skip_line(std::string_view line) {
  const std::string t = text::trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

void PairLexicon::add_mapping(const std::string& token, const std::string& partner,
                              const GenderLabel& label, std::size_t index) {
  auto it = lookup_.find(token);
  if (it != lookup_.end()) {
    if (lookup_key(it->second.partner) != lookup_key(partner) || it->second.label != label) {
      warnings_.push_back("token '" + token + "' already maps to '" + it->second.partner +
                          "' (pair " + std::to_string(it->second.pair_index + 1) +
                          "); ignoring mapping to '" + partner + "' from pair " +
                          std::to_string(index + 1));
    }
    return;
  }
  lookup_.emplace(token, PairLookup{token, partner, label, index});
  order_.push_back(token);
  max_tokens_ = std::max(max_tokens_, token_count(token));
}

PairLexicon PairLexicon::from_pairs(std::vector<WordPair> pairs) {
  PairLexicon lex;
  lex.pairs_ = std::move(pairs);
  std::set<GenderLabel> labels;
  for (std::size_t i = 0; i < lex.pairs_.size(); ++i) {
    const WordPair& p = lex.pairs_[i];
    const std::string key_a = lookup_key(p.word_a);
    const std::string key_b = lookup_key(p.word_b);
    if (key_a.empty() || key_b.empty()) {
      throw InputError("pair " + std::to_string(i + 1) + " has an empty word");
    }
    if (key_a == key_b) {
      throw InputError("pair " + std::to_string(i + 1) + " maps '" + p.word_a + "' to itself");
    }
    lex.add_mapping(key_a, p.word_b, p.label_a, i);
    lex.add_mapping(key_b, p.word_a, p.label_b, i);
    labels.insert(p.label_a);
    labels.insert(p.label_b);
  }
  lex.labels_.assign(labels.begin(), labels.end());
  return lex;
}

const PairLookup* PairLexicon::lookup(std::string_view token) const {
  return lookup_normalized(lookup_key(token));
}

const PairLookup* PairLexicon::lookup_normalized(const std::string& key) const {
  auto it = lookup_.find(key);
  return it == lookup_.end() ? nullptr : &it->second;
}

std::optional<std::string> PairLexicon::partner(std::string_view token) const {
  if (const PairLookup* e = lookup(token)) return e->partner;
  return std::nullopt;
}

std::vector<PairLookup> PairLexicon::entries() const {
  std::vector<PairLookup> out;
  out.reserve(order_.size());
  for (const auto& key : order_) out.push_back(lookup_.at(key));
  return out;
}

void PairLexicon::apply_overrides(std::istream& in, const std::string& source_name) {
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = text::strip_line(raw);
    if (skip_line(line)) continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() != 2) {
      throw InputError(location(source_name, line_no) +
                       ": override needs token<TAB>replacement, got " +
                       std::to_string(fields.size()) + " fields");
    }
    const std::string key = lookup_key(fields[0]);
    auto it = lookup_.find(key);
    if (it == lookup_.end()) {
      throw InputError(location(source_name, line_no) + ": override for unknown token '" +
                       fields[0] + "'");
    }
    it->second.partner = text::trim(fields[1]);
  }
}

PairLexicon load_pair_lexicon(std::istream& in, const std::string& source_name) {
  std::vector<WordPair> pairs;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = text::strip_line(raw);
    if (skip_line(line)) continue;
    const auto f = text::split(line, '\t');
    if (f.size() != 4) {
      throw InputError(location(source_name, line_no) + ": expected 4 tab-separated fields, got " +
                       std::to_string(f.size()));
    }
    WordPair p;
    p.word_a = text::nfc(text::trim(f[0]));
    p.word_b = text::nfc(text::trim(f[2]));
    try {
      p.label_a = GenderLabel(text::to_lower(text::trim(f[1])));
      p.label_b = GenderLabel(text::to_lower(text::trim(f[3])));
    } catch (const InputError& e) {
      throw InputError(location(source_name, line_no) + ": " + e.what());
    }
    if (p.word_a.empty() || p.word_b.empty()) {
      throw InputError(location(source_name, line_no) + ": empty word");
    }
    pairs.push_back(std::move(p));
  }
  if (pairs.empty()) throw InputError(source_name + ": pair lexicon is empty");
  return PairLexicon::from_pairs(std::move(pairs));
}

PairLexicon load_pair_lexicon_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open pair lexicon '" + path.string() + "'");
  return load_pair_lexicon(in, path.string());
}

NameLexicon::NameLexicon(std::vector<NameEntry> entries, double threshold)
    : entries_(std::move(entries)), threshold_(threshold) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i].name, i).second) {
      throw InputError("duplicate name '" + entries_[i].name + "'");
    }
  }
}

const NameEntry* NameLexicon::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

namespace {

std::int64_t parse_count(const std::string& field, const std::string& where) {
  const std::string t = text::trim(field);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || v < 0) {
    throw InputError(where + ": malformed count '" + field + "'");
  }
  return v;
}

}  // namespace

NameLexicon load_name_lexicon(std::istream& in, double threshold, const std::string& source_name) {
  if (!(threshold > 0.5 && threshold <= 1.0)) {
    throw InputError("name dominance threshold must lie in (0.5, 1], got " +
                     std::to_string(threshold));
  }
  std::vector<NameEntry> kept;
  std::set<std::string> seen;
  std::string raw;
  std::size_t line_no = 0;
  std::size_t records = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = text::strip_line(raw);
    if (skip_line(line)) continue;
    const auto f = text::split(line, '\t');
    const std::string where = location(source_name, line_no);
    if (f.size() != 3) {
      throw InputError(where + ": expected name<TAB>female_count<TAB>male_count");
    }
    NameEntry e;
    e.name = text::nfc(text::trim(f[0]));
    if (e.name.empty()) throw InputError(where + ": empty name");
    if (!seen.insert(e.name).second) throw InputError(where + ": duplicate name '" + e.name + "'");
    e.female_count = parse_count(f[1], where);
    e.male_count = parse_count(f[2], where);
    ++records;
    const std::int64_t total = e.female_count + e.male_count;
    if (total == 0) continue;
    const bool female = e.female_count >= e.male_count;
    const std::int64_t top = female ? e.female_count : e.male_count;
    e.dominance = static_cast<double>(top) / static_cast<double>(total);
    if (!(e.dominance > threshold)) continue;
    e.label = female ? GenderLabel::female() : GenderLabel::male();
    kept.push_back(std::move(e));
  }
  if (records == 0) throw InputError(source_name + ": name list is empty");
  return NameLexicon(std::move(kept), threshold);
}

NameLexicon load_name_lexicon_file(const std::filesystem::path& path, double threshold) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open name list '" + path.string() + "'");
  return load_name_lexicon(in, threshold, path.string());
}

NameSplit NameSplit::all() { return NameSplit{}; }

NameSplit NameSplit::parse(std::string_view spec) {
  const std::string s = text::trim(spec);
  std::string lowered = s;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lowered == "all") return all();
  NameSplit split;
  for (const auto& part : text::split(s, ',')) {
    const std::string p = text::trim(part);
    const bool ok = p.size() == 3 && p[1] == '-' && std::isalpha(static_cast<unsigned char>(p[0])) &&
                    std::isalpha(static_cast<unsigned char>(p[2]));
    if (!ok) throw InputError("invalid name split '" + std::string(spec) + "' (expected e.g. A-M)");
    const char first = static_cast<char>(std::toupper(static_cast<unsigned char>(p[0])));
    const char last = static_cast<char>(std::toupper(static_cast<unsigned char>(p[2])));
    if (first > last) throw InputError("invalid name split range '" + p + "'");
    split.ranges_.push_back({first, last});
  }
  return split;
}

bool NameSplit::contains(std::string_view name) const {
  if (ranges_.empty()) return true;
  if (name.empty()) return false;
  // Only ASCII initials are classified; other scripts fall outside every range.
  const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(name.front())));
  return std::any_of(ranges_.begin(), ranges_.end(),
                     [c](const Range& r) { return c >= r.first && c <= r.last; });
}

std::string NameSplit::describe() const {
  if (ranges_.empty()) return "all";
  std::string out;
  for (const auto& r : ranges_) {
    if (!out.empty()) out.push_back(',');
    out += r.first;
    out += '-';
    out += r.last;
  }
  return out;
}

bool partitions_alphabet(const std::vector<NameSplit>& splits) {
  std::array<int, 26> hits{};
  for (const auto& s : splits) {
    for (char c = 'A'; c <= 'Z'; ++c) {
      if (s.contains(std::string_view(&c, 1))) ++hits[static_cast<std::size_t>(c - 'A')];
    }
  }
  return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

namespace {

// Length of the stem of a lower-cased possessive ("man's", "men’s"), else 0.
std::size_t possessive_stem(std::string_view w) {
  for (std::string_view clitic : {std::string_view("'s"), std::string_view("\u2019s")}) {
    if (w.size() > clitic.size() && w.ends_with(clitic)) return w.size() - clitic.size();
  }
  return 0;
}

// Byte length of the stem within the original (not normalized) token.
std::size_t stem_bytes(std::string_view sentence, const text::Span& sp) {
  const std::string_view token = sentence.substr(sp.begin, sp.size());
  for (std::string_view clitic : {std::string_view("'s"), std::string_view("'S"), std::string_view("\u2019s"),
                                  std::string_view("\u2019S")}) {
    if (token.ends_with(clitic)) return token.size() - clitic.size();
  }
  return token.size();
}

}  // namespace

std::vector<TokenMatch> match_gendered_tokens(std::string_view sentence, const PairLexicon& lex) {
  std::vector<TokenMatch> out;
  const auto spans = text::word_spans(sentence);
  std::vector<std::string> lowered;
  lowered.reserve(spans.size());
  for (const auto& sp : spans) {
    lowered.push_back(text::to_lower(text::nfc(sentence.substr(sp.begin, sp.size()))));
  }
  const std::size_t longest = lex.max_entry_tokens();
  std::size_t i = 0;
  while (i < spans.size()) {
    // "man's" is one UAX#29 word; match the stem and leave the clitic.
    if (const std::size_t stem = possessive_stem(lowered[i]); stem != 0) {
      if (const PairLookup* e = lex.lookup_normalized(lowered[i].substr(0, stem))) {
        const text::Span span{spans[i].begin, spans[i].begin + stem_bytes(sentence, spans[i])};
        out.push_back({span, std::string(sentence.substr(span.begin, span.size())), *e});
        ++i;
        continue;
      }
    }
    bool matched = false;
    for (std::size_t n = std::min(longest, spans.size() - i); n >= 1; --n) {
      std::string key = lowered[i];
      for (std::size_t j = 1; j < n; ++j) key += " " + lowered[i + j];
      if (const PairLookup* e = lex.lookup_normalized(key)) {
        const text::Span span{spans[i].begin, spans[i + n - 1].end};
        out.push_back({span, std::string(sentence.substr(span.begin, span.size())), *e});
        i += n;
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return out;
}

bool is_pronoun(std::string_view token) {
  static const std::set<std::string, std::less<>> pronouns = {
      "he",   "she",     "him",     "her",       "his",        "hers",      "himself",
      "herself", "they", "them",    "their",     "theirs",     "themself",  "themselves",
      "hisself"};
  return pronouns.contains(text::to_lower(token));
}

}  // namespace corrprobe::lexicon
