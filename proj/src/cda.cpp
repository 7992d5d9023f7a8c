#include "corrprobe/cda.hpp"

#include <algorithm>
#include <thread>

#include "corrprobe/error.hpp"
#include "corrprobe/rng.hpp"
#include "json.hpp"

namespace corrprobe::cda {

using json = nlohmann::json;

CdaMode parse_mode(std::string_view s) {
  if (s == "one" || s == "one_sided" || s == "1") return CdaMode::one_sided;
  if (s == "two" || s == "two_sided" || s == "2") return CdaMode::two_sided;
  throw InputError("unknown CDA mode '" + std::string(s) + "' (one, two)");
}

std::string to_string(CdaMode mode) { return mode == CdaMode::one_sided ? "one_sided" : "two_sided"; }

NamePolicyKind parse_policy(std::string_view s) {
  if (s == "same" || s == "same_gender") return NamePolicyKind::same_gender;
  if (s == "flip" || s == "flip_gender") return NamePolicyKind::flip_gender;
  if (s == "random" || s == "random_gender") return NamePolicyKind::random_gender;
  throw InputError("unknown name policy '" + std::string(s) + "' (same, flip, random)");
}

std::string to_string(NamePolicyKind kind) {
  switch (kind) {
    case NamePolicyKind::same_gender: return "same_gender";
    case NamePolicyKind::flip_gender: return "flip_gender";
    case NamePolicyKind::random_gender: return "random_gender";
  }
  return "same_gender";
}

// ------------------------------------------------------------------ names --

NameIntervention::NameIntervention(NamePolicy policy) : policy_(std::move(policy)) {
  for (std::size_t i = 0; i < policy_.pool.entries().size(); ++i) {
    const auto& e = policy_.pool.entries()[i];
    if (!policy_.source_split.contains(e.name)) continue;
    by_lower_.emplace(text::to_lower(e.name), i);
    by_label_[e.label].push_back(e.name);
  }
  for (const auto& [label, names] : by_label_) labels_.push_back(label);
  if (labels_.empty()) {
    throw InputError("name policy: no names in split " + policy_.source_split.describe());
  }
  if (policy_.kind != NamePolicyKind::same_gender) {
    for (const auto& required : {GenderLabel::female(), GenderLabel::male()}) {
      if (!by_label_.contains(required)) {
        throw InputError("name policy " + to_string(policy_.kind) + ": no " + required.str() +
                         " names in split " + policy_.source_split.describe());
      }
    }
  }
}

const std::vector<std::string>& NameIntervention::candidates(const GenderLabel& label) const {
  auto it = by_label_.find(label);
  if (it == by_label_.end()) {
    throw InputError("name policy: empty replacement pool for label '" + label.str() + "'");
  }
  return it->second;
}

GenderLabel NameIntervention::target_label(const GenderLabel& original, std::uint64_t& state) const {
  switch (policy_.kind) {
    case NamePolicyKind::same_gender:
      return original;
    case NamePolicyKind::flip_gender:
      if (original == GenderLabel::female()) return GenderLabel::male();
      if (original == GenderLabel::male()) return GenderLabel::female();
      throw InputError("flip_gender: label '" + original.str() + "' has no opposite");
    case NamePolicyKind::random_gender: {
      rng::SplitMix gen(state);
      const GenderLabel label = gen.below(2) == 0 ? GenderLabel::female() : GenderLabel::male();
      state = gen.next();
      return label;
    }
  }
  return original;
}

std::vector<NameReplacement> NameIntervention::plan(std::string_view s, std::uint64_t record) const {
  std::vector<NameReplacement> out;
  std::uint64_t match = 0;
  for (const auto& sp : text::word_spans(s)) {
    const std::string surface(s.substr(sp.begin, sp.size()));
    auto it = by_lower_.find(text::to_lower(text::nfc(surface)));
    if (it == by_lower_.end()) continue;
    const auto& entry = policy_.pool.entries()[it->second];
    std::uint64_t state = rng::derive(policy_.seed, record, match++);
    const GenderLabel label = target_label(entry.label, state);
    const auto& pool = candidates(label);
    rng::SplitMix gen(state);
    std::string chosen;
    const auto self = std::find(pool.begin(), pool.end(), entry.name);
    if (self != pool.end() && pool.size() > 1) {
      // Draw from the pool with the original removed.
      std::size_t k = static_cast<std::size_t>(gen.below(pool.size() - 1));
      if (k >= static_cast<std::size_t>(self - pool.begin())) ++k;
      chosen = pool[k];
    } else {
      chosen = pool[static_cast<std::size_t>(gen.below(pool.size()))];
    }
    out.push_back({sp, surface, text::apply_casing(surface, chosen), entry.label, label});
  }
  return out;
}

std::string NameIntervention::apply(std::string_view s, std::uint64_t record) const {
  const auto plan_ = plan(s, record);
  std::string out;
  std::size_t pos = 0;
  for (const auto& r : plan_) {
    out.append(s.substr(pos, r.span.begin - pos));
    out += r.replacement;
    pos = r.span.end;
  }
  out.append(s.substr(pos));
  return out;
}

std::string name_intervention(std::string_view s, const NamePolicy& policy, std::uint64_t record) {
  return NameIntervention(policy).apply(s, record);
}

// ------------------------------------------------------------------ terms --

std::optional<TermRewrite> substitute_terms(std::string_view s, const lexicon::PairLexicon& lex) {
  const auto matches = lexicon::match_gendered_tokens(s, lex);
  if (matches.empty()) return std::nullopt;
  TermRewrite rw;
  std::size_t pos = 0;
  for (const auto& m : matches) {
    rw.text.append(s.substr(pos, m.span.begin - pos));
    const std::string_view surface = m.surface;
    const std::string_view lead = surface.substr(0, surface.find(' '));
    rw.text += text::apply_casing(lead, m.entry.partner);
    rw.pair_indices.push_back(m.entry.pair_index);
    pos = m.span.end;
  }
  rw.text.append(s.substr(pos));
  return rw;
}

std::optional<std::string> counterfactual_sentence(std::string_view s, const lexicon::PairLexicon& lex) {
  auto rw = substitute_terms(s, lex);
  if (!rw) return std::nullopt;
  return std::move(rw->text);
}

// ----------------------------------------------------------------- corpus --

void CdaStats::check(CdaMode mode) const {
  const std::uint64_t expected =
      mode == CdaMode::two_sided ? sentences_read + sentences_with_matches : sentences_with_matches;
  if (output_sentences != expected) {
    throw InvariantError("CDA output count " + std::to_string(output_sentences) + " != expected " +
                         std::to_string(expected) + " for " + to_string(mode));
  }
}

namespace {

void merge(CdaStats& into, const CdaStats& from) {
  into.sentences_read += from.sentences_read;
  into.sentences_with_matches += from.sentences_with_matches;
  into.output_sentences += from.output_sentences;
  into.counterfactuals_emitted += from.counterfactuals_emitted;
  for (const auto& [k, v] : from.substitutions_per_pair) into.substitutions_per_pair[k] += v;
  for (const auto& [k, v] : from.name_replacements_by_label) into.name_replacements_by_label[k] += v;
}

constexpr std::uint64_t kMixStream = 0x6d6978ULL;

}  // namespace

CorpusRewriter::CorpusRewriter(CdaConfig cfg) : cfg_(std::move(cfg)) {
  if (!cfg_.lexicon && !cfg_.names) throw InputError("CDA needs a pair lexicon, a name policy, or both");
  if (cfg_.mix_ratio) {
    if (cfg_.mode != CdaMode::one_sided) throw InputError("--mix-ratio applies to one-sided CDA only");
    if (!(*cfg_.mix_ratio >= 0.0 && *cfg_.mix_ratio <= 1.0)) throw InputError("--mix-ratio must lie in [0, 1]");
  }
  if (cfg_.names) names_.emplace(*cfg_.names);
}

std::vector<CdaOutput> CorpusRewriter::rewrite(std::uint64_t index, const CdaRecord& record, CdaStats& stats) const {
  ++stats.sentences_read;
  std::string cf = record.text;
  bool matched = false;
  if (cfg_.lexicon) {
    if (auto rw = substitute_terms(cf, *cfg_.lexicon)) {
      matched = true;
      for (std::size_t i : rw->pair_indices) {
        const auto& p = cfg_.lexicon->pairs()[i];
        ++stats.substitutions_per_pair[p.word_a + "/" + p.word_b];
      }
      cf = std::move(rw->text);
    }
  }
  if (names_) {
    const auto plan = names_->plan(cf, index);
    if (!plan.empty()) {
      matched = true;
      for (const auto& r : plan) ++stats.name_replacements_by_label[r.replacement_label.str()];
      cf = names_->apply(cf, index);
    }
  }

  std::vector<CdaOutput> out;
  if (!matched) {
    if (cfg_.mode == CdaMode::two_sided) out.push_back({record.id, record.text, false});
  } else {
    ++stats.sentences_with_matches;
    if (cfg_.mode == CdaMode::two_sided) {
      out.push_back({record.id, record.text, false});
      out.push_back({record.id, std::move(cf), true});
    } else if (cfg_.mix_ratio) {
      rng::SplitMix gen(rng::derive(cfg_.seed, kMixStream, index));
      if (gen.uniform01() < *cfg_.mix_ratio) {
        out.push_back({record.id, std::move(cf), true});
      } else {
        out.push_back({record.id, record.text, false});
      }
    } else {
      out.push_back({record.id, std::move(cf), true});
    }
  }
  stats.output_sentences += out.size();
  for (const auto& o : out) stats.counterfactuals_emitted += o.counterfactual ? 1 : 0;
  return out;
}

namespace {

CdaRecord parse_record(const std::string& line, std::uint64_t index, RecordFormat format) {
  if (format == RecordFormat::lines) {
    return {std::to_string(index), std::string(text::strip_line(line))};
  }
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j.at("text").is_string()) {
    throw InputError("record " + std::to_string(index) + ": expected a JSON object with a string 'text'");
  }
  CdaRecord r;
  r.text = j.at("text").get<std::string>();
  if (!j.contains("id")) {
    r.id = std::to_string(index);
  } else if (j.at("id").is_string()) {
    r.id = j.at("id").get<std::string>();
  } else {
    r.id = j.at("id").dump();
  }
  return r;
}

void write_output(std::ostream& out, const CdaOutput& o, RecordFormat format) {
  if (format == RecordFormat::lines) {
    out << o.text << '\n';
  } else {
    out << json{{"id", o.id}, {"text", o.text}, {"counterfactual", o.counterfactual}}.dump() << '\n';
  }
}

constexpr std::size_t kChunk = 4096;

}  // namespace

CdaStats rewrite_corpus(std::istream& in, std::ostream& out, const CdaConfig& cfg, RecordFormat format) {
  const CorpusRewriter rewriter(cfg);
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  CdaStats total;
  std::uint64_t index = 0;
  std::vector<std::string> lines;
  std::string line;
  bool eof = false;
  while (!eof) {
    lines.clear();
    while (lines.size() < kChunk) {
      if (!std::getline(in, line)) {
        eof = true;
        break;
      }
      if (format == RecordFormat::jsonl && text::trim(line).empty()) continue;
      lines.push_back(line);
    }
    if (in.bad()) throw InputError("read error after record " + std::to_string(index));
    if (lines.empty()) break;

    std::vector<std::vector<CdaOutput>> results(lines.size());
    const std::size_t workers = std::min<std::size_t>(threads, lines.size());
    std::vector<CdaStats> partial(workers);
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = w; i < lines.size(); i += workers) {
              results[i] = rewriter.rewrite(index + i, parse_record(lines[i], index + i, format), partial[w]);
            }
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (const auto& s : partial) merge(total, s);
    for (const auto& r : results) {
      for (const auto& o : r) write_output(out, o, format);
    }
    index += lines.size();
  }
  if (!out) throw InputError("write error while emitting the CDA corpus");
  total.check(cfg.mode);
  return total;
}

std::vector<std::string> rewrite_sentences(const std::vector<std::string>& sentences, const CdaConfig& cfg,
                                           CdaStats* stats) {
  const CorpusRewriter rewriter(cfg);
  CdaStats local;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    for (auto& o : rewriter.rewrite(i, {std::to_string(i), sentences[i]}, local)) out.push_back(std::move(o.text));
  }
  local.check(cfg.mode);
  if (stats) *stats = std::move(local);
  return out;
}

std::vector<std::string> segment_sentences(std::string_view raw) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    std::string t = text::trim(current);
    if (!t.empty()) out.push_back(std::move(t));
    current.clear();
  };
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (c == '\n' || c == '\r') {
      flush();
      continue;
    }
    current.push_back(c);
    if ((c == '.' || c == '!' || c == '?') && (i + 1 == raw.size() || raw[i + 1] == ' ' || raw[i + 1] == '\t')) {
      flush();
    }
  }
  flush();
  return out;
}

}  // namespace corrprobe::cda
