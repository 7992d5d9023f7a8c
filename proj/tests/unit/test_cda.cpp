#include <doctest.h>

#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "corrprobe/cda.hpp"
#include "corrprobe/error.hpp"
#include "oracles.hpp"

using namespace corrprobe;
using namespace corrprobe::cda;

namespace {

lexicon::PairLexicon bundled_pairs() { return lexicon::load_pair_lexicon_file(oracle::bundled("gendered_pairs.tsv")); }

lexicon::NameLexicon bundled_names() { return lexicon::load_name_lexicon_file(oracle::bundled("names_sample.tsv"), 0.8); }

// The bundled pairs restricted to words that occur in exactly one pair, so
// substitution is a bijection.
lexicon::PairLexicon symmetric_pairs() {
  std::ifstream in(oracle::bundled("gendered_pairs.tsv"));
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, int> uses;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, '\t');) f.push_back(cell);
    ++uses[f[0]];
    ++uses[f[2]];
    rows.push_back(f);
  }
  std::string tsv;
  for (const auto& f : rows) {
    if (uses[f[0]] == 1 && uses[f[2]] == 1) tsv += f[0] + "\t" + f[1] + "\t" + f[2] + "\t" + f[3] + "\n";
  }
  std::istringstream s(tsv);
  return lexicon::load_pair_lexicon(s, "symmetric");
}

std::string run_corpus(const std::string& input, const CdaConfig& cfg, RecordFormat fmt, CdaStats* stats = nullptr) {
  std::istringstream in(input);
  std::ostringstream out;
  auto s = rewrite_corpus(in, out, cfg, fmt);
  if (stats) *stats = s;
  return out.str();
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("term substitution keeps casing") {
  const auto lex = bundled_pairs();
  CHECK(counterfactual_sentence("He told her brother.", lex) == "She told his sister.");
  CHECK(counterfactual_sentence("THE MAN waved at the Woman", lex) == "THE WOMAN waved at the Man");
  CHECK(counterfactual_sentence("The actress's coat.", lex) == "The actor's coat.");
  CHECK_FALSE(counterfactual_sentence("Nothing gendered here.", lex).has_value());
  const auto rw = substitute_terms("he and she", lex);
  REQUIRE(rw.has_value());
  CHECK(rw->pair_indices.size() == 2);
  CHECK(rw->pair_indices[0] == rw->pair_indices[1]);
}

TEST_CASE("term substitution is an involution on a one-to-one lexicon") {
  const auto lex = symmetric_pairs();
  REQUIRE(lex.pairs().size() > 40);
  std::vector<std::string> vocab = {"the", "a", "went", "to", "market", "with", "and", "saw", "blue", "house"};
  for (const auto& p : lex.pairs()) {
    if (p.word_a.find(' ') == std::string::npos) vocab.push_back(p.word_a);
    if (p.word_b.find(' ') == std::string::npos) vocab.push_back(p.word_b);
  }
  std::mt19937_64 gen(17);
  for (int i = 0; i < 1000; ++i) {
    std::string s;
    const int n = 3 + static_cast<int>(gen() % 10);
    for (int w = 0; w < n; ++w) s += (w ? " " : "") + vocab[gen() % vocab.size()];
    const auto once = counterfactual_sentence(s, lex);
    if (!once) continue;
    const auto twice = counterfactual_sentence(*once, lex);
    REQUIRE(twice.has_value());
    CHECK(*twice == s);
  }
}

TEST_CASE("two-sided and one-sided output counts") {
  const auto lex = bundled_pairs();
  std::string corpus;
  std::uint64_t expected_matches = 0;
  for (int i = 0; i < 10000; ++i) {
    if (i % 3 == 0) {
      corpus += "The man number " + std::to_string(i) + " left.\n";
      ++expected_matches;
    } else if (i % 7 == 0) {
      corpus += "She and he met at " + std::to_string(i) + ".\n";
      ++expected_matches;
    } else {
      corpus += "A dog number " + std::to_string(i) + " barked.\n";
    }
  }
  CdaConfig cfg;
  cfg.lexicon = &lex;
  cfg.threads = 4;
  CdaStats two;
  const auto out2 = lines_of(run_corpus(corpus, cfg, RecordFormat::lines, &two));
  CHECK(two.sentences_read == 10000);
  CHECK(two.sentences_with_matches == expected_matches);
  CHECK(out2.size() == 10000 + expected_matches);
  CHECK(two.counterfactuals_emitted == expected_matches);
  CHECK(two.substitutions_per_pair.at("man/woman") == 3334);
  CHECK(two.substitutions_per_pair.at("he/she") == 2 * (expected_matches - 3334));
  CHECK(out2[0] == "The man number 0 left.");
  CHECK(out2[1] == "The woman number 0 left.");

  cfg.mode = CdaMode::one_sided;
  CdaStats one;
  const auto out1 = lines_of(run_corpus(corpus, cfg, RecordFormat::lines, &one));
  CHECK(out1.size() == expected_matches);
  CHECK(out1[0] == "The woman number 0 left.");
  CHECK(out1[1] == "The woman number 3 left.");
}

TEST_CASE("output does not depend on the thread count") {
  const auto lex = bundled_pairs();
  std::string corpus;
  for (int i = 0; i < 9000; ++i) corpus += (i % 2 ? "his book " : "a book ") + std::to_string(i) + "\n";
  CdaConfig cfg;
  cfg.lexicon = &lex;
  cfg.threads = 1;
  const auto serial = run_corpus(corpus, cfg, RecordFormat::lines);
  cfg.threads = 7;
  CHECK(run_corpus(corpus, cfg, RecordFormat::lines) == serial);
}

TEST_CASE("stats invariant") {
  CdaStats s;
  s.sentences_read = 3;
  s.sentences_with_matches = 1;
  s.output_sentences = 4;
  CHECK_NOTHROW(s.check(CdaMode::two_sided));
  CHECK_THROWS_AS(s.check(CdaMode::one_sided), InvariantError);
}

TEST_CASE("JSONL records") {
  const auto lex = bundled_pairs();
  CdaConfig cfg;
  cfg.lexicon = &lex;
  const auto out = lines_of(run_corpus(R"({"id":"a","text":"he ran"})"
                                       "\n\n"
                                       R"({"id":7,"text":"it ran"})"
                                       "\n",
                                       cfg, RecordFormat::jsonl));
  REQUIRE(out.size() == 3);
  const auto cf = nlohmann::json::parse(out[1]);
  CHECK(cf["id"] == "a");
  CHECK(cf["text"] == "she ran");
  CHECK(cf["counterfactual"] == true);
  CHECK(nlohmann::json::parse(out[2])["id"] == "7");
  try {
    run_corpus(R"({"text":"ok"})"
               "\n"
               R"({"txt":"bad"})"
               "\n",
               cfg, RecordFormat::jsonl);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("record 1") != std::string::npos);
  }
}

TEST_CASE("mix ratio") {
  const auto lex = bundled_pairs();
  CdaConfig cfg;
  cfg.lexicon = &lex;
  cfg.mode = CdaMode::one_sided;
  cfg.mix_ratio = 0.3;
  cfg.seed = 5;
  std::vector<std::string> sentences(10000, "the man left");
  CdaStats stats;
  const auto out = rewrite_sentences(sentences, cfg, &stats);
  CHECK(out.size() == 10000);
  const auto [lo, hi] = oracle::binomial_interval(10000, 0.3, 0.99);
  CHECK(static_cast<std::int64_t>(stats.counterfactuals_emitted) >= lo);
  CHECK(static_cast<std::int64_t>(stats.counterfactuals_emitted) <= hi);
  CHECK(rewrite_sentences(sentences, cfg) == out);

  cfg.mode = CdaMode::two_sided;
  CHECK_THROWS_AS(CorpusRewriter{cfg}, InputError);
  cfg.mode = CdaMode::one_sided;
  cfg.mix_ratio = 1.5;
  CHECK_THROWS_AS(CorpusRewriter{cfg}, InputError);
  CHECK_THROWS_AS(CorpusRewriter{CdaConfig{}}, InputError);
}

TEST_CASE("name policies") {
  const auto names = bundled_names();
  std::vector<std::string> sentences;
  std::vector<const lexicon::NameEntry*> originals;
  for (int i = 0; i < 10000; ++i) {
    const auto& e = names.entries()[static_cast<std::size_t>(i) % names.size()];
    sentences.push_back(e.name + " went home.");
    originals.push_back(&e);
  }
  auto replaced = [&](NamePolicyKind kind, std::uint64_t seed) {
    NameIntervention ni({kind, lexicon::NameSplit::all(), names, seed});
    std::vector<NameReplacement> out;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      const auto plan = ni.plan(sentences[i], i);
      REQUIRE(plan.size() == 1);
      CHECK(plan[0].original == originals[i]->name);
      CHECK(plan[0].replacement != originals[i]->name);
      REQUIRE(names.find(plan[0].replacement) != nullptr);
      CHECK(names.find(plan[0].replacement)->label == plan[0].replacement_label);
      out.push_back(plan[0]);
    }
    return out;
  };

  for (const auto& r : replaced(NamePolicyKind::same_gender, 1)) CHECK(r.replacement_label == r.original_label);
  for (const auto& r : replaced(NamePolicyKind::flip_gender, 1)) CHECK(r.replacement_label != r.original_label);

  const auto random = replaced(NamePolicyKind::random_gender, 1);
  std::int64_t female = 0;
  for (const auto& r : random) female += r.replacement_label == GenderLabel::female() ? 1 : 0;
  const auto [lo, hi] = oracle::binomial_interval(10000, 0.5, 0.99);
  CHECK(female >= lo);
  CHECK(female <= hi);

  const NamePolicy policy{NamePolicyKind::random_gender, lexicon::NameSplit::all(), names, 3};
  CHECK(name_intervention("Maria met James.", policy, 4) == name_intervention("Maria met James.", policy, 4));
  std::string joined_a, joined_b;
  for (std::uint64_t i = 0; i < 50; ++i) {
    joined_a += name_intervention("Maria met James.", policy, i);
    joined_b += name_intervention("Maria met James.", {policy.kind, policy.source_split, names, 4}, i);
  }
  CHECK(joined_a != joined_b);
}

TEST_CASE("name replacement respects the source split and casing") {
  const auto names = bundled_names();
  const auto am = lexicon::NameSplit::parse("A-M");
  NameIntervention ni({NamePolicyKind::same_gender, am, names, 2});
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto plan = ni.plan("MARIA and Nancy", i);
    REQUIRE(plan.size() == 1);
    CHECK(plan[0].original == "MARIA");
    CHECK(am.contains(plan[0].replacement));
    CHECK(text::classify_case(plan[0].replacement) == text::CaseClass::upper);
  }
  CHECK(ni.apply("Nobody here.", 0) == "Nobody here.");
  std::istringstream only_women("Ann\t9\t0\nBea\t9\t0\n");
  const auto women = lexicon::load_name_lexicon(only_women, 0.8);
  CHECK_THROWS_AS(NameIntervention({NamePolicyKind::flip_gender, lexicon::NameSplit::all(), women, 0}), InputError);
  CHECK_NOTHROW(NameIntervention({NamePolicyKind::same_gender, lexicon::NameSplit::all(), women, 0}));
  CHECK_THROWS_AS(NameIntervention({NamePolicyKind::same_gender, lexicon::NameSplit::parse("X-Z"), women, 0}),
                  InputError);
}

TEST_CASE("terms and names together") {
  const auto lex = bundled_pairs();
  const auto names = bundled_names();
  CdaConfig cfg;
  cfg.lexicon = &lex;
  cfg.names = NamePolicy{NamePolicyKind::flip_gender, lexicon::NameSplit::all(), names, 0};
  CdaStats stats;
  const auto out = rewrite_sentences({"Maria thanked her father.", "No names."}, cfg, &stats);
  REQUIRE(out.size() == 3);
  CHECK(out[1].find("his mother.") != std::string::npos);
  CHECK(out[1].find("Maria") == std::string::npos);
  CHECK(stats.name_replacements_by_label.at("male") == 1);
}

TEST_CASE("mode and policy names") {
  CHECK(parse_mode("one") == CdaMode::one_sided);
  CHECK(parse_mode("two_sided") == CdaMode::two_sided);
  CHECK_THROWS_AS(parse_mode("three"), InputError);
  CHECK(parse_policy("flip") == NamePolicyKind::flip_gender);
  CHECK_THROWS_AS(parse_policy("swap"), InputError);
}

TEST_CASE("raw text segmentation") {
  CHECK(segment_sentences("He left. She stayed!  Why?\nNew line") ==
        std::vector<std::string>{"He left.", "She stayed!", "Why?", "New line"});
  CHECK(segment_sentences("3.5 apples") == std::vector<std::string>{"3.5 apples"});
  CHECK(segment_sentences("  \n ").empty());
}
