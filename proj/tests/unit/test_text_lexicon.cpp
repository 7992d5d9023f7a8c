#include <doctest.h>

#include <sstream>

#include "corrprobe/error.hpp"
#include "corrprobe/lexicon.hpp"
#include "oracles.hpp"

using namespace corrprobe;
using namespace corrprobe::lexicon;

namespace {

PairLexicon lex_from(const std::string& tsv) {
  std::istringstream in(tsv);
  return load_pair_lexicon(in, "test.tsv");
}

std::vector<std::string> surfaces(const std::vector<TokenMatch>& ms) {
  std::vector<std::string> out;
  for (const auto& m : ms) out.push_back(m.surface);
  return out;
}

}  // namespace

TEST_CASE("normalization and whitespace") {
  // "e" + combining acute composes under NFC
  CHECK(text::nfc("caf\x65\xcc\x81") == "caf\xc3\xa9");
  CHECK(text::collapse_whitespace("  a \t b\n\nc  ") == "a b c");
  CHECK(text::canonical(" A  man is ") == "A man is");
  CHECK(text::strip_line("\xef\xbb\xbfhello\r") == "hello");
  CHECK(text::trim("  x y ") == "x y");
}

TEST_CASE("word spans skip punctuation and spaces") {
  CHECK(text::words("He told her brother.") == std::vector<std::string>{"He", "told", "her", "brother"});
  CHECK(text::words("Maria's best subject, at school!") ==
        std::vector<std::string>{"Maria's", "best", "subject", "at", "school"});
  CHECK(text::words("") .empty());
  const std::string s = "Zoë likes café";
  const auto spans = text::word_spans(s);
  REQUIRE(spans.size() == 3);
  CHECK(s.substr(spans[2].begin, spans[2].size()) == "café");
}

TEST_CASE("code point offsets") {
  const std::string s = "Zoë said";
  CHECK(text::codepoint_count(s) == 8);
  CHECK(text::byte_offset(s, 3) == 4);
  CHECK(text::byte_offset(s, 8) == s.size());
  CHECK_THROWS_AS(text::byte_offset(s, 9), InputError);
}

TEST_CASE("casing classes round trip through apply_casing") {
  CHECK(text::classify_case("man") == text::CaseClass::lower);
  CHECK(text::classify_case("Man") == text::CaseClass::title);
  CHECK(text::classify_case("MAN") == text::CaseClass::upper);
  CHECK(text::classify_case("I") == text::CaseClass::title);
  CHECK(text::classify_case("mAn") == text::CaseClass::mixed);
  CHECK(apply_casing("Man", "woman") == "Woman");
  CHECK(apply_casing("MAN", "woman") == "WOMAN");
  CHECK(apply_casing("man", "Woman") == "woman");
  CHECK(apply_casing("He", "she") == "She");
  CHECK(apply_casing("ÉMILE", "zoë") == "ZOË");
}

TEST_CASE("pair lexicon lookups are bidirectional and case-insensitive") {
  const auto lex = lex_from("man\tmale\twoman\tfemale\n# comment\nKing\tmale\tqueen\tfemale\n");
  CHECK(lex.partner("man") == "woman");
  CHECK(lex.partner("Woman") == "man");
  CHECK(lex.partner("king") == "queen");
  CHECK(lex.partner("queen") == "King");
  CHECK_FALSE(lex.partner("dog").has_value());
  CHECK(lex.lookup("WOMAN")->label == GenderLabel::female());
  CHECK(lex.labels().size() == 2);
  CHECK(lex.entries().size() == 4);
}

TEST_CASE("ambiguous words keep the first listed partner") {
  const auto lex = lex_from("he\tmale\tshe\tfemale\nhis\tmale\ther\tfemale\nhim\tmale\ther\tfemale\n");
  CHECK(lex.partner("her") == "his");
  CHECK(lex.partner("him") == "her");
  CHECK(lex.warnings().size() == 1);
}

TEST_CASE("override rules replace partners") {
  auto lex = lex_from("his\tmale\ther\tfemale\nhim\tmale\ther\tfemale\n");
  std::istringstream rules("her\thim\n");
  lex.apply_overrides(rules, "rules.tsv");
  CHECK(lex.partner("her") == "him");
  std::istringstream bad("dog\tcat\n");
  CHECK_THROWS_AS(lex.apply_overrides(bad, "rules.tsv"), InputError);
}

TEST_CASE("malformed pair lexicons are rejected") {
  CHECK_THROWS_AS(lex_from(""), InputError);
  CHECK_THROWS_AS(lex_from("# only a comment\n"), InputError);
  CHECK_THROWS_AS(lex_from("man\tmale\twoman\n"), InputError);
  CHECK_THROWS_AS(lex_from("man\tmale\tman\tfemale\n"), InputError);
  CHECK_THROWS_AS(lex_from("man\tMale!\twoman\tfemale\n"), InputError);
  CHECK_THROWS_AS(load_pair_lexicon_file("/nonexistent/pairs.tsv"), InputError);
}

TEST_CASE("labels beyond the binary are admitted") {
  const auto lex = lex_from("man\tmale\tperson\tneutral\n");
  CHECK(lex.lookup("person")->label.str() == "neutral");
  CHECK_THROWS_AS(GenderLabel(""), InputError);
}

TEST_CASE("name lexicon keeps names above the dominance threshold") {
  std::istringstream in("Maria\t900\t10\nJordan\t500\t500\nJohn\t5\t995\nAlex\t80\t20\n");
  const auto names = load_name_lexicon(in, 0.8);
  CHECK(names.size() == 2);
  CHECK(names.find("Maria")->label == GenderLabel::female());
  CHECK(names.find("John")->label == GenderLabel::male());
  CHECK(names.find("Jordan") == nullptr);
  // 80/100 is not strictly above 0.8
  CHECK(names.find("Alex") == nullptr);

  std::istringstream dup("Maria\t900\t10\nMaria\t1\t1\n");
  CHECK_THROWS_AS(load_name_lexicon(dup, 0.8), InputError);
  std::istringstream bad("Maria\tx\t10\n");
  CHECK_THROWS_AS(load_name_lexicon(bad, 0.8), InputError);
  std::istringstream ok("Maria\t9\t1\n");
  CHECK_THROWS_AS(load_name_lexicon(ok, 0.5), InputError);
}

TEST_CASE("bundled name sample") {
  const auto names = load_name_lexicon_file(oracle::bundled("names_sample.tsv"), 0.8);
  CHECK(names.size() > 80);
  CHECK(names.find("Taylor") == nullptr);
  CHECK(names.find("Nancy")->label == GenderLabel::female());
}

TEST_CASE("name splits") {
  const auto am = NameSplit::parse("A-M");
  const auto nz = NameSplit::parse("n-z");
  CHECK(am.contains("Maria"));
  CHECK_FALSE(am.contains("Nancy"));
  CHECK(nz.contains("nancy"));
  CHECK(NameSplit::parse("all").contains("Émile"));
  CHECK_FALSE(am.contains("Émile"));
  CHECK(partitions_alphabet({am, nz}));
  CHECK_FALSE(partitions_alphabet({am, NameSplit::parse("M-Z")}));
  CHECK_FALSE(partitions_alphabet({am}));
  CHECK(NameSplit::parse("A-C,X-Z").describe() == "A-C,X-Z");
  CHECK_THROWS_AS(NameSplit::parse("M-A"), InputError);
  CHECK_THROWS_AS(NameSplit::parse("A"), InputError);
}

TEST_CASE("gendered token matching") {
  const auto lex = lex_from("he\tmale\tshe\tfemale\nhis\tmale\ther\tfemale\nman\tmale\twoman\tfemale\n");
  CHECK(surfaces(match_gendered_tokens("He told her brother.", lex)) == std::vector<std::string>{"He", "her"});
  CHECK(match_gendered_tokens("the manager is human", lex).empty());
  const auto poss = match_gendered_tokens("The man's hat and the woman’s coat", lex);
  REQUIRE(poss.size() == 2);
  CHECK(poss[0].surface == "man");
  CHECK(poss[1].surface == "woman");
}

TEST_CASE("multi-word entries match longest first") {
  const auto lex = lex_from("best man\tmale\tmaid of honor\tfemale\nman\tmale\twoman\tfemale\n");
  CHECK(lex.max_entry_tokens() == 3);
  const auto ms = match_gendered_tokens("The best man and the man", lex);
  REQUIRE(ms.size() == 2);
  CHECK(ms[0].surface == "best man");
  CHECK(ms[1].surface == "man");
}

TEST_CASE("pronoun list") {
  for (const char* p : {"he", "She", "HIM", "hers", "themselves"}) CHECK(is_pronoun(p));
  CHECK_FALSE(is_pronoun("man"));
}
