#include <doctest.h>

#include <cmath>
#include <sstream>

#include "corrprobe/error.hpp"
#include "corrprobe/metrics.hpp"
#include "corrprobe/toy_model.hpp"
#include "oracles.hpp"

using namespace corrprobe;
using namespace corrprobe::metrics;
using backend::ScoringClient;
using backend::ToyModel;
using backend::ToyModelSpec;

namespace {

std::vector<PersonEntry> persons_of(const ToyModelSpec& spec) {
  std::vector<PersonEntry> out;
  for (const auto& p : spec.persons) out.push_back({p.surface, GenderLabel(p.label)});
  return out;
}

std::vector<oracle::PlainPerson> plain_persons_of(const ToyModelSpec& spec) {
  std::vector<oracle::PlainPerson> out;
  for (const auto& p : spec.persons) out.push_back({p.surface, p.label});
  return out;
}

// 20 names per group, one template. Every woman gets "art"; every man gets a
// fill nobody else gets. Only "art" separates the groups.
ToyModelSpec one_template_spec() {
  ToyModelSpec spec;
  spec.model_id = "toy-art";
  spec.templates.push_back(templates::make_disco_template("t", "t", "PERSON's best subject is BLANK."));
  for (int i = 0; i < 20; ++i) {
    spec.persons.push_back({"Fay" + std::to_string(i), "female"});
    spec.persons.push_back({"Max" + std::to_string(i), "male"});
  }
  for (const auto& p : spec.persons) {
    backend::ToyFillRule rule;
    rule.template_id = "t";
    rule.person = p.surface;
    if (p.label == "female") {
      rule.fills = {{"art", 0.9}, {"a", 0.5}, {"b", 0.4}};
    } else {
      rule.fills = {{"a", 0.5}, {"b", 0.4}, {"c_" + p.surface, 0.3}};
    }
    spec.fill_rules.push_back(rule);
  }
  return spec;
}

std::vector<std::string> bundled_template_texts() {
  std::vector<std::string> out;
  for (const auto& t : templates::load_disco_templates_file(oracle::bundled("disco_templates.txt"))) {
    out.push_back(t.text);
  }
  return out;
}

templates::ProfessionTable bundled_bls() { return templates::load_professions_file(oracle::bundled("professions.csv")); }

}  // namespace

TEST_CASE("DisCo on the one-template example") {
  const auto spec = one_template_spec();
  ScoringClient client(std::make_shared<ToyModel>(spec));
  const auto r = disco(spec.templates, persons_of(spec), client);
  CHECK(r.value == 1.0);
  REQUIRE(r.templates.size() == 1);
  const auto& d = r.templates[0];
  CHECK(d.significant == 1);
  // "a" and "b" are supplied to everyone, so only art and the 20 c_ fills are testable.
  CHECK(d.tested == 21);
  CHECK(r.total_tests == 21);
  CHECK(r.corrected_alpha == doctest::Approx(0.05 / 21));
  for (const auto& t : d.tests) {
    if (t.fill == "art") {
      CHECK(t.significant);
      CHECK(t.statistic == doctest::Approx(40.0));
    } else {
      CHECK_FALSE(t.significant);
    }
    if (t.fill == "a" || t.fill == "b") CHECK_FALSE(t.testable);
  }
}

TEST_CASE("DisCo equals the brute-force enumeration on random toy models") {
  const auto texts = bundled_template_texts();
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto spec = oracle::random_toy_spec(seed, texts);
    auto toy = std::make_shared<ToyModel>(spec);
    ScoringClient client(toy);
    const auto got = disco(spec.templates, persons_of(spec), client, {.k = 3, .alpha = 0.05});
    const auto want = oracle::brute_force_disco(*toy, spec.templates, plain_persons_of(spec), 3, 0.05);
    INFO("seed " << seed);
    CHECK(got.value == want.value);
    CHECK(got.total_tests == want.tests);
    for (std::size_t t = 0; t < spec.templates.size(); ++t) {
      std::set<std::string> sig;
      for (const auto& test : got.templates[t].tests) {
        if (test.significant) sig.insert(test.fill);
      }
      CHECK(sig == want.significant[t]);
    }
  }
}

TEST_CASE("DisCo with k below the list length uses the top fills only") {
  const auto spec = one_template_spec();
  ScoringClient client(std::make_shared<ToyModel>(spec));
  // With k = 1 women supply "art" and men supply "a": both separate perfectly.
  const auto r = disco(spec.templates, persons_of(spec), client, {.k = 1});
  CHECK(r.value == 2.0);
}

TEST_CASE("per-template correction and expected-count exclusion") {
  FillObservations obs;
  obs.template_ids = {"x", "y"};
  std::vector<GenderLabel> labels;
  obs.fills.resize(2);
  for (int i = 0; i < 10; ++i) {
    labels.push_back(GenderLabel::female());
    obs.fills[0].push_back({"f"});
    obs.fills[1].push_back(i == 0 ? std::vector<std::string>{"rare", "z"} : std::vector<std::string>{"z"});
  }
  for (int i = 0; i < 10; ++i) {
    labels.push_back(GenderLabel::male());
    obs.fills[0].push_back({"m"});
    obs.fills[1].push_back({"z"});
  }
  const auto global = disco_from_observations(obs, labels, {});
  CHECK(global.total_tests == 3);  // f, m, rare; z is supplied to everyone
  CHECK(global.templates[0].significant == 2);
  CHECK(global.value == 1.0);

  const auto per = disco_from_observations(obs, labels, {.correction = Correction::per_template});
  CHECK(per.templates[0].corrected_alpha == doctest::Approx(0.025));
  CHECK(per.templates[1].corrected_alpha == doctest::Approx(0.05));
  CHECK(per.value == 1.0);

  // The "rare" table has expected counts of 0.5 in its hit column.
  const auto excl = disco_from_observations(obs, labels, {.min_expected = 1.0});
  CHECK(excl.total_tests == 2);
  bool found = false;
  for (const auto& t : excl.templates[1].tests) {
    if (t.fill == "rare") {
      found = true;
      CHECK(t.excluded);
      CHECK(t.low_expected);
    }
  }
  CHECK(found);
}

TEST_CASE("DisCo rejects unusable person lists") {
  FillObservations obs;
  obs.template_ids = {"x"};
  obs.fills = {{{"a"}, {"b"}, {"c"}}};
  CHECK_THROWS_AS(disco_from_observations(obs, {GenderLabel::female(), GenderLabel::female(), GenderLabel::female()}, {}),
                  InputError);
  CHECK_THROWS_AS(disco_from_observations(obs, {GenderLabel::female(), GenderLabel::female(), GenderLabel::male()}, {}),
                  InputError);
  obs.fills = {{{"a"}, {"b"}}};
  CHECK_THROWS_AS(disco_from_observations(obs, {GenderLabel::female(), GenderLabel::female(), GenderLabel::male(),
                                                GenderLabel::male()},
                                          {}),
                  InvariantError);
}

TEST_CASE("three groups are tested jointly") {
  FillObservations obs;
  obs.template_ids = {"x"};
  obs.fills.resize(1);
  std::vector<GenderLabel> labels;
  const GenderLabel neutral("neutral");
  for (int i = 0; i < 12; ++i) {
    for (const auto& l : {GenderLabel::female(), GenderLabel::male(), neutral}) {
      labels.push_back(l);
      obs.fills[0].push_back({l == GenderLabel::female() ? "w" : "o"});
    }
  }
  const auto r = disco_from_observations(obs, labels, {});
  CHECK(r.labels.size() == 3);
  for (const auto& t : r.templates[0].tests) {
    CHECK(t.groups.size() == 3);
    const double ref = oracle::chi2_definitional(
        {{double(t.groups[0].hits), double(t.groups[0].trials - t.groups[0].hits)},
         {double(t.groups[1].hits), double(t.groups[1].trials - t.groups[1].hits)},
         {double(t.groups[2].hits), double(t.groups[2].trials - t.groups[2].hits)}});
    CHECK(t.statistic == doctest::Approx(ref));
    CHECK(t.p_value == doctest::Approx(oracle::chi2_sf_quadrature(ref, 2)).epsilon(1e-9));
  }
  CHECK(r.value == 2.0);
}

TEST_CASE("label permutations keep group sizes and are seeded") {
  const auto spec = one_template_spec();
  const auto persons = persons_of(spec);
  const auto a = permuted_labels(persons, 9, 0);
  const auto b = permuted_labels(persons, 9, 0);
  const auto c = permuted_labels(persons, 9, 1);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(std::count(a.begin(), a.end(), GenderLabel::female()) == 20);

  ScoringClient client(std::make_shared<ToyModel>(spec));
  const auto nulls = disco_null_calibration(spec.templates, persons, client, 9, 10);
  CHECK(nulls.size() == 10);
  CHECK(nulls == disco_null_calibration(spec.templates, persons, client, 9, 10));
  for (double v : nulls) CHECK(v <= 1.0);
}

TEST_CASE("person entries from the lexicons") {
  std::istringstream pairs("he\tmale\tshe\tfemale\nman\tmale\twoman\tfemale\n");
  const auto lex = lexicon::load_pair_lexicon(pairs);
  const auto terms = term_person_entries(lex);
  REQUIRE(terms.size() == 2);
  CHECK(terms[0].surface == "the man");
  CHECK(terms[1].label == GenderLabel::female());

  std::istringstream names_in("Anna\t90\t1\nZoe\t90\t1\nAdam\t1\t90\n");
  const auto names = lexicon::load_name_lexicon(names_in, 0.8);
  const auto am = name_person_entries(names, lexicon::NameSplit::parse("A-M"));
  CHECK(am.size() == 2);
  CHECK(name_person_entries(names, lexicon::NameSplit::all()).size() == 3);
}

TEST_CASE("STS differences recover a planted line") {
  const auto bls = bundled_bls();
  const auto lex = lexicon::load_pair_lexicon_file(oracle::bundled("gendered_pairs.tsv"));
  const auto t = *templates::sts_template_from_sentence("A man is cooking.", lex);
  const auto couples = templates::instantiate_sts_pairs(t, bls.professions());
  ToyModelSpec spec;
  for (const auto& c : couples) {
    const double x = bls.pct_female(c.man.profession);
    spec.pair_rules.push_back({c.man.sentence_1, c.man.sentence_2, 3.0});
    // d = man - woman = 0.5 - 0.01 x
    spec.pair_rules.push_back({c.woman.sentence_1, c.woman.sentence_2, 2.5 + 0.01 * x});
  }
  ScoringClient client(std::make_shared<ToyModel>(spec));
  const auto r = sts_gender(couples, client, bls);
  CHECK(r.points.size() == 60);
  CHECK(r.fit.slope == doctest::Approx(-0.01));
  CHECK(r.fit.intercept == doctest::Approx(0.5));
  CHECK(r.value() == doctest::Approx(-1.0));
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("STS professions missing from the table") {
  const auto bls = bundled_bls();
  const auto lex = lexicon::load_pair_lexicon_file(oracle::bundled("gendered_pairs.tsv"));
  const auto t = *templates::sts_template_from_sentence("A man is cooking.", lex);
  auto profs = bls.professions();
  profs.push_back("astronaut");
  ToyModelSpec spec;
  ScoringClient client(std::make_shared<ToyModel>(spec));
  const auto r = sts_gender(templates::instantiate_sts_pairs(t, profs), client, bls);
  CHECK(r.skipped_items == 1);
  CHECK(r.warnings.size() == 1);
  // Every pair scores the same default, so the differences are constant.
  CHECK(r.degenerate);

  const auto all = bls.professions();
  std::vector<std::string> mostly_unknown(all.begin(), all.begin() + 5);
  for (int i = 0; i < 2; ++i) mostly_unknown.push_back("unknown" + std::to_string(i));
  CHECK_THROWS_AS(sts_gender(templates::instantiate_sts_pairs(t, mostly_unknown), client, bls), InputError);
}

TEST_CASE("coreference examples and correlation") {
  std::istringstream in(
      "id\tcontext\tps\tpe\tas\tae\tprofession\tpronoun_gender\n"
      "1\tThe nurse said she left.\t15\t18\t0\t9\tnurse\tfemale\n"
      "2\tThe engineer said she left.\t18\t21\t0\t12\tengineer\tfemale\n"
      "3\tThe engineer said he left.\t18\t20\t0\t12\tengineer\tmale\n"
      "4\tThe carpenter said she left.\t19\t22\t0\t13\tcarpenter\tfemale\n");
  const auto ex = load_coref_examples(in);
  REQUIRE(ex.size() == 4);
  CHECK(ex[1].pronoun.start == 18);

  ToyModelSpec spec;
  spec.coref_rules = {{"the nurse", "she", 0.9}, {"the engineer", "she", 0.3}, {"the carpenter", "she", 0.2}};
  ScoringClient client(std::make_shared<ToyModel>(spec));
  const auto bls = bundled_bls();
  const auto r = coref_gender(ex, client, bls);
  CHECK(r.points.size() == 3);
  std::vector<double> xs, ys;
  for (const auto& p : r.points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  CHECK(r.value() == doctest::Approx(stats::pearson_r(xs, ys)));
  CHECK(r.value() > 0.9);

  const auto hard = coref_gender(ex, client, bls, {.threshold = 0.5});
  for (const auto& p : hard.points) CHECK((p.y == 0.0 || p.y == 1.0));

  CHECK_THROWS_AS(coref_gender(ex, client, bls, {.pronoun_gender = "neutral"}), InputError);

  std::istringstream bad_span("9\tShe left.\t0\t3\t4\t30\tnurse\tfemale\n");
  const auto bad = load_coref_examples(bad_span);
  try {
    coref_gender(bad, client, bls);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("example 9") != std::string::npos);
  }

  std::istringstream short_row("1\tx\t0\t1\n");
  CHECK_THROWS_AS(load_coref_examples(short_row), InputError);
  std::istringstream bad_offset("1\tx\ta\t1\t2\t3\tnurse\tfemale\n");
  CHECK_THROWS_AS(load_coref_examples(bad_offset), InputError);
}

TEST_CASE("Bios TPR gap recovers a planted slope") {
  // Profession j has fraction female x = j/20 and gap 0.3x - 0.1, realized
  // with 200 gold examples per gender.
  std::vector<BiosRecord> log, train;
  std::map<std::string, double> expect_x;
  for (int j = 1; j <= 19; ++j) {
    const std::string prof = "p" + std::to_string(j);
    const double x = j / 20.0;
    const double gap = 0.3 * x - 0.1;
    const int correct_m = 100;
    const int correct_f = static_cast<int>(std::lround(200 * (0.5 + gap)));
    for (int i = 0; i < 200; ++i) {
      log.push_back({prof + "f" + std::to_string(i), prof, GenderLabel::female(), i < correct_f ? prof : "other"});
      log.push_back({prof + "m" + std::to_string(i), prof, GenderLabel::male(), i < correct_m ? prof : "other"});
    }
    for (int i = 0; i < 20; ++i) {
      train.push_back({"", prof, i < j ? GenderLabel::female() : GenderLabel::male(), prof});
    }
    expect_x[prof] = x;
  }
  const auto fx = estimate_profession_stats(train);
  for (const auto& [p, x] : expect_x) CHECK(fx.at(p) == doctest::Approx(x));
  const auto r = bios_gap(log, fx);
  CHECK(r.points.size() == 19);
  CHECK(r.primary == "slope");
  CHECK(r.value() == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(r.fit.intercept == doctest::Approx(-0.1).epsilon(1e-9));

  log.push_back({"x", "lonely", GenderLabel::female(), "lonely"});
  auto fx2 = fx;
  fx2["lonely"] = 0.5;
  const auto r2 = bios_gap(log, fx2);
  CHECK(r2.skipped_items == 1);
  CHECK(r2.value() == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("Bios logs") {
  std::istringstream in(R"({"id":"1","gold":"nurse","gender":"F","pred":"nurse"})"
                        "\n"
                        R"({"id":2,"gold":"nurse","gender":"male","pred":"surgeon"})"
                        "\n");
  const auto log = load_bios_log(in);
  REQUIRE(log.size() == 2);
  CHECK(log[0].gender == GenderLabel::female());
  CHECK(log[1].id == "2");
  std::istringstream bad(R"({"id":"1","gold":"nurse","gender":"x","pred":"nurse"})");
  CHECK_THROWS_AS(load_bios_log(bad), InputError);
  std::istringstream missing(R"({"id":"1","gold":"nurse"})");
  CHECK_THROWS_AS(load_bios_log(missing), InputError);
  CHECK_THROWS_AS(parse_binary_gender("n"), InputError);
}

TEST_CASE("accuracy from prediction logs") {
  auto log_of = [](const std::string& s) {
    std::istringstream in(s);
    return load_prediction_log(in);
  };
  const auto cls = log_of(R"({"id":"a","gold":"x","pred":"x"})"
                          "\n"
                          R"({"id":"b","gold":"y","pred":"x"})"
                          "\n"
                          R"({"id":"c","gold":1,"pred":1})"
                          "\n"
                          R"({"id":"d","gold":"z","pred":"z"})");
  CHECK(accuracy_from_log(cls, AccuracyTask::classification) == doctest::Approx(0.75));

  // tp = 2, fp = 1, fn = 1 -> F1 = 2/3
  const auto bin = log_of(R"({"gold":1,"pred":1})"
                          "\n"
                          R"({"gold":1,"pred":1})"
                          "\n"
                          R"({"gold":0,"pred":1})"
                          "\n"
                          R"({"gold":1,"pred":0})"
                          "\n"
                          R"({"gold":0,"pred":0})");
  CHECK(accuracy_from_log(bin, AccuracyTask::binary_f1) == doctest::Approx(2.0 / 3.0));
  CHECK(accuracy_from_log(bin, AccuracyTask::binary_f1, "0") == doctest::Approx(0.5));
  const auto none = log_of(R"({"gold":0,"pred":0})");
  CHECK(accuracy_from_log(none, AccuracyTask::binary_f1) == 0.0);

  const auto reg = log_of(R"({"gold":1,"pred":2})"
                          "\n"
                          R"({"gold":2,"pred":1})"
                          "\n"
                          R"({"gold":3,"pred":4})"
                          "\n"
                          R"({"gold":4,"pred":3})");
  CHECK(accuracy_from_log(reg, AccuracyTask::regression_pearson) == doctest::Approx(0.6));
  CHECK_THROWS_AS(accuracy_from_log(cls, AccuracyTask::regression_pearson), InputError);
  CHECK_THROWS_AS(accuracy_from_log({}, AccuracyTask::classification), InputError);
  CHECK(parse_accuracy_task("f1") == AccuracyTask::binary_f1);
  CHECK_THROWS_AS(parse_accuracy_task("bleu"), InputError);
  CHECK_THROWS_AS(log_of(R"({"gold":1})"), InputError);
}
