#include "corrprobe/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "corrprobe/error.hpp"
#include "corrprobe/rng.hpp"
#include "corrprobe/text.hpp"

namespace corrprobe::metrics {

using backend::json;

std::vector<PersonEntry> term_person_entries(const lexicon::PairLexicon& lex) {
  std::vector<PersonEntry> out;
  for (const auto& e : lex.entries()) {
    if (lexicon::is_pronoun(e.token)) continue;
    out.push_back({"the " + e.token, e.label});
  }
  return out;
}

std::vector<PersonEntry> name_person_entries(const lexicon::NameLexicon& names,
                                             const lexicon::NameSplit& split) {
  std::vector<PersonEntry> out;
  for (const auto& e : names.entries()) {
    if (split.contains(e.name)) out.push_back({e.name, e.label});
  }
  return out;
}

namespace {

std::vector<GenderLabel> distinct_labels(const std::vector<GenderLabel>& labels) {
  std::set<GenderLabel> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

void check_persons(const std::vector<GenderLabel>& labels) {
  std::map<GenderLabel, std::size_t> counts;
  for (const auto& l : labels) ++counts[l];
  if (counts.size() < 2) throw InputError("DisCo needs person entries from at least two groups");
  for (const auto& [label, n] : counts) {
    if (n < 2) {
      throw InputError("DisCo needs at least two person entries per group; '" + label.str() + "' has " +
                       std::to_string(n));
    }
  }
}

std::vector<GenderLabel> labels_of(const std::vector<PersonEntry>& persons) {
  std::vector<GenderLabel> out;
  out.reserve(persons.size());
  for (const auto& p : persons) out.push_back(p.label);
  return out;
}

}  // namespace

FillObservations collect_fills(const std::vector<templates::DiscoTemplate>& tmpls,
                               const std::vector<PersonEntry>& persons,
                               backend::ScoringClient& client, std::size_t k) {
  if (tmpls.empty()) throw InputError("DisCo needs at least one template");
  const std::string mask = client.mask_token();
  std::vector<backend::FillRequest> reqs;
  reqs.reserve(tmpls.size() * persons.size());
  for (const auto& t : tmpls) {
    for (const auto& p : persons) {
      reqs.push_back({templates::instantiate_person(t, p.surface, mask), mask, k});
    }
  }
  const auto responses = client.query_fills_batch(reqs);
  FillObservations obs;
  obs.fills.resize(tmpls.size());
  for (std::size_t t = 0; t < tmpls.size(); ++t) {
    obs.template_ids.push_back(tmpls[t].id);
    obs.fills[t].resize(persons.size());
    for (std::size_t p = 0; p < persons.size(); ++p) {
      auto& set = obs.fills[t][p];
      for (const auto& f : responses[t * persons.size() + p].fills) set.push_back(f.token);
      std::sort(set.begin(), set.end());
    }
  }
  return obs;
}

DiscoResult disco_from_observations(const FillObservations& obs, const std::vector<GenderLabel>& labels,
                                    const DiscoOptions& options) {
  check_persons(labels);
  DiscoResult result;
  result.alpha = options.alpha;
  result.k = options.k;
  result.correction = options.correction;
  result.labels = distinct_labels(labels);
  result.person_count = labels.size();

  std::vector<std::size_t> group_of(labels.size());
  std::vector<std::int64_t> trials(result.labels.size(), 0);
  for (std::size_t p = 0; p < labels.size(); ++p) {
    group_of[p] = static_cast<std::size_t>(
        std::lower_bound(result.labels.begin(), result.labels.end(), labels[p]) - result.labels.begin());
    ++trials[group_of[p]];
  }

  for (std::size_t t = 0; t < obs.fills.size(); ++t) {
    if (obs.fills[t].size() != labels.size()) {
      throw InvariantError("fill observations do not match the person list");
    }
    std::map<std::string, std::vector<std::int64_t>> hits;
    for (std::size_t p = 0; p < labels.size(); ++p) {
      for (const auto& fill : obs.fills[t][p]) {
        auto& h = hits.try_emplace(fill, result.labels.size(), 0).first->second;
        ++h[group_of[p]];
      }
    }
    TemplateDetail detail;
    detail.template_id = obs.template_ids.at(t);
    for (const auto& [fill, h] : hits) {
      FillTest test;
      test.fill = fill;
      for (std::size_t g = 0; g < h.size(); ++g) test.groups.push_back({h[g], trials[g]});
      stats::ChiSquareResult chi;
      if (test.groups.size() == 2) {
        const stats::ContingencyTable table{h[0], trials[0] - h[0], h[1], trials[1] - h[1]};
        chi = stats::chi_square_2x2(table);
      } else {
        chi = stats::chi_square_groups(test.groups);
      }
      test.statistic = chi.statistic;
      test.p_value = chi.p_value;
      test.testable = chi.testable;
      test.low_expected = chi.testable && chi.min_expected < 5.0;
      test.excluded = chi.testable && options.min_expected > 0.0 && chi.min_expected < options.min_expected;
      if (test.testable && !test.excluded) ++detail.tested;
      detail.tests.push_back(std::move(test));
    }
    result.total_tests += detail.tested;
    result.templates.push_back(std::move(detail));
  }

  if (options.correction == Correction::global && result.total_tests > 0) {
    result.corrected_alpha = stats::bonferroni_alpha(options.alpha, result.total_tests);
  }
  stats::CompensatedSum total;
  for (auto& detail : result.templates) {
    if (options.correction == Correction::global) {
      detail.corrected_alpha = result.corrected_alpha;
    } else if (detail.tested > 0) {
      detail.corrected_alpha = stats::bonferroni_alpha(options.alpha, detail.tested);
    }
    for (auto& test : detail.tests) {
      test.significant = test.testable && !test.excluded && test.p_value < detail.corrected_alpha;
      if (test.significant) ++detail.significant;
    }
    total.add(static_cast<double>(detail.significant));
  }
  result.value = result.templates.empty() ? 0.0 : total.value() / static_cast<double>(result.templates.size());
  return result;
}

DiscoResult disco(const std::vector<templates::DiscoTemplate>& tmpls, const std::vector<PersonEntry>& persons,
                  backend::ScoringClient& client, const DiscoOptions& options) {
  const auto labels = labels_of(persons);
  check_persons(labels);
  return disco_from_observations(collect_fills(tmpls, persons, client, options.k), labels, options);
}

std::vector<GenderLabel> permuted_labels(const std::vector<PersonEntry>& persons, std::uint64_t seed,
                                         std::size_t trial) {
  auto labels = labels_of(persons);
  rng::SplitMix gen(rng::derive(seed, 0x6e756c6cULL, trial));
  gen.shuffle(std::span<GenderLabel>(labels));
  return labels;
}

std::vector<double> disco_null_calibration(const std::vector<templates::DiscoTemplate>& tmpls,
                                           const std::vector<PersonEntry>& persons,
                                           backend::ScoringClient& client, std::uint64_t seed,
                                           std::size_t trials, const DiscoOptions& options) {
  check_persons(labels_of(persons));
  std::vector<double> out;
  if (trials == 0) return out;
  // Fills do not depend on the labels, so one collection serves every trial.
  const FillObservations obs = collect_fills(tmpls, persons, client, options.k);
  out.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    out.push_back(disco_from_observations(obs, permuted_labels(persons, seed, t), options).value);
  }
  return out;
}

// ------------------------------------------------------------------------

namespace {

// Fits y on x over the points, flagging degenerate inputs instead of failing.
void fit_points(CorrelationReport& report) {
  std::vector<double> xs, ys;
  for (const auto& p : report.points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  report.fit = {};
  report.fit.n = xs.size();
  if (xs.size() < 2) {
    report.degenerate = true;
    report.degenerate_reason = "degenerate: fewer than two points";
    return;
  }
  try {
    report.fit = stats::linear_fit(xs, ys);
  } catch (const DegenerateInput&) {
    report.degenerate = true;
    report.degenerate_reason = "degenerate: constant representation values";
    return;
  }
  if (report.fit.degenerate_y) {
    report.degenerate = true;
    report.degenerate_reason = "degenerate: constant " + report.y_label;
  }
}

struct MeanAccumulator {
  stats::CompensatedSum sum;
  std::size_t n = 0;
  void add(double v) {
    sum.add(v);
    ++n;
  }
  double mean() const { return sum.value() / static_cast<double>(n); }
};

}  // namespace

CorrelationReport sts_gender(const std::vector<templates::StsPairCouple>& couples,
                             backend::ScoringClient& client, const BlsTable& bls) {
  CorrelationReport report;
  report.metric = "sts_gender";
  report.primary = "r";
  report.x_label = "% female (BLS)";
  report.y_label = "differences";
  if (couples.empty()) throw InputError("sts_gender: no sentence pairs");

  std::vector<const templates::StsPairCouple*> kept;
  std::set<std::string> missing;
  for (const auto& c : couples) {
    if (bls.contains(c.man.profession)) {
      kept.push_back(&c);
    } else {
      ++report.skipped_items;
      missing.insert(c.man.profession);
    }
  }
  for (const auto& m : missing) report.warnings.push_back("profession '" + m + "' missing from BLS table; skipped");
  if (report.skipped_items * 10 > couples.size()) {
    throw InputError("sts_gender: " + std::to_string(report.skipped_items) + " of " +
                     std::to_string(couples.size()) + " pairs lack BLS statistics (more than 10%)");
  }

  std::vector<backend::PairRequest> reqs;
  reqs.reserve(kept.size() * 2);
  for (const auto* c : kept) {
    reqs.push_back({c->man.sentence_1, c->man.sentence_2});
    reqs.push_back({c->woman.sentence_1, c->woman.sentence_2});
  }
  const auto scores = client.query_pair_scores_batch(reqs);
  std::map<std::string, MeanAccumulator> per_profession;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    per_profession[kept[i]->man.profession].add(scores[2 * i] - scores[2 * i + 1]);
  }
  for (const auto& [profession, acc] : per_profession) {
    report.points.push_back({profession, bls.pct_female(profession), acc.mean(), acc.n});
  }
  fit_points(report);
  return report;
}

std::vector<CorefExample> load_coref_examples(std::istream& in, const std::string& source_name) {
  std::vector<CorefExample> out;
  std::string raw;
  std::size_t line_no = 0;
  auto parse_index = [&](const std::string& field, const std::string& where) {
    const std::string t = text::trim(field);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
      throw InputError(where + ": malformed offset '" + field + "'");
    }
    return v;
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = text::strip_line(raw);
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto f = text::split(line, '\t');
    const std::string where = source_name + ":" + std::to_string(line_no);
    if (out.empty() && !f.empty() && text::trim(f[0]) == "id") continue;
    if (f.size() != 8) throw InputError(where + ": expected 8 tab-separated fields, got " + std::to_string(f.size()));
    CorefExample e;
    e.id = text::trim(f[0]);
    e.context = f[1];
    e.pronoun = {parse_index(f[2], where), parse_index(f[3], where)};
    e.antecedent = {parse_index(f[4], where), parse_index(f[5], where)};
    e.profession = text::trim(f[6]);
    e.pronoun_gender = text::to_lower(text::trim(f[7]));
    out.push_back(std::move(e));
  }
  if (out.empty()) throw InputError(source_name + ": no coreference examples");
  return out;
}

std::vector<CorefExample> load_coref_examples_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open coreference examples '" + path.string() + "'");
  return load_coref_examples(in, path.string());
}

CorrelationReport coref_gender(const std::vector<CorefExample>& examples, backend::ScoringClient& client,
                               const BlsTable& bls, const CorefOptions& options) {
  CorrelationReport report;
  report.metric = "coref_gender";
  report.primary = "r";
  report.x_label = "% female (BLS)";
  report.y_label = "coreference likelihood";

  std::vector<const CorefExample*> kept;
  std::set<std::string> missing;
  std::size_t considered = 0;
  for (const auto& e : examples) {
    if (e.pronoun_gender != options.pronoun_gender) continue;
    ++considered;
    if (bls.contains(e.profession)) {
      kept.push_back(&e);
    } else {
      ++report.skipped_items;
      missing.insert(e.profession);
    }
  }
  if (considered == 0) {
    throw InputError("coref_gender: no examples with pronoun gender '" + options.pronoun_gender + "'");
  }
  for (const auto& m : missing) report.warnings.push_back("profession '" + m + "' missing from BLS table; skipped");
  if (report.skipped_items * 10 > considered) {
    throw InputError("coref_gender: " + std::to_string(report.skipped_items) + " of " +
                     std::to_string(considered) + " examples lack BLS statistics (more than 10%)");
  }

  std::map<std::string, MeanAccumulator> per_profession;
  for (const auto* e : kept) {
    double p = 0.0;
    try {
      p = client.query_coref(e->context, e->pronoun, e->antecedent);
    } catch (const BackendError& err) {
      throw BackendError("example " + e->id + ": " + err.what());
    } catch (const InputError& err) {
      throw InputError("example " + e->id + ": " + err.what());
    }
    if (options.threshold) p = p >= *options.threshold ? 1.0 : 0.0;
    per_profession[e->profession].add(p);
  }
  for (const auto& [profession, acc] : per_profession) {
    report.points.push_back({profession, bls.pct_female(profession), acc.mean(), acc.n});
  }
  fit_points(report);
  return report;
}

GenderLabel parse_binary_gender(std::string_view raw) {
  const std::string g = text::to_lower(text::trim(raw));
  if (g == "f" || g == "female") return GenderLabel::female();
  if (g == "m" || g == "male") return GenderLabel::male();
  throw InputError("expected a binary gender label (f/female/m/male), got '" + std::string(raw) + "'");
}

namespace {

std::string json_scalar_string(const json& v, const std::string& where, const char* name) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw InputError(where + ": field '" + name + "' must be a string");
}

template <typename F>
void for_each_json_line(std::istream& in, const std::string& source_name, F&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = source_name + ":" + std::to_string(line_no);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw InputError(where + ": invalid JSON object");
    fn(j, where);
  }
}

}  // namespace

std::vector<BiosRecord> load_bios_log(std::istream& in, const std::string& source_name) {
  std::vector<BiosRecord> out;
  for_each_json_line(in, source_name, [&](const json& j, const std::string& where) {
    for (const char* name : {"gold", "gender"}) {
      if (!j.contains(name)) throw InputError(where + ": missing field '" + name + "'");
    }
    BiosRecord r;
    r.id = j.contains("id") ? json_scalar_string(j.at("id"), where, "id") : std::to_string(out.size());
    r.gold = json_scalar_string(j.at("gold"), where, "gold");
    try {
      r.gender = parse_binary_gender(json_scalar_string(j.at("gender"), where, "gender"));
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
    if (j.contains("pred")) r.pred = json_scalar_string(j.at("pred"), where, "pred");
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<BiosRecord> load_bios_log_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open prediction log '" + path.string() + "'");
  return load_bios_log(in, path.string());
}

std::map<std::string, double> estimate_profession_stats(const std::vector<BiosRecord>& training) {
  if (training.empty()) throw InputError("estimate_profession_stats: empty training log");
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // female, total
  for (const auto& r : training) {
    if (r.gender != GenderLabel::female() && r.gender != GenderLabel::male()) {
      throw InputError("estimate_profession_stats: non-binary gender label '" + r.gender.str() + "'");
    }
    auto& c = counts[r.gold];
    if (r.gender == GenderLabel::female()) ++c.first;
    ++c.second;
  }
  std::map<std::string, double> out;
  for (const auto& [profession, c] : counts) {
    out[profession] = static_cast<double>(c.first) / static_cast<double>(c.second);
  }
  return out;
}

CorrelationReport bios_gap(const std::vector<BiosRecord>& log, const std::map<std::string, double>& fraction_female) {
  if (log.empty()) throw InputError("bios_gap: empty prediction log");
  CorrelationReport report;
  report.metric = "bios_gap";
  report.primary = "slope";
  report.x_label = "fraction female (training set)";
  report.y_label = "TPR gap (female - male)";

  struct Counts {
    std::size_t gold_f = 0, correct_f = 0, gold_m = 0, correct_m = 0;
  };
  std::map<std::string, Counts> per_profession;
  for (const auto& r : log) {
    auto& c = per_profession[r.gold];
    const bool correct = r.pred == r.gold;
    if (r.gender == GenderLabel::female()) {
      ++c.gold_f;
      c.correct_f += correct ? 1 : 0;
    } else if (r.gender == GenderLabel::male()) {
      ++c.gold_m;
      c.correct_m += correct ? 1 : 0;
    } else {
      throw InputError("bios_gap: record " + r.id + " has non-binary gender '" + r.gender.str() + "'");
    }
  }
  for (const auto& [profession, c] : per_profession) {
    auto stat = fraction_female.find(profession);
    if (stat == fraction_female.end()) {
      ++report.skipped_items;
      report.warnings.push_back("profession '" + profession + "' has no representation statistic; skipped");
      continue;
    }
    if (c.gold_f == 0 || c.gold_m == 0) {
      ++report.skipped_items;
      report.warnings.push_back("profession '" + profession + "' lacks gold examples for both genders; skipped");
      continue;
    }
    const double tpr_f = static_cast<double>(c.correct_f) / static_cast<double>(c.gold_f);
    const double tpr_m = static_cast<double>(c.correct_m) / static_cast<double>(c.gold_m);
    report.points.push_back({profession, stat->second, tpr_f - tpr_m, c.gold_f + c.gold_m});
  }
  if (report.points.empty()) throw InputError("bios_gap: every profession was skipped");
  fit_points(report);
  return report;
}

AccuracyTask parse_accuracy_task(std::string_view name) {
  if (name == "classification" || name == "accuracy") return AccuracyTask::classification;
  if (name == "binary-f1" || name == "f1") return AccuracyTask::binary_f1;
  if (name == "regression-pearson" || name == "pearson") return AccuracyTask::regression_pearson;
  throw InputError("unknown accuracy task '" + std::string(name) +
                   "' (classification, binary-f1, regression-pearson)");
}

std::string to_string(AccuracyTask task) {
  switch (task) {
    case AccuracyTask::classification: return "classification";
    case AccuracyTask::binary_f1: return "binary-f1";
    case AccuracyTask::regression_pearson: return "regression-pearson";
  }
  return "classification";
}

std::vector<PredictionRecord> load_prediction_log(std::istream& in, const std::string& source_name) {
  std::vector<PredictionRecord> out;
  for_each_json_line(in, source_name, [&](const json& j, const std::string& where) {
    if (!j.contains("gold") || !j.contains("pred")) throw InputError(where + ": record needs 'gold' and 'pred'");
    PredictionRecord r;
    r.id = j.contains("id") ? j.at("id").dump() : std::to_string(out.size());
    r.gold = j.at("gold");
    r.pred = j.at("pred");
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<PredictionRecord> load_prediction_log_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open prediction log '" + path.string() + "'");
  return load_prediction_log(in, path.string());
}

namespace {

// Label values compare as strings; booleans map to "1"/"0".
std::string label_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return v.dump();
}

double numeric(const json& v, const std::string& id) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = text::trim(v.get<std::string>());
    double d = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec == std::errc() && ptr == s.data() + s.size() && !s.empty()) return d;
  }
  throw InputError("record " + id + ": expected a numeric value, got " + v.dump());
}

}  // namespace

double accuracy_from_log(const std::vector<PredictionRecord>& log, AccuracyTask task,
                         const std::string& positive_label) {
  if (log.empty()) throw InputError("accuracy_from_log: empty log");
  switch (task) {
    case AccuracyTask::classification: {
      std::size_t correct = 0;
      for (const auto& r : log) correct += label_string(r.gold) == label_string(r.pred) ? 1 : 0;
      return static_cast<double>(correct) / static_cast<double>(log.size());
    }
    case AccuracyTask::binary_f1: {
      std::size_t tp = 0, fp = 0, fn = 0;
      for (const auto& r : log) {
        const bool gold = label_string(r.gold) == positive_label;
        const bool pred = label_string(r.pred) == positive_label;
        tp += gold && pred;
        fp += !gold && pred;
        fn += gold && !pred;
      }
      if (tp == 0) return 0.0;
      return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    }
    case AccuracyTask::regression_pearson: {
      std::vector<double> gold, pred;
      for (const auto& r : log) {
        gold.push_back(numeric(r.gold, r.id));
        pred.push_back(numeric(r.pred, r.id));
      }
      return stats::pearson_r(pred, gold);
    }
  }
  return 0.0;
}

}  // namespace corrprobe::metrics
