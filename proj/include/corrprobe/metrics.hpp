#pragma once

// The correlation metrics: DisCo (cloze fills supplied preferentially to
// one gender group), STS-B and coreference correlations against the share
// of women in each profession, the Bias-in-Bios TPR-gap slope, plus plain
// task accuracy from prediction logs.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corrprobe/backend.hpp"
#include "corrprobe/lexicon.hpp"
#include "corrprobe/stats.hpp"
#include "corrprobe/templates.hpp"

namespace corrprobe::metrics {

using BlsTable = templates::ProfessionTable;
using lexicon::GenderLabel;

// ---------------------------------------------------------------- DisCo --

struct PersonEntry {
  std::string surface;
  GenderLabel label;
};

/// "the NOUN" phrases for every non-pronoun word in the pair lexicon.
std::vector<PersonEntry> term_person_entries(const lexicon::PairLexicon& lex);
/// Names within `split`, labeled by their dominant gender.
std::vector<PersonEntry> name_person_entries(const lexicon::NameLexicon& names,
                                             const lexicon::NameSplit& split);

enum class Correction {
  global,        // Bonferroni over every (template, fill) test in the run
  per_template,  // Bonferroni within each template
};

struct DiscoOptions {
  std::size_t k = 3;
  double alpha = 0.05;
  Correction correction = Correction::global;
  // Tables whose smallest expected count is below this are excluded from
  // testing (and from the Bonferroni count). 0 keeps every table.
  double min_expected = 0.0;
};

struct FillTest {
  std::string fill;
  std::vector<stats::GroupCount> groups;  // one per label, in label order
  double statistic = 0.0;
  double p_value = 1.0;
  bool testable = false;
  bool excluded = false;      // dropped by min_expected
  bool low_expected = false;  // some expected count < 5
  bool significant = false;
};

struct TemplateDetail {
  std::string template_id;
  std::size_t tested = 0;  // tests counted toward the correction
  std::size_t significant = 0;
  double corrected_alpha = 0.0;
  std::vector<FillTest> tests;  // every distinct fill, sorted by token
};

struct DiscoResult {
  double value = 0.0;  // mean significant fills per template
  std::vector<TemplateDetail> templates;
  std::size_t total_tests = 0;
  double alpha = 0.05;
  double corrected_alpha = 0.0;  // global threshold (per-template mode: 0)
  std::size_t k = 3;
  Correction correction = Correction::global;
  std::vector<GenderLabel> labels;
  std::size_t person_count = 0;
};

/// Supplied fills per template and person entry: fills[t][p] is the sorted
/// top-k token set for template t instantiated with person p.
struct FillObservations {
  std::vector<std::string> template_ids;
  std::vector<std::vector<std::vector<std::string>>> fills;
};

FillObservations collect_fills(const std::vector<templates::DiscoTemplate>& templates,
                               const std::vector<PersonEntry>& persons,
                               backend::ScoringClient& client, std::size_t k);

/// Testing step of DisCo on already collected fills; `labels[p]` is the
/// group of person p.
DiscoResult disco_from_observations(const FillObservations& obs,
                                    const std::vector<GenderLabel>& labels,
                                    const DiscoOptions& options);

DiscoResult disco(const std::vector<templates::DiscoTemplate>& templates,
                  const std::vector<PersonEntry>& persons, backend::ScoringClient& client,
                  const DiscoOptions& options = {});

/// DisCo recomputed with the person labels shuffled (group sizes kept),
/// once per trial, seeded.
std::vector<double> disco_null_calibration(const std::vector<templates::DiscoTemplate>& templates,
                                           const std::vector<PersonEntry>& persons,
                                           backend::ScoringClient& client, std::uint64_t seed,
                                           std::size_t trials, const DiscoOptions& options = {});

/// Label permutation used by trial `trial` of the null calibration.
std::vector<GenderLabel> permuted_labels(const std::vector<PersonEntry>& persons, std::uint64_t seed,
                                         std::size_t trial);

// ----------------------------------------------------- correlation metrics --

struct CorrelationPoint {
  std::string item;  // profession
  double x = 0.0;    // representation statistic
  double y = 0.0;    // metric quantity
  std::size_t n = 0; // examples aggregated into this point
};

struct CorrelationReport {
  std::string metric;
  std::string primary = "r";  // "r" or "slope"
  std::string x_label;
  std::string y_label;
  stats::LinearFitResult fit;
  std::vector<CorrelationPoint> points;
  bool degenerate = false;
  std::string degenerate_reason;
  std::vector<std::string> warnings;
  std::size_t skipped_items = 0;

  double value() const { return primary == "slope" ? fit.slope : fit.pearson_r; }
};

/// d = score(man pair) - score(woman pair), averaged per profession and
/// correlated with the profession's percentage of women.
CorrelationReport sts_gender(const std::vector<templates::StsPairCouple>& couples,
                             backend::ScoringClient& client, const BlsTable& bls);

struct CorefExample {
  std::string id;
  std::string context;
  backend::CharRange pronoun;
  backend::CharRange antecedent;
  std::string profession;
  std::string pronoun_gender;
};

/// TSV: id, context, pronoun_start, pronoun_end, antecedent_start,
/// antecedent_end, profession, pronoun_gender. A header row starting with
/// "id" is skipped.
std::vector<CorefExample> load_coref_examples(std::istream& in, const std::string& source_name = "<stream>");
std::vector<CorefExample> load_coref_examples_file(const std::filesystem::path& path);

struct CorefOptions {
  std::string pronoun_gender = "female";
  // When set, probabilities are turned into hard 0/1 decisions.
  std::optional<double> threshold;
};

/// Mean coreference probability of female-pronoun examples per profession,
/// correlated with the profession's percentage of women.
CorrelationReport coref_gender(const std::vector<CorefExample>& examples,
                               backend::ScoringClient& client, const BlsTable& bls,
                               const CorefOptions& options = {});

struct BiosRecord {
  std::string id;
  std::string gold;
  GenderLabel gender;
  std::string pred;
};

/// JSON lines {id, gold, gender, pred}. Gender accepts f/female/m/male.
std::vector<BiosRecord> load_bios_log(std::istream& in, const std::string& source_name = "<stream>");
std::vector<BiosRecord> load_bios_log_file(const std::filesystem::path& path);

GenderLabel parse_binary_gender(std::string_view raw);

/// Fraction of female examples per gold profession.
std::map<std::string, double> estimate_profession_stats(const std::vector<BiosRecord>& training);

/// TPR_female - TPR_male per profession, fitted against the fraction of
/// women; the slope is the reported value.
CorrelationReport bios_gap(const std::vector<BiosRecord>& log,
                           const std::map<std::string, double>& fraction_female);

// ------------------------------------------------------------- accuracy --

enum class AccuracyTask { classification, binary_f1, regression_pearson };

AccuracyTask parse_accuracy_task(std::string_view name);
std::string to_string(AccuracyTask task);

struct PredictionRecord {
  std::string id;
  backend::json gold;
  backend::json pred;
};

std::vector<PredictionRecord> load_prediction_log(std::istream& in, const std::string& source_name = "<stream>");
std::vector<PredictionRecord> load_prediction_log_file(const std::filesystem::path& path);

/// Accuracy, F1 of the positive class, or Pearson r of numeric predictions.
double accuracy_from_log(const std::vector<PredictionRecord>& log, AccuracyTask task,
                         const std::string& positive_label = "1");

}  // namespace corrprobe::metrics
