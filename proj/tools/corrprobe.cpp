// corrprobe: gendered-correlation audits of language-model backends.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "corrprobe/cda.hpp"
#include "corrprobe/error.hpp"
#include "corrprobe/http_backend.hpp"
#include "corrprobe/io.hpp"
#include "corrprobe/metrics.hpp"
#include "corrprobe/offline_backend.hpp"
#include "corrprobe/open_backend.hpp"
#include "corrprobe/report.hpp"
#include "corrprobe/toy_model.hpp"

namespace fs = std::filesystem;
namespace cp = corrprobe;
using cp::report::json;

namespace {

enum Exit { kOk = 0, kInput = 1, kBackend = 2, kInvariant = 3 };

std::vector<std::string> g_argv;

using cp::backend::data_dir;

// "bundled" (or empty) selects the shipped file.
fs::path resolve(const std::string& value, const char* bundled_name) {
  if (value.empty() || value == "bundled") return data_dir() / bundled_name;
  return value;
}

struct BackendOptions {
  std::vector<std::string> specs;
  std::string column;
  std::string cache;
  std::string record;
  std::size_t max_in_flight = 8;
  std::string mask = std::string(cp::backend::kDefaultMask);
};

struct OutputOptions {
  std::string out;
};

void add_backend_options(CLI::App* sub, BackendOptions& b) {
  sub->add_option("--backend", b.specs,
                  "http://host:port, offline:FILE, toy or toy:FILE; repeat for restarts (default $CORRPROBE_BACKEND)");
  sub->add_option("--column", b.column, "table column label (default: model id)");
  sub->add_option("--cache", b.cache, "JSON-lines response cache");
  sub->add_option("--record", b.record, "write every answered request as an offline predictions file");
  sub->add_option("--max-in-flight", b.max_in_flight, "concurrent backend requests")->check(CLI::Range(1, 256));
  sub->add_option("--mask-token", b.mask, "mask token for http backends");
}

void add_output_option(CLI::App* sub, OutputOptions& o) {
  sub->add_option("-o,--out", o.out, "metric JSON output (default stdout)");
}

cp::io::RunManifest start_manifest() {
  cp::io::RunManifest m;
  m.tool_version = CORRPROBE_VERSION;
  m.command = g_argv;
  m.started_at = cp::io::utc_timestamp();
  return m;
}

std::shared_ptr<cp::backend::Backend> open_backend(const std::string& spec, const BackendOptions& opts,
                                                   cp::io::RunManifest& manifest) {
  std::vector<fs::path> inputs;
  auto backend = cp::backend::open_backend(spec, opts.mask, &inputs);
  for (const auto& p : inputs) manifest.add_input(p);
  return backend;
}

std::vector<std::string> backend_specs(const BackendOptions& opts) {
  if (!opts.specs.empty()) return opts.specs;
  if (const char* env = std::getenv("CORRPROBE_BACKEND"); env && *env) return {env};
  throw cp::InputError("no backend given: pass --backend or set CORRPROBE_BACKEND");
}

// Runs `metric` once per backend; each run yields a value and its details.
template <typename F>
cp::report::MetricResult run_restarts(const std::string& metric, const std::string& variant,
                                      const BackendOptions& opts, cp::io::RunManifest manifest, F&& run) {
  std::vector<double> values;
  json runs = json::array();
  std::string first_model;
  const auto specs = backend_specs(opts);
  if (!opts.record.empty() && specs.size() > 1) throw cp::InputError("--record takes a single --backend");
  for (const auto& spec : specs) {
    cp::backend::ClientOptions copts;
    copts.max_in_flight = opts.max_in_flight;
    if (!opts.cache.empty()) copts.disk_cache = opts.cache;
    auto backend = open_backend(spec, opts, manifest);
    std::shared_ptr<cp::backend::RecordingBackend> recorder;
    if (!opts.record.empty()) {
      recorder = std::make_shared<cp::backend::RecordingBackend>(backend);
      backend = recorder;
    }
    cp::backend::ScoringClient client(backend, copts);
    const std::string model = client.model_id();
    if (first_model.empty()) first_model = model;
    manifest.model_ids.push_back(model);
    auto [value, details] = run(client);
    details["backend"] = spec;
    details["model_id"] = model;
    values.push_back(value);
    runs.push_back(std::move(details));
    if (recorder) {
      std::ostringstream transcript;
      recorder->write(transcript);
      cp::io::write_file(opts.record, transcript.str());
    }
  }
  manifest.finished_at = cp::io::utc_timestamp();
  return cp::report::make_result(metric, variant, opts.column.empty() ? first_model : opts.column, values,
                                 json{{"runs", runs}}, std::move(manifest));
}

void emit(const cp::report::MetricResult& r, const OutputOptions& out) {
  const std::string text = cp::report::render_metric_json(r);
  if (out.out.empty() || out.out == "-") {
    std::cout << text;
  } else {
    cp::io::write_file(out.out, text);
  }
  std::cerr << cp::report::row_label(r.metric, r.variant) << " [" << r.column << "]: " << r.display << '\n';
}

void print_warnings(const cp::metrics::CorrelationReport& rep) {
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
  if (rep.degenerate) std::cerr << "warning: " << rep.degenerate_reason << '\n';
}

// ------------------------------------------------------------------ disco --

struct DiscoArgs {
  BackendOptions backend;
  OutputOptions output;
  std::string templates = "bundled";
  std::string pairs;
  std::string names;
  double threshold = 0.8;
  std::string split = "all";
  std::size_t k = 3;
  double alpha = 0.05;
  std::string correction = "global";
  double min_expected = 0.0;
  bool random_groups = false;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
};

void cmd_disco(const DiscoArgs& a) {
  auto manifest = start_manifest();
  const fs::path tpath = resolve(a.templates, "disco_templates.txt");
  const auto tmpls = cp::templates::load_disco_templates_file(tpath);
  manifest.add_input(tpath);

  std::vector<cp::metrics::PersonEntry> persons;
  std::string variant;
  if (!a.names.empty()) {
    if (!a.pairs.empty()) throw cp::InputError("disco: give either --pairs or --names, not both");
    const fs::path npath = resolve(a.names, "names_sample.tsv");
    manifest.add_input(npath);
    persons = cp::metrics::name_person_entries(cp::lexicon::load_name_lexicon_file(npath, a.threshold),
                                               cp::lexicon::NameSplit::parse(a.split));
    variant = "names";
  } else {
    const fs::path ppath = resolve(a.pairs, "gendered_pairs.tsv");
    manifest.add_input(ppath);
    persons = cp::metrics::term_person_entries(cp::lexicon::load_pair_lexicon_file(ppath));
    variant = "terms";
  }

  cp::metrics::DiscoOptions opts;
  opts.k = a.k;
  opts.alpha = a.alpha;
  opts.min_expected = a.min_expected;
  if (a.correction == "global") {
    opts.correction = cp::metrics::Correction::global;
  } else if (a.correction == "per-template" || a.correction == "per_template") {
    opts.correction = cp::metrics::Correction::per_template;
  } else {
    throw cp::InputError("unknown --correction '" + a.correction + "' (global, per-template)");
  }

  if (a.random_groups) {
    manifest.seeds["seed"] = a.seed;
    std::vector<double> all;
    json runs = json::array();
    std::string first_model;
    for (const auto& spec : backend_specs(a.backend)) {
      cp::backend::ClientOptions copts;
      copts.max_in_flight = a.backend.max_in_flight;
      if (!a.backend.cache.empty()) copts.disk_cache = a.backend.cache;
      cp::backend::ScoringClient client(open_backend(spec, a.backend, manifest), copts);
      const std::string model = client.model_id();
      if (first_model.empty()) first_model = model;
      manifest.model_ids.push_back(model);
      const auto values = cp::metrics::disco_null_calibration(tmpls, persons, client, a.seed, a.trials, opts);
      if (values.empty()) throw cp::InputError("--trials must be positive");
      all.insert(all.end(), values.begin(), values.end());
      runs.push_back({{"backend", spec},
                      {"model_id", model},
                      {"seed", a.seed},
                      {"trials", a.trials},
                      {"values", values},
                      {"mean", cp::stats::mean(values)},
                      {"max", *std::max_element(values.begin(), values.end())}});
    }
    manifest.finished_at = cp::io::utc_timestamp();
    emit(cp::report::make_result(cp::report::kDiscoNull, variant,
                                 a.backend.column.empty() ? first_model : a.backend.column, all,
                                 json{{"runs", runs}}, std::move(manifest)),
         a.output);
    return;
  }

  auto r = run_restarts(cp::report::kDisco, variant, a.backend, std::move(manifest),
                        [&](cp::backend::ScoringClient& client) {
                          const auto res = cp::metrics::disco(tmpls, persons, client, opts);
                          return std::make_pair(res.value, cp::report::disco_details(res));
                        });
  emit(r, a.output);
}

// ------------------------------------------------------------ correlations --

struct StsArgs {
  BackendOptions backend;
  OutputOptions output;
  std::string sts;
  std::string pairs = "bundled";
  std::string professions = "bundled";
};

void cmd_sts(const StsArgs& a) {
  auto manifest = start_manifest();
  const fs::path ppath = resolve(a.pairs, "gendered_pairs.tsv");
  const fs::path bpath = resolve(a.professions, "professions.csv");
  const auto lex = cp::lexicon::load_pair_lexicon_file(ppath);
  const auto bls = cp::templates::load_professions_file(bpath);
  std::ifstream in(a.sts);
  if (!in) throw cp::InputError("cannot open STS-B file '" + a.sts + "'");
  const auto set = cp::templates::build_sts_templates(in, lex, a.sts);
  for (const auto& w : set.warnings) std::cerr << "warning: " << w << '\n';
  if (set.templates.empty()) throw cp::InputError(a.sts + ": no 'A man'/'A woman' templates found");
  for (const auto& p : {fs::path(a.sts), ppath, bpath}) manifest.add_input(p);

  std::vector<cp::templates::StsPairCouple> couples;
  for (const auto& t : set.templates) {
    auto c = cp::templates::instantiate_sts_pairs(t, bls.professions());
    couples.insert(couples.end(), c.begin(), c.end());
  }
  std::cerr << set.templates.size() << " templates, " << couples.size() << " pair couples\n";
  auto r = run_restarts(cp::report::kStsGender, "", a.backend, std::move(manifest),
                        [&](cp::backend::ScoringClient& client) {
                          const auto rep = cp::metrics::sts_gender(couples, client, bls);
                          print_warnings(rep);
                          json d = cp::report::correlation_details(rep);
                          d["templates"] = set.templates.size();
                          return std::make_pair(rep.value(), d);
                        });
  emit(r, a.output);
}

struct CorefArgs {
  BackendOptions backend;
  OutputOptions output;
  std::string examples;
  std::string professions = "bundled";
  std::string pronoun_gender = "female";
  std::optional<double> threshold;
};

void cmd_coref(const CorefArgs& a) {
  auto manifest = start_manifest();
  const fs::path bpath = resolve(a.professions, "professions.csv");
  const auto bls = cp::templates::load_professions_file(bpath);
  const auto examples = cp::metrics::load_coref_examples_file(a.examples);
  manifest.add_input(a.examples);
  manifest.add_input(bpath);
  cp::metrics::CorefOptions opts;
  opts.pronoun_gender = a.pronoun_gender;
  opts.threshold = a.threshold;
  auto r = run_restarts(cp::report::kCorefGender, "", a.backend, std::move(manifest),
                        [&](cp::backend::ScoringClient& client) {
                          const auto rep = cp::metrics::coref_gender(examples, client, bls, opts);
                          print_warnings(rep);
                          return std::make_pair(rep.value(), cp::report::correlation_details(rep));
                        });
  emit(r, a.output);
}

struct BiosArgs {
  OutputOptions output;
  std::vector<std::string> logs;
  std::string train_log;
  std::string column;
};

void cmd_bios(const BiosArgs& a) {
  auto manifest = start_manifest();
  const auto train = cp::metrics::load_bios_log_file(a.train_log);
  manifest.add_input(a.train_log);
  const auto fractions = cp::metrics::estimate_profession_stats(train);
  std::vector<double> values;
  json runs = json::array();
  for (const auto& log : a.logs) {
    const auto rep = cp::metrics::bios_gap(cp::metrics::load_bios_log_file(log), fractions);
    manifest.add_input(log);
    print_warnings(rep);
    values.push_back(rep.value());
    json d = cp::report::correlation_details(rep);
    d["log"] = log;
    runs.push_back(std::move(d));
  }
  manifest.finished_at = cp::io::utc_timestamp();
  emit(cp::report::make_result(cp::report::kBiosGap, "", a.column.empty() ? fs::path(a.logs.front()).stem().string()
                                                                          : a.column,
                               values, json{{"runs", runs}}, std::move(manifest)),
       a.output);
}

struct AccuracyArgs {
  OutputOptions output;
  std::vector<std::string> logs;
  std::string task = "classification";
  std::string positive = "1";
  std::string label;
  std::string column;
};

void cmd_accuracy(const AccuracyArgs& a) {
  auto manifest = start_manifest();
  const auto task = cp::metrics::parse_accuracy_task(a.task);
  std::vector<double> values;
  json runs = json::array();
  for (const auto& log : a.logs) {
    const double v = cp::metrics::accuracy_from_log(cp::metrics::load_prediction_log_file(log), task, a.positive);
    manifest.add_input(log);
    values.push_back(v);
    runs.push_back({{"log", log}, {"task", cp::metrics::to_string(task)}, {"value", v}});
  }
  manifest.finished_at = cp::io::utc_timestamp();
  emit(cp::report::make_result(cp::report::kAccuracy, a.label.empty() ? cp::metrics::to_string(task) : a.label,
                               a.column.empty() ? fs::path(a.logs.front()).stem().string() : a.column, values,
                               json{{"runs", runs}}, std::move(manifest)),
       a.output);
}

// -------------------------------------------------------------------- cda --

struct CdaArgs {
  std::string input = "-";
  std::string output = "-";
  std::string manifest_path;
  std::string mode = "two";
  std::string pairs;
  std::string names;
  std::string policy = "same";
  std::string split = "all";
  double threshold = 0.8;
  std::uint64_t seed = 0;
  std::optional<double> mix_ratio;
  std::string format = "lines";
  unsigned threads = 0;
};

void cmd_cda(const CdaArgs& a) {
  auto manifest = start_manifest();
  manifest.seeds["seed"] = a.seed;
  cp::cda::CdaConfig cfg;
  cfg.mode = cp::cda::parse_mode(a.mode);
  cfg.seed = a.seed;
  cfg.mix_ratio = a.mix_ratio;
  cfg.threads = a.threads;
  std::optional<cp::lexicon::PairLexicon> lex;
  if (!a.pairs.empty() || a.names.empty()) {
    const fs::path ppath = resolve(a.pairs, "gendered_pairs.tsv");
    lex = cp::lexicon::load_pair_lexicon_file(ppath);
    manifest.add_input(ppath);
    cfg.lexicon = &*lex;
  }
  if (!a.names.empty()) {
    const fs::path npath = resolve(a.names, "names_sample.tsv");
    cp::cda::NamePolicy policy;
    policy.kind = cp::cda::parse_policy(a.policy);
    policy.source_split = cp::lexicon::NameSplit::parse(a.split);
    policy.pool = cp::lexicon::load_name_lexicon_file(npath, a.threshold);
    policy.seed = a.seed;
    manifest.add_input(npath);
    cfg.names = std::move(policy);
  }

  std::unique_ptr<std::istream> owned_in;
  std::istream* in = &std::cin;
  if (a.input != "-") {
    owned_in = std::make_unique<std::ifstream>(a.input, std::ios::binary);
    if (!*owned_in) throw cp::InputError("cannot open corpus '" + a.input + "'");
    manifest.add_input(a.input);
    in = owned_in.get();
  }
  cp::cda::RecordFormat format = cp::cda::RecordFormat::lines;
  std::istringstream segmented;
  if (a.format == "jsonl") {
    format = cp::cda::RecordFormat::jsonl;
  } else if (a.format == "raw") {
    std::ostringstream all;
    all << in->rdbuf();
    std::string joined;
    for (const auto& s : cp::cda::segment_sentences(all.str())) joined += s + "\n";
    segmented.str(joined);
    in = &segmented;
  } else if (a.format != "lines") {
    throw cp::InputError("unknown --format '" + a.format + "' (lines, jsonl, raw)");
  }

  std::unique_ptr<std::ofstream> owned_out;
  std::ostream* out = &std::cout;
  if (a.output != "-") {
    owned_out = std::make_unique<std::ofstream>(a.output, std::ios::binary | std::ios::trunc);
    if (!*owned_out) throw cp::InputError("cannot write '" + a.output + "'");
    out = owned_out.get();
  }
  const auto stats = cp::cda::rewrite_corpus(*in, *out, cfg, format);
  out->flush();
  manifest.finished_at = cp::io::utc_timestamp();

  json m = {{"manifest", cp::io::to_json(manifest)},
            {"mode", cp::cda::to_string(cfg.mode)},
            {"format", a.format},
            {"stats",
             {{"sentences_read", stats.sentences_read},
              {"sentences_with_matches", stats.sentences_with_matches},
              {"output_sentences", stats.output_sentences},
              {"counterfactuals_emitted", stats.counterfactuals_emitted},
              {"substitutions_per_pair", stats.substitutions_per_pair},
              {"name_replacements_by_label", stats.name_replacements_by_label}}}};
  if (cfg.names) {
    m["policy"] = {{"kind", cp::cda::to_string(cfg.names->kind)},
                   {"split", cfg.names->source_split.describe()},
                   {"threshold", a.threshold}};
  }
  if (cfg.mix_ratio) m["mix_ratio"] = *cfg.mix_ratio;
  if (!a.manifest_path.empty()) cp::io::write_file(a.manifest_path, m.dump(2) + "\n");
  std::cerr << "read " << stats.sentences_read << ", matched " << stats.sentences_with_matches << ", wrote "
            << stats.output_sentences << '\n';
}

// ----------------------------------------------------------------- report --

struct ReportArgs {
  std::vector<std::string> inputs;
  std::vector<std::string> series;
  std::string out_dir = "report";
};

void cmd_report(const ReportArgs& a) {
  std::vector<fs::path> inputs(a.inputs.begin(), a.inputs.end());
  std::vector<fs::path> series(a.series.begin(), a.series.end());
  const auto files = cp::report::render_report_files(inputs, series);
  for (const auto& f : files) cp::io::write_file(fs::path(a.out_dir) / f.name, f.content);
  std::cout << cp::io::read_file(fs::path(a.out_dir) / "table.md");
}

// -------------------------------------------------------------- toy-serve --

struct ServeArgs {
  std::string spec = "bundled";
  std::string host = "127.0.0.1";
  int port = 8765;
};

void cmd_serve(const ServeArgs& a) {
  const fs::path path = resolve(a.spec, "toy_model.json");
  auto model = std::make_shared<cp::backend::ToyModel>(cp::backend::load_toy_spec_file(path));
  cp::backend::BackendServer server(model);
  const int port = server.bind(a.host, a.port);
  std::cout << "serving " << model->model_id() << " on http://" << a.host << ':' << port << std::endl;
  server.listen();
}

}  // namespace

int main(int argc, char** argv) {
  g_argv.assign(argv, argv + argc);
  CLI::App app{"Gendered-correlation audits of language-model backends", "corrprobe"};
  app.set_version_flag("--version", std::string(CORRPROBE_VERSION));
  app.set_config("--config", "", "key=value file mirroring the command-line flags");
  app.require_subcommand(1);

  DiscoArgs disco;
  auto* s_disco = app.add_subcommand("disco", "DisCo: fills significantly associated with a gender group");
  add_backend_options(s_disco, disco.backend);
  add_output_option(s_disco, disco.output);
  s_disco->add_option("--templates", disco.templates, "template file or 'bundled'");
  s_disco->add_option("--pairs", disco.pairs, "gendered word pairs (Terms variant, default)");
  s_disco->add_option("--names", disco.names, "name counts TSV (Names variant)");
  s_disco->add_option("--threshold", disco.threshold, "name dominance threshold");
  s_disco->add_option("--split", disco.split, "name split: A-M, N-Z, all");
  s_disco->add_option("-k,--k", disco.k, "fills per query")->check(CLI::PositiveNumber);
  s_disco->add_option("--alpha", disco.alpha, "significance level")->check(CLI::Range(0.0, 1.0));
  s_disco->add_option("--correction", disco.correction, "global or per-template Bonferroni");
  s_disco->add_option("--min-expected", disco.min_expected, "exclude tables with a smaller expected count");
  s_disco->add_flag("--random-groups", disco.random_groups, "null calibration with permuted groups");
  s_disco->add_option("--trials", disco.trials, "null-calibration trials");
  s_disco->add_option("--seed", disco.seed, "seed for the group permutations");

  StsArgs sts;
  auto* s_sts = app.add_subcommand("sts-gender", "STS-B similarity gap against profession gender shares");
  add_backend_options(s_sts, sts.backend);
  add_output_option(s_sts, sts.output);
  s_sts->add_option("--sts", sts.sts, "STS-B test file (tab separated)")->required();
  s_sts->add_option("--pairs", sts.pairs, "gendered word pairs");
  s_sts->add_option("--professions", sts.professions, "profession,pct_female CSV");

  CorefArgs coref;
  auto* s_coref = app.add_subcommand("coref-gender", "coreference likelihood against profession gender shares");
  add_backend_options(s_coref, coref.backend);
  add_output_option(s_coref, coref.output);
  s_coref->add_option("--examples", coref.examples, "WinoGender-style TSV")->required();
  s_coref->add_option("--professions", coref.professions, "profession,pct_female CSV");
  s_coref->add_option("--pronoun-gender", coref.pronoun_gender, "pronoun gender to score");
  s_coref->add_option("--threshold", coref.threshold, "turn probabilities into 0/1 decisions");

  BiosArgs bios;
  auto* s_bios = app.add_subcommand("bios-gap", "TPR-gap slope from Bias-in-Bios prediction logs");
  add_output_option(s_bios, bios.output);
  s_bios->add_option("--log", bios.logs, "prediction log; repeat for restarts")->required();
  s_bios->add_option("--train-log", bios.train_log, "training split for gender shares")->required();
  s_bios->add_option("--column", bios.column, "table column label");

  AccuracyArgs acc;
  auto* s_acc = app.add_subcommand("accuracy", "task accuracy from prediction logs");
  add_output_option(s_acc, acc.output);
  s_acc->add_option("--log", acc.logs, "prediction log; repeat for restarts")->required();
  s_acc->add_option("--task", acc.task, "classification, binary-f1, regression-pearson");
  s_acc->add_option("--positive-label", acc.positive, "positive class for binary-f1");
  s_acc->add_option("--label", acc.label, "table row label");
  s_acc->add_option("--column", acc.column, "table column label");

  CdaArgs cda;
  auto* s_cda = app.add_subcommand("cda", "counterfactual data augmentation of a corpus");
  s_cda->add_option("-i,--input", cda.input, "corpus (default stdin)");
  s_cda->add_option("-o,--output", cda.output, "augmented corpus (default stdout)");
  s_cda->add_option("--manifest", cda.manifest_path, "write the run manifest and stats here");
  s_cda->add_option("--mode", cda.mode, "one or two sided");
  s_cda->add_option("--pairs", cda.pairs, "gendered word pairs");
  s_cda->add_option("--names", cda.names, "name counts TSV for name replacement");
  s_cda->add_option("--policy", cda.policy, "same, flip, random");
  s_cda->add_option("--split", cda.split, "source name split: A-M, N-Z, all");
  s_cda->add_option("--threshold", cda.threshold, "name dominance threshold");
  s_cda->add_option("--seed", cda.seed, "sampling seed");
  s_cda->add_option("--mix-ratio", cda.mix_ratio, "one-sided: probability of emitting the counterfactual");
  s_cda->add_option("--format", cda.format, "lines, jsonl, or raw (approximate sentence splitting)");
  s_cda->add_option("--threads", cda.threads, "worker threads (0: all cores)");

  ReportArgs rep;
  auto* s_rep = app.add_subcommand("report", "comparison table and plots from metric JSON files");
  s_rep->add_option("inputs", rep.inputs, "metric JSON files")->required();
  s_rep->add_option("--series", rep.series, "training-curve CSV (step,<series>...)");
  s_rep->add_option("--out-dir", rep.out_dir, "output directory");

  ServeArgs serve;
  auto* s_serve = app.add_subcommand("toy-serve", "serve the toy model over the wire protocol");
  s_serve->add_option("--spec", serve.spec, "toy model JSON or 'bundled'");
  s_serve->add_option("--host", serve.host, "bind address");
  s_serve->add_option("--port", serve.port, "port (0 picks a free one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (*s_disco) cmd_disco(disco);
    if (*s_sts) cmd_sts(sts);
    if (*s_coref) cmd_coref(coref);
    if (*s_bios) cmd_bios(bios);
    if (*s_acc) cmd_accuracy(acc);
    if (*s_cda) cmd_cda(cda);
    if (*s_rep) cmd_report(rep);
    if (*s_serve) cmd_serve(serve);
  } catch (const cp::BackendError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return kBackend;
  } catch (const cp::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const cp::InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kInvariant;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInvariant;
  }
  return kOk;
}
