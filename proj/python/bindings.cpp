#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include "corrprobe/cda.hpp"
#include "corrprobe/error.hpp"
#include "corrprobe/metrics.hpp"
#include "corrprobe/open_backend.hpp"
#include "corrprobe/report.hpp"
#include "corrprobe/stats.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
namespace cp = corrprobe;
using nlohmann::json;

namespace {

fs::path resolve(const std::optional<std::string>& value, const char* bundled_name) {
  if (!value || value->empty() || *value == "bundled") return cp::backend::data_dir() / bundled_name;
  return *value;
}

py::object to_python(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_python(const py::handle& obj) {
  return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

cp::metrics::Correction parse_correction(const std::string& s) {
  if (s == "global") return cp::metrics::Correction::global;
  if (s == "per-template" || s == "per_template") return cp::metrics::Correction::per_template;
  throw cp::InputError("unknown correction '" + s + "' (global, per-template)");
}

std::vector<cp::metrics::PersonEntry> persons_for(const std::optional<std::string>& pairs,
                                                  const std::optional<std::string>& names, double threshold,
                                                  const std::string& split) {
  if (names) {
    if (pairs) throw cp::InputError("give either pairs or names, not both");
    return cp::metrics::name_person_entries(
        cp::lexicon::load_name_lexicon_file(resolve(names, "names_sample.tsv"), threshold),
        cp::lexicon::NameSplit::parse(split));
  }
  return cp::metrics::term_person_entries(cp::lexicon::load_pair_lexicon_file(resolve(pairs, "gendered_pairs.tsv")));
}

py::dict chi_square(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
  const auto r = cp::stats::chi_square_2x2({a, b, c, d});
  py::dict out;
  out["statistic"] = r.statistic;
  out["p_value"] = r.p_value;
  out["dof"] = r.dof;
  out["testable"] = r.testable;
  out["min_expected"] = r.min_expected;
  return out;
}

py::dict linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto r = cp::stats::linear_fit(xs, ys);
  py::dict out;
  out["slope"] = r.slope;
  out["intercept"] = r.intercept;
  out["r"] = r.pearson_r;
  out["n"] = r.n;
  out["degenerate"] = r.degenerate_y;
  return out;
}

py::object disco(const std::string& backend, const std::optional<std::string>& templates,
                 const std::optional<std::string>& pairs, const std::optional<std::string>& names, double threshold,
                 const std::string& split, std::size_t k, double alpha, const std::string& correction,
                 double min_expected) {
  json details;
  {
    py::gil_scoped_release nogil;
    const auto tmpls = cp::templates::load_disco_templates_file(resolve(templates, "disco_templates.txt"));
    const auto persons = persons_for(pairs, names, threshold, split);
    cp::backend::ScoringClient client(cp::backend::open_backend(backend));
    const auto r = cp::metrics::disco(tmpls, persons, client,
                                      {.k = k, .alpha = alpha, .correction = parse_correction(correction),
                                       .min_expected = min_expected});
    details = cp::report::disco_details(r);
    details["model_id"] = client.model_id();
  }
  return to_python(details);
}

std::vector<double> disco_null(const std::string& backend, std::uint64_t seed, std::size_t trials,
                               const std::optional<std::string>& templates, const std::optional<std::string>& pairs,
                               std::size_t k, double alpha) {
  py::gil_scoped_release nogil;
  const auto tmpls = cp::templates::load_disco_templates_file(resolve(templates, "disco_templates.txt"));
  const auto persons = persons_for(pairs, std::nullopt, 0.8, "all");
  cp::backend::ScoringClient client(cp::backend::open_backend(backend));
  return cp::metrics::disco_null_calibration(tmpls, persons, client, seed, trials, {.k = k, .alpha = alpha});
}

py::object coref_gender(const std::string& backend, const std::string& examples,
                        const std::optional<std::string>& professions, const std::string& pronoun_gender,
                        std::optional<double> threshold) {
  json details;
  {
    py::gil_scoped_release nogil;
    const auto bls = cp::templates::load_professions_file(resolve(professions, "professions.csv"));
    const auto ex = cp::metrics::load_coref_examples_file(examples);
    cp::backend::ScoringClient client(cp::backend::open_backend(backend));
    details = cp::report::correlation_details(
        cp::metrics::coref_gender(ex, client, bls, {.pronoun_gender = pronoun_gender, .threshold = threshold}));
  }
  return to_python(details);
}

py::object bios_gap(const std::string& log, const std::string& train_log) {
  const auto fractions = cp::metrics::estimate_profession_stats(cp::metrics::load_bios_log_file(train_log));
  return to_python(cp::report::correlation_details(cp::metrics::bios_gap(cp::metrics::load_bios_log_file(log), fractions)));
}

double accuracy(const std::string& log, const std::string& task, const std::string& positive) {
  return cp::metrics::accuracy_from_log(cp::metrics::load_prediction_log_file(log),
                                        cp::metrics::parse_accuracy_task(task), positive);
}

std::optional<std::string> counterfactual(const std::string& sentence, const std::optional<std::string>& pairs) {
  const auto lex = cp::lexicon::load_pair_lexicon_file(resolve(pairs, "gendered_pairs.tsv"));
  return cp::cda::counterfactual_sentence(sentence, lex);
}

py::tuple rewrite(const std::vector<std::string>& sentences, const std::string& mode,
                  const std::optional<std::string>& pairs, const std::optional<std::string>& names,
                  const std::string& policy, const std::string& split, double threshold, std::uint64_t seed,
                  std::optional<double> mix_ratio, unsigned threads) {
  cp::cda::CdaConfig cfg;
  cfg.mode = cp::cda::parse_mode(mode);
  cfg.seed = seed;
  cfg.mix_ratio = mix_ratio;
  cfg.threads = threads;
  std::optional<cp::lexicon::PairLexicon> lex;
  if (pairs || !names) {
    lex = cp::lexicon::load_pair_lexicon_file(resolve(pairs, "gendered_pairs.tsv"));
    cfg.lexicon = &*lex;
  }
  if (names) {
    cp::cda::NamePolicy p;
    p.kind = cp::cda::parse_policy(policy);
    p.source_split = cp::lexicon::NameSplit::parse(split);
    p.pool = cp::lexicon::load_name_lexicon_file(resolve(names, "names_sample.tsv"), threshold);
    p.seed = seed;
    cfg.names = std::move(p);
  }
  cp::cda::CdaStats stats;
  std::vector<std::string> out;
  {
    py::gil_scoped_release nogil;
    out = cp::cda::rewrite_sentences(sentences, cfg, &stats);
  }
  py::dict s;
  s["sentences_read"] = stats.sentences_read;
  s["sentences_with_matches"] = stats.sentences_with_matches;
  s["output_sentences"] = stats.output_sentences;
  s["counterfactuals_emitted"] = stats.counterfactuals_emitted;
  s["substitutions_per_pair"] = stats.substitutions_per_pair;
  s["name_replacements_by_label"] = stats.name_replacements_by_label;
  return py::make_tuple(out, s);
}

py::dict files_dict(const std::vector<cp::report::RenderedFile>& files) {
  py::dict out;
  for (const auto& f : files) out[py::str(f.name)] = f.content;
  return out;
}

py::dict render_report(const py::list& results) {
  std::vector<cp::report::MetricResult> rs;
  for (std::size_t i = 0; i < results.size(); ++i) {
    rs.push_back(cp::report::metric_result_from_json(from_python(results[i]), "result " + std::to_string(i)));
  }
  return files_dict(cp::report::render_report(rs));
}

py::dict render_report_files(const std::vector<fs::path>& inputs, const std::vector<fs::path>& series) {
  return files_dict(cp::report::render_report_files(inputs, series));
}

}  // namespace

PYBIND11_MODULE(_corrprobe, m) {
  m.doc() = "Gender-correlation probes for masked language models";
  m.attr("__version__") = CORRPROBE_VERSION;

  py::register_exception<cp::InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<cp::BackendError>(m, "BackendError", PyExc_RuntimeError);
  py::register_exception<cp::InvariantError>(m, "InvariantError", PyExc_AssertionError);

  m.def("data_dir", [] { return cp::backend::data_dir(); });

  m.def("chi_square", &chi_square, py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"),
        "Pearson chi-square on [[a, b], [c, d]], no continuity correction.");
  m.def("chi_square_p", &cp::stats::chi_square_p, py::arg("statistic"), py::arg("dof"));
  m.def("pearson_r", [](const std::vector<double>& xs, const std::vector<double>& ys) {
    return cp::stats::pearson_r(xs, ys);
  });
  m.def("linear_fit", &linear_fit, py::arg("xs"), py::arg("ys"));
  m.def("bonferroni_alpha", &cp::stats::bonferroni_alpha, py::arg("alpha"), py::arg("tests"));

  m.def("disco", &disco, py::arg("backend") = "toy", py::arg("templates") = py::none(),
        py::arg("pairs") = py::none(), py::arg("names") = py::none(), py::arg("threshold") = 0.8,
        py::arg("split") = "all", py::arg("k") = 3, py::arg("alpha") = 0.05, py::arg("correction") = "global",
        py::arg("min_expected") = 0.0);
  m.def("disco_null", &disco_null, py::arg("backend") = "toy", py::arg("seed") = 0, py::arg("trials") = 100,
        py::arg("templates") = py::none(), py::arg("pairs") = py::none(), py::arg("k") = 3,
        py::arg("alpha") = 0.05);
  m.def("coref_gender", &coref_gender, py::arg("backend"), py::arg("examples"),
        py::arg("professions") = py::none(), py::arg("pronoun_gender") = "female", py::arg("threshold") = py::none());
  m.def("bios_gap", &bios_gap, py::arg("log"), py::arg("train_log"));
  m.def("accuracy", &accuracy, py::arg("log"), py::arg("task") = "classification", py::arg("positive") = "1");

  m.def("counterfactual", &counterfactual, py::arg("sentence"), py::arg("pairs") = py::none());
  m.def("rewrite", &rewrite, py::arg("sentences"), py::arg("mode") = "two", py::arg("pairs") = py::none(),
        py::arg("names") = py::none(), py::arg("policy") = "same", py::arg("split") = "all",
        py::arg("threshold") = 0.8, py::arg("seed") = 0, py::arg("mix_ratio") = py::none(),
        py::arg("threads") = 1);

  m.def("render_report", &render_report, py::arg("results"));
  m.def("render_report_files", &render_report_files, py::arg("inputs"),
        py::arg("series") = std::vector<fs::path>{});
}
