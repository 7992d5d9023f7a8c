#include "corrprobe/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "corrprobe/error.hpp"
#include "corrprobe/svg.hpp"

namespace corrprobe::report {

namespace {

const std::set<std::string>& known_metrics() {
  static const std::set<std::string> m = {kDisco, kDiscoNull, kStsGender, kCorefGender, kBiosGap, kAccuracy};
  return m;
}

// JSON has no NaN; non-finite values are stored as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string slug(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == '.' || c == '_') {
      out.push_back(static_cast<char>(c));
    } else if (!out.empty() && out.back() != '-') {
      out.push_back('-');
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out.empty() ? "x" : out;
}

}  // namespace

int decimals_for(const std::string& metric) { return metric == kDisco || metric == kDiscoNull ? 1 : 2; }

bool is_correlation_metric(const std::string& metric) { return metric != kAccuracy; }

std::string row_label(const std::string& metric, const std::string& variant) {
  if (metric == kCorefGender) return "Coref (r)";
  if (metric == kStsGender) return "STS-B (r)";
  if (metric == kBiosGap) return "Bios (slope)";
  if (metric == kDisco) {
    if (variant == "terms") return "DisCo (Terms)";
    if (variant == "names") return "DisCo (Names)";
    return variant.empty() ? "DisCo" : "DisCo (" + variant + ")";
  }
  if (metric == kDiscoNull) return "DisCo null (" + variant + ")";
  return variant.empty() ? "Accuracy" : variant;
}

MetricResult make_result(std::string metric, std::string variant, std::string column,
                         const std::vector<double>& restart_values, json details, io::RunManifest manifest) {
  MetricResult r;
  r.metric = std::move(metric);
  r.variant = std::move(variant);
  r.column = std::move(column);
  r.summary = stats::aggregate_restarts(restart_values);
  r.display = r.summary.format(decimals_for(r.metric));
  r.details = details.is_null() ? json::object() : std::move(details);
  r.manifest = std::move(manifest);
  return r;
}

json disco_details(const metrics::DiscoResult& r) {
  json templates = json::array();
  for (const auto& t : r.templates) {
    json tests = json::array();
    json significant = json::array();
    for (const auto& f : t.tests) {
      json groups = json::array();
      for (const auto& g : f.groups) groups.push_back({g.hits, g.trials});
      tests.push_back({{"fill", f.fill},
                       {"groups", groups},
                       {"statistic", number(f.statistic)},
                       {"p_value", number(f.p_value)},
                       {"testable", f.testable},
                       {"excluded", f.excluded},
                       {"low_expected", f.low_expected},
                       {"significant", f.significant}});
      if (f.significant) significant.push_back(f.fill);
    }
    templates.push_back({{"id", t.template_id},
                         {"tested", t.tested},
                         {"significant", t.significant},
                         {"corrected_alpha", t.corrected_alpha},
                         {"significant_fills", significant},
                         {"tests", tests}});
  }
  json labels = json::array();
  for (const auto& l : r.labels) labels.push_back(l.str());
  return {{"value", r.value},
          {"k", r.k},
          {"alpha", r.alpha},
          {"corrected_alpha", r.corrected_alpha},
          {"correction", r.correction == metrics::Correction::global ? "global" : "per_template"},
          {"total_tests", r.total_tests},
          {"labels", labels},
          {"person_count", r.person_count},
          {"templates", templates}};
}

json correlation_details(const metrics::CorrelationReport& r) {
  json points = json::array();
  for (const auto& p : r.points) points.push_back({{"item", p.item}, {"x", p.x}, {"y", p.y}, {"n", p.n}});
  return {{"metric", r.metric},
          {"primary", r.primary},
          {"value", number(r.value())},
          {"x_label", r.x_label},
          {"y_label", r.y_label},
          {"fit",
           {{"slope", number(r.fit.slope)},
            {"intercept", number(r.fit.intercept)},
            {"r", number(r.fit.pearson_r)},
            {"n", r.fit.n}}},
          {"points", points},
          {"degenerate", r.degenerate},
          {"degenerate_reason", r.degenerate_reason},
          {"warnings", r.warnings},
          {"skipped_items", r.skipped_items}};
}

json to_json(const MetricResult& r) {
  json values = json::array();
  for (double v : r.summary.raw_values) values.push_back(number(v));
  return {{"schema_version", kSchemaVersion},
          {"metric", r.metric},
          {"variant", r.variant},
          {"column", r.column},
          {"value", number(r.summary.mean)},
          {"std", number(r.summary.sample_std)},
          {"n_restarts", r.summary.n_restarts},
          {"restart_values", values},
          {"display", r.display},
          {"details", r.details},
          {"manifest", io::to_json(r.manifest)}};
}

MetricResult metric_result_from_json(const json& j, const std::string& source) {
  auto fail = [&](const std::string& what) -> MetricResult { throw InputError(source + ": " + what); };
  if (!j.is_object()) return fail("metric result must be a JSON object");
  if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer()) {
    return fail("missing integer schema_version");
  }
  if (j.at("schema_version").get<int>() != kSchemaVersion) {
    return fail("schema_version " + j.at("schema_version").dump() + " is not supported (expected " +
                std::to_string(kSchemaVersion) + ")");
  }
  for (const char* key : {"metric", "variant", "column", "display"}) {
    if (!j.contains(key) || !j.at(key).is_string()) return fail(std::string("missing string field '") + key + "'");
  }
  if (!j.contains("restart_values") || !j.at("restart_values").is_array() || j.at("restart_values").empty()) {
    return fail("missing restart_values");
  }
  if (!j.contains("manifest") || !j.at("manifest").is_object()) return fail("missing manifest");
  MetricResult r;
  r.metric = j.at("metric").get<std::string>();
  if (!known_metrics().contains(r.metric)) return fail("unknown metric '" + r.metric + "'");
  r.variant = j.at("variant").get<std::string>();
  r.column = j.at("column").get<std::string>();
  std::vector<double> values;
  for (const auto& v : j.at("restart_values")) {
    values.push_back(v.is_number() ? v.get<double>() : std::nan(""));
  }
  r.summary = stats::aggregate_restarts(values);
  r.display = j.at("display").get<std::string>();
  if (r.display != r.summary.format(decimals_for(r.metric))) {
    return fail("display '" + r.display + "' does not match restart_values");
  }
  r.details = j.value("details", json::object());
  if (!r.details.is_object()) return fail("'details' must be an object");
  try {
    r.manifest = io::manifest_from_json(j.at("manifest"));
  } catch (const std::exception& e) {
    return fail(std::string("malformed manifest: ") + e.what());
  }
  return r;
}

MetricResult load_metric_result_file(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  json j = json::parse(bytes, nullptr, false);
  if (j.is_discarded()) throw InputError(path.string() + ": invalid JSON");
  return metric_result_from_json(j, path.string());
}

std::string render_metric_json(const MetricResult& r) { return to_json(r).dump(2) + "\n"; }

// ------------------------------------------------------------------ table --

namespace {

int row_rank(const std::string& metric, const std::string& variant) {
  if (metric == kCorefGender) return 0;
  if (metric == kStsGender) return 1;
  if (metric == kBiosGap) return 2;
  if (metric == kDisco) return variant == "terms" ? 3 : variant == "names" ? 4 : 5;
  return 6;
}

double rounded(double v, int decimals) { return std::stod(stats::format_fixed(v, decimals)); }

}  // namespace

ComparisonTable build_table(const std::vector<MetricResult>& results) {
  ComparisonTable t;
  struct Key {
    int rank;
    std::size_t first_seen;
    std::string label;
    std::string metric;
  };
  std::vector<Key> keys;
  std::map<std::string, std::size_t> key_index;
  std::map<std::pair<std::string, std::string>, const MetricResult*> cells;
  for (const auto& r : results) {
    if (r.metric == kDiscoNull) continue;
    const std::string label = row_label(r.metric, r.variant);
    if (!key_index.contains(label)) {
      key_index[label] = keys.size();
      keys.push_back({row_rank(r.metric, r.variant), keys.size(), label, r.metric});
    }
    if (std::find(t.columns.begin(), t.columns.end(), r.column) == t.columns.end()) t.columns.push_back(r.column);
    if (!cells.emplace(std::make_pair(label, r.column), &r).second) {
      throw InputError("two results for row '" + label + "' and column '" + r.column + "'");
    }
  }
  std::stable_sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    return a.rank != b.rank ? a.rank < b.rank : a.first_seen < b.first_seen;
  });
  for (const auto& k : keys) {
    TableRow row;
    row.label = k.label;
    row.correlation = is_correlation_metric(k.metric);
    for (const auto& col : t.columns) {
      auto it = cells.find({k.label, col});
      if (it == cells.end()) {
        row.cells.emplace_back();
      } else {
        const MetricResult& r = *it->second;
        row.cells.push_back(Cell{r.display, rounded(r.summary.mean, decimals_for(r.metric)), false});
      }
    }
    if (row.correlation && t.columns.size() > 1) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : row.cells) {
        if (c && std::isfinite(c->rounded_mean)) best = std::min(best, c->rounded_mean);
      }
      for (auto& c : row.cells) {
        if (c && c->rounded_mean == best) c->bold = true;
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

std::string direction(const TableRow& r) { return r.correlation ? "want ↓" : "want ↑"; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

std::string md_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else out.push_back(c);
  }
  return out;
}

}  // namespace

std::string render_markdown(const ComparisonTable& t) {
  std::ostringstream o;
  o << "| Metric |";
  for (const auto& c : t.columns) o << ' ' << md_cell(c) << " |";
  o << "\n| :--- |";
  for (std::size_t i = 0; i < t.columns.size(); ++i) o << " ---: |";
  o << '\n';
  for (const auto& r : t.rows) {
    o << "| " << md_cell(r.label) << " (" << direction(r) << ") |";
    for (const auto& c : r.cells) {
      if (!c) {
        o << " – |";
      } else if (c->bold) {
        o << " **" << c->display << "** |";
      } else {
        o << ' ' << c->display << " |";
      }
    }
    o << '\n';
  }
  return o.str();
}

std::string render_csv(const ComparisonTable& t) {
  std::ostringstream o;
  o << "metric,direction";
  for (const auto& c : t.columns) o << ',' << csv_field(c);
  o << '\n';
  for (const auto& r : t.rows) {
    o << csv_field(r.label) << ',' << direction(r);
    for (const auto& c : r.cells) o << ',' << (c ? csv_field(c->display) : "");
    o << '\n';
  }
  return o.str();
}

std::vector<RenderedFile> render_report(const std::vector<MetricResult>& results,
                                        const std::vector<std::pair<std::string, std::string>>& series_csvs) {
  const ComparisonTable table = build_table(results);
  std::vector<RenderedFile> out;
  out.push_back({"table.md", render_markdown(table)});
  out.push_back({"table.csv", render_csv(table)});

  for (const auto& r : results) {
    if (r.metric != kStsGender && r.metric != kCorefGender && r.metric != kBiosGap) continue;
    const json runs = r.details.is_object() ? r.details.value("runs", json::array()) : json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const json& run = runs[i];
      svg::ScatterPlot plot;
      plot.title = row_label(r.metric, r.variant) + " - " + r.column;
      plot.x_label = run.value("x_label", "");
      plot.y_label = run.value("y_label", "");
      for (const auto& p : run.value("points", json::array())) {
        plot.points.push_back({p.value("item", ""), p.value("x", 0.0), p.value("y", 0.0)});
      }
      const json fit = run.value("fit", json::object());
      if (fit.contains("slope") && fit.at("slope").is_number() && fit.contains("intercept") &&
          fit.at("intercept").is_number()) {
        plot.has_fit = true;
        plot.slope = fit.at("slope").get<double>();
        plot.intercept = fit.at("intercept").get<double>();
      }
      std::string name = std::string(r.metric) + "-" + slug(r.column);
      if (runs.size() > 1) name += "-run" + std::to_string(i + 1);
      out.push_back({name + ".svg", svg::render_scatter(plot)});
    }
  }

  for (const auto& [name, content] : series_csvs) {
    std::istringstream in(content);
    const std::string stem = std::filesystem::path(name).stem().string();
    out.push_back({"series-" + slug(stem) + ".svg", svg::render_series(stem, svg::parse_series_csv(in, name))});
  }
  return out;
}

std::vector<RenderedFile> render_report_files(const std::vector<std::filesystem::path>& inputs,
                                              const std::vector<std::filesystem::path>& series) {
  if (inputs.empty()) throw InputError("report: no metric result files given");
  std::vector<MetricResult> results;
  for (const auto& p : inputs) {
    results.push_back(load_metric_result_file(p));
    if (results.back().manifest.tool_version != results.front().manifest.tool_version) {
      throw InputError("mixed metric versions: " + p.string() + " was written by version '" +
                       results.back().manifest.tool_version + "', " + inputs.front().string() + " by '" +
                       results.front().manifest.tool_version + "'");
    }
  }
  std::vector<std::pair<std::string, std::string>> csvs;
  for (const auto& s : series) csvs.emplace_back(s.string(), io::read_file(s));
  return render_report(results, csvs);
}

}  // namespace corrprobe::report
