#pragma once

// Metric result files and the comparison table / plot rendering built from
// them. Rendering is a pure function of the parsed inputs.

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "corrprobe/io.hpp"
#include "corrprobe/metrics.hpp"
#include "corrprobe/stats.hpp"

namespace corrprobe::report {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Metric identifiers used in result files.
inline constexpr const char* kDisco = "disco";
inline constexpr const char* kDiscoNull = "disco_null_calibration";
inline constexpr const char* kStsGender = "sts_gender";
inline constexpr const char* kCorefGender = "coref_gender";
inline constexpr const char* kBiosGap = "bios_gap";
inline constexpr const char* kAccuracy = "accuracy";

struct MetricResult {
  std::string metric;
  std::string variant;  // disco: "terms"/"names"; accuracy: task label
  std::string column;   // model or checkpoint shown as the table column
  stats::RestartSummary summary;
  std::string display;  // summary at the metric's table precision
  json details = json::object();
  io::RunManifest manifest;
};

/// Decimals shown in tables: 1 for DisCo, 2 otherwise.
int decimals_for(const std::string& metric);
bool is_correlation_metric(const std::string& metric);
/// "Coref (r)", "STS-B (r)", "Bios (slope)", "DisCo (Terms)", ...
std::string row_label(const std::string& metric, const std::string& variant);

/// Fills summary and display from one value per restart.
MetricResult make_result(std::string metric, std::string variant, std::string column,
                         const std::vector<double>& restart_values, json details, io::RunManifest manifest);

json disco_details(const metrics::DiscoResult& r);
json correlation_details(const metrics::CorrelationReport& r);

json to_json(const MetricResult& r);
/// Schema-checked; errors name `source`.
MetricResult metric_result_from_json(const json& j, const std::string& source);
MetricResult load_metric_result_file(const std::filesystem::path& path);
/// Pretty-printed JSON with a trailing newline.
std::string render_metric_json(const MetricResult& r);

struct Cell {
  std::string display;
  double rounded_mean = 0.0;
  bool bold = false;
};

struct TableRow {
  std::string label;
  bool correlation = true;  // want lower; otherwise want higher
  std::vector<std::optional<Cell>> cells;
};

struct ComparisonTable {
  std::vector<std::string> columns;
  std::vector<TableRow> rows;
};

/// Rows in fixed order (Coref, STS-B, Bios, DisCo Terms, DisCo Names, then
/// accuracy rows by first appearance); columns by first appearance. The
/// minimum of each correlation row is bolded when there are two or more
/// columns; ties bold every minimum.
ComparisonTable build_table(const std::vector<MetricResult>& results);

std::string render_markdown(const ComparisonTable& t);
std::string render_csv(const ComparisonTable& t);

struct RenderedFile {
  std::string name;
  std::string content;
};

/// table.md, table.csv, one scatter SVG per correlation run, and one step
/// plot per series CSV.
std::vector<RenderedFile> render_report(const std::vector<MetricResult>& results,
                                        const std::vector<std::pair<std::string, std::string>>& series_csvs = {});

/// Load and render, rejecting mixed schema or tool versions.
std::vector<RenderedFile> render_report_files(const std::vector<std::filesystem::path>& inputs,
                                              const std::vector<std::filesystem::path>& series = {});

}  // namespace corrprobe::report
