#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace corrprobe::io {

using json = nlohmann::json;

/// Whole file as bytes; InputError naming the path on failure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

/// "fnv1a64:<16 hex digits>" over the raw bytes.
std::string content_hash(std::string_view bytes);
std::string file_hash(const std::filesystem::path& path);

/// Shortest round-trip decimal rendering, locale independent.
std::string format_double(double v);

/// UTC time as ISO 8601. SOURCE_DATE_EPOCH, when set, replaces the clock.
std::string utc_timestamp();

struct RunManifest {
  std::string tool_version;
  std::vector<std::string> command;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::string> model_ids;
  std::map<std::string, std::string> input_hashes;  // path -> content hash
  std::string started_at;
  std::string finished_at;

  void add_input(const std::filesystem::path& path);
};

json to_json(const RunManifest& m);
RunManifest manifest_from_json(const json& j);

}  // namespace corrprobe::io
