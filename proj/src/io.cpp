#include "corrprobe/io.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "corrprobe/error.hpp"
#include "corrprobe/rng.hpp"

namespace corrprobe::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw InputError("error reading '" + path.string() + "'");
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
  if (!out) throw InputError("cannot write '" + path.string() + "'");
}

std::string content_hash(std::string_view bytes) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(rng::fnv1a(bytes)));
  return buf;
}

std::string file_hash(const std::filesystem::path& path) { return content_hash(read_file(path)); }

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::string utc_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    long long v = 0;
    const std::string_view s(epoch);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size()) t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::add_input(const std::filesystem::path& path) { input_hashes[path.string()] = file_hash(path); }

json to_json(const RunManifest& m) {
  return json{{"tool_version", m.tool_version}, {"command", m.command},       {"seeds", m.seeds},
              {"model_ids", m.model_ids},       {"input_hashes", m.input_hashes}, {"started_at", m.started_at},
              {"finished_at", m.finished_at}};
}

RunManifest manifest_from_json(const json& j) {
  if (!j.is_object()) throw InputError("manifest must be a JSON object");
  RunManifest m;
  m.tool_version = j.value("tool_version", "");
  m.command = j.value("command", std::vector<std::string>{});
  m.seeds = j.value("seeds", std::map<std::string, std::uint64_t>{});
  m.model_ids = j.value("model_ids", std::vector<std::string>{});
  m.input_hashes = j.value("input_hashes", std::map<std::string, std::string>{});
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
  return m;
}

}  // namespace corrprobe::io
