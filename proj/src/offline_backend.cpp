#include "corrprobe/offline_backend.hpp"

#include <fstream>

#include "corrprobe/error.hpp"
#include "corrprobe/text.hpp"

namespace corrprobe::backend {

OfflineBackend::OfflineBackend(std::string model_id, std::string mask_token)
    : model_id_(std::move(model_id)), mask_token_(std::move(mask_token)) {}

std::vector<std::string> OfflineBackend::capabilities() {
  std::vector<std::string> out;
  for (const char* kind : {"fill", "pair", "coref", "classify"}) {
    if (kinds_.contains(kind)) out.emplace_back(std::string(kind) == "pair" ? "pair_score" : kind);
  }
  return out;
}

bool OfflineBackend::add_record(const json& rec) {
  if (!rec.is_object() || !rec.contains("kind") || !rec.contains("key") || !rec.contains("value")) {
    throw InputError("record needs 'kind', 'key' and 'value'");
  }
  const std::string kind = rec.at("kind").is_string() ? rec.at("kind").get<std::string>() : "";
  const json& key = rec.at("key");
  const json& value = rec.at("value");
  if (!value.is_object()) throw InputError("'value' must be an object");
  std::string canonical_key;
  json stored;
  if (kind == "fill") {
    FillRequest req = fill_request_from_json(key);
    if (!key.contains("mask_token")) req.mask_token = mask_token_;
    canonical_key = request_key(canonicalize(req));
    FillResponse r = fill_response_from_json(value);
    if (model_id_.empty() && !r.model_id.empty()) model_id_ = r.model_id;
    stored = to_json(r);
  } else if (kind == "pair") {
    canonical_key = request_key(canonicalize(pair_request_from_json(key)));
    if (!value.contains("score") || !value.at("score").is_number()) {
      throw InputError("pair value needs numeric 'score'");
    }
    stored = {{"score", value.at("score").get<double>()}};
  } else if (kind == "coref") {
    canonical_key = request_key(canonicalize(coref_request_from_json(key)));
    if (!value.contains("p") || !value.at("p").is_number()) {
      throw InputError("coref value needs numeric 'p'");
    }
    stored = {{"p", value.at("p").get<double>()}};
  } else if (kind == "classify") {
    canonical_key = request_key(canonicalize(classify_request_from_json(key)));
    if (!value.contains("label_scores") || !value.at("label_scores").is_object()) {
      throw InputError("classify value needs object 'label_scores'");
    }
    stored = {{"label_scores", value.at("label_scores").get<LabelScores>()}};
  } else {
    throw InputError("unknown record kind '" + kind + "'");
  }
  auto [it, inserted] = records_.emplace(canonical_key, stored);
  if (!inserted) {
    if (it->second != stored) throw InputError("conflicting duplicate record for " + canonical_key);
    return false;
  }
  ++kinds_[kind];
  return true;
}

std::shared_ptr<OfflineBackend> OfflineBackend::load(std::istream& in, const std::string& source_name,
                                                     std::string mask_token) {
  auto backend = std::make_shared<OfflineBackend>("", std::move(mask_token));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = source_name + ":" + std::to_string(line_no);
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) throw InputError(where + ": invalid JSON");
    try {
      backend->add_record(rec);
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    } catch (const json::exception& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  if (backend->model_id_.empty()) {
    backend->model_id_ = "offline:" + std::filesystem::path(source_name).filename().string();
  }
  return backend;
}

std::shared_ptr<OfflineBackend> OfflineBackend::load_file(const std::filesystem::path& path,
                                                          std::string mask_token) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open predictions file '" + path.string() + "'");
  return load(in, path.string(), std::move(mask_token));
}

const json& OfflineBackend::lookup(const std::string& key, const std::string& what) const {
  auto it = records_.find(key);
  if (it == records_.end()) throw BackendError("prediction missing for " + what + " (" + key + ")");
  return it->second;
}

FillResponse OfflineBackend::fill(const FillRequest& req) {
  FillResponse r = fill_response_from_json(lookup(request_key(req), "fill \"" + req.text + "\""));
  if (r.model_id.empty()) r.model_id = model_id_;
  return r;
}

double OfflineBackend::pair_score(const PairRequest& req) {
  return lookup(request_key(req), "pair \"" + req.s1 + "\" / \"" + req.s2 + "\"").at("score").get<double>();
}

double OfflineBackend::coref(const CorefRequest& req) {
  return lookup(request_key(req), "coref \"" + req.text + "\"").at("p").get<double>();
}

LabelScores OfflineBackend::classify(const ClassifyRequest& req) {
  return lookup(request_key(req), "classify \"" + req.text + "\"").at("label_scores").get<LabelScores>();
}

RecordingBackend::RecordingBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {
  if (!inner_) throw InvariantError("RecordingBackend needs a backend");
}

void RecordingBackend::keep(const std::string& key, json record) {
  std::lock_guard lock(mutex_);
  records_.emplace(key, std::move(record));
}

FillResponse RecordingBackend::fill(const FillRequest& req) {
  FillResponse r = inner_->fill(req);
  json record{{"kind", "fill"}, {"key", to_json(req)}, {"value", to_json(r)}};
  const std::string key = request_key(req);
  std::lock_guard lock(mutex_);
  auto [it, inserted] = records_.emplace(key, record);
  // Keys ignore k, so keep the longest list seen.
  if (!inserted && it->second.at("value").at("fills").size() < r.fills.size()) it->second = std::move(record);
  return r;
}

double RecordingBackend::pair_score(const PairRequest& req) {
  const double v = inner_->pair_score(req);
  keep(request_key(req), {{"kind", "pair"}, {"key", to_json(req)}, {"value", {{"score", v}}}});
  return v;
}

double RecordingBackend::coref(const CorefRequest& req) {
  const double v = inner_->coref(req);
  keep(request_key(req), {{"kind", "coref"}, {"key", to_json(req)}, {"value", {{"p", v}}}});
  return v;
}

LabelScores RecordingBackend::classify(const ClassifyRequest& req) {
  LabelScores v = inner_->classify(req);
  keep(request_key(req), {{"kind", "classify"}, {"key", to_json(req)}, {"value", {{"label_scores", v}}}});
  return v;
}

std::size_t RecordingBackend::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

void RecordingBackend::write(std::ostream& out) const {
  std::lock_guard lock(mutex_);
  for (const auto& [key, rec] : records_) out << rec.dump() << '\n';
}

}  // namespace corrprobe::backend
