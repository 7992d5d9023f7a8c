#include "corrprobe/backend.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <set>
#include <thread>

#include "corrprobe/error.hpp"
#include "corrprobe/text.hpp"

namespace corrprobe::backend {

FillRequest canonicalize(FillRequest req) {
  req.text = text::canonical(req.text);
  req.mask_token = text::nfc(req.mask_token);
  return req;
}

PairRequest canonicalize(PairRequest req) {
  req.s1 = text::canonical(req.s1);
  req.s2 = text::canonical(req.s2);
  return req;
}

CorefRequest canonicalize(CorefRequest req) {
  // Offsets index the NFC text, so white space is left untouched here.
  req.text = text::nfc(req.text);
  return req;
}

ClassifyRequest canonicalize(ClassifyRequest req) {
  req.text = text::canonical(req.text);
  return req;
}

std::string request_key(const FillRequest& r) {
  return "fill:" + json{{"mask_token", r.mask_token}, {"text", r.text}}.dump();
}

std::string request_key(const PairRequest& r) {
  return "pair:" + json{{"s1", r.s1}, {"s2", r.s2}}.dump();
}

std::string request_key(const CorefRequest& r) {
  return "coref:" + json{{"antecedent", {r.antecedent.start, r.antecedent.end}},
                         {"pronoun", {r.pronoun.start, r.pronoun.end}},
                         {"text", r.text}}
                        .dump();
}

std::string request_key(const ClassifyRequest& r) {
  return "classify:" + json{{"text", r.text}}.dump();
}

bool has_single_mask(std::string_view text, std::string_view mask) {
  if (mask.empty()) return false;
  const auto first = text.find(mask);
  if (first == std::string_view::npos) return false;
  return text.find(mask, first + mask.size()) == std::string_view::npos;
}

bool is_subword_piece(std::string_view token) {
  return token.starts_with("##") || (token.size() > 2 && token.ends_with("@@"));
}

void validate_fills(const FillResponse& r, std::size_t k, std::string_view context) {
  const std::string where(context);
  if (r.fills.size() < k) {
    throw BackendError("fill response for " + where + " has " + std::to_string(r.fills.size()) +
                       " fills, " + std::to_string(k) + " requested");
  }
  std::set<std::string, std::less<>> seen;
  for (std::size_t i = 0; i < r.fills.size(); ++i) {
    const Fill& f = r.fills[i];
    if (f.token.empty() || text::trim(f.token).empty()) {
      throw BackendError("empty fill token in response for " + where);
    }
    if (is_subword_piece(f.token)) {
      throw BackendError("protocol violation: sub-word fill '" + f.token + "' for " + where);
    }
    if (!std::isfinite(f.score)) throw BackendError("non-finite fill score for " + where);
    if (!seen.insert(f.token).second) {
      throw BackendError("duplicate fill '" + f.token + "' for " + where);
    }
    if (i > 0 && f.score > r.fills[i - 1].score) {
      throw BackendError("fill scores increase at position " + std::to_string(i) + " for " + where);
    }
  }
}

void order_fills(std::vector<Fill>& fills) {
  std::stable_sort(fills.begin(), fills.end(), [](const Fill& a, const Fill& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.token < b.token;
  });
}

json to_json(const FillRequest& r) {
  return json{{"text", r.text}, {"mask_token", r.mask_token}, {"k", r.k}};
}

json to_json(const PairRequest& r) { return json{{"s1", r.s1}, {"s2", r.s2}}; }

json to_json(const CorefRequest& r) {
  return json{{"text", r.text},
              {"pronoun", {r.pronoun.start, r.pronoun.end}},
              {"antecedent", {r.antecedent.start, r.antecedent.end}}};
}

json to_json(const ClassifyRequest& r) { return json{{"text", r.text}}; }

json to_json(const FillResponse& r) {
  json fills = json::array();
  for (const auto& f : r.fills) fills.push_back({{"token", f.token}, {"score", f.score}});
  return json{{"fills", fills}, {"model_id", r.model_id}};
}

namespace {

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw InputError(std::string("missing field '") + name + "'");
  }
  return j.at(name);
}

std::string string_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_string()) throw InputError(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

CharRange range_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_unsigned() || !v[1].is_number_unsigned()) {
    throw InputError(std::string("field '") + name + "' must be [start, end]");
  }
  return {v[0].get<std::size_t>(), v[1].get<std::size_t>()};
}

}  // namespace

FillRequest fill_request_from_json(const json& j) {
  FillRequest r;
  r.text = string_field(j, "text");
  if (j.contains("mask_token")) r.mask_token = string_field(j, "mask_token");
  if (j.contains("k")) {
    if (!j.at("k").is_number_integer() || j.at("k").get<long long>() < 0) {
      throw InputError("field 'k' must be a non-negative integer");
    }
    r.k = j.at("k").get<std::size_t>();
  }
  return r;
}

PairRequest pair_request_from_json(const json& j) {
  return {string_field(j, "s1"), string_field(j, "s2")};
}

CorefRequest coref_request_from_json(const json& j) {
  return {string_field(j, "text"), range_field(j, "pronoun"), range_field(j, "antecedent")};
}

ClassifyRequest classify_request_from_json(const json& j) { return {string_field(j, "text")}; }

FillResponse fill_response_from_json(const json& j) {
  FillResponse r;
  const json& fills = field(j, "fills");
  if (!fills.is_array()) throw InputError("field 'fills' must be an array");
  for (const auto& f : fills) {
    if (!f.is_object() || !f.contains("token") || !f.contains("score") || !f.at("token").is_string() ||
        !f.at("score").is_number()) {
      throw InputError("each fill needs a string 'token' and numeric 'score'");
    }
    r.fills.push_back({f.at("token").get<std::string>(), f.at("score").get<double>()});
  }
  if (j.contains("model_id") && j.at("model_id").is_string()) {
    r.model_id = j.at("model_id").get<std::string>();
  }
  return r;
}

// ---------------------------------------------------------------------------

namespace {

// Runs fn(i) for i in [0, n) with at most `limit` concurrent workers.
// Exceptions are collected and the one with the lowest index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t limit, Fn&& fn) {
  for (std::size_t chunk = 0; chunk < n; chunk += kMaxBatch) {
    const std::size_t end = std::min(n, chunk + kMaxBatch);
    const std::size_t workers = std::max<std::size_t>(1, std::min(limit, end - chunk));
    std::vector<std::exception_ptr> errors(end - chunk);
    std::atomic<std::size_t> next{chunk};
    auto work = [&] {
      for (std::size_t i = next++; i < end; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i - chunk] = std::current_exception();
        }
      }
    };
    if (workers == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
}

}  // namespace

ScoringClient::ScoringClient(std::shared_ptr<Backend> backend, ClientOptions options)
    : backend_(std::move(backend)), options_(std::move(options)) {
  if (!backend_) throw InvariantError("ScoringClient needs a backend");
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
  if (!options_.disk_cache.empty()) load_disk_cache();
}

ScoringClient::~ScoringClient() = default;

std::string ScoringClient::model_id() {
  std::lock_guard lock(mutex_);
  if (model_id_.empty()) model_id_ = backend_->model_id();
  return model_id_;
}

void ScoringClient::load_disk_cache() {
  const std::string id = model_id();
  std::ifstream in(options_.disk_cache);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) continue;
    if (rec.value("model_id", "") != id) continue;
    cache_[rec.at("key").get<std::string>()] = rec.at("value");
  }
}

void ScoringClient::persist(const std::string& key, const json& value) {
  if (options_.disk_cache.empty()) return;
  std::ofstream out(options_.disk_cache, std::ios::app);
  if (!out) throw InputError("cannot write response cache '" + options_.disk_cache.string() + "'");
  out << json{{"model_id", model_id_}, {"key", key}, {"value", value}}.dump() << '\n';
}

template <typename T, typename F>
T ScoringClient::cached(const std::string& key, F&& compute) {
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second.template get<T>();
  }
  T value = compute();
  std::lock_guard lock(mutex_);
  ++backend_calls_;
  // First answer wins so concurrent duplicates stay consistent.
  auto [it, inserted] = cache_.emplace(key, json(value));
  if (inserted) persist(key, it->second);
  return it->second.template get<T>();
}

FillResponse ScoringClient::query_fills(std::string_view sentence_with_mask, std::size_t k) {
  FillRequest req;
  req.text = std::string(sentence_with_mask);
  req.mask_token = mask_token();
  req.k = k;
  return query_fills(req);
}

FillResponse ScoringClient::query_fills(const FillRequest& raw) {
  if (raw.k == 0) throw InputError("query_fills: k must be positive");
  FillRequest req = canonicalize(raw);
  if (!has_single_mask(req.text, req.mask_token)) {
    throw InputError("query_fills: expected exactly one '" + req.mask_token + "' in \"" + req.text +
                     "\"");
  }
  const std::string key = request_key(req);
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end() && it->second.at("k").get<std::size_t>() >= req.k) {
      FillResponse r = fill_response_from_json(it->second.at("response"));
      r.fills.resize(req.k);
      return r;
    }
  }
  FillResponse r = backend_->fill(req);
  validate_fills(r, req.k, "\"" + req.text + "\"");
  order_fills(r.fills);
  if (r.model_id.empty()) r.model_id = model_id();
  {
    std::lock_guard lock(mutex_);
    ++backend_calls_;
    auto it = cache_.find(key);
    if (it == cache_.end() || it->second.at("k").get<std::size_t>() < r.fills.size()) {
      json entry{{"k", r.fills.size()}, {"response", to_json(r)}};
      cache_[key] = entry;
      persist(key, entry);
    } else {
      r = fill_response_from_json(it->second.at("response"));
    }
  }
  r.fills.resize(req.k);
  return r;
}

double ScoringClient::query_pair_score(std::string_view s1, std::string_view s2) {
  PairRequest req = canonicalize(PairRequest{std::string(s1), std::string(s2)});
  if (req.s1.empty() || req.s2.empty()) throw InputError("query_pair_score: empty sentence");
  return cached<double>(request_key(req), [&] {
    const double v = backend_->pair_score(req);
    if (!std::isfinite(v)) throw BackendError("non-finite pair score for \"" + req.s1 + "\"");
    return v;
  });
}

double ScoringClient::query_coref(std::string_view context, CharRange pronoun,
                                  CharRange antecedent) {
  CorefRequest req = canonicalize(CorefRequest{std::string(context), pronoun, antecedent});
  const std::size_t len = text::codepoint_count(req.text);
  for (const CharRange& r : {req.pronoun, req.antecedent}) {
    if (r.start >= r.end || r.end > len) {
      throw InputError("query_coref: span [" + std::to_string(r.start) + ", " +
                       std::to_string(r.end) + ") invalid for text of length " +
                       std::to_string(len));
    }
  }
  if (req.pronoun.start < req.antecedent.end && req.antecedent.start < req.pronoun.end) {
    throw InputError("query_coref: pronoun and antecedent spans overlap");
  }
  return cached<double>(request_key(req), [&] {
    const double p = backend_->coref(req);
    if (!(p >= 0.0 && p <= 1.0)) {
      throw BackendError("coref probability " + std::to_string(p) + " outside [0, 1]");
    }
    return p;
  });
}

LabelScores ScoringClient::query_classify(std::string_view text_in) {
  ClassifyRequest req = canonicalize(ClassifyRequest{std::string(text_in)});
  if (req.text.empty()) throw InputError("query_classify: empty text");
  return cached<LabelScores>(request_key(req), [&] {
    LabelScores s = backend_->classify(req);
    if (s.empty()) throw BackendError("classify returned no labels");
    return s;
  });
}

std::vector<FillResponse> ScoringClient::query_fills_batch(const std::vector<FillRequest>& reqs) {
  std::vector<FillResponse> out(reqs.size());
  parallel_for(reqs.size(), options_.max_in_flight, [&](std::size_t i) { out[i] = query_fills(reqs[i]); });
  return out;
}

std::vector<double> ScoringClient::query_pair_scores_batch(const std::vector<PairRequest>& reqs) {
  std::vector<double> out(reqs.size());
  parallel_for(reqs.size(), options_.max_in_flight,
               [&](std::size_t i) { out[i] = query_pair_score(reqs[i].s1, reqs[i].s2); });
  return out;
}

std::vector<double> ScoringClient::query_coref_batch(const std::vector<CorefRequest>& reqs) {
  std::vector<double> out(reqs.size());
  parallel_for(reqs.size(), options_.max_in_flight, [&](std::size_t i) {
    out[i] = query_coref(reqs[i].text, reqs[i].pronoun, reqs[i].antecedent);
  });
  return out;
}

std::size_t ScoringClient::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

std::size_t ScoringClient::backend_calls() const {
  std::lock_guard lock(mutex_);
  return backend_calls_;
}

}  // namespace corrprobe::backend
