#include "corrprobe/http_backend.hpp"

#include <httplib.h>

#include "corrprobe/error.hpp"

namespace corrprobe::backend {

HttpBackend::HttpBackend(std::string endpoint, HttpOptions options)
    : endpoint_(std::move(endpoint)), options_(std::move(options)) {
  const auto scheme_end = endpoint_.find("://");
  if (scheme_end == std::string::npos || endpoint_.compare(0, scheme_end, "http") != 0) {
    throw InputError("backend endpoint must start with http:// (got '" + endpoint_ + "')");
  }
  const auto path_start = endpoint_.find('/', scheme_end + 3);
  base_ = endpoint_.substr(0, path_start);
  if (path_start != std::string::npos) {
    prefix_ = endpoint_.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }
  if (base_.size() <= scheme_end + 3) throw InputError("backend endpoint has no host: '" + endpoint_ + "'");
  if (options_.attempts < 1) options_.attempts = 1;
}

namespace {

std::string describe(httplib::Error e) { return httplib::to_string(e); }

}  // namespace

json HttpBackend::send(const std::string& path, const json* body) {
  const std::string request_id = std::to_string(next_request_id_++);
  const std::string payload = body ? body->dump() : std::string();
  std::string last_error;
  auto backoff = options_.initial_backoff;
  for (int attempt = 1; attempt <= options_.attempts; ++attempt) {
    httplib::Client cli(base_);
    cli.set_connection_timeout(options_.timeout);
    cli.set_read_timeout(options_.timeout);
    cli.set_write_timeout(options_.timeout);
    httplib::Headers headers{{"X-Request-Id", request_id}};
    auto res = body ? cli.Post(prefix_ + path, headers, payload, "application/json")
                    : cli.Get(prefix_ + path, headers);
    if (!res) {
      last_error = describe(res.error());
    } else if (res->status >= 400 && res->status < 500) {
      throw BackendError("backend " + endpoint_ + " rejected " + path +
                         " (HTTP " + std::to_string(res->status) + "): " + res->body);
    } else if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
    } else {
      json j = json::parse(res->body, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        throw BackendError("backend " + endpoint_ + " returned malformed JSON for " + path);
      }
      return j;
    }
    if (attempt < options_.attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw BackendError("backend " + endpoint_ + " unreachable after " + std::to_string(options_.attempts) +
                     " attempts (request " + request_id + "): " + last_error);
}

json HttpBackend::post(const std::string& path, const json& body) { return send(path, &body); }

json HttpBackend::health() { return send("/v1/health", nullptr); }

std::string HttpBackend::model_id() {
  const json h = health();
  if (!h.contains("model_id") || !h.at("model_id").is_string()) {
    throw BackendError("backend " + endpoint_ + " health response lacks model_id");
  }
  return h.at("model_id").get<std::string>();
}

std::vector<std::string> HttpBackend::capabilities() {
  const json h = health();
  return h.value("capabilities", std::vector<std::string>{});
}

FillResponse HttpBackend::fill(const FillRequest& req) {
  const json j = post("/v1/fill", to_json(req));
  try {
    return fill_response_from_json(j);
  } catch (const InputError& e) {
    throw BackendError("backend " + endpoint_ + " /v1/fill: " + e.what());
  }
}

double HttpBackend::pair_score(const PairRequest& req) {
  const json j = post("/v1/pair_score", to_json(req));
  if (!j.contains("score") || !j.at("score").is_number()) {
    throw BackendError("backend " + endpoint_ + " /v1/pair_score: missing score");
  }
  return j.at("score").get<double>();
}

double HttpBackend::coref(const CorefRequest& req) {
  const json j = post("/v1/coref", to_json(req));
  if (!j.contains("p") || !j.at("p").is_number()) {
    throw BackendError("backend " + endpoint_ + " /v1/coref: missing p");
  }
  return j.at("p").get<double>();
}

LabelScores HttpBackend::classify(const ClassifyRequest& req) {
  const json j = post("/v1/classify", to_json(req));
  if (!j.contains("label_scores") || !j.at("label_scores").is_object()) {
    throw BackendError("backend " + endpoint_ + " /v1/classify: missing label_scores");
  }
  return j.at("label_scores").get<LabelScores>();
}

}  // namespace corrprobe::backend
