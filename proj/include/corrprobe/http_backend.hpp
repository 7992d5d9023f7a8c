#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <string>
#include <thread>

#include "corrprobe/backend.hpp"

namespace httplib {
class Server;
}

namespace corrprobe::backend {

struct HttpOptions {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{100};
  std::chrono::seconds timeout{30};
  std::string mask_token{kDefaultMask};
};

/// Client for the JSON-over-HTTP scoring protocol (/v1/fill, /v1/pair_score,
/// /v1/coref, /v1/classify, /v1/health). Transport failures and 5xx answers
/// are retried with exponential backoff; 4xx answers are not.
class HttpBackend : public Backend {
 public:
  /// `endpoint` is "http://host:port" with an optional path prefix.
  explicit HttpBackend(std::string endpoint, HttpOptions options = {});

  const std::string& endpoint() const { return endpoint_; }

  std::string model_id() override;
  std::vector<std::string> capabilities() override;
  std::string mask_token() const override { return options_.mask_token; }

  FillResponse fill(const FillRequest& req) override;
  double pair_score(const PairRequest& req) override;
  double coref(const CorefRequest& req) override;
  LabelScores classify(const ClassifyRequest& req) override;

 private:
  // GET when body is null, POST otherwise.
  json send(const std::string& path, const json* body);
  json post(const std::string& path, const json& body);
  json health();

  std::string endpoint_;
  std::string base_;    // scheme://host:port
  std::string prefix_;  // path prefix without trailing slash
  HttpOptions options_;
  std::atomic<std::uint64_t> next_request_id_{1};
};

/// Serves any Backend over the wire protocol. Requests pass through a
/// ScoringClient, so malformed requests (two masks, bad spans) answer 400
/// with {"error": ...} and backend failures answer 500.
class BackendServer {
 public:
  explicit BackendServer(std::shared_ptr<Backend> backend);
  ~BackendServer();

  BackendServer(const BackendServer&) = delete;
  BackendServer& operator=(const BackendServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  /// listen() on a background thread.
  void start();
  void stop();

 private:
  std::unique_ptr<ScoringClient> client_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace corrprobe::backend
