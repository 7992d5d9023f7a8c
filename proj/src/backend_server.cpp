#include <httplib.h>

#include "corrprobe/error.hpp"
#include "corrprobe/http_backend.hpp"

namespace corrprobe::backend {

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

// Runs a handler body, mapping request errors to 400 and backend errors to 500.
template <typename F>
void guarded(const httplib::Request& req, httplib::Response& res, F&& handler) {
  try {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      reply(res, 400, {{"error", "request body must be a JSON object"}});
      return;
    }
    reply(res, 200, handler(body));
  } catch (const InputError& e) {
    reply(res, 400, {{"error", std::string("protocol error: ") + e.what()}});
  } catch (const json::exception& e) {
    reply(res, 400, {{"error", std::string("protocol error: ") + e.what()}});
  } catch (const std::exception& e) {
    reply(res, 500, {{"error", e.what()}});
  }
}

}  // namespace

BackendServer::BackendServer(std::shared_ptr<Backend> backend)
    : client_(std::make_unique<ScoringClient>(std::move(backend))),
      server_(std::make_unique<httplib::Server>()) {
  auto& client = *client_;
  server_->Get("/v1/health", [&client](const httplib::Request&, httplib::Response& res) {
    try {
      reply(res, 200, {{"model_id", client.model_id()}, {"capabilities", client.backend().capabilities()}});
    } catch (const std::exception& e) {
      reply(res, 500, {{"error", e.what()}});
    }
  });
  server_->Post("/v1/fill", [&client](const httplib::Request& req, httplib::Response& res) {
    guarded(req, res, [&](const json& body) {
      FillRequest r = fill_request_from_json(body);
      if (!body.contains("mask_token")) r.mask_token = client.mask_token();
      return to_json(client.query_fills(r));
    });
  });
  server_->Post("/v1/pair_score", [&client](const httplib::Request& req, httplib::Response& res) {
    guarded(req, res, [&](const json& body) {
      const PairRequest r = pair_request_from_json(body);
      return json{{"score", client.query_pair_score(r.s1, r.s2)}};
    });
  });
  server_->Post("/v1/coref", [&client](const httplib::Request& req, httplib::Response& res) {
    guarded(req, res, [&](const json& body) {
      const CorefRequest r = coref_request_from_json(body);
      return json{{"p", client.query_coref(r.text, r.pronoun, r.antecedent)}};
    });
  });
  server_->Post("/v1/classify", [&client](const httplib::Request& req, httplib::Response& res) {
    guarded(req, res, [&](const json& body) {
      return json{{"label_scores", client.query_classify(classify_request_from_json(body).text)}};
    });
  });
}

BackendServer::~BackendServer() { stop(); }

int BackendServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw BackendError("cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    throw BackendError("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void BackendServer::listen() { server_->listen_after_bind(); }

void BackendServer::start() {
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void BackendServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace corrprobe::backend
