#pragma once

// Model access. A Backend is a raw transport (toy model, offline
// predictions file, HTTP service). ScoringClient sits in front of one and
// enforces the request/response contract: canonical request keys,
// precondition checks, fill-list validation, deterministic tie-breaking,
// response caching and bounded parallel dispatch.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace corrprobe::backend {

using json = nlohmann::json;

inline constexpr std::string_view kDefaultMask = "[MASK]";
inline constexpr std::size_t kMaxBatch = 64;

struct Fill {
  std::string token;
  double score = 0.0;

  bool operator==(const Fill&) const = default;
};

struct FillResponse {
  std::vector<Fill> fills;
  std::string model_id;

  bool operator==(const FillResponse&) const = default;
};

/// Half-open character range, counted in code points of the NFC text.
struct CharRange {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const CharRange&) const = default;
};

struct FillRequest {
  std::string text;
  std::string mask_token{kDefaultMask};
  std::size_t k = 3;
};

struct PairRequest {
  std::string s1;
  std::string s2;
};

struct CorefRequest {
  std::string text;
  CharRange pronoun;
  CharRange antecedent;
};

struct ClassifyRequest {
  std::string text;
};

using LabelScores = std::map<std::string, double>;

/// Raw model transport. Implementations may assume requests are already
/// canonical and validated by ScoringClient.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string model_id() = 0;
  virtual std::vector<std::string> capabilities() = 0;
  virtual std::string mask_token() const { return std::string(kDefaultMask); }

  virtual FillResponse fill(const FillRequest& req) = 0;
  virtual double pair_score(const PairRequest& req) = 0;
  virtual double coref(const CorefRequest& req) = 0;
  virtual LabelScores classify(const ClassifyRequest& req) = 0;
};

// Canonical request forms. Text is NFC with whitespace collapsed.
FillRequest canonicalize(FillRequest req);
PairRequest canonicalize(PairRequest req);
CorefRequest canonicalize(CorefRequest req);
ClassifyRequest canonicalize(ClassifyRequest req);

/// Cache key of a canonical request: kind plus compact JSON of the fields
/// that determine the answer (`k` is excluded for fills, which are
/// prefix-stable).
std::string request_key(const FillRequest& req);
std::string request_key(const PairRequest& req);
std::string request_key(const CorefRequest& req);
std::string request_key(const ClassifyRequest& req);

/// Exactly one occurrence of `mask` in `text`.
bool has_single_mask(std::string_view text, std::string_view mask);

/// True for word-piece continuation tokens ("##ing", "ing@@").
bool is_subword_piece(std::string_view token);

/// Rejects empty, duplicate, sub-word, or increasing-score fill lists and
/// lists shorter than `k`. Throws BackendError.
void validate_fills(const FillResponse& r, std::size_t k, std::string_view context);

/// Stable order: score descending, token ascending on ties.
void order_fills(std::vector<Fill>& fills);

// JSON forms used by the wire protocol and the offline file.
json to_json(const FillRequest& r);
json to_json(const PairRequest& r);
json to_json(const CorefRequest& r);
json to_json(const ClassifyRequest& r);
json to_json(const FillResponse& r);
FillRequest fill_request_from_json(const json& j);
PairRequest pair_request_from_json(const json& j);
CorefRequest coref_request_from_json(const json& j);
ClassifyRequest classify_request_from_json(const json& j);
FillResponse fill_response_from_json(const json& j);

struct ClientOptions {
  std::size_t max_in_flight = 8;
  /// JSON-lines response cache keyed by (model id, canonical request).
  std::filesystem::path disk_cache;
};

class ScoringClient {
 public:
  explicit ScoringClient(std::shared_ptr<Backend> backend, ClientOptions options = {});
  ~ScoringClient();

  ScoringClient(const ScoringClient&) = delete;
  ScoringClient& operator=(const ScoringClient&) = delete;

  std::string model_id();
  std::string mask_token() const { return backend_->mask_token(); }
  Backend& backend() { return *backend_; }

  /// Top-k whole-word fills. Requires exactly one mask token and k > 0.
  FillResponse query_fills(std::string_view sentence_with_mask, std::size_t k);
  FillResponse query_fills(const FillRequest& req);
  double query_pair_score(std::string_view s1, std::string_view s2);
  /// Probability in [0, 1] that the pronoun corefers with the antecedent.
  double query_coref(std::string_view context, CharRange pronoun, CharRange antecedent);
  LabelScores query_classify(std::string_view text);

  /// Issue requests with at most `max_in_flight` outstanding, in chunks of
  /// kMaxBatch; results are returned in request order.
  std::vector<FillResponse> query_fills_batch(const std::vector<FillRequest>& reqs);
  std::vector<double> query_pair_scores_batch(const std::vector<PairRequest>& reqs);
  std::vector<double> query_coref_batch(const std::vector<CorefRequest>& reqs);

  std::size_t cache_size() const;
  std::size_t backend_calls() const;

 private:
  template <typename T, typename F>
  T cached(const std::string& key, F&& compute);
  void persist(const std::string& key, const json& value);
  void load_disk_cache();

  std::shared_ptr<Backend> backend_;
  ClientOptions options_;
  std::string model_id_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, json> cache_;
  std::size_t backend_calls_ = 0;
};

}  // namespace corrprobe::backend
