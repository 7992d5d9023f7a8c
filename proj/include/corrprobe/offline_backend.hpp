#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <unordered_map>

#include "corrprobe/backend.hpp"

namespace corrprobe::backend {

/// Answers only requests recorded in a JSON-lines predictions file:
///
///   {"kind": "fill",     "key": {"text", "mask_token"?, "k"?}, "value": {"fills": [...], "model_id"?}}
///   {"kind": "pair",     "key": {"s1", "s2"},                  "value": {"score"}}
///   {"kind": "coref",    "key": {"text", "pronoun", "antecedent"}, "value": {"p"}}
///   {"kind": "classify", "key": {"text"},                      "value": {"label_scores"}}
///
/// Keys are canonicalized like live requests. A repeated key with a
/// different payload is rejected at load time.
class OfflineBackend : public Backend {
 public:
  OfflineBackend(std::string model_id, std::string mask_token);

  /// Throws InputError naming the source and line on schema violations.
  static std::shared_ptr<OfflineBackend> load(std::istream& in, const std::string& source_name,
                                              std::string mask_token = std::string(kDefaultMask));
  static std::shared_ptr<OfflineBackend> load_file(const std::filesystem::path& path,
                                                   std::string mask_token = std::string(kDefaultMask));

  std::string model_id() override { return model_id_; }
  std::vector<std::string> capabilities() override;
  std::string mask_token() const override { return mask_token_; }

  FillResponse fill(const FillRequest& req) override;
  double pair_score(const PairRequest& req) override;
  double coref(const CorefRequest& req) override;
  LabelScores classify(const ClassifyRequest& req) override;

  std::size_t size() const { return records_.size(); }

  /// Adds one record; returns false if an identical record already exists.
  bool add_record(const json& record);

 private:
  const json& lookup(const std::string& key, const std::string& what) const;

  std::string model_id_;
  std::string mask_token_;
  std::unordered_map<std::string, json> records_;
  std::unordered_map<std::string, std::size_t> kinds_;
};

/// Passes requests through to another backend and keeps every answer as an
/// offline record, so a live run can be replayed with OfflineBackend.
class RecordingBackend : public Backend {
 public:
  explicit RecordingBackend(std::shared_ptr<Backend> inner);

  std::string model_id() override { return inner_->model_id(); }
  std::vector<std::string> capabilities() override { return inner_->capabilities(); }
  std::string mask_token() const override { return inner_->mask_token(); }

  FillResponse fill(const FillRequest& req) override;
  double pair_score(const PairRequest& req) override;
  double coref(const CorefRequest& req) override;
  LabelScores classify(const ClassifyRequest& req) override;

  std::size_t size() const;
  /// One JSON record per line, sorted by request key.
  void write(std::ostream& out) const;

 private:
  void keep(const std::string& key, json record);

  std::shared_ptr<Backend> inner_;
  mutable std::mutex mutex_;
  std::map<std::string, json> records_;
};

}  // namespace corrprobe::backend
