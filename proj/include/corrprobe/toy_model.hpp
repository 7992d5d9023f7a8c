#pragma once

// Deterministic in-process model used as a test oracle and served by
// `corrprobe toy-serve`. Behavior is fully described by a JSON spec.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corrprobe/backend.hpp"
#include "corrprobe/templates.hpp"

namespace corrprobe::backend {

struct ToyFillRule {
  // Exactly one selector family is used: `sentence`, or `template_id` with
  // an optional `person` or `label` ("*" / empty label matches any person).
  std::string sentence;
  std::string template_id;
  std::string person;
  std::string label;
  std::vector<Fill> fills;
};

struct ToyPairRule {
  std::string s1;
  std::string s2;
  double score = 0.0;
};

struct ToyCorefRule {
  std::string antecedent;  // lower-cased antecedent surface, "*" for any
  std::string pronoun;     // lower-cased pronoun surface, "*" for any
  double p = 0.5;
};

struct ToyClassifyRule {
  std::string text;
  LabelScores label_scores;
};

struct ToyPerson {
  std::string surface;
  std::string label;
};

struct ToyModelSpec {
  std::string model_id = "toy";
  std::string mask_token{kDefaultMask};
  std::uint64_t seed = 0;

  std::vector<templates::DiscoTemplate> templates;
  std::vector<ToyPerson> persons;
  std::vector<ToyFillRule> fill_rules;
  std::vector<Fill> default_fills;
  // When no rule matches and this is non-empty, fills are the vocabulary
  // ranked by a seeded hash of (seed, sentence, token).
  std::vector<std::string> vocabulary;

  double identical_pair_score = 5.0;
  double default_pair_score = 2.5;
  std::vector<ToyPairRule> pair_rules;

  double default_coref = 0.5;
  std::vector<ToyCorefRule> coref_rules;

  LabelScores default_label_scores;
  std::vector<ToyClassifyRule> classify_rules;
};

json to_json(const ToyModelSpec& spec);
ToyModelSpec toy_spec_from_json(const json& j);
ToyModelSpec load_toy_spec_file(const std::filesystem::path& path);

class ToyModel : public Backend {
 public:
  explicit ToyModel(ToyModelSpec spec);

  const ToyModelSpec& spec() const { return spec_; }

  std::string model_id() override { return spec_.model_id; }
  std::vector<std::string> capabilities() override;
  std::string mask_token() const override { return spec_.mask_token; }

  FillResponse fill(const FillRequest& req) override;
  double pair_score(const PairRequest& req) override;
  double coref(const CorefRequest& req) override;
  LabelScores classify(const ClassifyRequest& req) override;

 private:
  struct Origin {
    std::string template_id;
    std::string person;
    std::string label;
  };

  std::vector<Fill> vocabulary_fills(const std::string& sentence) const;

  ToyModelSpec spec_;
  std::map<std::string, Origin> origins_;  // canonical sentence -> slot values
  std::map<std::string, const ToyFillRule*> sentence_rules_;
};

}  // namespace corrprobe::backend
