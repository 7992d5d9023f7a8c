#include "corrprobe/toy_model.hpp"

#include <algorithm>
#include <fstream>

#include "corrprobe/error.hpp"
#include "corrprobe/rng.hpp"
#include "corrprobe/text.hpp"

namespace corrprobe::backend {

namespace {

json fills_to_json(const std::vector<Fill>& fills) {
  json out = json::array();
  for (const auto& f : fills) out.push_back({{"token", f.token}, {"score", f.score}});
  return out;
}

std::vector<Fill> fills_from_json(const json& j) {
  return fill_response_from_json(json{{"fills", j}}).fills;
}

std::string surface_at(const std::string& s, CharRange r) {
  const std::size_t b = text::byte_offset(s, r.start);
  const std::size_t e = text::byte_offset(s, r.end);
  return s.substr(b, e - b);
}

}  // namespace

json to_json(const ToyModelSpec& spec) {
  json templates = json::array();
  for (const auto& t : spec.templates) {
    templates.push_back({{"id", t.id}, {"variant_group", t.variant_group}, {"text", t.text}});
  }
  json persons = json::array();
  for (const auto& p : spec.persons) persons.push_back({{"surface", p.surface}, {"label", p.label}});
  json fill_rules = json::array();
  for (const auto& r : spec.fill_rules) {
    json rule{{"fills", fills_to_json(r.fills)}};
    if (!r.sentence.empty()) rule["sentence"] = r.sentence;
    if (!r.template_id.empty()) rule["template"] = r.template_id;
    if (!r.person.empty()) rule["person"] = r.person;
    if (!r.label.empty()) rule["label"] = r.label;
    fill_rules.push_back(std::move(rule));
  }
  json pair_rules = json::array();
  for (const auto& r : spec.pair_rules) pair_rules.push_back({{"s1", r.s1}, {"s2", r.s2}, {"score", r.score}});
  json coref_rules = json::array();
  for (const auto& r : spec.coref_rules) {
    coref_rules.push_back({{"antecedent", r.antecedent}, {"pronoun", r.pronoun}, {"p", r.p}});
  }
  json classify_rules = json::array();
  for (const auto& r : spec.classify_rules) {
    classify_rules.push_back({{"text", r.text}, {"label_scores", r.label_scores}});
  }
  return json{{"model_id", spec.model_id},
              {"mask_token", spec.mask_token},
              {"seed", spec.seed},
              {"templates", templates},
              {"persons", persons},
              {"fill_rules", fill_rules},
              {"default_fills", fills_to_json(spec.default_fills)},
              {"vocabulary", spec.vocabulary},
              {"pair", {{"identical_score", spec.identical_pair_score},
                        {"default_score", spec.default_pair_score},
                        {"rules", pair_rules}}},
              {"coref", {{"default_p", spec.default_coref}, {"rules", coref_rules}}},
              {"classify", {{"default", spec.default_label_scores}, {"rules", classify_rules}}}};
}

ToyModelSpec toy_spec_from_json(const json& j) {
  if (!j.is_object()) throw InputError("toy model spec must be a JSON object");
  ToyModelSpec s;
  try {
    s.model_id = j.value("model_id", s.model_id);
    s.mask_token = j.value("mask_token", s.mask_token);
    s.seed = j.value("seed", std::uint64_t{0});
    for (const auto& t : j.value("templates", json::array())) {
      const std::string id = t.at("id").get<std::string>();
      s.templates.push_back(templates::make_disco_template(id, t.value("variant_group", id),
                                                           t.at("text").get<std::string>(), "toy template " + id));
    }
    for (const auto& p : j.value("persons", json::array())) {
      s.persons.push_back({p.at("surface").get<std::string>(), p.at("label").get<std::string>()});
    }
    for (const auto& r : j.value("fill_rules", json::array())) {
      ToyFillRule rule;
      rule.sentence = r.value("sentence", "");
      rule.template_id = r.value("template", "");
      rule.person = r.value("person", "");
      rule.label = r.value("label", "");
      rule.fills = fills_from_json(r.at("fills"));
      if (rule.sentence.empty() && rule.template_id.empty()) {
        throw InputError("fill rule needs 'sentence' or 'template'");
      }
      s.fill_rules.push_back(std::move(rule));
    }
    s.default_fills = fills_from_json(j.value("default_fills", json::array()));
    s.vocabulary = j.value("vocabulary", std::vector<std::string>{});
    if (j.contains("pair")) {
      const json& p = j.at("pair");
      s.identical_pair_score = p.value("identical_score", s.identical_pair_score);
      s.default_pair_score = p.value("default_score", s.default_pair_score);
      for (const auto& r : p.value("rules", json::array())) {
        s.pair_rules.push_back(
            {r.at("s1").get<std::string>(), r.at("s2").get<std::string>(), r.at("score").get<double>()});
      }
    }
    if (j.contains("coref")) {
      const json& c = j.at("coref");
      s.default_coref = c.value("default_p", s.default_coref);
      for (const auto& r : c.value("rules", json::array())) {
        s.coref_rules.push_back({r.value("antecedent", "*"), r.value("pronoun", "*"), r.at("p").get<double>()});
      }
    }
    if (j.contains("classify")) {
      const json& c = j.at("classify");
      s.default_label_scores = c.value("default", LabelScores{});
      for (const auto& r : c.value("rules", json::array())) {
        s.classify_rules.push_back({r.at("text").get<std::string>(), r.at("label_scores").get<LabelScores>()});
      }
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed toy model spec: ") + e.what());
  }
  return s;
}

ToyModelSpec load_toy_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open toy model spec '" + path.string() + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw InputError("toy model spec '" + path.string() + "' is not valid JSON");
  return toy_spec_from_json(j);
}

ToyModel::ToyModel(ToyModelSpec spec) : spec_(std::move(spec)) {
  for (const auto& t : spec_.templates) {
    for (const auto& p : spec_.persons) {
      const std::string sentence =
          text::canonical(templates::instantiate_person(t, p.surface, spec_.mask_token));
      origins_.emplace(sentence, Origin{t.id, p.surface, p.label});
    }
  }
  for (const auto& r : spec_.fill_rules) {
    if (!r.sentence.empty()) sentence_rules_.emplace(text::canonical(r.sentence), &r);
  }
}

std::vector<std::string> ToyModel::capabilities() {
  return {"fill", "pair_score", "coref", "classify"};
}

std::vector<Fill> ToyModel::vocabulary_fills(const std::string& sentence) const {
  std::vector<Fill> out;
  out.reserve(spec_.vocabulary.size());
  const std::uint64_t sentence_hash = rng::fnv1a(sentence);
  for (const auto& token : spec_.vocabulary) {
    rng::SplitMix gen(rng::derive(spec_.seed, sentence_hash, rng::fnv1a(token)));
    out.push_back({token, gen.uniform01()});
  }
  order_fills(out);
  return out;
}

FillResponse ToyModel::fill(const FillRequest& req) {
  const std::string key = text::canonical(req.text);
  FillResponse r;
  r.model_id = spec_.model_id;
  if (auto it = sentence_rules_.find(key); it != sentence_rules_.end()) {
    r.fills = it->second->fills;
    return r;
  }
  if (auto it = origins_.find(key); it != origins_.end()) {
    const Origin& o = it->second;
    auto template_matches = [&](const ToyFillRule& rule) {
      return rule.sentence.empty() && (rule.template_id == o.template_id || rule.template_id == "*");
    };
    // Most specific selector first: person, then label, then any.
    for (int pass = 0; pass < 3; ++pass) {
      for (const auto& rule : spec_.fill_rules) {
        if (!template_matches(rule)) continue;
        const bool hit = (pass == 0 && !rule.person.empty() && rule.person == o.person) ||
                         (pass == 1 && rule.person.empty() && !rule.label.empty() &&
                          rule.label != "*" && rule.label == o.label) ||
                         (pass == 2 && rule.person.empty() && (rule.label.empty() || rule.label == "*"));
        if (hit) {
          r.fills = rule.fills;
          return r;
        }
      }
    }
  }
  if (!spec_.default_fills.empty()) {
    r.fills = spec_.default_fills;
  } else if (!spec_.vocabulary.empty()) {
    r.fills = vocabulary_fills(key);
  } else {
    throw BackendError("toy model '" + spec_.model_id + "' has no fills for \"" + key + "\"");
  }
  return r;
}

double ToyModel::pair_score(const PairRequest& req) {
  for (const auto& rule : spec_.pair_rules) {
    if (text::canonical(rule.s1) == req.s1 && text::canonical(rule.s2) == req.s2) return rule.score;
  }
  if (req.s1 == req.s2) return spec_.identical_pair_score;
  return spec_.default_pair_score;
}

double ToyModel::coref(const CorefRequest& req) {
  const std::string pronoun = text::to_lower(surface_at(req.text, req.pronoun));
  const std::string antecedent = text::to_lower(surface_at(req.text, req.antecedent));
  const ToyCorefRule* best = nullptr;
  int best_rank = -1;
  for (const auto& rule : spec_.coref_rules) {
    const bool ante = rule.antecedent == "*" || text::to_lower(rule.antecedent) == antecedent;
    const bool pron = rule.pronoun == "*" || text::to_lower(rule.pronoun) == pronoun;
    if (!ante || !pron) continue;
    const int rank = (rule.antecedent != "*" ? 2 : 0) + (rule.pronoun != "*" ? 1 : 0);
    if (rank > best_rank) {
      best = &rule;
      best_rank = rank;
    }
  }
  return best ? best->p : spec_.default_coref;
}

LabelScores ToyModel::classify(const ClassifyRequest& req) {
  for (const auto& rule : spec_.classify_rules) {
    if (text::canonical(rule.text) == req.text) return rule.label_scores;
  }
  if (spec_.default_label_scores.empty()) {
    throw BackendError("toy model '" + spec_.model_id + "' has no classification for \"" +
                       req.text + "\"");
  }
  return spec_.default_label_scores;
}

}  // namespace corrprobe::backend
