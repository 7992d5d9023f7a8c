#pragma once

// Independent reference implementations for the tests. Nothing here calls
// into the statistics or metrics code under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "corrprobe/toy_model.hpp"

namespace oracle {

#ifndef CORRPROBE_FIXTURE_DIR
#define CORRPROBE_FIXTURE_DIR "tests/fixtures"
#endif

inline std::string fixture(const std::string& name) { return std::string(CORRPROBE_FIXTURE_DIR) + "/" + name; }
inline std::string bundled(const std::string& name) { return std::string(CORRPROBE_DEFAULT_DATA_DIR) + "/" + name; }

/// Sum over cells of (observed - expected)^2 / expected; NaN when a
/// marginal is zero.
inline double chi2_definitional(const std::vector<std::vector<double>>& observed) {
  const std::size_t r = observed.size(), c = observed.front().size();
  std::vector<double> rows(r, 0.0), cols(c, 0.0);
  double n = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      rows[i] += observed[i][j];
      cols[j] += observed[i][j];
      n += observed[i][j];
    }
  }
  double x = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double e = rows[i] * cols[j] / n;
      if (e == 0.0) return std::nan("");
      x += (observed[i][j] - e) * (observed[i][j] - e) / e;
    }
  }
  return x;
}

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                      double whole, double eps, int depth) {
  const double m = (a + b) / 2, lm = (a + m) / 2, rm = (m + b) / 2;
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * eps) return left + right + (left + right - whole) / 15;
  return simpson(f, a, m, fa, flm, fm, left, eps / 2, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, eps / 2, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double eps = 1e-14) {
  const double fa = f(a), fb = f(b), fm = f((a + b) / 2);
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), eps, 60);
}

/// Chi-square upper tail by quadrature of the density after t = z^2, which
/// keeps the integrand smooth at the origin.
inline double chi2_sf_quadrature(double s, int k) {
  const double norm = std::pow(2.0, k / 2.0) * std::tgamma(k / 2.0);
  auto f = [k, norm](double z) { return 2.0 * std::pow(z, k - 1) * std::exp(-z * z / 2) / norm; };
  const double lo = std::sqrt(s);
  return integrate(f, lo, lo + 40.0);
}

/// log C(n, x) p^x (1-p)^(n-x)
inline double binom_log_pmf(std::int64_t n, std::int64_t x, double p) {
  return std::lgamma(n + 1.0) - std::lgamma(x + 1.0) - std::lgamma(n - x + 1.0) + x * std::log(p) +
         (n - x) * std::log1p(-p);
}

/// Central acceptance region [lo, hi] of Binomial(n, p) at `level`: the
/// largest lo with P(X < lo) <= (1-level)/2 and smallest hi with
/// P(X > hi) <= (1-level)/2.
inline std::pair<std::int64_t, std::int64_t> binomial_interval(std::int64_t n, double p, double level) {
  const double tail = (1.0 - level) / 2.0;
  double below = 0.0;
  std::int64_t lo = 0;
  while (lo <= n && below + std::exp(binom_log_pmf(n, lo, p)) <= tail) below += std::exp(binom_log_pmf(n, lo++, p));
  double above = 0.0;
  std::int64_t hi = n;
  while (hi >= 0 && above + std::exp(binom_log_pmf(n, hi, p)) <= tail) above += std::exp(binom_log_pmf(n, hi--, p));
  return {lo, hi};
}

struct PlainPerson {
  std::string surface;
  std::string label;
};

struct BruteDisco {
  double value = 0.0;
  std::size_t tests = 0;
  std::vector<std::size_t> per_template;
  std::vector<std::set<std::string>> significant;
};

/// Enumerates every (template, fill) table from direct model calls and
/// applies the definitional statistic with a global Bonferroni threshold.
/// Exactly two labels.
inline BruteDisco brute_force_disco(corrprobe::backend::Backend& model,
                                    const std::vector<corrprobe::templates::DiscoTemplate>& templates,
                                    const std::vector<PlainPerson>& persons, std::size_t k, double alpha) {
  std::vector<std::string> labels;
  for (const auto& p : persons) {
    if (std::find(labels.begin(), labels.end(), p.label) == labels.end()) labels.push_back(p.label);
  }
  std::sort(labels.begin(), labels.end());
  std::map<std::string, double> group_size;
  for (const auto& p : persons) group_size[p.label] += 1;

  struct Test {
    std::size_t t;
    std::string fill;
    double p;
  };
  std::vector<Test> tests;
  for (std::size_t t = 0; t < templates.size(); ++t) {
    std::map<std::string, std::map<std::string, double>> hits;  // fill -> label -> count
    for (const auto& person : persons) {
      std::string text = templates[t].text;
      text.replace(text.find("[PERSON]"), 8, person.surface);
      text.replace(text.find("[BLANK]"), 7, model.mask_token());
      if (!text.empty()) text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
      if (text.back() != '.' && text.back() != '!' && text.back() != '?') text.push_back('.');
      const auto resp = model.fill({text, model.mask_token(), k});
      std::set<std::string> seen;
      for (std::size_t i = 0; i < k && i < resp.fills.size(); ++i) seen.insert(resp.fills[i].token);
      for (const auto& f : seen) hits[f][person.label] += 1;
    }
    for (const auto& [fill, by_label] : hits) {
      std::vector<std::vector<double>> obs;
      for (const auto& l : labels) {
        const double h = by_label.contains(l) ? by_label.at(l) : 0.0;
        obs.push_back({h, group_size[l] - h});
      }
      const double x = chi2_definitional(obs);
      if (std::isnan(x)) continue;
      tests.push_back({t, fill, chi2_sf_quadrature(x, static_cast<int>(labels.size()) - 1)});
    }
  }
  BruteDisco out;
  out.tests = tests.size();
  out.per_template.assign(templates.size(), 0);
  out.significant.resize(templates.size());
  const double threshold = tests.empty() ? 0.0 : alpha / static_cast<double>(tests.size());
  for (const auto& t : tests) {
    if (t.p < threshold) {
      ++out.per_template[t.t];
      out.significant[t.t].insert(t.fill);
    }
  }
  double total = 0.0;
  for (auto c : out.per_template) total += static_cast<double>(c);
  out.value = total / static_cast<double>(templates.size());
  return out;
}

/// A seeded random toy model: each (template, person) gets three fills,
/// drawn from a group-favored pool with a per-template bias probability.
inline corrprobe::backend::ToyModelSpec random_toy_spec(std::uint64_t seed,
                                                        const std::vector<std::string>& template_texts) {
  std::mt19937_64 gen(seed);
  auto draw = [&gen](std::uint64_t n) { return static_cast<std::size_t>(gen() % n); };
  auto unit = [&gen]() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  static const std::vector<std::string> vocab = {"art",   "math",  "music", "sports", "dance", "law",
                                                 "cooking", "chess", "poetry", "physics", "history", "drama"};
  corrprobe::backend::ToyModelSpec spec;
  spec.model_id = "toy-random-" + std::to_string(seed);
  const std::size_t n_templates = 1 + draw(4);
  for (std::size_t t = 0; t < n_templates; ++t) {
    const std::string id = "r" + std::to_string(t);
    spec.templates.push_back(
        corrprobe::templates::make_disco_template(id, id, template_texts[draw(template_texts.size())]));
  }
  for (const char* label : {"female", "male"}) {
    const std::size_t n = 4 + draw(12);
    for (std::size_t i = 0; i < n; ++i) {
      spec.persons.push_back({std::string(label == std::string("female") ? "Fay" : "Max") + std::to_string(i), label});
    }
  }
  for (const auto& t : spec.templates) {
    const double bias = unit();
    const std::size_t fav_f = draw(vocab.size()), fav_m = draw(vocab.size());
    for (const auto& p : spec.persons) {
      std::vector<std::string> chosen;
      if (unit() < bias) chosen.push_back(vocab[p.label == "female" ? fav_f : fav_m]);
      while (chosen.size() < 3) {
        const std::string& w = vocab[draw(vocab.size())];
        if (std::find(chosen.begin(), chosen.end(), w) == chosen.end()) chosen.push_back(w);
      }
      corrprobe::backend::ToyFillRule rule;
      rule.template_id = t.id;
      rule.person = p.surface;
      for (std::size_t i = 0; i < chosen.size(); ++i) rule.fills.push_back({chosen[i], 0.9 - 0.1 * i});
      spec.fill_rules.push_back(std::move(rule));
    }
  }
  return spec;
}

}  // namespace oracle
