#include "corrprobe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "corrprobe/error.hpp"

namespace corrprobe::stats {

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    compensation_ += (sum_ - t) + v;
  } else {
    compensation_ += (v - t) + sum_;
  }
  sum_ = t;
}

double sum(std::span<const double> values) {
  CompensatedSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

double mean(std::span<const double> values) {
  if (values.empty()) throw DegenerateInput("mean of an empty sequence");
  return sum(values) / static_cast<double>(values.size());
}

namespace {

struct Moments {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
};

void check_pair(std::span<const double> xs, std::span<const double> ys, const char* what) {
  if (xs.size() != ys.size()) {
    throw DegenerateInput(std::string(what) + ": length mismatch (" + std::to_string(xs.size()) +
                          " vs " + std::to_string(ys.size()) + ")");
  }
  if (xs.size() < 2) {
    throw DegenerateInput(std::string(what) + ": need at least two points");
  }
}

// Two-pass centered moments with compensated accumulation.
Moments centered_moments(std::span<const double> xs, std::span<const double> ys) {
  Moments m;
  m.mean_x = mean(xs);
  m.mean_y = mean(ys);
  CompensatedSum sxx, syy, sxy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - m.mean_x;
    const double dy = ys[i] - m.mean_y;
    sxx.add(dx * dx);
    syy.add(dy * dy);
    sxy.add(dx * dy);
  }
  m.sxx = sxx.value();
  m.syy = syy.value();
  m.sxy = sxy.value();
  return m;
}

double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

}  // namespace

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys, "pearson_r");
  const Moments m = centered_moments(xs, ys);
  if (m.sxx <= 0.0 || m.syy <= 0.0) {
    throw DegenerateInput("pearson_r: constant input has zero variance");
  }
  return clamp_unit(m.sxy / std::sqrt(m.sxx * m.syy));
}

LinearFitResult linear_fit(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys, "linear_fit");
  const Moments m = centered_moments(xs, ys);
  if (m.sxx <= 0.0) throw DegenerateInput("linear_fit: x values are constant");
  LinearFitResult fit;
  fit.n = xs.size();
  fit.slope = m.sxy / m.sxx;
  fit.intercept = m.mean_y - fit.slope * m.mean_x;
  if (m.syy <= 0.0) {
    fit.slope = 0.0;
    fit.intercept = m.mean_y;
    fit.pearson_r = 0.0;
    fit.degenerate_y = true;
  } else {
    fit.pearson_r = clamp_unit(m.sxy / std::sqrt(m.sxx * m.syy));
  }
  return fit;
}

ChiSquareResult chi_square_2x2(const ContingencyTable& t) {
  if (t.a < 0 || t.b < 0 || t.c < 0 || t.d < 0) {
    throw InputError("chi_square_2x2: negative count");
  }
  ChiSquareResult out;
  out.dof = 1;
  const double n = static_cast<double>(t.total());
  const double r0 = static_cast<double>(t.row0());
  const double r1 = static_cast<double>(t.row1());
  const double c0 = static_cast<double>(t.col0());
  const double c1 = static_cast<double>(t.col1());
  if (n <= 0.0 || r0 == 0.0 || r1 == 0.0 || c0 == 0.0 || c1 == 0.0) {
    return out;
  }
  out.testable = true;
  out.min_expected = std::min({r0 * c0, r0 * c1, r1 * c0, r1 * c1}) / n;
  const double cross = static_cast<double>(t.a) * static_cast<double>(t.d) -
                       static_cast<double>(t.b) * static_cast<double>(t.c);
  out.statistic = n * cross * cross / (r0 * r1 * c0 * c1);
  out.p_value = chi_square_p(out.statistic, 1);
  return out;
}

ChiSquareResult chi_square_groups(std::span<const GroupCount> groups) {
  ChiSquareResult out;
  if (groups.size() < 2) throw InputError("chi_square_groups: need at least two groups");
  out.dof = static_cast<int>(groups.size()) - 1;
  double n = 0.0;
  double hits = 0.0;
  for (const auto& g : groups) {
    if (g.hits < 0 || g.trials < g.hits) throw InputError("chi_square_groups: invalid counts");
    if (g.trials == 0) return out;
    n += static_cast<double>(g.trials);
    hits += static_cast<double>(g.hits);
  }
  const double misses = n - hits;
  if (hits == 0.0 || misses == 0.0) return out;
  out.testable = true;
  out.min_expected = std::numeric_limits<double>::infinity();
  CompensatedSum stat;
  for (const auto& g : groups) {
    const double trials = static_cast<double>(g.trials);
    const double e_hit = trials * hits / n;
    const double e_miss = trials * misses / n;
    const double o_hit = static_cast<double>(g.hits);
    const double o_miss = trials - o_hit;
    stat.add((o_hit - e_hit) * (o_hit - e_hit) / e_hit);
    stat.add((o_miss - e_miss) * (o_miss - e_miss) / e_miss);
    out.min_expected = std::min({out.min_expected, e_hit, e_miss});
  }
  out.statistic = std::max(0.0, stat.value());
  out.p_value = chi_square_p(out.statistic, out.dof);
  return out;
}

namespace {

constexpr double kGammaEps = 1e-16;
constexpr int kGammaMaxIter = 10000;

// Series for the lower regularized gamma P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double total = term;
  for (int i = 0; i < kGammaMaxIter; ++i) {
    ap += 1.0;
    term *= x / ap;
    total += term;
    if (std::abs(term) < std::abs(total) * kGammaEps) break;
  }
  return total * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a, x), valid for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0)) throw InputError("regularized_gamma_q: shape must be positive");
  if (x < 0.0 || std::isnan(x)) throw InputError("regularized_gamma_q: x must be non-negative");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return std::clamp(1.0 - gamma_p_series(a, x), 0.0, 1.0);
  return std::clamp(gamma_q_continued_fraction(a, x), 0.0, 1.0);
}

double chi_square_p(double statistic, int dof) {
  if (dof <= 0) throw InputError("chi_square_p: degrees of freedom must be positive");
  if (statistic < 0.0 || std::isnan(statistic)) {
    throw InputError("chi_square_p: statistic must be non-negative");
  }
  if (dof == 1) {
    // Q(1/2, s/2) = erfc(sqrt(s/2)); keeps full relative accuracy in the tail.
    return std::erfc(std::sqrt(statistic / 2.0));
  }
  return regularized_gamma_q(static_cast<double>(dof) / 2.0, statistic / 2.0);
}

double bonferroni_alpha(double alpha, std::size_t tests) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("bonferroni_alpha: alpha must lie in (0, 1)");
  if (tests == 0) throw InputError("bonferroni_alpha: number of tests must be positive");
  return alpha / static_cast<double>(tests);
}

RestartSummary aggregate_restarts(std::span<const double> values) {
  if (values.empty()) throw InputError("aggregate_restarts: no values");
  RestartSummary out;
  out.n_restarts = values.size();
  out.raw_values.assign(values.begin(), values.end());
  out.mean = mean(values);
  if (values.size() > 1) {
    CompensatedSum ss;
    for (double v : values) ss.add((v - out.mean) * (v - out.mean));
    out.sample_std = std::sqrt(ss.value() / static_cast<double>(values.size() - 1));
  }
  return out;
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  std::string s(buf);
  // Render negative zero after rounding as plain zero.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string format_mean_std(double mean_value, double std_value, int decimals) {
  return format_fixed(mean_value, decimals) + "±" + format_fixed(std_value, decimals);
}

std::string RestartSummary::format(int decimals) const {
  return format_mean_std(mean, sample_std, decimals);
}

}  // namespace corrprobe::stats
