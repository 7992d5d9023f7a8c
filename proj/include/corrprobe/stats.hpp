#pragma once

// Small deterministic statistics kernel shared by every metric: Pearson
// correlation, ordinary least squares, Pearson chi-square on 2x2 (and r x 2)
// tables, the chi-square upper tail, Bonferroni correction and restart
// aggregation. Everything here is a pure function.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace corrprobe::stats {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double sum(std::span<const double> values);
double mean(std::span<const double> values);

/// 2x2 counts. Rows are groups, columns are (fill supplied, not supplied).
///
///            supplied   not supplied
///   group 0      a            b
///   group 1      c            d
struct ContingencyTable {
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t c = 0;
  std::int64_t d = 0;

  std::int64_t total() const { return a + b + c + d; }
  std::int64_t row0() const { return a + b; }
  std::int64_t row1() const { return c + d; }
  std::int64_t col0() const { return a + c; }
  std::int64_t col1() const { return b + d; }

  bool operator==(const ContingencyTable&) const = default;
};

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = 1;
  // False when a row or column marginal is zero. Untestable tables carry
  // statistic 0 and p 1 and must never be reported as significant.
  bool testable = false;
  // Smallest expected cell count; flagged by callers when below 5.
  double min_expected = 0.0;
};

struct LinearFitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double pearson_r = 0.0;
  std::size_t n = 0;
  // Set when y is constant, so r is undefined and reported as 0.
  bool degenerate_y = false;
};

struct RestartSummary {
  double mean = 0.0;
  double sample_std = 0.0;
  std::size_t n_restarts = 0;
  std::vector<double> raw_values;

  /// "0.37±0.03" style rendering with the given number of decimals.
  std::string format(int decimals = 2) const;
};

/// Pearson product-moment correlation.
/// Throws DegenerateInput on length mismatch, n < 2, or when either input
/// is constant.
double pearson_r(std::span<const double> xs, std::span<const double> ys);

/// Ordinary least squares y = slope * x + intercept. Requires non-constant
/// xs; a constant ys gives slope 0 and sets degenerate_y.
LinearFitResult linear_fit(std::span<const double> xs, std::span<const double> ys);

/// Pearson chi-square with one degree of freedom and no continuity
/// correction.
ChiSquareResult chi_square_2x2(const ContingencyTable& table);

struct GroupCount {
  std::int64_t hits = 0;
  std::int64_t trials = 0;
};

/// Pearson chi-square on an r x 2 table given as per-group (hits, trials);
/// r - 1 degrees of freedom. Agrees with chi_square_2x2 when r = 2.
ChiSquareResult chi_square_groups(std::span<const GroupCount> groups);

/// Regularized upper incomplete gamma Q(a, x).
double regularized_gamma_q(double a, double x);

/// Upper tail of the chi-square distribution, Q(dof / 2, statistic / 2).
double chi_square_p(double statistic, int dof);

double bonferroni_alpha(double alpha, std::size_t tests);

/// Mean and n-1 sample standard deviation (0 when a single value).
RestartSummary aggregate_restarts(std::span<const double> values);

/// Fixed-point "%.{d}f±%.{d}f" rendering.
std::string format_mean_std(double mean, double std, int decimals);

/// Fixed-point rendering that never prints "-0.00".
std::string format_fixed(double value, int decimals);

}  // namespace corrprobe::stats
