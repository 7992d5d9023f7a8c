#include <doctest.h>

#include <cmath>
#include <random>

#include "corrprobe/error.hpp"
#include "corrprobe/stats.hpp"
#include "oracles.hpp"

using namespace corrprobe;
using namespace corrprobe::stats;

TEST_CASE("chi_square_2x2 agrees with the cell-by-cell definition") {
  std::mt19937_64 gen(11);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    ContingencyTable t{static_cast<std::int64_t>(gen() % 40), static_cast<std::int64_t>(gen() % 40),
                       static_cast<std::int64_t>(gen() % 40), static_cast<std::int64_t>(gen() % 40)};
    const auto r = chi_square_2x2(t);
    const double ref = oracle::chi2_definitional({{double(t.a), double(t.b)}, {double(t.c), double(t.d)}});
    if (std::isnan(ref)) {
      CHECK_FALSE(r.testable);
      continue;
    }
    REQUIRE(r.testable);
    CHECK(r.statistic == doctest::Approx(ref).epsilon(1e-12));
    ++checked;
  }
  CHECK(checked > 1900);
}

TEST_CASE("chi_square_2x2 on hand tables") {
  // (20,0,0,20): N = 40, ad - bc = 400, marginals all 20 -> 40 * 400^2 / 20^4
  auto r = chi_square_2x2({20, 0, 0, 20});
  CHECK(r.statistic == doctest::Approx(40.0));
  CHECK(r.p_value == doctest::Approx(2.5396285894708634e-10).epsilon(1e-9));
  CHECK(r.min_expected == doctest::Approx(10.0));

  r = chi_square_2x2({10, 10, 10, 10});
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == doctest::Approx(1.0));

  r = chi_square_2x2({5, 0, 5, 0});
  CHECK_FALSE(r.testable);
  CHECK(r.p_value == 1.0);
  CHECK(r.statistic == 0.0);

  CHECK_THROWS_AS(chi_square_2x2({-1, 0, 0, 1}), InputError);
}

TEST_CASE("chi_square_groups reduces to the 2x2 statistic") {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 500; ++i) {
    const std::int64_t n0 = 1 + gen() % 30, n1 = 1 + gen() % 30;
    const std::int64_t h0 = gen() % (n0 + 1), h1 = gen() % (n1 + 1);
    const GroupCount g[] = {{h0, n0}, {h1, n1}};
    const auto a = chi_square_groups(g);
    const auto b = chi_square_2x2({h0, n0 - h0, h1, n1 - h1});
    CHECK(a.testable == b.testable);
    CHECK(a.statistic == doctest::Approx(b.statistic).epsilon(1e-12));
  }
}

TEST_CASE("chi_square_groups with three groups uses two degrees of freedom") {
  const GroupCount g[] = {{10, 20}, {5, 20}, {0, 20}};
  const auto r = chi_square_groups(g);
  const double ref = oracle::chi2_definitional({{10, 10}, {5, 15}, {0, 20}});
  CHECK(r.dof == 2);
  CHECK(r.statistic == doctest::Approx(ref).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(std::exp(-ref / 2)).epsilon(1e-10));
}

TEST_CASE("chi_square_p matches quadrature and reference quantiles") {
  CHECK(chi_square_p(3.841459, 1) == doctest::Approx(0.05).epsilon(2e-5));
  CHECK(chi_square_p(6.634897, 1) == doctest::Approx(0.01).epsilon(2e-5));
  CHECK(chi_square_p(10.0, 1) == doctest::Approx(0.001565402258002549).epsilon(1e-10));
  CHECK(chi_square_p(0.0, 1) == 1.0);
  for (int k : {1, 2, 3, 5, 10}) {
    for (double s : {0.01, 0.5, 1.0, 2.5, 7.0, 15.0, 30.0, 60.0}) {
      const double ref = oracle::chi2_sf_quadrature(s, k);
      CHECK(chi_square_p(s, k) == doctest::Approx(ref).epsilon(1e-9));
    }
  }
}

TEST_CASE("chi_square_p is a monotone tail probability") {
  double prev = 1.0;
  for (double s = 0.0; s < 80.0; s += 0.37) {
    const double p = chi_square_p(s, 1);
    CHECK(p >= 0.0);
    CHECK(p <= prev);
    prev = p;
  }
}

TEST_CASE("regularized_gamma_q closed forms") {
  // Q(1, x) = exp(-x)
  for (double x : {0.1, 1.0, 3.0, 20.0}) CHECK(regularized_gamma_q(1.0, x) == doctest::Approx(std::exp(-x)));
  // Q(2, x) = (1 + x) exp(-x)
  for (double x : {0.1, 1.0, 3.0, 20.0}) {
    CHECK(regularized_gamma_q(2.0, x) == doctest::Approx((1 + x) * std::exp(-x)));
  }
}

TEST_CASE("bonferroni_alpha") {
  CHECK(bonferroni_alpha(0.05, 1386) == doctest::Approx(3.6075036075036075e-05).epsilon(1e-14));
  CHECK(bonferroni_alpha(0.05, 1) == 0.05);
  CHECK_THROWS_AS(bonferroni_alpha(0.05, 0), InputError);
}

TEST_CASE("pearson_r and linear_fit") {
  const double x[] = {1, 2, 3, 4};
  const double y[] = {2, 1, 4, 3};
  CHECK(pearson_r(x, y) == doctest::Approx(0.6));

  const double xs[] = {0, 1, 2, 3, 4};
  const double ys[] = {1, 3, 5, 7, 9};
  const auto fit = linear_fit(xs, ys);
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.pearson_r == doctest::Approx(1.0));
  CHECK(fit.n == 5);

  const double flat[] = {4, 4, 4, 4, 4};
  const auto deg = linear_fit(xs, flat);
  CHECK(deg.degenerate_y);
  CHECK(deg.slope == 0.0);
  CHECK(deg.intercept == doctest::Approx(4.0));

  CHECK_THROWS_AS(pearson_r(flat, ys), DegenerateInput);
  CHECK_THROWS_AS(linear_fit(flat, ys), DegenerateInput);
  const double two[] = {1, 2};
  CHECK_THROWS_AS(pearson_r(two, ys), DegenerateInput);
}

TEST_CASE("pearson_r is symmetric and scale invariant") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  std::vector<double> a(50), b(50), scaled(50);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = nd(gen);
    b[i] = 0.5 * a[i] + nd(gen);
    scaled[i] = 3.0 * b[i] - 7.0;
  }
  CHECK(pearson_r(a, b) == doctest::Approx(pearson_r(b, a)));
  CHECK(pearson_r(a, scaled) == doctest::Approx(pearson_r(a, b)));
  CHECK(std::abs(pearson_r(a, b)) <= 1.0);
}

TEST_CASE("restart aggregation and formatting") {
  const double v[] = {0.35, 0.40, 0.36};
  const auto s = aggregate_restarts(v);
  CHECK(s.mean == doctest::Approx(0.37));
  CHECK(s.sample_std == doctest::Approx(std::sqrt((0.0004 + 0.0009 + 0.0001) / 2.0)));
  CHECK(s.format(2) == "0.37±0.03");
  const double one[] = {3.94};
  CHECK(aggregate_restarts(one).format(1) == "3.9±0.0");
  CHECK(format_fixed(-0.001, 2) == "0.00");
  CHECK(format_fixed(-0.25, 1) == "-0.2");
  CHECK_THROWS_AS(aggregate_restarts(std::span<const double>{}), InputError);
}

TEST_CASE("compensated sums") {
  std::vector<double> v(1000001, 0.1);
  v[0] = 1e10;
  CompensatedSum s;
  for (double x : v) s.add(x);
  CHECK(s.value() == doctest::Approx(1e10 + 100000.0).epsilon(1e-15));
}
