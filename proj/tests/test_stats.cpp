#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "supportlens/error.hpp"
#include "supportlens/stats.hpp"

using namespace supportlens;
using namespace supportlens::stats;

TEST_CASE("pearson: perfect linear relation") {
  std::vector<double> x{1, 2, 3, 4, 5, 6};
  std::vector<double> y;
  for (double v : x) y.push_back(2 * v + 1);
  const auto res = pearson(x, y);
  CHECK(res.r == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(res.p_two_tailed == 0.0);
  CHECK(res.n == 6);
}

TEST_CASE("pearson: small exact case") {
  std::vector<double> x{1, 2, 3};
  std::vector<double> y{1, 2, 4};
  const double expected = 9.0 / (2.0 * std::sqrt(21.0));
  CHECK(std::fabs(pearson(x, y).r - expected) < 1e-15);
  CHECK(expected == doctest::Approx(0.98198).epsilon(1e-5));
}

TEST_CASE("pearson: errors") {
  std::vector<double> a{1, 2, 3};
  std::vector<double> b{1, 2};
  std::vector<double> c{5, 5, 5};
  CHECK_THROWS_AS(pearson(a, b), ArgumentError);
  CHECK_THROWS_AS(pearson(b, b), ArgumentError);
  CHECK_THROWS_AS(pearson(a, c), UndefinedError);
}

TEST_CASE("pearson: matches definitional oracle and symmetry/affine properties") {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> len(3, 500);
  std::normal_distribution<double> norm(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = len(gen);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = norm(gen);
      y[i] = 0.3 * x[i] + norm(gen);
    }
    const auto res = pearson(x, y);
    CHECK(std::fabs(res.r - oracle::pearson_r(x, y)) < 1e-12);
    CHECK(std::fabs(pearson(y, x).r - res.r) < 1e-12);
    std::vector<double> ax(n), nx(n);
    for (int i = 0; i < n; ++i) {
      ax[i] = 3.5 * x[i] + 2.0;
      nx[i] = -0.25 * x[i] + 1.0;
    }
    CHECK(std::fabs(pearson(ax, y).r - res.r) < 1e-12);
    CHECK(std::fabs(pearson(nx, y).r + res.r) < 1e-12);
    CHECK(res.p_two_tailed >= 0.0);
    CHECK(res.p_two_tailed <= 1.0);
  }
}

TEST_CASE("student t: two-tailed p agrees with trapezoidal integration") {
  for (double df : {1.0, 2.0, 3.0, 5.0, 10.0, 30.0, 100.0}) {
    for (double t : {0.0, 0.1, 0.5, 1.0, 1.96, 2.5, 4.0, 8.0}) {
      const double p = student_t_two_tailed(t, df);
      CHECK_MESSAGE(std::fabs(p - oracle::t_two_tailed_trapezoid(t, df)) < 1e-8, "t=", t, " df=", df);
      CHECK(std::fabs(student_t_two_tailed(-t, df) - p) < 1e-15);
    }
  }
  CHECK(student_t_cdf(0.0, 4.0) == doctest::Approx(0.5));
  CHECK(student_t_cdf(-1.0, 4.0) + student_t_cdf(1.0, 4.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("student t: closed form for df=1 (Cauchy) and df=2") {
  for (double t : {0.3, 1.0, 2.0, 7.0}) {
    const double cauchy = 1.0 - 2.0 * std::atan(t) / std::numbers::pi;
    CHECK(std::fabs(student_t_two_tailed(t, 1.0) - cauchy) < 1e-13);
    const double df2 = 1.0 - t / std::sqrt(2.0 + t * t);
    CHECK(std::fabs(student_t_two_tailed(t, 2.0) - df2) < 1e-13);
  }
}

TEST_CASE("pearson p-value decreases with |r| at fixed n") {
  const std::size_t n = 25;
  double previous = 2.0;
  for (int step = 0; step <= 19; ++step) {
    const double target = step * 0.05;
    // x = linspace, y = target * x + sqrt(1 - target^2) * orthogonal component
    std::vector<double> x(n), z(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(i) - 12.0;
      z[i] = (i % 2 == 0 ? 1.0 : -1.0) * (static_cast<double>(i % 5) + 1.0);
    }
    // Gram-Schmidt z against x.
    double zx = 0, xx = 0, zm = 0;
    for (std::size_t i = 0; i < n; ++i) zm += z[i] / n;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] -= zm;
      zx += z[i] * x[i];
      xx += x[i] * x[i];
    }
    double zz = 0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] -= zx / xx * x[i];
      zz += z[i] * z[i];
    }
    for (std::size_t i = 0; i < n; ++i)
      y[i] = target * x[i] / std::sqrt(xx) + std::sqrt(1 - target * target) * z[i] / std::sqrt(zz);
    const auto res = pearson(x, y);
    CHECK(res.r == doctest::Approx(target).epsilon(1e-9));
    CHECK(res.p_two_tailed < previous);
    previous = res.p_two_tailed;
  }
}

TEST_CASE("incomplete beta: boundaries and symmetry") {
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  // I_x(1,1) = x; I_x(a,b) = 1 - I_{1-x}(b,a)
  CHECK(regularized_incomplete_beta(1.0, 1.0, 0.37) == doctest::Approx(0.37).epsilon(1e-14));
  CHECK(regularized_incomplete_beta(2.5, 4.0, 0.3) + regularized_incomplete_beta(4.0, 2.5, 0.7) ==
        doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5), ArgumentError);
  // large-df case used by pearson with n = 500
  CHECK_NOTHROW(regularized_incomplete_beta(249.0, 0.5, 0.99));
}

TEST_CASE("icc: identical raters give 1, identical items give <= 0") {
  RatingsMatrix agree(3, 3, {1, 1, 1, 4, 4, 4, 7, 7, 7});
  CHECK(icc_average(agree) == 1.0);
  CHECK(icc_oneway(agree, IccForm::kSingleMeasures) == 1.0);

  RatingsMatrix flat(3, 3, {1, 4, 7, 1, 4, 7, 1, 4, 7});
  CHECK(icc_average(flat) <= 0.0);
  CHECK(icc_oneway(flat, IccForm::kSingleMeasures) <= 0.0);

  RatingsMatrix nothing(2, 2, {3, 3, 3, 3});
  CHECK_THROWS_AS(icc_average(nothing), UndefinedError);
}

TEST_CASE("icc: 5x3 fixture matches from-scratch ANOVA") {
  const std::vector<std::vector<double>> rows{{6, 7, 6}, {2, 1, 2}, {4, 5, 3}, {7, 7, 6}, {1, 2, 1}};
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  RatingsMatrix m(5, 3, flat);
  CHECK(std::fabs(icc_average(m) - oracle::icc_average(rows)) < 1e-10);
  const auto a = oracle::oneway_anova(rows);
  const double single = (a.ms_between - a.ms_within) / (a.ms_between + 2 * a.ms_within);
  CHECK(std::fabs(icc_oneway(m, IccForm::kSingleMeasures) - single) < 1e-10);
}

TEST_CASE("icc: never exceeds 1 on random matrices") {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> likert(1, 7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 9, k = 2 + trial % 4;
    std::vector<double> v(n * k);
    for (auto& x : v) x = likert(gen);
    try {
      CHECK(icc_average(RatingsMatrix(n, k, v)) <= 1.0 + 1e-12);
    } catch (const UndefinedError&) {
    }
  }
}

TEST_CASE("ratings matrix validation") {
  CHECK_THROWS_AS(RatingsMatrix(2, 2, {1, 2, 3, 8}), ValidationError);
  CHECK_THROWS_AS(RatingsMatrix(1, 2, {1, 2}), ValidationError);
  CHECK_THROWS_AS(RatingsMatrix(2, 2, {1, 2, 3}), ValidationError);
}

TEST_CASE("split_dataset: sizes, disjointness, determinism") {
  auto sizes = [](std::size_t n) {
    const auto s = split_indices(n, {}, 42);
    return std::array<std::size_t, 3>{s.train.size(), s.validation.size(), s.test.size()};
  };
  CHECK(sizes(10) == std::array<std::size_t, 3>{8, 1, 1});
  CHECK(sizes(13) == std::array<std::size_t, 3>{10, 1, 2});
  CHECK_THROWS_AS(split_indices(5, {}, 1), ArgumentError);
  CHECK_THROWS_AS(split_indices(100, {0.5, 0.5, 0.0}, 1), ArgumentError);
  CHECK_THROWS_AS(split_indices(100, {0.5, 0.3, 0.3}, 1), ArgumentError);

  const auto a = split_indices(137, {}, 9);
  const auto b = split_indices(137, {}, 9);
  CHECK(a.train == b.train);
  CHECK(a.validation == b.validation);
  CHECK(a.test == b.test);
  std::vector<int> seen(137, 0);
  for (const auto* part : {&a.train, &a.validation, &a.test})
    for (auto i : *part) ++seen[i];
  for (int c : seen) CHECK(c == 1);
  CHECK(split_indices(137, {}, 10).train != a.train);

  std::vector<std::string> items{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
  const auto split = split_dataset(std::span<const std::string>(items), {}, 3);
  CHECK(split.train.size() == 8);
}
