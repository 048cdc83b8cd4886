#include "supportlens/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "supportlens/error.hpp"

namespace supportlens::stats {

namespace {

constexpr int kBetaMaxIterations = 200;
constexpr double kBetaTolerance = 1e-14;
constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a,b) (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kBetaMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kBetaTolerance) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge (a=" + std::to_string(a) +
                       ", b=" + std::to_string(b) + ", x=" + std::to_string(x) + ")");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ArgumentError("incomplete beta requires a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("incomplete beta requires x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_tailed(double t, double df) {
  if (!(df > 0.0)) throw ArgumentError("degrees of freedom must be positive");
  if (std::isnan(t)) throw ArgumentError("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_tailed(t, df);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw ArgumentError("pearson: length mismatch (" + std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()) + ")");
  const std::size_t n = x.size();
  if (n < 3) throw ArgumentError("pearson: need at least 3 samples, got " + std::to_string(n));
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedError("undefined correlation: constant input vector");
  double r = sxy / std::sqrt(sxx * syy);
  r = std::clamp(r, -1.0, 1.0);

  CorrelationResult out;
  out.r = r;
  out.n = n;
  const double df = static_cast<double>(n - 2);
  const double one_minus = 1.0 - r * r;
  if (one_minus <= 0.0) {
    out.p_two_tailed = 0.0;
  } else {
    const double t = r * std::sqrt(df / one_minus);
    out.p_two_tailed = std::clamp(student_t_two_tailed(t, df), 0.0, 1.0);
  }
  return out;
}

RatingsMatrix::RatingsMatrix(std::size_t items, std::size_t raters, std::vector<double> row_major)
    : items_(items), raters_(raters), values_(std::move(row_major)) {
  if (items_ < 2 || raters_ < 2) throw ValidationError("ratings matrix needs at least 2 items and 2 raters");
  if (values_.size() != items_ * raters_) throw ValidationError("ratings matrix size does not match shape");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!(v >= 1.0 && v <= 7.0))
      throw ValidationError("rating out of [1,7] at item " + std::to_string(i / raters_) + ", rater " +
                            std::to_string(i % raters_));
  }
}

double icc_oneway(const RatingsMatrix& m, IccForm form) {
  const std::size_t n = m.items();
  const std::size_t k = m.raters();
  double grand = 0.0;
  std::vector<double> item_mean(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) item_mean[i] += m.at(i, j);
    grand += item_mean[i];
    item_mean[i] /= static_cast<double>(k);
  }
  grand /= static_cast<double>(n * k);
  double ss_between = 0.0;
  double ss_within = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = item_mean[i] - grand;
    ss_between += static_cast<double>(k) * d * d;
    for (std::size_t j = 0; j < k; ++j) {
      const double e = m.at(i, j) - item_mean[i];
      ss_within += e * e;
    }
  }
  const double ms_between = ss_between / static_cast<double>(n - 1);
  const double ms_within = ss_within / static_cast<double>(n * (k - 1));
  if (ms_within == 0.0) {
    if (ms_between == 0.0) throw UndefinedError("ICC undefined: no variance between or within items");
    return 1.0;
  }
  if (form == IccForm::kAverageMeasures) {
    if (ms_between == 0.0) return -std::numeric_limits<double>::infinity();
    return (ms_between - ms_within) / ms_between;
  }
  return (ms_between - ms_within) / (ms_between + static_cast<double>(k - 1) * ms_within);
}

SplitIndices split_indices(std::size_t n, const SplitFractions& f, std::uint64_t seed) {
  if (!(f.train > 0.0 && f.validation > 0.0 && f.test > 0.0))
    throw ArgumentError("split fractions must be positive");
  if (std::fabs(f.train + f.validation + f.test - 1.0) > 1e-9)
    throw ArgumentError("split fractions must sum to 1");
  const double dn = static_cast<double>(n);
  // The small epsilon keeps exact products such as 0.8 * 10 from flooring down.
  const auto n_train = static_cast<std::size_t>(std::floor(f.train * dn + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(f.validation * dn + 1e-9));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n)
    throw ArgumentError("too few items (" + std::to_string(n) + ") for a non-empty three-way split");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                        order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return out;
}

}  // namespace supportlens::stats
