#pragma once

// Independent reference computations used to check the library. Nothing
// here calls into supportlens.

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <memory>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

// Definitional two-pass Pearson r in long double.
inline double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double num = 0, dx2 = 0, dy2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (x[i] - mx) * (y[i] - my);
    dx2 += (x[i] - mx) * (x[i] - mx);
    dy2 += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(num / std::sqrt(dx2 * dy2));
}

inline long double t_density(long double t, long double df) {
  const long double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) /
                        std::sqrt(df * std::numbers::pi_v<long double>);
  return c * std::pow(1 + t * t / df, -(df + 1) / 2);
}

// Two-tailed p by composite trapezoidal integration of the t density over
// [0, |t|].
inline double t_two_tailed_trapezoid(double t, double df, double step = 2e-5) {
  const long double b = std::fabs(t);
  const auto n = static_cast<std::size_t>(std::ceil(b / step));
  if (n == 0) return 1.0;
  const long double h = b / n;
  long double sum = 0.5L * (t_density(0, df) + t_density(b, df));
  for (std::size_t i = 1; i < n; ++i) sum += t_density(h * i, df);
  return static_cast<double>(1.0L - 2.0L * h * sum);
}

// One-way ANOVA from total and between sums of squares.
struct Anova {
  double ms_between;
  double ms_within;
};

inline Anova oneway_anova(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  const std::size_t k = rows.front().size();
  long double grand = 0;
  for (const auto& r : rows)
    for (double v : r) grand += v;
  grand /= static_cast<long double>(n * k);
  long double ss_total = 0;
  for (const auto& r : rows)
    for (double v : r) ss_total += (v - grand) * (v - grand);
  long double ss_between = 0;
  for (const auto& r : rows) {
    long double m = 0;
    for (double v : r) m += v;
    m /= k;
    ss_between += k * (m - grand) * (m - grand);
  }
  const long double ss_within = ss_total - ss_between;
  return {static_cast<double>(ss_between / (n - 1)), static_cast<double>(ss_within / (n * (k - 1)))};
}

inline double icc_average(const std::vector<std::vector<double>>& rows) {
  const Anova a = oneway_anova(rows);
  return (a.ms_between - a.ms_within) / a.ms_between;
}

// Single regression tree on one feature, grown by trying every threshold
// between distinct sorted values and keeping the one with the largest drop in
// summed squared error.
struct CartNode {
  bool leaf = true;
  double threshold = 0;
  double value = 0;
  std::unique_ptr<CartNode> left, right;
};

inline long double sse(const std::vector<std::pair<double, double>>& pts) {
  if (pts.empty()) return 0;
  long double m = 0;
  for (const auto& p : pts) m += p.second;
  m /= pts.size();
  long double s = 0;
  for (const auto& p : pts) s += (p.second - m) * (p.second - m);
  return s;
}

inline std::unique_ptr<CartNode> cart_exhaustive(std::vector<std::pair<double, double>> pts, std::size_t min_leaf) {
  auto node = std::make_unique<CartNode>();
  long double m = 0;
  for (const auto& p : pts) m += p.second;
  node->value = static_cast<double>(m / pts.size());
  std::vector<double> xs;
  for (const auto& p : pts) xs.push_back(p.first);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  const long double parent = sse(pts);
  long double best = 0;
  double best_t = 0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double t = 0.5 * (xs[i] + xs[i + 1]);
    std::vector<std::pair<double, double>> l, r;
    for (const auto& p : pts) (p.first <= t ? l : r).push_back(p);
    if (l.size() < min_leaf || r.size() < min_leaf) continue;
    const long double gain = parent - sse(l) - sse(r);
    if (gain > best + 1e-12L) {
      best = gain;
      best_t = t;
    }
  }
  if (best <= 1e-12L) return node;
  std::vector<std::pair<double, double>> l, r;
  for (const auto& p : pts) (p.first <= best_t ? l : r).push_back(p);
  node->leaf = false;
  node->threshold = best_t;
  node->left = cart_exhaustive(l, min_leaf);
  node->right = cart_exhaustive(r, min_leaf);
  return node;
}

inline double cart_predict(const CartNode& n, double x) {
  if (n.leaf) return n.value;
  return cart_predict(x <= n.threshold ? *n.left : *n.right, x);
}

}  // namespace oracle
