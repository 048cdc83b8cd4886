#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "supportlens/rng.hpp"

namespace supportlens::stats {

struct CorrelationResult {
  double r = 0.0;
  std::size_t n = 0;
  double p_two_tailed = 1.0;
};

/// Pearson product-moment correlation with a two-tailed p-value from
/// Student's t on n-2 degrees of freedom.
///
/// Throws ArgumentError on length mismatch or n < 3, UndefinedError when
/// either vector is constant.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

/// I_x(a, b) by Lentz's continued fraction. Throws NumericalError when the
/// fraction fails to converge within the iteration cap.
double regularized_incomplete_beta(double a, double b, double x);

/// P(T <= t) for Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

/// P(|T| >= |t|).
double student_t_two_tailed(double t, double df);

/// Complete items x raters matrix of Likert ratings in [1, 7].
class RatingsMatrix {
 public:
  /// `row_major` holds items * raters values. Throws ValidationError on
  /// shape or range violations.
  RatingsMatrix(std::size_t items, std::size_t raters, std::vector<double> row_major);

  std::size_t items() const noexcept { return items_; }
  std::size_t raters() const noexcept { return raters_; }
  double at(std::size_t item, std::size_t rater) const { return values_[item * raters_ + rater]; }

 private:
  std::size_t items_;
  std::size_t raters_;
  std::vector<double> values_;
};

enum class IccForm { kAverageMeasures, kSingleMeasures };

/// One-way random-effects intraclass correlation, ICC(1) / ICC(1,k).
///
/// Average measures: (MSB - MSW) / MSB. Single measures:
/// (MSB - MSW) / (MSB + (k - 1) MSW). MSW == 0 gives 1.0; MSB == MSW == 0
/// throws UndefinedError. MSB == 0 with MSW > 0 yields -infinity for the
/// average form (no between-item signal at all).
double icc_oneway(const RatingsMatrix& m, IccForm form = IccForm::kAverageMeasures);

inline double icc_average(const RatingsMatrix& m) { return icc_oneway(m, IccForm::kAverageMeasures); }

struct SplitFractions {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of [0, n) sliced into floor(train*n), floor(validation*n)
/// and the remainder. Throws ArgumentError when any part would be empty or
/// the fractions are not positive and summing to 1.
SplitIndices split_indices(std::size_t n, const SplitFractions& fractions, std::uint64_t seed);

template <typename T>
struct Split {
  std::vector<T> train;
  std::vector<T> validation;
  std::vector<T> test;
};

template <typename T>
Split<T> split_dataset(std::span<const T> items, const SplitFractions& fractions, std::uint64_t seed) {
  const SplitIndices idx = split_indices(items.size(), fractions, seed);
  Split<T> out;
  for (auto i : idx.train) out.train.push_back(items[i]);
  for (auto i : idx.validation) out.validation.push_back(items[i]);
  for (auto i : idx.test) out.test.push_back(items[i]);
  return out;
}

double mean(std::span<const double> v);

}  // namespace supportlens::stats
