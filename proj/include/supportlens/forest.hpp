#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace supportlens::forest {

inline constexpr int kForestFormatVersion = 1;

/// Dense row-major matrix of feature values.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return std::span<const double>(data_).subspan(r * cols_, cols_); }
  void append_row(std::span<const double> values);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct ForestParams {
  std::size_t n_trees = 500;
  /// Features tried per split; nullopt means ceil(p / 3).
  std::optional<std::size_t> mtry;
  std::size_t min_leaf = 5;
  /// Fit each tree on a bootstrap resample (off only for single-tree checks).
  bool bootstrap = true;
  /// Worker threads; 0 picks the hardware concurrency. Output does not
  /// depend on this value.
  std::size_t threads = 0;
};

/// Flattened CART node. `feature < 0` marks a leaf.
struct Node {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double value = 0.0;
  std::uint32_t n = 0;
};

class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}
  /// x[feature] <= threshold goes left.
  double predict(std::span<const double> x) const;
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

 private:
  std::vector<Node> nodes_;
};

struct Importance {
  std::string name;
  double value = 0.0;
};

class ForestModel {
 public:
  ForestModel() = default;

  /// Mean of the per-tree leaf values, kept inside target_range(). Throws
  /// ArgumentError when |x| differs from the schema width.
  double predict(std::span<const double> x) const;

  /// Top-k features, descending, ties alphabetical. Throws ArgumentError
  /// unless 1 <= k <= p.
  std::vector<Importance> importance_report(std::size_t k) const;

  const ForestParams& params() const noexcept { return params_; }
  std::size_t mtry() const noexcept { return mtry_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::pair<double, double> target_range() const noexcept { return target_range_; }
  const std::vector<std::string>& schema_names() const noexcept { return schema_names_; }
  const std::vector<double>& importances() const noexcept { return importances_; }
  /// True when the training targets had no variance; importances are then
  /// uniform by convention.
  bool importance_degenerate() const noexcept { return degenerate_; }
  const std::vector<Tree>& trees() const noexcept { return trees_; }

  std::string to_json() const;
  void save(const std::filesystem::path& path) const;
  /// Throws LoadError for unreadable, truncated, invalid or
  /// unsupported-version files; never returns a partial model.
  static ForestModel from_json(std::string_view text);
  static ForestModel load(const std::filesystem::path& path);

 private:
  friend ForestModel train_forest(const Matrix&, std::span<const double>, std::span<const std::string>,
                                  const ForestParams&, std::uint64_t, std::span<const std::string>);

  ForestParams params_;
  std::size_t mtry_ = 0;
  std::uint64_t seed_ = 0;
  std::pair<double, double> target_range_{0.0, 0.0};
  std::vector<std::string> schema_names_;
  std::vector<double> importances_;
  bool degenerate_ = false;
  std::vector<Tree> trees_;
};

/// Random-forest regression. Tree t uses the seed `seed + t` for its
/// bootstrap and per-node feature sampling. When `row_keys` is non-empty
/// the rows are first put in a canonical order (stable sort by key), which
/// makes the model independent of the caller's row order.
///
/// Throws TrainingError for fewer than 2 rows, ValidationError for NaN/Inf
/// or shape mismatches, ArgumentError for bad parameters.
ForestModel train_forest(const Matrix& x, std::span<const double> y, std::span<const std::string> schema_names,
                         const ForestParams& params, std::uint64_t seed, std::span<const std::string> row_keys = {});

inline double predict(const ForestModel& model, std::span<const double> x) { return model.predict(x); }

}  // namespace supportlens::forest
