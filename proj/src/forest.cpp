#include "supportlens/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "supportlens/error.hpp"
#include "supportlens/rng.hpp"

namespace supportlens::forest {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct SplitChoice {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double reduction = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> y, std::size_t mtry, std::size_t min_leaf, Rng& rng,
              std::vector<double>& importance)
      : x_(x), y_(y), mtry_(mtry), min_leaf_(min_leaf), rng_(rng), importance_(importance), features_(x.cols()) {
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  Tree build(std::vector<std::uint32_t> rows) {
    rows_ = std::move(rows);
    nodes_.clear();
    grow(0, rows_.size());
    return Tree(std::move(nodes_));
  }

 private:
  std::uint32_t grow(std::size_t begin, std::size_t end) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    const std::size_t n = end - begin;

    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = begin; i < end; ++i) {
      const double v = y_[rows_[i]];
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }

    SplitChoice best;
    if (n >= 2 * min_leaf_ && lo < hi) best = find_split(begin, end);

    if (best.feature < 0) {
      Node& leaf = nodes_[id];
      leaf.value = std::clamp(sum / static_cast<double>(n), lo, hi);
      leaf.n = static_cast<std::uint32_t>(n);
      return id;
    }

    importance_[static_cast<std::size_t>(best.feature)] += best.reduction;
    const auto f = static_cast<std::size_t>(best.feature);
    const auto mid_it = std::stable_partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                                              rows_.begin() + static_cast<std::ptrdiff_t>(end),
                                              [&](std::uint32_t r) { return x_.at(r, f) <= best.threshold; });
    const auto mid = static_cast<std::size_t>(mid_it - rows_.begin());
    const auto left = grow(begin, mid);
    const auto right = grow(mid, end);
    Node& node = nodes_[id];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    node.n = static_cast<std::uint32_t>(n);
    node.value = sum / static_cast<double>(n);
    return id;
  }

  // Best variance-reduction split over mtry sampled features. Features are
  // scanned in ascending index order and thresholds ascending, replacing the
  // incumbent only on a strictly larger reduction.
  SplitChoice find_split(std::size_t begin, std::size_t end) {
    const std::size_t p = features_.size();
    std::vector<std::size_t> candidates;
    if (mtry_ >= p) {
      candidates.assign(features_.begin(), features_.end());
    } else {
      for (std::size_t i = 0; i < mtry_; ++i) {
        const auto j = i + static_cast<std::size_t>(rng_.uniform_index(p - i));
        std::swap(features_[i], features_[j]);
      }
      candidates.assign(features_.begin(), features_.begin() + static_cast<std::ptrdiff_t>(mtry_));
    }
    std::sort(candidates.begin(), candidates.end());

    const std::size_t n = end - begin;
    SplitChoice best;
    pairs_.resize(n);
    for (auto f : candidates) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto r = rows_[begin + i];
        pairs_[i] = {x_.at(r, f), y_[r]};
      }
      std::sort(pairs_.begin(), pairs_.end());
      double total = 0.0;
      for (const auto& [_, v] : pairs_) total += v;
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += pairs_[i].second;
        const std::size_t n_left = i + 1;
        const std::size_t n_right = n - n_left;
        if (pairs_[i].first == pairs_[i + 1].first) continue;
        if (n_left < min_leaf_ || n_right < min_leaf_) continue;
        const double mean_left = left_sum / static_cast<double>(n_left);
        const double mean_right = (total - left_sum) / static_cast<double>(n_right);
        const double diff = mean_left - mean_right;
        const double reduction =
            static_cast<double>(n_left) * static_cast<double>(n_right) / static_cast<double>(n) * diff * diff;
        if (reduction > best.reduction) {
          double threshold = 0.5 * (pairs_[i].first + pairs_[i + 1].first);
          if (!(threshold < pairs_[i + 1].first)) threshold = pairs_[i].first;
          best = {static_cast<std::int32_t>(f), threshold, reduction};
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  std::span<const double> y_;
  std::size_t mtry_;
  std::size_t min_leaf_;
  Rng& rng_;
  std::vector<double>& importance_;
  std::vector<std::size_t> features_;
  std::vector<std::uint32_t> rows_;
  std::vector<Node> nodes_;
  std::vector<std::pair<double, double>> pairs_;
};

ordered_json node_to_json(const Tree& tree, std::uint32_t id) {
  const Node& node = tree.nodes()[id];
  ordered_json j;
  if (node.feature < 0) {
    j["value"] = node.value;
    j["n"] = node.n;
    return j;
  }
  j["feature"] = node.feature;
  j["threshold"] = node.threshold;
  j["n"] = node.n;
  j["left"] = node_to_json(tree, node.left);
  j["right"] = node_to_json(tree, node.right);
  return j;
}

std::uint32_t node_from_json(const json& j, std::vector<Node>& nodes, std::size_t n_features, std::size_t depth) {
  if (depth > 10000) throw LoadError("tree too deep");
  if (!j.is_object()) throw LoadError("tree node is not an object");
  const auto id = static_cast<std::uint32_t>(nodes.size());
  nodes.emplace_back();
  const auto n = j.at("n").get<std::uint32_t>();
  if (j.contains("feature")) {
    const auto f = j.at("feature").get<std::int32_t>();
    const auto t = j.at("threshold").get<double>();
    if (f < 0 || static_cast<std::size_t>(f) >= n_features) throw LoadError("tree node feature index out of range");
    if (!std::isfinite(t)) throw LoadError("tree node threshold is not finite");
    if (!j.contains("left") || !j.contains("right")) throw LoadError("internal tree node lacks a child");
    const auto left = node_from_json(j.at("left"), nodes, n_features, depth + 1);
    const auto right = node_from_json(j.at("right"), nodes, n_features, depth + 1);
    Node& node = nodes[id];
    node.feature = f;
    node.threshold = t;
    node.left = left;
    node.right = right;
    node.n = n;
  } else {
    const auto v = j.at("value").get<double>();
    if (!std::isfinite(v)) throw LoadError("tree leaf value is not finite");
    nodes[id].value = v;
    nodes[id].n = n;
  }
  return id;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw ArgumentError("matrix data does not match its shape");
}

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) throw ArgumentError("row width does not match matrix columns");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

double Tree::predict(std::span<const double> x) const {
  std::uint32_t id = 0;
  while (nodes_[id].feature >= 0) {
    const Node& node = nodes_[id];
    id = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return nodes_[id].value;
}

double ForestModel::predict(std::span<const double> x) const {
  if (x.size() != schema_names_.size())
    throw ArgumentError("feature vector has " + std::to_string(x.size()) + " values, model expects " +
                        std::to_string(schema_names_.size()));
  double sum = 0.0;
  for (const auto& tree : trees_) sum += tree.predict(x);
  return std::clamp(sum / static_cast<double>(trees_.size()), target_range_.first, target_range_.second);
}

std::vector<Importance> ForestModel::importance_report(std::size_t k) const {
  if (k < 1 || k > importances_.size())
    throw ArgumentError("importance_report needs 1 <= k <= " + std::to_string(importances_.size()));
  std::vector<Importance> all;
  for (std::size_t i = 0; i < importances_.size(); ++i) all.push_back({schema_names_[i], importances_[i]});
  std::sort(all.begin(), all.end(), [](const Importance& a, const Importance& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.name < b.name;
  });
  all.resize(k);
  return all;
}

ForestModel train_forest(const Matrix& x_in, std::span<const double> y_in, std::span<const std::string> schema_names,
                         const ForestParams& params, std::uint64_t seed, std::span<const std::string> row_keys) {
  const std::size_t n = x_in.rows();
  const std::size_t p = x_in.cols();
  if (y_in.size() != n)
    throw ValidationError("feature matrix has " + std::to_string(n) + " rows but there are " +
                          std::to_string(y_in.size()) + " targets");
  if (n < 2) throw TrainingError("random forest needs at least 2 samples, got " + std::to_string(n));
  if (schema_names.size() != p) throw ValidationError("schema names do not match the feature matrix width");
  if (!row_keys.empty() && row_keys.size() != n) throw ValidationError("row keys do not match the number of rows");
  if (p == 0) throw ValidationError("feature matrix has no columns");
  if (params.n_trees < 1) throw ArgumentError("n_trees must be >= 1");
  if (params.min_leaf < 1) throw ArgumentError("min_leaf must be >= 1");
  const std::size_t mtry = params.mtry ? *params.mtry : (p + 2) / 3;
  if (mtry < 1 || mtry > p) throw ArgumentError("mtry must be in [1, " + std::to_string(p) + "]");
  for (std::size_t r = 0; r < n; ++r) {
    if (!std::isfinite(y_in[r])) throw ValidationError("target " + std::to_string(r) + " is NaN or infinite");
    for (std::size_t c = 0; c < p; ++c)
      if (!std::isfinite(x_in.at(r, c)))
        throw ValidationError("feature value at row " + std::to_string(r) + ", column " + std::to_string(c) +
                              " is NaN or infinite");
  }

  // Canonical row order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (!row_keys.empty())
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row_keys[a] < row_keys[b]; });
  Matrix x(n, p);
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < p; ++c) x.at(r, c) = x_in.at(order[r], c);
    y[r] = y_in[order[r]];
  }

  ForestModel model;
  model.params_ = params;
  model.mtry_ = mtry;
  model.seed_ = seed;
  model.schema_names_.assign(schema_names.begin(), schema_names.end());
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  model.target_range_ = {*lo, *hi};
  model.trees_.resize(params.n_trees);

  std::vector<std::vector<double>> tree_importance(params.n_trees, std::vector<double>(p, 0.0));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < params.n_trees; t = next++) {
      Rng rng(seed + t);
      std::vector<std::uint32_t> rows(n);
      if (params.bootstrap) {
        for (auto& r : rows) r = static_cast<std::uint32_t>(rng.uniform_index(n));
      } else {
        std::iota(rows.begin(), rows.end(), std::uint32_t{0});
      }
      TreeBuilder builder(x, y, mtry, params.min_leaf, rng, tree_importance[t]);
      model.trees_[t] = builder.build(std::move(rows));
    }
  };
  std::size_t threads = params.threads ? params.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, params.n_trees);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  std::vector<double> importance(p, 0.0);
  for (const auto& ti : tree_importance)
    for (std::size_t f = 0; f < p; ++f) importance[f] += ti[f];
  const double total = std::accumulate(importance.begin(), importance.end(), 0.0);
  if (total > 0.0) {
    for (auto& v : importance) v /= total;
  } else {
    model.degenerate_ = true;
    std::fill(importance.begin(), importance.end(), 1.0 / static_cast<double>(p));
  }
  model.importances_ = std::move(importance);
  return model;
}

std::string ForestModel::to_json() const {
  ordered_json j;
  j["format_version"] = kForestFormatVersion;
  ordered_json params;
  params["n_trees"] = params_.n_trees;
  params["mtry"] = mtry_;
  params["min_leaf"] = params_.min_leaf;
  params["bootstrap"] = params_.bootstrap;
  j["params"] = params;
  j["seed"] = seed_;
  j["rng_id"] = std::string(kRngId);
  j["target_range"] = {target_range_.first, target_range_.second};
  j["schema_names"] = schema_names_;
  j["importances"] = importances_;
  j["importance_degenerate"] = degenerate_;
  ordered_json trees = ordered_json::array();
  for (const auto& t : trees_) trees.push_back(node_to_json(t, 0));
  j["trees"] = std::move(trees);
  return j.dump() + "\n";
}

void ForestModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json();
  if (!out) throw IoError("write failure on " + path.string());
}

ForestModel ForestModel::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(std::string("forest model is not valid JSON (truncated or corrupted): ") + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kForestFormatVersion)
      throw LoadError("unsupported forest model format_version " + std::to_string(version) +
                      " (supported: " + std::to_string(kForestFormatVersion) + ")");
    ForestModel m;
    const auto& params = j.at("params");
    m.params_.n_trees = params.at("n_trees").get<std::size_t>();
    m.mtry_ = params.at("mtry").get<std::size_t>();
    m.params_.mtry = m.mtry_;
    m.params_.min_leaf = params.at("min_leaf").get<std::size_t>();
    m.params_.bootstrap = params.at("bootstrap").get<bool>();
    m.seed_ = j.at("seed").get<std::uint64_t>();
    const auto range = j.at("target_range").get<std::vector<double>>();
    if (range.size() != 2 || !(range[0] <= range[1])) throw LoadError("invalid target_range");
    m.target_range_ = {range[0], range[1]};
    m.schema_names_ = j.at("schema_names").get<std::vector<std::string>>();
    m.importances_ = j.at("importances").get<std::vector<double>>();
    m.degenerate_ = j.at("importance_degenerate").get<bool>();
    if (m.schema_names_.empty() || m.importances_.size() != m.schema_names_.size())
      throw LoadError("importances do not match schema_names");
    double sum = 0.0;
    for (double v : m.importances_) {
      if (!(v >= 0.0)) throw LoadError("negative importance");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw LoadError("importances do not sum to 1");
    const auto& trees = j.at("trees");
    if (!trees.is_array() || trees.size() != m.params_.n_trees) throw LoadError("tree count does not match params");
    for (const auto& t : trees) {
      std::vector<Node> nodes;
      node_from_json(t, nodes, m.schema_names_.size(), 0);
      m.trees_.emplace_back(std::move(nodes));
    }
    return m;
  } catch (const json::exception& e) {
    throw LoadError(std::string("forest model has missing or mistyped fields: ") + e.what());
  }
}

ForestModel ForestModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open forest model " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace supportlens::forest
