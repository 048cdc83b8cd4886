#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "supportlens/rng.hpp"

namespace supportlens::topics {

inline constexpr int kModelFormatVersion = 1;

class Stoplist {
 public:
  Stoplist() = default;
  explicit Stoplist(std::unordered_set<std::string> words) : words_(std::move(words)) {}
  static Stoplist load(const std::filesystem::path& path);
  bool contains(std::string_view lower) const { return words_.contains(std::string(lower)); }
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

/// Lowercased word tokens of `title` that carry a letter and are not
/// stopwords, in order.
std::vector<std::string> topic_terms(std::string_view title, const Stoplist& stoplist);

struct LdaParams {
  std::size_t topics = 20;
  /// Symmetric document-topic prior; nullopt means 50 / topics.
  std::optional<double> alpha;
  double beta = 0.01;
  std::size_t iterations = 1000;
  std::size_t inference_sweeps = 20;
  /// Terms must occur in at least this many documents.
  std::size_t min_doc_freq = 2;
  std::uint64_t seed = 0;

  double resolved_alpha() const { return alpha ? *alpha : 50.0 / static_cast<double>(topics); }
};

/// Trained LDA parameters. Immutable after construction.
class TopicModel {
 public:
  TopicModel() = default;
  /// Throws ValidationError unless every phi row is a strictly positive
  /// distribution (sum 1 +- 1e-9) over a duplicate-free vocabulary.
  TopicModel(std::size_t topics, double alpha, double beta, std::vector<std::string> vocab, std::vector<double> phi,
             std::uint64_t seed, std::size_t iterations, std::size_t inference_sweeps);

  std::size_t topics() const noexcept { return topics_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t iterations() const noexcept { return iterations_; }
  std::size_t inference_sweeps() const noexcept { return inference_sweeps_; }
  const std::vector<std::string>& vocab() const noexcept { return vocab_; }
  std::optional<std::uint32_t> word_id(std::string_view word) const;

  double phi(std::size_t topic, std::size_t word) const { return phi_[topic * vocab_.size() + word]; }
  std::span<const double> phi_row(std::size_t topic) const {
    return std::span<const double>(phi_).subspan(topic * vocab_.size(), vocab_.size());
  }

  /// Fold-in Gibbs over a new document with phi held fixed; returns the
  /// smoothed topic proportions. No in-vocabulary terms gives 1/K each.
  /// The sampler seed is derived from the model seed and the terms, so the
  /// result depends only on (model, terms).
  std::vector<double> infer(std::span<const std::string> terms) const;

  /// The k most probable words of `topic`, ties alphabetical. Throws
  /// ArgumentError on a bad topic index or k == 0.
  std::vector<std::string> top_words(std::size_t topic, std::size_t k) const;

  void save(const std::filesystem::path& path) const;
  std::string to_json() const;
  /// Throws LoadError on unreadable, truncated, mismatched-version or
  /// invalid files.
  static TopicModel load(const std::filesystem::path& path);
  static TopicModel from_json(std::string_view text);

 private:
  std::size_t topics_ = 0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  std::vector<std::string> vocab_;
  std::vector<double> phi_;
  std::uint64_t seed_ = 0;
  std::size_t iterations_ = 0;
  std::size_t inference_sweeps_ = 0;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Collapsed Gibbs sampling state for LDA over integer word ids.
class GibbsSampler {
 public:
  GibbsSampler(std::vector<std::vector<std::uint32_t>> docs, std::size_t vocab_size, std::size_t topics, double alpha,
               double beta, std::uint64_t seed);

  /// One pass over every token, resampling its topic from
  /// (n_dk + alpha)(n_kw + beta) / (n_k + V beta) with the token removed.
  void sweep();

  /// Count conservation: every n_dk row sums to its document length, every
  /// n_kw row to n_k, totals agree with the assignments.
  bool counts_consistent() const;

  std::size_t topics() const noexcept { return topics_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  std::size_t total_tokens() const noexcept { return total_tokens_; }
  std::uint32_t doc_topic(std::size_t d, std::size_t k) const { return n_dk_[d * topics_ + k]; }
  std::uint32_t topic_word(std::size_t k, std::size_t w) const { return n_kw_[k * vocab_size_ + w]; }
  std::uint32_t topic_total(std::size_t k) const { return n_k_[k]; }
  std::size_t documents() const noexcept { return docs_.size(); }

  /// (n_kw + beta) / (n_k + V beta), row-major.
  std::vector<double> phi() const;

 private:
  std::vector<std::vector<std::uint32_t>> docs_;
  std::vector<std::vector<std::uint32_t>> z_;
  std::size_t vocab_size_;
  std::size_t topics_;
  double alpha_;
  double beta_;
  std::vector<std::uint32_t> n_dk_;
  std::vector<std::uint32_t> n_kw_;
  std::vector<std::uint32_t> n_k_;
  std::size_t total_tokens_ = 0;
  std::vector<double> weights_;
  Rng rng_;
};

struct TrainOptions {
  /// Check count conservation after every sweep and throw TrainingError on
  /// violation. Always on in builds without NDEBUG.
  bool verify_counts = false;
  /// Called after each sweep with the 1-based sweep number.
  std::function<void(const GibbsSampler&, std::size_t)> on_sweep;
};

/// Builds the vocabulary (document frequency >= params.min_doc_freq), drops
/// documents left empty, and runs params.iterations Gibbs sweeps. Throws
/// ArgumentError on bad parameters and TrainingError when nothing is left
/// to train on.
TopicModel train_lda(std::span<const std::vector<std::string>> docs, const LdaParams& params,
                     const TrainOptions& options = {});

/// exp(-mean log p(w)) of `docs` under the model, using fold-in topic
/// proportions per document. Out-of-vocabulary terms are ignored.
double perplexity(const TopicModel& model, std::span<const std::vector<std::string>> docs);

}  // namespace supportlens::topics
