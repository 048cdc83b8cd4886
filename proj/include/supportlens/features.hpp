#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "supportlens/lexicons.hpp"
#include "supportlens/textproc.hpp"
#include "supportlens/topics.hpp"

namespace supportlens::features {

/// Ordered feature names. Category counts, structural counts, POS counts,
/// lexicon counts, length measures, then topic proportions.
class FeatureSchema {
 public:
  FeatureSchema() = default;

  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t dimension() const noexcept { return names_.size(); }
  std::size_t n_categories() const noexcept { return n_categories_; }
  std::size_t n_topics() const noexcept { return n_topics_; }
  /// Throws ArgumentError for an unknown name.
  std::size_t index_of(std::string_view name) const;

  bool operator==(const FeatureSchema&) const = default;

 private:
  friend FeatureSchema feature_schema(std::span<const std::string>, std::size_t);
  std::vector<std::string> names_;
  std::size_t n_categories_ = 0;
  std::size_t n_topics_ = 0;
};

/// Throws ConfigError when topics < 1 or names collide.
FeatureSchema feature_schema(std::span<const std::string> categories, std::size_t topics);

/// Sentences opening with "you" + modal, or "please" + verb/modal.
std::size_t count_advice_requests(std::span<const text::Sentence> sentences);

/// Letters-only tokens (apostrophes allowed inside) and their length in code points.
bool is_alphabetic_word(std::string_view surface);
std::size_t utf8_length(std::string_view s);

/// Binds the resources one schema needs. Construction checks that the
/// schema agrees with the lexicon categories and topic count.
class Featurizer {
 public:
  Featurizer(const lex::LexiconSet& lexicons, const topics::Stoplist& stoplist, const topics::TopicModel& model,
             FeatureSchema schema);

  const FeatureSchema& schema() const noexcept { return schema_; }
  std::vector<double> extract(std::string_view title) const;
  /// Row per title; threads = 0 means hardware concurrency.
  std::vector<std::vector<double>> extract_all(std::span<const std::string> titles, std::size_t threads = 0) const;

 private:
  const lex::LexiconSet* lexicons_;
  const topics::Stoplist* stoplist_;
  const topics::TopicModel* model_;
  FeatureSchema schema_;
};

std::vector<double> extract_features(std::string_view title, const lex::LexiconSet& lexicons,
                                     const topics::Stoplist& stoplist, const topics::TopicModel& model,
                                     const FeatureSchema& schema);

/// Header row of schema names, then `key` column first when keys are given.
void write_feature_csv(std::ostream& out, const FeatureSchema& schema, std::span<const std::vector<double>> rows,
                       std::span<const std::string> keys = {});

}  // namespace supportlens::features
