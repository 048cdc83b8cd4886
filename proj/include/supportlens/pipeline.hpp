#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "supportlens/corpus.hpp"
#include "supportlens/features.hpp"
#include "supportlens/forest.hpp"
#include "supportlens/stats.hpp"

namespace supportlens::pipeline {

/// Ordered key=value records.
class RunLog {
 public:
  void add(std::string key, std::string value);
  void add(std::string key, double value);
  void add(std::string key, std::int64_t value);
  void add(std::string key, std::size_t value) { add(std::move(key), static_cast<std::int64_t>(value)); }

  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }
  /// Last value recorded under `key`.
  std::optional<std::string> find(std::string_view key) const;
  void write(std::ostream& out) const;
  void append_to(const std::filesystem::path& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Shortest text that reads back to the same double.
std::string format_double(double v);

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, embedded newlines.
/// Each record carries the 1-based line it starts on.
struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};
std::vector<CsvRecord> read_csv(std::istream& in);
std::string csv_escape(std::string_view field);

// ---------------------------------------------------------------------------
// Annotations

struct AnnotationRow {
  std::string title;
  std::string annotator_id;
  double emo_rating = 0;
  double info_rating = 0;
};

struct AnnotatedTitle {
  std::string title;
  std::vector<std::string> annotators;
  std::vector<double> emo_ratings;
  std::vector<double> info_ratings;
  double emo_mean = 0;
  double info_mean = 0;
};

/// Header comment written by write_annotations_csv. Scale anchors:
/// 1 = support was not expressed, 7 = expressed a lot.
inline constexpr std::string_view kAnnotationHeader = "title,annotator_id,emo_rating,info_rating";

void write_annotations_csv(std::ostream& out, std::span<const AnnotationRow> rows);

/// Titles in first-appearance order. Ratings outside [1,7], a missing column
/// or a repeated (title, annotator) pair raise ValidationError naming the
/// line. ICC per dimension goes to `log` when given.
std::vector<AnnotatedTitle> read_annotations(std::istream& in, RunLog* log = nullptr);
std::vector<AnnotatedTitle> load_annotations(const std::filesystem::path& path, RunLog* log = nullptr);

/// One-way average-measures ICC over the titles that carry the largest
/// rating count. Empty when fewer than two such titles or raters exist, or
/// the statistic is undefined.
struct IccSummary {
  std::optional<double> emo;
  std::optional<double> info;
  std::size_t items = 0;
  std::size_t raters = 0;
};
IccSummary annotation_icc(std::span<const AnnotatedTitle> titles);

// ---------------------------------------------------------------------------
// Support models

enum class Dimension { kEmotional, kInformational };
std::string_view dimension_name(Dimension d);

struct SupportModel {
  forest::ForestModel model;
  std::size_t n_train = 0, n_validation = 0, n_test = 0;
  std::optional<stats::CorrelationResult> validation;
  std::optional<stats::CorrelationResult> test;
  /// Why `test` is empty.
  std::string undefined_reason;
  bool degenerate = false;
};

inline constexpr std::size_t kMinAnnotatedTitles = 30;

/// Featurizes all titles, splits 80/10/10 with `seed`, trains on the train
/// part and evaluates Pearson r on validation and test.
SupportModel train_support_model(std::span<const AnnotatedTitle> titles, Dimension dim,
                                 const features::Featurizer& featurizer, const forest::ForestParams& params,
                                 std::uint64_t seed, RunLog* log = nullptr);

// ---------------------------------------------------------------------------
// Scoring and aggregation

struct ScoredPost {
  std::string id;
  std::string author;
  std::int64_t num_comments = 0;
  double emo_score = 0;
  double info_score = 0;
};

/// Throws ConfigError when a model was trained on a different schema.
std::vector<ScoredPost> score_corpus(const forest::ForestModel& emo, const forest::ForestModel& info,
                                     const corpus::Corpus& corpus, const features::Featurizer& featurizer,
                                     std::size_t threads = 0);

void write_scores_csv(std::ostream& out, std::span<const ScoredPost> scores);
/// id -> (emo, info).
std::map<std::string, std::pair<double, double>> read_scores_csv(std::istream& in);

/// Joins corpus posts with scores by id. Throws ValidationError for a post
/// without a score.
std::vector<ScoredPost> join_scores(const corpus::Corpus& corpus,
                                    const std::map<std::string, std::pair<double, double>>& scores);

struct UserAggregate {
  std::string user;
  std::size_t n_posts = 0;
  double mean_comments = 0;
  double mean_emo = 0;
  double mean_info = 0;
};

struct Aggregation {
  std::vector<UserAggregate> users;  // sorted by user
  std::size_t k_min = 0;
  bool no_qualifying_users() const noexcept { return users.empty(); }
};

Aggregation aggregate_users(std::span<const ScoredPost> posts, std::size_t k_min = 5);

// ---------------------------------------------------------------------------
// Engagement report

struct ReportRow {
  std::string label;
  std::optional<stats::CorrelationResult> result;
  std::string undefined_reason;
};

struct EngagementReport {
  std::string forum;
  std::size_t n_users = 0;
  std::array<ReportRow, 2> rows;
};

inline constexpr std::string_view kEmotionalLabel = "Emotional Support Sought";
inline constexpr std::string_view kInformationalLabel = "Informational Support Sought";

/// Needs at least 3 users (ValidationError otherwise).
EngagementReport engagement_report(const Aggregation& aggregation, std::string forum);

void write_report_csv(std::ostream& out, const EngagementReport& report);
EngagementReport read_report_csv(std::istream& in);
std::string render_report_text(const EngagementReport& report);
/// "<0.001" below one in a thousand, the value otherwise.
std::string p_flag(double p);

std::string render_importance_table(std::string_view title, std::span<const forest::Importance> rows);

}  // namespace supportlens::pipeline
