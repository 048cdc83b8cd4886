#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace supportlens::corpus {

struct Post {
  std::string id;
  std::string author;
  std::int64_t created_utc = 0;
  std::string title;
  std::optional<std::string> selftext;
  std::int64_t num_comments = 0;
  std::string forum;

  bool operator==(const Post&) const = default;
};

/// Immutable, validated collection of posts from one forum.
///
/// Author strings are opaque: sentinels such as "[deleted]" count as an
/// ordinary author.
class Corpus {
 public:
  Corpus() = default;
  /// Throws ValidationError on duplicate ids, empty ids, blank titles,
  /// negative comment counts, or posts from another forum.
  Corpus(std::string forum, std::vector<Post> posts);

  const std::string& forum() const noexcept { return forum_; }
  const std::vector<Post>& posts() const noexcept { return posts_; }
  std::size_t size() const noexcept { return posts_.size(); }
  bool empty() const noexcept { return posts_.empty(); }

  bool operator==(const Corpus&) const = default;

 private:
  std::string forum_;
  std::vector<Post> posts_;
};

struct SkippedRecord {
  std::size_t line = 0;
  std::string reason;
};

struct LoadReport {
  std::size_t lines_read = 0;
  std::size_t skipped_blank_title = 0;
  std::size_t skipped_invalid = 0;
  std::size_t skipped_other_forum = 0;
  std::vector<SkippedRecord> skipped;

  std::size_t skipped_total() const { return skipped_blank_title + skipped_invalid + skipped_other_forum; }
};

struct LoadResult {
  Corpus corpus;
  LoadReport report;
};

/// Reads a JSON Lines dump. When `forum` is empty the forum of the first
/// accepted record is used. Records with a blank title, missing/mistyped
/// fields, or a different forum are skipped and counted; a summary of the
/// skips is written to `report_sink` when non-null.
///
/// Throws IoError (unreadable file), ParseError (malformed JSON, with line
/// number) and ValidationError (duplicate id).
LoadResult load_posts(const std::filesystem::path& path, const std::string& forum,
                      std::ostream* report_sink = nullptr);
LoadResult read_posts(std::istream& in, const std::string& forum, std::ostream* report_sink = nullptr);

/// One JSON object per line, fixed key order.
void write_posts(const Corpus& c, std::ostream& out);
void save_posts(const Corpus& c, const std::filesystem::path& path);

struct CorpusSummary {
  std::size_t n_unique_users = 0;
  std::size_t n_posts = 0;
  std::int64_t n_comments = 0;

  bool operator==(const CorpusSummary&) const = default;
};

CorpusSummary corpus_summary(const Corpus& c);

/// Inclusive [start, end] in seconds since the epoch.
struct TimeWindow {
  std::int64_t start = 0;
  std::int64_t end = 0;
};

/// Fraction of posts inside `window` with zero comments; nullopt when the
/// window holds no posts. Throws ArgumentError when start > end.
std::optional<double> no_comment_rate(const Corpus& c, TimeWindow window);

/// Smallest window covering every post; {0, 0} for an empty corpus.
TimeWindow full_window(const Corpus& c);

/// Keeps the posts whose author has at least `k` posts in `c`, in order.
/// Throws ArgumentError when k == 0.
Corpus filter_users_min_posts(const Corpus& c, std::size_t k);

/// Seeded uniform sample of min(n, total) distinct indices in [0, total),
/// returned in ascending order.
std::vector<std::size_t> sample_indices(std::size_t total, std::size_t n, std::uint64_t seed);

/// "12,960"
std::string with_thousands(std::int64_t v);

/// Table-1 style summary: attribute rows by forum columns.
std::string render_summary_table(const std::vector<std::pair<std::string, CorpusSummary>>& forums);

}  // namespace supportlens::corpus
