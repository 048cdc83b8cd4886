#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace supportlens::cli {

/// Flat key=value settings with dotted section prefixes (lda.K=20).
/// Unknown keys are rejected so typos fail loudly.
class Config {
 public:
  /// Every recognised key with its default; an empty default means unset.
  static const std::map<std::string, std::string>& defaults();

  /// `base` resolves relative paths found in the text.
  static Config parse(std::istream& in, const std::filesystem::path& base = {});
  static Config load(const std::filesystem::path& path);

  /// Throws ConfigError for an unknown key or a value without '='.
  void set(const std::string& assignment, const std::filesystem::path& base = {});
  void set(const std::string& key, const std::string& value, const std::filesystem::path& base = {});

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::optional<double> get_optional_double(const std::string& key) const;
  std::uint64_t seed() const;
  /// Required path; ConfigError when unset.
  std::filesystem::path path(const std::string& key) const;

  /// Effective values (defaults filled in), sorted by key.
  std::map<std::string, std::string> effective() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Fixed artifact names inside the output directory.
namespace artifact {
inline constexpr const char* kPosts = "posts.jsonl";
inline constexpr const char* kSample = "sample_titles.csv";
inline constexpr const char* kLda = "lda.json";
inline constexpr const char* kModelEmo = "model_emo.json";
inline constexpr const char* kModelInfo = "model_info.json";
inline constexpr const char* kScores = "scores.csv";
inline constexpr const char* kReportCsv = "engagement_report.csv";
inline constexpr const char* kReportText = "engagement_report.txt";
inline constexpr const char* kReport = "report.txt";
inline constexpr const char* kSummary = "summary.txt";
inline constexpr const char* kLog = "run.log";
}  // namespace artifact

/// Exit codes: 0 success, 1 validation or runtime failure, 2 usage error.
/// Errors are one line on `err`: "error: <kind>: <message>".
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace supportlens::cli
