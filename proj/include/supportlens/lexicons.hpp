#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "supportlens/textproc.hpp"

namespace supportlens::lex {

/// Word categories with literal and `prefix*` patterns, in an open
/// LIWC-compatible text format.
class CategoryLexicon {
 public:
  /// Throws IoError, ParseError or ValidationError.
  static CategoryLexicon load(const std::filesystem::path& path);
  static CategoryLexicon parse(std::istream& in);

  const std::vector<std::string>& categories() const noexcept { return names_; }

  /// Indices into categories(), ascending, for every exact or prefix entry
  /// matching `token_lower`. All matching prefixes contribute.
  std::vector<std::size_t> match(std::string_view token_lower) const;
  std::vector<std::string> match_names(std::string_view token_lower) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::vector<std::size_t>> exact_;
  std::unordered_map<std::string, std::vector<std::size_t>> prefixes_;
  std::size_t longest_prefix_ = 0;
};

enum class Strength { kWeak, kStrong };

class SubjectivityLexicon {
 public:
  /// MPQA-style `key=value` lines; needs `type` and `word1`. A word listed
  /// as both strong and weak is kept as strong.
  static SubjectivityLexicon load(const std::filesystem::path& path);
  static SubjectivityLexicon parse(std::istream& in);

  const Strength* find(std::string_view lower) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::unordered_map<std::string, Strength> entries_;
};

/// Drug names and nicknames, possibly multiword, matched on token lowers.
class DrugLexicon {
 public:
  DrugLexicon() = default;
  explicit DrugLexicon(const std::vector<std::string>& names);

  /// Merges every listed file. Throws IoError.
  static DrugLexicon load(std::span<const std::filesystem::path> paths);

  std::size_t size() const noexcept { return size_; }

  /// Greedy left-to-right, longest match first, non-overlapping.
  std::size_t count_mentions(std::span<const text::Token> tokens) const;

 private:
  // first word -> phrases starting with it, longest first
  std::unordered_map<std::string, std::vector<std::vector<std::string>>> by_first_;
  std::size_t size_ = 0;
};

inline std::size_t count_drug_mentions(std::span<const text::Token> tokens, const DrugLexicon& lex) {
  return lex.count_mentions(tokens);
}

/// Every lexicon the feature extractor needs.
struct LexiconSet {
  CategoryLexicon categories;
  SubjectivityLexicon subjectivity;
  DrugLexicon drugs;
  text::TagLexicon tags;

  /// Loads categories.dic, subjectivity_clues.tff, drugs_medicines.txt,
  /// drugs_nicknames.txt and tag_lexicon.tsv from `dir`.
  static LexiconSet load_dir(const std::filesystem::path& dir);
};

std::filesystem::path default_data_dir();

}  // namespace supportlens::lex
