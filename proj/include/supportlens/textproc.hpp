#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace supportlens::text {

enum class Tag { kNoun, kVerb, kModal, kPronoun, kAdj, kAdv, kPunct, kNum, kOther };

inline constexpr std::array<Tag, 9> kAllTags{Tag::kNoun, Tag::kVerb, Tag::kModal, Tag::kPronoun, Tag::kAdj,
                                             Tag::kAdv,  Tag::kPunct, Tag::kNum,  Tag::kOther};

std::string_view tag_name(Tag t);
/// Throws ParseError (line 0) on an unknown name.
Tag parse_tag(std::string_view name);

struct Token {
  std::string surface;
  std::string lower;
  Tag tag = Tag::kOther;
  bool is_negation = false;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;
  bool is_question = false;
  bool has_negation = false;
};

/// word -> coarse tag, loaded from `word<TAB>TAG` lines.
class TagLexicon {
 public:
  TagLexicon() = default;
  explicit TagLexicon(std::unordered_map<std::string, Tag> entries) : entries_(std::move(entries)) {}

  /// Throws IoError or ParseError (with line number).
  static TagLexicon load(const std::filesystem::path& path);

  const Tag* find(std::string_view lower) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::unordered_map<std::string, Tag> entries_;
};

bool is_modal(std::string_view lower);
bool is_negation_word(std::string_view lower);
bool is_interrogative_opener(std::string_view lower);

/// Whitespace split with leading/trailing punctuation peeled into separate
/// one-character PUNCT tokens. Interior punctuation (contractions, decimals)
/// stays in the word. Tags are provisional: PUNCT, NUM or OTHER.
std::vector<Token> tokenize(std::string_view text);

/// Assigns coarse tags in place: closed classes first, then the lexicon,
/// then suffix heuristics.
void tag_tokens(std::vector<Token>& tokens, const TagLexicon& lexicon);

/// Sentences end after a whitespace-delimited chunk whose trailing
/// punctuation contains '.', '!' or '?'. Tokens are tagged with `lexicon`.
std::vector<Sentence> split_sentences(std::string_view text, const TagLexicon& lexicon);

}  // namespace supportlens::text
