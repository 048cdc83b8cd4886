#include "supportlens/textproc.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "supportlens/error.hpp"

namespace supportlens::text {

namespace {

constexpr std::array<std::string_view, 9> kTagNames{"NOUN", "VERB", "MODAL", "PRONOUN", "ADJ",
                                                     "ADV",  "PUNCT", "NUM",  "OTHER"};

const std::unordered_set<std::string_view> kModals{"may",   "might", "can",   "could", "will",
                                                   "would", "shall", "should", "must"};

const std::unordered_set<std::string_view> kNegations{
    "not",      "no",      "never",     "can't",    "don't",    "won't",     "isn't",
    "didn't",   "couldn't", "shouldn't", "wouldn't", "haven't", "hasn't",    "ain't",
    "cannot",   "nothing", "nobody",    "none",     "neither",  "nor"};

const std::unordered_set<std::string_view> kInterrogatives{
    "how", "what", "why", "when", "where", "who", "which", "should", "can",
    "could", "would", "is", "are", "do", "does", "did", "am", "will"};

const std::unordered_set<std::string_view> kPronouns{
    "i",        "me",        "my",         "mine",     "myself",   "you",       "your",     "yours",
    "yourself", "yourselves", "he",        "him",      "his",      "himself",   "she",      "her",
    "hers",     "herself",   "it",         "its",      "itself",   "we",        "us",       "our",
    "ours",     "ourselves", "they",       "them",     "their",    "theirs",    "themselves", "who",
    "whom",     "whose",     "what",       "someone",  "anyone",   "everyone",  "somebody", "anybody",
    "everybody", "nobody",   "something",  "anything", "everything", "nothing", "u",        "ya"};

bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

bool is_word_char(unsigned char c) { return c >= 0x80 || std::isalnum(c); }

bool has_word_char(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return is_word_char(c); });
}

bool is_alpha_word(std::string_view s) {
  // letters with optional interior apostrophes or hyphens; non-ASCII counts as letter
  if (s.empty()) return false;
  bool letter = false;
  for (unsigned char c : s) {
    if (c >= 0x80 || std::isalpha(c)) {
      letter = true;
    } else if (c != '\'' && c != '-') {
      return false;
    }
  }
  return letter;
}

bool looks_numeric(std::string_view s) {
  return !s.empty() && std::isdigit(static_cast<unsigned char>(s.front()));
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string lowercase(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    // U+2019 right single quotation mark folds to an ASCII apostrophe.
    if (c == 0xE2 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80 &&
        static_cast<unsigned char>(s[i + 2]) == 0x99) {
      out.push_back('\'');
      i += 2;
      continue;
    }
    out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
  }
  return out;
}

Token make_token(std::string_view surface) {
  Token t;
  t.surface = std::string(surface);
  t.lower = lowercase(surface);
  if (!has_word_char(surface)) {
    t.tag = Tag::kPunct;
  } else if (looks_numeric(t.lower)) {
    t.tag = Tag::kNum;
  } else {
    t.tag = Tag::kOther;
  }
  t.is_negation = is_negation_word(t.lower);
  return t;
}

struct Chunked {
  std::vector<Token> tokens;
  // index one past the last token of each chunk that ends a sentence
  std::vector<std::size_t> boundaries;
};

Chunked tokenize_chunks(std::string_view text) {
  Chunked out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::string_view chunk = text.substr(i, j - i);
    i = j;

    std::size_t lead = 0;
    while (lead < chunk.size() && is_ascii_punct(static_cast<unsigned char>(chunk[lead]))) ++lead;
    std::size_t trail_begin = chunk.size();
    while (trail_begin > lead && is_ascii_punct(static_cast<unsigned char>(chunk[trail_begin - 1]))) --trail_begin;

    for (std::size_t k = 0; k < lead; ++k) out.tokens.push_back(make_token(chunk.substr(k, 1)));
    if (trail_begin > lead) out.tokens.push_back(make_token(chunk.substr(lead, trail_begin - lead)));
    bool terminal = false;
    for (std::size_t k = trail_begin; k < chunk.size(); ++k) {
      out.tokens.push_back(make_token(chunk.substr(k, 1)));
      terminal = terminal || chunk[k] == '.' || chunk[k] == '!' || chunk[k] == '?';
    }
    // a chunk made only of punctuation was peeled entirely as "leading"
    if (lead == chunk.size())
      terminal = std::any_of(chunk.begin(), chunk.end(), [](char c) { return c == '.' || c == '!' || c == '?'; });
    if (terminal) out.boundaries.push_back(out.tokens.size());
  }
  return out;
}

bool is_pronoun_contraction(std::string_view lower) {
  const auto apos = lower.find('\'');
  return apos != std::string_view::npos && apos > 0 && kPronouns.contains(lower.substr(0, apos));
}

Tag suffix_tag(std::string_view lower, const TagLexicon& lexicon) {
  if (!is_alpha_word(lower)) return Tag::kOther;
  if (ends_with(lower, "n't")) return Tag::kVerb;
  if (auto apos = lower.find('\''); apos != std::string_view::npos && apos > 0) {
    const std::string_view head = lower.substr(0, apos);
    if (kPronouns.contains(head)) return Tag::kPronoun;
    if (const Tag* t = lexicon.find(head)) return *t;
    return Tag::kNoun;
  }
  if (lower.size() > 4 && ends_with(lower, "ly")) return Tag::kAdv;
  if (lower.size() > 4 && (ends_with(lower, "ing") || ends_with(lower, "ed"))) return Tag::kVerb;
  for (std::string_view adj : {"ful", "ous", "ive", "able", "ible", "less", "ish"})
    if (lower.size() > adj.size() + 2 && ends_with(lower, adj)) return Tag::kAdj;
  if (lower.size() > 3 && ends_with(lower, "s")) {
    if (const Tag* t = lexicon.find(lower.substr(0, lower.size() - 1)); t && (*t == Tag::kNoun || *t == Tag::kVerb))
      return *t;
  }
  return Tag::kNoun;
}

}  // namespace

std::string_view tag_name(Tag t) { return kTagNames[static_cast<std::size_t>(t)]; }

Tag parse_tag(std::string_view name) {
  for (std::size_t i = 0; i < kTagNames.size(); ++i)
    if (kTagNames[i] == name) return kAllTags[i];
  throw ParseError("unknown tag '" + std::string(name) + "'", 0);
}

TagLexicon TagLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tag lexicon " + path.string());
  std::unordered_map<std::string, Tag> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw ParseError("expected word<TAB>TAG", line_no);
    try {
      entries[lowercase(line.substr(0, tab))] = parse_tag(line.substr(tab + 1));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return TagLexicon(std::move(entries));
}

const Tag* TagLexicon::find(std::string_view lower) const {
  auto it = entries_.find(std::string(lower));
  return it == entries_.end() ? nullptr : &it->second;
}

bool is_modal(std::string_view lower) { return kModals.contains(lower); }

bool is_negation_word(std::string_view lower) {
  return kNegations.contains(lower) || (lower.size() > 3 && ends_with(lower, "n't"));
}

bool is_interrogative_opener(std::string_view lower) { return kInterrogatives.contains(lower); }

std::vector<Token> tokenize(std::string_view text) { return tokenize_chunks(text).tokens; }

void tag_tokens(std::vector<Token>& tokens, const TagLexicon& lexicon) {
  for (auto& t : tokens) {
    if (!has_word_char(t.surface)) {
      t.tag = Tag::kPunct;
    } else if (looks_numeric(t.lower)) {
      t.tag = Tag::kNum;
    } else if (is_modal(t.lower)) {
      t.tag = Tag::kModal;
    } else if (kPronouns.contains(t.lower) || is_pronoun_contraction(t.lower)) {
      t.tag = Tag::kPronoun;
    } else if (const Tag* found = lexicon.find(t.lower)) {
      // The lexicon may not introduce modals outside the closed list.
      t.tag = *found == Tag::kModal ? Tag::kVerb : *found;
    } else {
      t.tag = suffix_tag(t.lower, lexicon);
    }
  }
}

std::vector<Sentence> split_sentences(std::string_view text, const TagLexicon& lexicon) {
  Chunked chunked = tokenize_chunks(text);
  tag_tokens(chunked.tokens, lexicon);
  if (chunked.boundaries.empty() || chunked.boundaries.back() != chunked.tokens.size())
    chunked.boundaries.push_back(chunked.tokens.size());

  std::vector<Sentence> out;
  std::size_t begin = 0;
  for (std::size_t end : chunked.boundaries) {
    if (end <= begin) continue;
    Sentence s;
    s.tokens.assign(std::make_move_iterator(chunked.tokens.begin() + static_cast<std::ptrdiff_t>(begin)),
                    std::make_move_iterator(chunked.tokens.begin() + static_cast<std::ptrdiff_t>(end)));
    begin = end;
    bool question_mark = false;
    for (auto it = s.tokens.rbegin(); it != s.tokens.rend() && it->tag == Tag::kPunct; ++it)
      question_mark = question_mark || it->surface == "?";
    auto first_word = std::find_if(s.tokens.begin(), s.tokens.end(), [](const Token& t) { return t.tag != Tag::kPunct; });
    const bool opener = first_word != s.tokens.end() && is_interrogative_opener(first_word->lower);
    s.is_question = question_mark || opener;
    s.has_negation = std::any_of(s.tokens.begin(), s.tokens.end(), [](const Token& t) { return t.is_negation; });
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace supportlens::text
