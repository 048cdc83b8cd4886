#include "supportlens/lexicons.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "supportlens/error.hpp"

namespace supportlens::lex {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string ascii_lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void merge_sorted(std::vector<std::size_t>& into, const std::vector<std::size_t>& from) {
  std::vector<std::size_t> out;
  std::set_union(into.begin(), into.end(), from.begin(), from.end(), std::back_inserter(out));
  into = std::move(out);
}

}  // namespace

CategoryLexicon CategoryLexicon::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

CategoryLexicon CategoryLexicon::parse(std::istream& in) {
  CategoryLexicon lex;
  std::unordered_map<std::string, std::size_t> id_to_index;
  std::set<std::string> seen_names;
  std::string raw;
  std::size_t line_no = 0;
  bool in_entries = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line == "%%") {
      if (in_entries) throw ParseError("second '%%' separator", line_no);
      in_entries = true;
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected a TAB-separated line", line_no);
    const std::string left = trim(line.substr(0, tab));
    const std::string right = trim(line.substr(tab + 1));
    if (left.empty() || right.empty()) throw ParseError("empty field", line_no);
    if (!in_entries) {
      if (id_to_index.contains(left)) throw ValidationError("duplicate category id '" + left + "'");
      if (!seen_names.insert(right).second) throw ValidationError("duplicate category name '" + right + "'");
      id_to_index.emplace(left, lex.names_.size());
      lex.names_.push_back(right);
      continue;
    }
    const std::string pattern = ascii_lower(left);
    const auto star = pattern.find('*');
    if (star != std::string::npos && star != pattern.size() - 1)
      throw ValidationError("line " + std::to_string(line_no) + ": malformed pattern '" + pattern +
                            "' ('*' is only allowed at the end)");
    if (pattern == "*") throw ValidationError("line " + std::to_string(line_no) + ": bare '*' pattern");
    std::vector<std::size_t> cats;
    std::stringstream ids(right);
    std::string id;
    while (std::getline(ids, id, ',')) {
      id = trim(id);
      auto it = id_to_index.find(id);
      if (it == id_to_index.end())
        throw ValidationError("line " + std::to_string(line_no) + ": entry '" + pattern +
                              "' references undeclared category id '" + id + "'");
      cats.push_back(it->second);
    }
    std::sort(cats.begin(), cats.end());
    cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
    if (star == std::string::npos) {
      merge_sorted(lex.exact_[pattern], cats);
    } else {
      const std::string prefix = pattern.substr(0, star);
      merge_sorted(lex.prefixes_[prefix], cats);
      lex.longest_prefix_ = std::max(lex.longest_prefix_, prefix.size());
    }
  }
  if (!in_entries) throw ParseError("missing '%%' separator between categories and entries", line_no);
  return lex;
}

std::vector<std::size_t> CategoryLexicon::match(std::string_view token_lower) const {
  std::vector<std::size_t> out;
  if (auto it = exact_.find(std::string(token_lower)); it != exact_.end()) out = it->second;
  const std::size_t max_len = std::min(longest_prefix_, token_lower.size());
  for (std::size_t len = 1; len <= max_len; ++len) {
    if (auto it = prefixes_.find(std::string(token_lower.substr(0, len))); it != prefixes_.end())
      merge_sorted(out, it->second);
  }
  return out;
}

std::vector<std::string> CategoryLexicon::match_names(std::string_view token_lower) const {
  std::vector<std::string> out;
  for (auto i : match(token_lower)) out.push_back(names_[i]);
  return out;
}

SubjectivityLexicon SubjectivityLexicon::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

SubjectivityLexicon SubjectivityLexicon::parse(std::istream& in) {
  SubjectivityLexicon lex;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::stringstream fields(line);
    std::string field;
    std::string type;
    std::string word;
    while (fields >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos || eq == 0) throw ParseError("expected key=value, got '" + field + "'", line_no);
      const std::string key = field.substr(0, eq);
      if (key == "type") type = field.substr(eq + 1);
      if (key == "word1") word = ascii_lower(field.substr(eq + 1));
    }
    if (word.empty()) throw ParseError("missing word1", line_no);
    Strength s;
    if (type == "strongsubj") {
      s = Strength::kStrong;
    } else if (type == "weaksubj") {
      s = Strength::kWeak;
    } else {
      throw ParseError("type must be strongsubj or weaksubj, got '" + type + "'", line_no);
    }
    auto [it, inserted] = lex.entries_.emplace(word, s);
    if (!inserted && s == Strength::kStrong) it->second = Strength::kStrong;
  }
  return lex;
}

const Strength* SubjectivityLexicon::find(std::string_view lower) const {
  auto it = entries_.find(std::string(lower));
  return it == entries_.end() ? nullptr : &it->second;
}

DrugLexicon::DrugLexicon(const std::vector<std::string>& names) {
  std::set<std::vector<std::string>> phrases;
  for (const auto& name : names) {
    std::stringstream words(ascii_lower(trim(name)));
    std::vector<std::string> phrase;
    std::string w;
    while (words >> w) phrase.push_back(w);
    if (!phrase.empty()) phrases.insert(std::move(phrase));
  }
  size_ = phrases.size();
  for (const auto& p : phrases) by_first_[p.front()].push_back(p);
  for (auto& [_, list] : by_first_) {
    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  }
}

DrugLexicon DrugLexicon::load(std::span<const std::filesystem::path> paths) {
  std::vector<std::string> names;
  for (const auto& path : paths) {
    auto in = open_or_throw(path);
    std::string raw;
    while (std::getline(in, raw)) {
      const std::string line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      names.push_back(line);
    }
  }
  return DrugLexicon(names);
}

std::size_t DrugLexicon::count_mentions(std::span<const text::Token> tokens) const {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t matched = 0;
    if (auto it = by_first_.find(tokens[i].lower); it != by_first_.end()) {
      for (const auto& phrase : it->second) {
        if (i + phrase.size() > tokens.size()) continue;
        bool ok = true;
        for (std::size_t k = 1; k < phrase.size() && ok; ++k) ok = tokens[i + k].lower == phrase[k];
        if (ok) {
          matched = phrase.size();
          break;
        }
      }
    }
    if (matched) {
      ++count;
      i += matched;
    } else {
      ++i;
    }
  }
  return count;
}

LexiconSet LexiconSet::load_dir(const std::filesystem::path& dir) {
  LexiconSet set;
  set.categories = CategoryLexicon::load(dir / "categories.dic");
  set.subjectivity = SubjectivityLexicon::load(dir / "subjectivity_clues.tff");
  const std::vector<std::filesystem::path> drug_files{dir / "drugs_medicines.txt", dir / "drugs_nicknames.txt"};
  set.drugs = DrugLexicon::load(drug_files);
  set.tags = text::TagLexicon::load(dir / "tag_lexicon.tsv");
  return set;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("SUPPORTLENS_DATA_DIR"); env && *env) return env;
  return SUPPORTLENS_DEFAULT_DATA_DIR;
}

}  // namespace supportlens::lex
