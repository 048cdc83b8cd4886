#include "supportlens/features.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include "supportlens/error.hpp"

namespace supportlens::features {

namespace {

constexpr std::string_view kStructural[] = {"n_sentences", "mean_words_per_sentence", "n_negation_sentences",
                                            "n_question_sentences"};
constexpr std::string_view kTrailing[] = {"strong_subjectivity_count", "weak_subjectivity_count",
                                          "advice_request_count",      "drug_mention_count",
                                          "mean_word_length",          "title_word_count"};

std::string pos_name(text::Tag t) {
  std::string s = "pos_";
  for (char c : text::tag_name(t)) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return s;
}

const text::Token* next_word(const std::vector<text::Token>& tokens, std::size_t& i) {
  while (i < tokens.size() && tokens[i].tag == text::Tag::kPunct) ++i;
  return i < tokens.size() ? &tokens[i++] : nullptr;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::size_t FeatureSchema::index_of(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ArgumentError("no feature named '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

FeatureSchema feature_schema(std::span<const std::string> categories, std::size_t topics) {
  if (topics < 1) throw ConfigError("topic count K must be >= 1, got " + std::to_string(topics));
  FeatureSchema s;
  s.names_.assign(categories.begin(), categories.end());
  for (auto n : kStructural) s.names_.emplace_back(n);
  for (auto t : text::kAllTags) s.names_.push_back(pos_name(t));
  for (auto n : kTrailing) s.names_.emplace_back(n);
  for (std::size_t k = 0; k < topics; ++k) s.names_.push_back("topic_" + std::to_string(k));
  std::set<std::string_view> seen;
  for (const auto& n : s.names_)
    if (!seen.insert(n).second) throw ConfigError("feature name '" + n + "' appears twice in the schema");
  s.n_categories_ = categories.size();
  s.n_topics_ = topics;
  return s;
}

std::size_t count_advice_requests(std::span<const text::Sentence> sentences) {
  std::size_t count = 0;
  for (const auto& s : sentences) {
    std::size_t i = 0;
    const auto* first = next_word(s.tokens, i);
    const auto* second = first ? next_word(s.tokens, i) : nullptr;
    if (!second) continue;
    const bool a = first->lower == "you" && second->tag == text::Tag::kModal;
    const bool b = first->lower == "please" && (second->tag == text::Tag::kVerb || second->tag == text::Tag::kModal);
    if (a || b) ++count;
  }
  return count;
}

bool is_alphabetic_word(std::string_view surface) {
  bool letter = false;
  for (unsigned char c : surface) {
    if (c >= 0x80 || std::isalpha(c)) {
      letter = true;
    } else if (c != '\'') {
      return false;
    }
  }
  return letter;
}

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

Featurizer::Featurizer(const lex::LexiconSet& lexicons, const topics::Stoplist& stoplist,
                       const topics::TopicModel& model, FeatureSchema schema)
    : lexicons_(&lexicons), stoplist_(&stoplist), model_(&model), schema_(std::move(schema)) {
  const auto& cats = lexicons.categories.categories();
  if (schema_.n_categories() != cats.size() ||
      !std::equal(cats.begin(), cats.end(), schema_.names().begin()))
    throw ConfigError("feature schema categories do not match the loaded category lexicon");
  if (schema_.n_topics() != model.topics())
    throw ConfigError("feature schema has " + std::to_string(schema_.n_topics()) + " topic slots but the topic model has K=" +
                      std::to_string(model.topics()));
}

std::vector<double> Featurizer::extract(std::string_view title) const {
  std::vector<double> v(schema_.dimension(), 0.0);
  const std::size_t n_cat = schema_.n_categories();
  const auto sentences = text::split_sentences(title, lexicons_->tags);

  std::size_t words = 0, negations = 0, questions = 0, strong = 0, weak = 0, drugs = 0;
  std::size_t alpha_words = 0, alpha_chars = 0;
  std::size_t pos[std::size(text::kAllTags)] = {};
  for (const auto& s : sentences) {
    negations += s.has_negation;
    questions += s.is_question;
    drugs += lexicons_->drugs.count_mentions(s.tokens);
    for (const auto& t : s.tokens) {
      ++pos[static_cast<std::size_t>(t.tag)];
      if (t.tag == text::Tag::kPunct) continue;
      ++words;
      for (auto c : lexicons_->categories.match(t.lower)) v[c] += 1.0;
      if (const auto* st = lexicons_->subjectivity.find(t.lower)) (*st == lex::Strength::kStrong ? strong : weak)++;
      if (is_alphabetic_word(t.surface)) {
        ++alpha_words;
        alpha_chars += utf8_length(t.surface);
      }
    }
  }

  std::size_t i = n_cat;
  v[i++] = static_cast<double>(sentences.size());
  v[i++] = sentences.empty() ? 0.0 : static_cast<double>(words) / static_cast<double>(sentences.size());
  v[i++] = static_cast<double>(negations);
  v[i++] = static_cast<double>(questions);
  for (std::size_t t = 0; t < std::size(text::kAllTags); ++t)
    v[i++] = static_cast<double>(pos[static_cast<std::size_t>(text::kAllTags[t])]);
  v[i++] = static_cast<double>(strong);
  v[i++] = static_cast<double>(weak);
  v[i++] = static_cast<double>(count_advice_requests(sentences));
  v[i++] = static_cast<double>(drugs);
  v[i++] = alpha_words ? static_cast<double>(alpha_chars) / static_cast<double>(alpha_words) : 0.0;
  v[i++] = static_cast<double>(words);
  const auto theta = model_->infer(topics::topic_terms(title, *stoplist_));
  std::copy(theta.begin(), theta.end(), v.begin() + static_cast<std::ptrdiff_t>(i));
  return v;
}

std::vector<std::vector<double>> Featurizer::extract_all(std::span<const std::string> titles,
                                                         std::size_t threads) const {
  std::vector<std::vector<double>> rows(titles.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < titles.size(); i = next++) rows[i] = extract(titles[i]);
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(titles.size(), 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return rows;
}

std::vector<double> extract_features(std::string_view title, const lex::LexiconSet& lexicons,
                                     const topics::Stoplist& stoplist, const topics::TopicModel& model,
                                     const FeatureSchema& schema) {
  return Featurizer(lexicons, stoplist, model, schema).extract(title);
}

void write_feature_csv(std::ostream& out, const FeatureSchema& schema, std::span<const std::vector<double>> rows,
                       std::span<const std::string> keys) {
  if (!keys.empty() && keys.size() != rows.size()) throw ArgumentError("feature CSV keys do not match rows");
  if (!keys.empty()) out << "key,";
  for (std::size_t i = 0; i < schema.dimension(); ++i) out << (i ? "," : "") << csv_field(schema.names()[i]);
  out << '\n';
  std::ostringstream num;
  num << std::setprecision(17);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != schema.dimension()) throw ArgumentError("feature row width does not match the schema");
    if (!keys.empty()) out << csv_field(keys[r]) << ',';
    for (std::size_t i = 0; i < rows[r].size(); ++i) {
      num.str("");
      num << rows[r][i];
      out << (i ? "," : "") << num.str();
    }
    out << '\n';
  }
}

}  // namespace supportlens::features
