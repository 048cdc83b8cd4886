#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "feature_fixture.hpp"
#include "supportlens/error.hpp"
#include "supportlens/features.hpp"

using namespace supportlens;
using namespace supportlens::features;

namespace {

const lex::LexiconSet& lexicons() {
  static const auto set = lex::LexiconSet::load_dir(SUPPORTLENS_DEFAULT_DATA_DIR);
  return set;
}

const topics::Stoplist& stoplist() {
  static const auto s = topics::Stoplist::load(std::filesystem::path(SUPPORTLENS_DEFAULT_DATA_DIR) / "stopwords.txt");
  return s;
}

topics::TopicModel tiny_model(std::size_t k) {
  std::vector<std::string> vocab = {"clean", "sober", "weed"};
  std::vector<double> phi;
  for (std::size_t t = 0; t < k; ++t) {
    std::vector<double> row = {1.0, 2.0 + static_cast<double>(t), 3.0};
    const double s = std::accumulate(row.begin(), row.end(), 0.0);
    for (double v : row) phi.push_back(v / s);
  }
  return topics::TopicModel(k, 0.5, 0.01, vocab, phi, 7, 10, 20);
}

Featurizer featurizer(const topics::TopicModel& m) {
  return Featurizer(lexicons(), stoplist(), m, feature_schema(lexicons().categories.categories(), m.topics()));
}

}  // namespace

TEST_CASE("schema layout and dimension") {
  const auto& cats = lexicons().categories.categories();
  REQUIRE(cats.size() == 18);
  const auto s20 = feature_schema(cats, 20);
  CHECK(s20.dimension() == 57);
  CHECK(feature_schema(cats, 1).dimension() == 38);
  CHECK(s20 == feature_schema(cats, 20));
  CHECK(s20.names()[0] == cats[0]);
  CHECK(s20.names()[18] == "n_sentences");
  CHECK(s20.names()[22] == "pos_noun");
  CHECK(s20.names()[31] == "strong_subjectivity_count");
  CHECK(s20.names()[36] == "title_word_count");
  CHECK(s20.names()[37] == "topic_0");
  CHECK(s20.names()[56] == "topic_19");
  CHECK_THROWS_AS(feature_schema(cats, 0), ConfigError);
  const std::vector<std::string> clash = {"posemo", "n_sentences"};
  CHECK_THROWS_AS(feature_schema(clash, 2), ConfigError);
}

TEST_CASE("advice patterns") {
  auto count = [](std::string_view t) {
    const auto s = text::split_sentences(t, lexicons().tags);
    return count_advice_requests(s);
  };
  CHECK(count("You should try melatonin.") == 1);
  CHECK(count("Please help me stay clean") == 1);
  CHECK(count("You are strong") == 0);
  CHECK(count("\"You\" -- could this work?") == 1);
  CHECK(count("You should rest. Please, call someone. you might") == 3);
  CHECK(count("You") == 0);
}

TEST_CASE("worked example") {
  lex::LexiconSet set = lexicons();
  set.drugs = lex::DrugLexicon(std::vector<std::string>{"weed"});
  const auto m = tiny_model(2);
  const Featurizer f(set, stoplist(), m, feature_schema(set.categories.categories(), 2));
  const auto v = f.extract("You should quit weed. Any tips?");
  const auto& s = f.schema();
  CHECK(v[s.index_of("advice_request_count")] == 1);
  CHECK(v[s.index_of("n_question_sentences")] == 1);
  CHECK(v[s.index_of("drug_mention_count")] == 1);
  CHECK(v[s.index_of("n_sentences")] == 2);
  CHECK(v[s.index_of("mean_words_per_sentence")] == 3);
  CHECK(v[s.index_of("pos_punct")] == 2);
  CHECK(v[s.index_of("pos_modal")] == 1);
  // You(3) should(6) quit(4) weed(4) Any(3) tips(4)
  CHECK(v[s.index_of("mean_word_length")] == doctest::Approx(24.0 / 6.0));
  CHECK(v[s.index_of("topic_0")] + v[s.index_of("topic_1")] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("single word title") {
  const auto m = tiny_model(20);
  const auto f = featurizer(m);
  const auto v = f.extract("Help");
  const auto& s = f.schema();
  CHECK(v.size() == 57);
  CHECK(v[s.index_of("n_sentences")] == 1);
  CHECK(v[s.index_of("title_word_count")] == 1);
  CHECK(v[s.index_of("mean_word_length")] == 4);
  for (std::size_t k = 0; k < 20; ++k) CHECK(v[s.index_of("topic_" + std::to_string(k))] == doctest::Approx(0.05));
}

TEST_CASE("hand-labelled titles match exactly") {
  const auto m = tiny_model(3);
  const auto f = featurizer(m);
  const auto titles = fixture::load_feature_titles(std::string(SUPPORTLENS_TEST_FIXTURES) + "/feature_titles.tsv");
  REQUIRE(titles.size() == 50);
  for (const auto& t : titles) {
    for (const auto& msg : fixture::check_title(f, t)) FAIL_CHECK(msg);
  }
}

TEST_CASE("invariants over the labelled titles") {
  const auto m = tiny_model(4);
  const auto f = featurizer(m);
  const auto& s = f.schema();
  const auto titles = fixture::load_feature_titles(std::string(SUPPORTLENS_TEST_FIXTURES) + "/feature_titles.tsv");
  std::vector<std::string> texts;
  for (const auto& t : titles) texts.push_back(t.title);
  texts.push_back("");
  texts.push_back("?!?! ... ---");
  texts.push_back("\xff\xfe weird \xc3\xa9t\xc3\xa9 bytes");
  const auto par = f.extract_all(texts, 4);
  const auto seq = f.extract_all(texts, 1);
  CHECK(par == seq);
  for (const auto& v : seq) {
    REQUIRE(v.size() == s.dimension());
    for (double x : v) CHECK(std::isfinite(x));
    const double n = v[s.index_of("n_sentences")];
    CHECK(v[s.index_of("n_negation_sentences")] <= n);
    CHECK(v[s.index_of("n_question_sentences")] <= n);
    CHECK(v[s.index_of("advice_request_count")] <= n);
    double topic_sum = 0;
    for (std::size_t k = 0; k < 4; ++k) topic_sum += v[s.index_of("topic_" + std::to_string(k))];
    CHECK(topic_sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("lexicon line order does not change vectors") {
  std::istringstream a("1\tposemo\n2\tnegemo\n%%\nhappy\t1\nsad*\t2\nhope*\t1\nhopeless\t2\n");
  std::istringstream b("1\tposemo\n2\tnegemo\n%%\nhopeless\t2\nhope*\t1\nsad*\t2\nhappy\t1\n");
  lex::LexiconSet s1 = lexicons(), s2 = lexicons();
  s1.categories = lex::CategoryLexicon::parse(a);
  s2.categories = lex::CategoryLexicon::parse(b);
  s1.drugs = lex::DrugLexicon(std::vector<std::string>{"weed", "black tar", "xanax"});
  s2.drugs = lex::DrugLexicon(std::vector<std::string>{"xanax", "black tar", "weed"});
  const auto m = tiny_model(2);
  const Featurizer f1(s1, stoplist(), m, feature_schema(s1.categories.categories(), 2));
  const Featurizer f2(s2, stoplist(), m, feature_schema(s2.categories.categories(), 2));
  for (const char* t : {"Hopeless and sad, saddest day", "black tar and xanax, so happy? hopeful"})
    CHECK(f1.extract(t) == f2.extract(t));
}

TEST_CASE("schema mismatch is a configuration error") {
  const auto m = tiny_model(3);
  CHECK_THROWS_AS(Featurizer(lexicons(), stoplist(), m, feature_schema(lexicons().categories.categories(), 4)),
                  ConfigError);
  const std::vector<std::string> other = {"a", "b"};
  CHECK_THROWS_AS(Featurizer(lexicons(), stoplist(), m, feature_schema(other, 3)), ConfigError);
}

TEST_CASE("feature CSV") {
  const std::vector<std::string> cats = {"x,y"};
  const auto s = feature_schema(cats, 1);
  std::vector<std::vector<double>> rows = {std::vector<double>(s.dimension(), 0.5)};
  std::ostringstream out;
  const std::vector<std::string> keys = {"t1"};
  write_feature_csv(out, s, rows, keys);
  const auto text = out.str();
  CHECK(text.rfind("key,\"x,y\",n_sentences,", 0) == 0);
  CHECK(text.find("\nt1,0.5,0.5,") != std::string::npos);
}
