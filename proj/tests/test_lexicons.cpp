#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "supportlens/error.hpp"
#include "supportlens/lexicons.hpp"

using namespace supportlens;
using namespace supportlens::lex;

namespace {

CategoryLexicon parse_categories(const std::string& text) {
  std::istringstream in(text);
  return CategoryLexicon::parse(in);
}

SubjectivityLexicon parse_subjectivity(const std::string& text) {
  std::istringstream in(text);
  return SubjectivityLexicon::parse(in);
}

std::vector<text::Token> toks(const std::string& s) { return text::tokenize(s); }

}  // namespace

TEST_CASE("category lexicon: literal and prefix entries") {
  const auto lex = parse_categories("1\tposemo\n2\tnegemo\n%%\nhappy\t1\njoy*\t1\nsad*\t2\n");
  CHECK(lex.categories() == std::vector<std::string>{"posemo", "negemo"});
  CHECK(lex.match_names("happy") == std::vector<std::string>{"posemo"});
  CHECK(lex.match_names("joyful") == std::vector<std::string>{"posemo"});
  CHECK(lex.match_names("joyfully") == std::vector<std::string>{"posemo"});
  CHECK(lex.match_names("joy") == std::vector<std::string>{"posemo"});
  CHECK(lex.match_names("xyzzy").empty());
  CHECK(lex.match_names("happyish").empty());
}

TEST_CASE("category lexicon: overlapping prefixes union, longest does not shadow") {
  const auto lex = parse_categories("a\tone\nb\ttwo\nc\tthree\n%%\nquit*\ta\nquitting\tb\nqu*\tc\n");
  CHECK(lex.match_names("quitting") == std::vector<std::string>{"one", "two", "three"});
  CHECK(lex.match_names("quiet") == std::vector<std::string>{"three"});
}

TEST_CASE("category lexicon: validation") {
  try {
    parse_categories("1\tposemo\n%%\nhappy\t1,7\n");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("'7'") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_categories("1\tposemo\n%%\nha*ppy\t1\n"), ValidationError);
  CHECK_THROWS_AS(parse_categories("1\tposemo\n1\tnegemo\n%%\n"), ValidationError);
  CHECK_THROWS_AS(parse_categories("1\tposemo\n2\tposemo\n%%\n"), ValidationError);
  CHECK_THROWS_AS(parse_categories("1\tposemo\n"), ParseError);
  CHECK_THROWS_AS(parse_categories("1 posemo\n%%\n"), ParseError);
}

TEST_CASE("category lexicon: matches stay within declared categories, any line order") {
  const std::vector<std::string> entry_lines{"happy\t1", "joy*\t1,3", "sad*\t2", "you\t3", "quit*\t2,3", "q*\t1"};
  std::string header = "1\tposemo\n2\tnegemo\n3\tyou\n%%\n";
  std::string base = header;
  for (const auto& l : entry_lines) base += l + "\n";
  const auto reference = parse_categories(base);
  std::mt19937 gen(4);
  const std::vector<std::string> probes{"happy", "joyous", "sadly", "you", "quitting", "q", "queen", "zzz", "joy"};
  for (int trial = 0; trial < 20; ++trial) {
    auto shuffled = entry_lines;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    std::string text = header;
    for (const auto& l : shuffled) text += l + "\n";
    const auto lex = parse_categories(text);
    for (const auto& w : probes) {
      CHECK(lex.match(w) == reference.match(w));
      for (auto idx : lex.match(w)) CHECK(idx < lex.categories().size());
    }
  }
}

TEST_CASE("shipped category lexicon declares the 18 categories") {
  const auto lex = CategoryLexicon::load(default_data_dir() / "categories.dic");
  CHECK(lex.categories() == std::vector<std::string>{"posemo", "negemo", "shehe", "you", "we", "i", "ipron",
                                                     "auxverb", "verb", "past", "present", "future", "relig",
                                                     "death", "they", "cogmech", "bio", "time"});
}

TEST_CASE("subjectivity lexicon") {
  const auto lex = parse_subjectivity(
      "# comment\n"
      "type=strongsubj len=1 word1=affirmation pos1=noun stemmed1=n priorpolarity=positive\n"
      "type=weaksubj len=1 word1=abandoned pos1=adj stemmed1=n priorpolarity=negative\n"
      "type=weaksubj word1=torn\n"
      "type=strongsubj word1=torn\n"
      "type=strongsubj word1=Grief extra=ignored\n"
      "type=weaksubj word1=grief\n");
  REQUIRE(lex.find("affirmation"));
  CHECK(*lex.find("affirmation") == Strength::kStrong);
  REQUIRE(lex.find("abandoned"));
  CHECK(*lex.find("abandoned") == Strength::kWeak);
  CHECK(*lex.find("torn") == Strength::kStrong);
  CHECK(*lex.find("grief") == Strength::kStrong);
  CHECK(lex.find("table") == nullptr);
  CHECK(lex.size() == 4);

  try {
    parse_subjectivity("type=weaksubj word1=ok\ntype=strongsubj len=1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_subjectivity("type=neutral word1=x\n"), ParseError);
  CHECK_THROWS_AS(parse_subjectivity("garbage\n"), ParseError);
}

TEST_CASE("drug mentions") {
  const DrugLexicon lex({"weed", "oxy", "cold turkey", "  Mary Jane  "});
  CHECK(lex.size() == 4);
  CHECK(count_drug_mentions(toks("weed"), lex) == 1);
  CHECK(count_drug_mentions(toks("quit cold turkey"), lex) == 1);
  CHECK(count_drug_mentions(toks("no drugs mentioned here"), lex) == 0);
  CHECK(count_drug_mentions(toks("Mary Jane and WEED, weed!"), lex) == 3);
  CHECK(count_drug_mentions(toks("cold"), lex) == 0);
  CHECK(count_drug_mentions(toks("cold, turkey"), lex) == 0);
}

TEST_CASE("drug mentions: longest match first, non-overlapping, order-insensitive") {
  const std::vector<std::string> names{"black", "black tar", "tar heroin", "heroin", "tar"};
  const auto tokens = toks("black tar heroin tar");
  const DrugLexicon reference(names);
  // black tar | heroin | tar
  CHECK(count_drug_mentions(tokens, reference) == 3);
  auto shuffled = names;
  std::mt19937 gen(8);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    CHECK(count_drug_mentions(tokens, DrugLexicon(shuffled)) == 3);
  }
}

TEST_CASE("default lexicon set loads") {
  const auto set = LexiconSet::load_dir(default_data_dir());
  CHECK(set.categories.categories().size() == 18);
  CHECK(set.subjectivity.size() > 100);
  CHECK(set.drugs.size() > 50);
  CHECK(set.tags.size() > 4000);
  CHECK(count_drug_mentions(toks("Quit weed and suboxone"), set.drugs) == 2);
}
