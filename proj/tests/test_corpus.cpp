#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "supportlens/corpus.hpp"
#include "supportlens/error.hpp"

using namespace supportlens;
using namespace supportlens::corpus;

namespace {

Post make_post(std::string id, std::string author, std::int64_t t, std::int64_t comments,
               std::string title = "a title") {
  Post p;
  p.id = std::move(id);
  p.author = std::move(author);
  p.created_utc = t;
  p.num_comments = comments;
  p.title = std::move(title);
  p.forum = "leaves";
  return p;
}

LoadResult load_string(const std::string& text, const std::string& forum = "") {
  std::istringstream in(text);
  return read_posts(in, forum);
}

}  // namespace

TEST_CASE("load_posts: well-formed three-line file") {
  const auto res = load_posts(std::filesystem::path(SUPPORTLENS_TEST_FIXTURES) / "posts_3.jsonl", "leaves");
  REQUIRE(res.corpus.size() == 3);
  CHECK(res.report.skipped_total() == 0);
  CHECK(res.corpus.posts()[0].id == "p1");
  CHECK(res.corpus.posts()[1].selftext == std::optional<std::string>("It is hard."));
  CHECK_FALSE(res.corpus.posts()[0].selftext.has_value());
  CHECK(res.corpus.forum() == "leaves");
}

TEST_CASE("load_posts: blank title is skipped and counted") {
  const std::string text =
      R"({"id":"a","author":"u","created_utc":1,"title":"ok","selftext":null,"num_comments":0,"subreddit":"f"})"
      "\n"
      R"({"id":"b","author":"u","created_utc":2,"title":"   ","selftext":null,"num_comments":0,"subreddit":"f"})"
      "\n";
  const auto res = load_string(text);
  CHECK(res.corpus.size() == 1);
  CHECK(res.report.skipped_blank_title == 1);
  CHECK(res.report.skipped_total() == 1);
  CHECK(res.report.skipped[0].line == 2);
}

TEST_CASE("load_posts: missing fields are counted, not silently dropped") {
  const std::string text =
      R"({"id":"a","author":"u","created_utc":1,"title":"ok","num_comments":3,"subreddit":"f"})"
      "\n"
      R"({"id":"b","author":"u","title":"no time","num_comments":0,"subreddit":"f"})"
      "\n"
      R"({"id":"c","author":"u","created_utc":2,"title":"neg","num_comments":-1,"subreddit":"f"})"
      "\n"
      R"({"id":"d","author":"u","created_utc":2,"title":"elsewhere","num_comments":1,"subreddit":"g"})"
      "\n";
  std::ostringstream sink;
  std::istringstream in(text);
  const auto res = read_posts(in, "", &sink);
  CHECK(res.corpus.size() == 1);
  CHECK(res.report.skipped_invalid == 2);
  CHECK(res.report.skipped_other_forum == 1);
  CHECK(sink.str().find("skipped 3 of 4") != std::string::npos);
  CHECK(sink.str().find("created_utc") != std::string::npos);
}

TEST_CASE("load_posts: duplicate id is a validation error naming the id") {
  const std::string line =
      R"({"id":"abc","author":"u","created_utc":1,"title":"t","selftext":null,"num_comments":0,"subreddit":"f"})";
  try {
    load_string(line + "\n" + line + "\n");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("\"abc\"") != std::string::npos);
  }
}

TEST_CASE("load_posts: malformed JSON carries the line number") {
  const std::string good =
      R"({"id":"a","author":"u","created_utc":1,"title":"t","selftext":null,"num_comments":0,"subreddit":"f"})";
  try {
    load_string(good + "\n{\"id\": \n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(load_posts("/nonexistent/posts.jsonl", "f"), IoError);
}

TEST_CASE("corpus invariants") {
  CHECK_THROWS_AS(Corpus("leaves", {make_post("a", "u", 1, 0), make_post("a", "v", 2, 0)}), ValidationError);
  auto other = make_post("b", "u", 1, 0);
  other.forum = "opiates";
  CHECK_THROWS_AS(Corpus("leaves", {other}), ValidationError);
  CHECK_THROWS_AS(Corpus("leaves", {make_post("c", "u", 1, 0, " ")}), ValidationError);
}

TEST_CASE("corpus_summary") {
  CHECK(corpus_summary(Corpus()) == CorpusSummary{0, 0, 0});
  Corpus c("leaves", {make_post("1", "a", 1, 2), make_post("2", "a", 2, 0), make_post("3", "b", 3, 5)});
  CHECK(corpus_summary(c) == CorpusSummary{2, 3, 7});
}

TEST_CASE("no_comment_rate") {
  Corpus all("leaves", {make_post("1", "a", 10, 2), make_post("2", "b", 20, 1)});
  CHECK(no_comment_rate(all, {0, 100}) == 0.0);

  Corpus c("leaves", {make_post("1", "a", 10, 2), make_post("2", "b", 20, 0), make_post("3", "b", 30, 1),
                      make_post("4", "c", 40, 9), make_post("5", "c", 500, 0)});
  CHECK(no_comment_rate(c, {10, 40}) == 0.25);
  CHECK_FALSE(no_comment_rate(c, {41, 499}).has_value());
  CHECK_THROWS_AS(no_comment_rate(c, {50, 40}), ArgumentError);
  CHECK(full_window(c).start == 10);
  CHECK(full_window(c).end == 500);
}

TEST_CASE("filter_users_min_posts") {
  std::vector<Post> posts;
  for (int i = 0; i < 5; ++i) posts.push_back(make_post("a" + std::to_string(i), "a", i, 0));
  for (int i = 0; i < 4; ++i) posts.push_back(make_post("b" + std::to_string(i), "b", 10 + i, 0));
  std::swap(posts[1], posts[6]);
  Corpus c("leaves", posts);
  CHECK(filter_users_min_posts(c, 1) == c);
  const Corpus only_a = filter_users_min_posts(c, 5);
  REQUIRE(only_a.size() == 5);
  for (const auto& p : only_a.posts()) CHECK(p.author == "a");
  CHECK(only_a.posts()[1].id == "a2");
  CHECK_THROWS_AS(filter_users_min_posts(c, 0), ArgumentError);
}

TEST_CASE("filter is idempotent and never grows the corpus (random corpora)") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> author(0, 1 + trial % 12);
    std::vector<Post> posts;
    const int n = 1 + trial * 3;
    for (int i = 0; i < n; ++i) posts.push_back(make_post(std::to_string(i), "u" + std::to_string(author(gen)), i, i % 3));
    Corpus c("leaves", posts);
    for (std::size_t k = 1; k <= 7; ++k) {
      const Corpus once = filter_users_min_posts(c, k);
      CHECK(filter_users_min_posts(once, k) == once);
      CHECK(corpus_summary(once).n_posts <= corpus_summary(c).n_posts);
    }
  }
}

TEST_CASE("JSONL write then reload is an identity") {
  std::mt19937_64 gen(3);
  std::vector<Post> posts;
  for (int i = 0; i < 40; ++i) {
    Post p = make_post("id" + std::to_string(i), "user" + std::to_string(gen() % 7), 1500000000 + i * 977,
                       static_cast<std::int64_t>(gen() % 30), "Title \"quoted\" \\ caf\xc3\xa9 #" + std::to_string(i));
    if (i % 3 == 0) p.selftext = "body\nwith newline";
    if (i % 3 == 1) p.selftext = "";
    posts.push_back(p);
  }
  Corpus c("leaves", posts);
  std::ostringstream out;
  write_posts(c, out);
  std::istringstream in(out.str());
  CHECK(read_posts(in, "leaves").corpus == c);
}

TEST_CASE("sample_indices") {
  const auto a = sample_indices(100, 10, 1);
  CHECK(a.size() == 10);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
  CHECK(a == sample_indices(100, 10, 1));
  CHECK(sample_indices(5, 10, 1).size() == 5);
}

TEST_CASE("Table-1 style rendering") {
  CHECK(with_thousands(0) == "0");
  CHECK(with_thousands(999) == "999");
  CHECK(with_thousands(35961) == "35,961");
  CHECK(with_thousands(1234567) == "1,234,567");
  const std::string table = render_summary_table({{"/r/Leaves", {18100, 35961, 227850}}});
  CHECK(table ==
        "Attribute               /r/Leaves\n"
        "---------------------------------\n"
        "Number of unique users     18,100\n"
        "Number of posts            35,961\n"
        "Number of comments        227,850\n");
}
