#include "supportlens/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "supportlens/error.hpp"
#include "supportlens/rng.hpp"

namespace supportlens::corpus {

namespace {

using nlohmann::json;

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

// Returns the reason a record cannot become a Post, or nullopt.
std::optional<std::string> extract_post(const json& obj, Post& out) {
  if (!obj.is_object()) return "record is not a JSON object";
  auto get_string = [&](const char* key, std::string& dst) -> std::optional<std::string> {
    auto it = obj.find(key);
    if (it == obj.end()) return std::string("missing field '") + key + "'";
    if (!it->is_string()) return std::string("field '") + key + "' is not a string";
    dst = it->get<std::string>();
    return std::nullopt;
  };
  auto get_int = [&](const char* key, std::int64_t& dst) -> std::optional<std::string> {
    auto it = obj.find(key);
    if (it == obj.end()) return std::string("missing field '") + key + "'";
    if (!it->is_number_integer()) return std::string("field '") + key + "' is not an integer";
    dst = it->get<std::int64_t>();
    return std::nullopt;
  };
  if (auto e = get_string("id", out.id)) return e;
  if (out.id.empty()) return "empty id";
  if (auto e = get_string("author", out.author)) return e;
  if (auto e = get_int("created_utc", out.created_utc)) return e;
  if (auto e = get_string("title", out.title)) return e;
  if (auto e = get_int("num_comments", out.num_comments)) return e;
  if (out.num_comments < 0) return "negative num_comments";
  if (auto e = get_string("subreddit", out.forum)) return e;
  out.selftext.reset();
  if (auto it = obj.find("selftext"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) return "field 'selftext' is not a string or null";
    out.selftext = it->get<std::string>();
  }
  return std::nullopt;
}

}  // namespace

Corpus::Corpus(std::string forum, std::vector<Post> posts) : forum_(std::move(forum)), posts_(std::move(posts)) {
  std::unordered_set<std::string> ids;
  ids.reserve(posts_.size());
  for (const auto& p : posts_) {
    if (p.id.empty()) throw ValidationError("post with empty id");
    if (!ids.insert(p.id).second) throw ValidationError("duplicate post id \"" + p.id + "\"");
    if (is_blank(p.title)) throw ValidationError("post \"" + p.id + "\" has a blank title");
    if (p.num_comments < 0) throw ValidationError("post \"" + p.id + "\" has negative num_comments");
    if (p.forum != forum_)
      throw ValidationError("post \"" + p.id + "\" belongs to forum \"" + p.forum + "\", expected \"" + forum_ + "\"");
  }
}

LoadResult read_posts(std::istream& in, const std::string& forum, std::ostream* report_sink) {
  LoadReport report;
  std::vector<Post> posts;
  std::unordered_set<std::string> ids;
  std::string target = forum;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    ++report.lines_read;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    Post post;
    if (auto reason = extract_post(obj, post)) {
      ++report.skipped_invalid;
      report.skipped.push_back({line_no, *reason});
      continue;
    }
    if (is_blank(post.title)) {
      ++report.skipped_blank_title;
      report.skipped.push_back({line_no, "blank title"});
      continue;
    }
    if (target.empty()) target = post.forum;
    if (post.forum != target) {
      ++report.skipped_other_forum;
      report.skipped.push_back({line_no, "forum \"" + post.forum + "\" is not \"" + target + "\""});
      continue;
    }
    if (!ids.insert(post.id).second)
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate post id \"" + post.id + "\"");
    posts.push_back(std::move(post));
  }
  if (in.bad()) throw IoError("read failure while loading posts");
  if (report_sink && report.skipped_total() > 0) {
    *report_sink << "skipped " << report.skipped_total() << " of " << report.lines_read
                 << " records (blank_title=" << report.skipped_blank_title
                 << " invalid=" << report.skipped_invalid << " other_forum=" << report.skipped_other_forum << ")\n";
    for (const auto& s : report.skipped) *report_sink << "  line " << s.line << ": " << s.reason << '\n';
  }
  return {Corpus(target, std::move(posts)), std::move(report)};
}

LoadResult load_posts(const std::filesystem::path& path, const std::string& forum, std::ostream* report_sink) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_posts(in, forum, report_sink);
}

void write_posts(const Corpus& c, std::ostream& out) {
  for (const auto& p : c.posts()) {
    nlohmann::ordered_json obj;
    obj["id"] = p.id;
    obj["author"] = p.author;
    obj["created_utc"] = p.created_utc;
    obj["title"] = p.title;
    obj["selftext"] = p.selftext ? nlohmann::ordered_json(*p.selftext) : nlohmann::ordered_json(nullptr);
    obj["num_comments"] = p.num_comments;
    obj["subreddit"] = p.forum;
    out << obj.dump() << '\n';
  }
}

void save_posts(const Corpus& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_posts(c, out);
  if (!out) throw IoError("write failure on " + path.string());
}

CorpusSummary corpus_summary(const Corpus& c) {
  CorpusSummary s;
  std::unordered_set<std::string> authors;
  for (const auto& p : c.posts()) {
    authors.insert(p.author);
    s.n_comments += p.num_comments;
  }
  s.n_unique_users = authors.size();
  s.n_posts = c.size();
  return s;
}

std::optional<double> no_comment_rate(const Corpus& c, TimeWindow window) {
  if (window.start > window.end) throw ArgumentError("time window start is after its end");
  std::size_t in_window = 0;
  std::size_t zero = 0;
  for (const auto& p : c.posts()) {
    if (p.created_utc < window.start || p.created_utc > window.end) continue;
    ++in_window;
    if (p.num_comments == 0) ++zero;
  }
  if (in_window == 0) return std::nullopt;
  return static_cast<double>(zero) / static_cast<double>(in_window);
}

TimeWindow full_window(const Corpus& c) {
  if (c.empty()) return {};
  auto [lo, hi] = std::minmax_element(c.posts().begin(), c.posts().end(),
                                      [](const Post& a, const Post& b) { return a.created_utc < b.created_utc; });
  return {lo->created_utc, hi->created_utc};
}

Corpus filter_users_min_posts(const Corpus& c, std::size_t k) {
  if (k == 0) throw ArgumentError("minimum posts per user must be >= 1");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& p : c.posts()) ++counts[p.author];
  std::vector<Post> kept;
  for (const auto& p : c.posts())
    if (counts[p.author] >= k) kept.push_back(p);
  return Corpus(c.forum(), std::move(kept));
}

std::vector<std::size_t> sample_indices(std::size_t total, std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const std::size_t take = std::min(n, total);
  Rng rng(seed);
  // Partial Fisher-Yates: first `take` slots become the sample.
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_index(total - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::string with_thousands(std::int64_t v) {
  std::string digits = std::to_string(v < 0 ? -v : v);
  std::string out;
  const std::size_t lead = digits.size() % 3 == 0 ? 3 : digits.size() % 3;
  out += digits.substr(0, lead);
  for (std::size_t i = lead; i < digits.size(); i += 3) out += "," + digits.substr(i, 3);
  return v < 0 ? "-" + out : out;
}

std::string render_summary_table(const std::vector<std::pair<std::string, CorpusSummary>>& forums) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Attribute"};
  for (const auto& [name, _] : forums) header.push_back(name);
  rows.push_back(header);
  auto add = [&](const std::string& label, auto field) {
    std::vector<std::string> row{label};
    for (const auto& [_, s] : forums) row.push_back(with_thousands(static_cast<std::int64_t>(field(s))));
    rows.push_back(row);
  };
  add("Number of unique users", [](const CorpusSummary& s) { return s.n_unique_users; });
  add("Number of posts", [](const CorpusSummary& s) { return s.n_posts; });
  add("Number of comments", [](const CorpusSummary& s) { return s.n_comments; });

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  std::ostringstream out;
  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    const auto& r = rows[ri];
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i == 0) {
        out << r[i] << std::string(width[i] - r[i].size(), ' ');
      } else {
        out << "  " << std::string(width[i] - r[i].size(), ' ') << r[i];
      }
    }
    out << '\n';
    if (ri == 0) {
      std::size_t total = width[0];
      for (std::size_t i = 1; i < width.size(); ++i) total += 2 + width[i];
      out << std::string(total, '-') << '\n';
    }
  }
  return out.str();
}

}  // namespace supportlens::corpus
