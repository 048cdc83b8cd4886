#include "supportlens/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include "supportlens/error.hpp"
#include "supportlens/rng.hpp"

namespace supportlens::pipeline {

namespace {

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> parse_double(std::string_view s) {
  const std::string t = trim(s);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

std::string slurp(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Drops a UTF-8 BOM and leading '#' lines; returns the line number of what remains.
std::size_t strip_preamble(std::string& text) {
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) text.erase(0, 3);
  std::size_t line = 1;
  std::size_t pos = 0;
  while (pos < text.size() && text[pos] == '#') {
    const auto nl = text.find('\n', pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    ++line;
  }
  text.erase(0, pos);
  return line;
}

std::vector<CsvRecord> parse_csv(std::string_view text, std::size_t first_line) {
  std::vector<CsvRecord> out;
  std::size_t line = first_line;
  std::size_t i = 0;
  while (i < text.size()) {
    CsvRecord rec;
    rec.line = line;
    std::string field;
    bool done = false;
    while (!done) {
      if (i < text.size() && text[i] == '"') {
        ++i;
        while (true) {
          if (i >= text.size()) throw ParseError("unterminated quoted field", rec.line);
          if (text[i] == '"') {
            if (i + 1 < text.size() && text[i + 1] == '"') {
              field.push_back('"');
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          if (text[i] == '\n') ++line;
          field.push_back(text[i++]);
        }
      }
      while (i < text.size() && text[i] != ',' && text[i] != '\n') {
        if (text[i] != '\r') field.push_back(text[i]);
        ++i;
      }
      rec.fields.push_back(std::move(field));
      field.clear();
      if (i < text.size() && text[i] == ',') {
        ++i;
      } else {
        if (i < text.size()) ++i;
        ++line;
        done = true;
      }
    }
    const bool blank = rec.fields.size() == 1 && trim(rec.fields[0]).empty();
    if (!blank) out.push_back(std::move(rec));
  }
  return out;
}

std::map<std::string, std::size_t> header_index(const CsvRecord& header, std::span<const std::string_view> required,
                                                std::string_view what) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < header.fields.size(); ++i) idx[trim(header.fields[i])] = i;
  for (auto name : required)
    if (!idx.contains(std::string(name)))
      throw ValidationError(std::string(what) + " header lacks column '" + std::string(name) + "'");
  return idx;
}

std::string sanitize(std::string v) {
  std::replace_if(v.begin(), v.end(), [](char c) { return c == '\n' || c == '\r'; }, ' ');
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void RunLog::add(std::string key, std::string value) { entries_.emplace_back(std::move(key), sanitize(std::move(value))); }
void RunLog::add(std::string key, double value) { add(std::move(key), format_double(value)); }
void RunLog::add(std::string key, std::int64_t value) { add(std::move(key), std::to_string(value)); }

std::optional<std::string> RunLog::find(std::string_view key) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
    if (it->first == key) return it->second;
  return std::nullopt;
}

void RunLog::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
}

void RunLog::append_to(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write(out);
}

std::vector<CsvRecord> read_csv(std::istream& in) {
  std::string text = slurp(in);
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) text.erase(0, 3);
  return parse_csv(text, 1);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// ---------------------------------------------------------------------------
// Annotations

void write_annotations_csv(std::ostream& out, std::span<const AnnotationRow> rows) {
  out << "# emo_rating and info_rating: 1 = support was not expressed, 7 = support was expressed a lot\n";
  out << kAnnotationHeader << '\n';
  for (const auto& r : rows)
    out << csv_escape(r.title) << ',' << csv_escape(r.annotator_id) << ',' << format_double(r.emo_rating) << ','
        << format_double(r.info_rating) << '\n';
}

std::vector<AnnotatedTitle> read_annotations(std::istream& in, RunLog* log) {
  std::string text = slurp(in);
  const std::size_t first_line = strip_preamble(text);
  const auto records = parse_csv(text, first_line);
  if (records.empty()) throw ValidationError("annotation file is empty");
  static constexpr std::string_view kCols[] = {"title", "annotator_id", "emo_rating", "info_rating"};
  const auto idx = header_index(records[0], kCols, "annotation");
  const std::size_t c_title = idx.at("title"), c_ann = idx.at("annotator_id"), c_emo = idx.at("emo_rating"),
                    c_info = idx.at("info_rating");
  const std::size_t width = records[0].fields.size();

  std::vector<AnnotatedTitle> titles;
  std::map<std::string, std::size_t> by_title;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string where = "annotation line " + std::to_string(rec.line);
    if (rec.fields.size() != width)
      throw ValidationError(where + ": expected " + std::to_string(width) + " fields, found " +
                            std::to_string(rec.fields.size()));
    const std::string title = trim(rec.fields[c_title]);
    const std::string annotator = trim(rec.fields[c_ann]);
    if (title.empty()) throw ValidationError(where + ": empty title");
    if (annotator.empty()) throw ValidationError(where + ": empty annotator_id");
    auto rating = [&](std::size_t col, std::string_view name) {
      const auto v = parse_double(rec.fields[col]);
      if (!v) throw ValidationError(where + ": " + std::string(name) + " '" + rec.fields[col] + "' is not a number");
      if (!(*v >= 1.0 && *v <= 7.0))
        throw ValidationError(where + ": " + std::string(name) + " " + format_double(*v) + " is outside [1,7]");
      return *v;
    };
    const double emo = rating(c_emo, "emo_rating");
    const double info = rating(c_info, "info_rating");
    if (!seen.emplace(title, annotator).second)
      throw ValidationError(where + ": annotator '" + annotator + "' rated this title twice");
    auto [it, fresh] = by_title.try_emplace(title, titles.size());
    if (fresh) titles.push_back(AnnotatedTitle{title, {}, {}, {}, 0, 0});
    auto& t = titles[it->second];
    t.annotators.push_back(annotator);
    t.emo_ratings.push_back(emo);
    t.info_ratings.push_back(info);
  }
  if (titles.empty()) throw ValidationError("annotation file has no rows");
  for (auto& t : titles) {
    t.emo_mean = stats::mean(t.emo_ratings);
    t.info_mean = stats::mean(t.info_ratings);
  }
  if (log) {
    log->add("annotations.rows", records.size() - 1);
    log->add("annotations.titles", titles.size());
    const auto icc = annotation_icc(titles);
    log->add("annotations.icc.items", icc.items);
    log->add("annotations.icc.raters", icc.raters);
    log->add("annotations.icc.emo", icc.emo ? format_double(*icc.emo) : std::string("undefined"));
    log->add("annotations.icc.info", icc.info ? format_double(*icc.info) : std::string("undefined"));
  }
  return titles;
}

std::vector<AnnotatedTitle> load_annotations(const std::filesystem::path& path, RunLog* log) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open annotations " + path.string());
  return read_annotations(in, log);
}

IccSummary annotation_icc(std::span<const AnnotatedTitle> titles) {
  IccSummary out;
  std::size_t k = 0;
  for (const auto& t : titles) k = std::max(k, t.annotators.size());
  if (k < 2) return out;
  std::vector<double> emo, info;
  std::size_t items = 0;
  for (const auto& t : titles) {
    if (t.annotators.size() != k) continue;
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t.annotators[a] < t.annotators[b]; });
    for (auto i : order) {
      emo.push_back(t.emo_ratings[i]);
      info.push_back(t.info_ratings[i]);
    }
    ++items;
  }
  out.items = items;
  out.raters = k;
  if (items < 2) return out;
  auto icc = [&](std::vector<double> values) -> std::optional<double> {
    try {
      return stats::icc_average(stats::RatingsMatrix(items, k, std::move(values)));
    } catch (const UndefinedError&) {
      return std::nullopt;
    }
  };
  out.emo = icc(std::move(emo));
  out.info = icc(std::move(info));
  return out;
}

// ---------------------------------------------------------------------------
// Support models

std::string_view dimension_name(Dimension d) { return d == Dimension::kEmotional ? "emo" : "info"; }

SupportModel train_support_model(std::span<const AnnotatedTitle> titles, Dimension dim,
                                 const features::Featurizer& featurizer, const forest::ForestParams& params,
                                 std::uint64_t seed, RunLog* log) {
  if (titles.size() < kMinAnnotatedTitles)
    throw ValidationError("need at least " + std::to_string(kMinAnnotatedTitles) + " annotated titles, got " +
                          std::to_string(titles.size()));
  std::vector<std::string> texts;
  std::vector<double> targets;
  for (const auto& t : titles) {
    texts.push_back(t.title);
    targets.push_back(dim == Dimension::kEmotional ? t.emo_mean : t.info_mean);
  }
  const auto rows = featurizer.extract_all(texts, params.threads);
  const auto split = stats::split_indices(titles.size(), stats::SplitFractions{}, seed);

  const auto& schema = featurizer.schema();
  forest::Matrix x(0, schema.dimension());
  std::vector<double> y;
  std::vector<std::string> keys;
  for (auto i : split.train) {
    x.append_row(rows[i]);
    y.push_back(targets[i]);
    keys.push_back(texts[i]);
  }

  SupportModel out;
  out.n_train = split.train.size();
  out.n_validation = split.validation.size();
  out.n_test = split.test.size();
  const std::uint64_t forest_seed = mix_seed(seed, dim == Dimension::kEmotional ? 1 : 2);
  out.model = forest::train_forest(x, y, schema.names(), params, forest_seed, keys);
  out.degenerate = out.model.importance_degenerate();

  auto evaluate = [&](const std::vector<std::size_t>& idx, std::string* reason) -> std::optional<stats::CorrelationResult> {
    std::vector<double> pred, truth;
    for (auto i : idx) {
      pred.push_back(out.model.predict(rows[i]));
      truth.push_back(targets[i]);
    }
    try {
      return stats::pearson(pred, truth);
    } catch (const UndefinedError& e) {
      if (reason) *reason = e.what();
    } catch (const ArgumentError& e) {
      if (reason) *reason = e.what();
    }
    return std::nullopt;
  };
  std::string validation_reason;
  out.validation = evaluate(split.validation, &validation_reason);
  out.test = evaluate(split.test, &out.undefined_reason);
  if (out.degenerate && out.undefined_reason.empty()) out.undefined_reason = "training targets are constant";
  if (out.degenerate) out.test.reset();

  if (log) {
    const std::string p = "model." + std::string(dimension_name(dim)) + ".";
    log->add(p + "split.train", out.n_train);
    log->add(p + "split.validation", out.n_validation);
    log->add(p + "split.test", out.n_test);
    log->add(p + "forest_seed", std::to_string(forest_seed));
    if (out.degenerate) log->add(p + "warning", std::string("degenerate model: training targets are constant"));
    if (out.validation) {
      log->add(p + "validation.r", out.validation->r);
      log->add(p + "validation.p", out.validation->p_two_tailed);
    } else {
      log->add(p + "validation.r", "undefined: " + validation_reason);
    }
    if (out.test) {
      log->add(p + "test.r", out.test->r);
      log->add(p + "test.p", out.test->p_two_tailed);
    } else {
      log->add(p + "test.r", "undefined: " + out.undefined_reason);
    }
    const auto top = out.model.importance_report(std::min<std::size_t>(5, schema.dimension()));
    for (std::size_t i = 0; i < top.size(); ++i)
      log->add(p + "importance." + std::to_string(i + 1), top[i].name + " " + format_double(top[i].value));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scoring and aggregation

std::vector<ScoredPost> score_corpus(const forest::ForestModel& emo, const forest::ForestModel& info,
                                     const corpus::Corpus& corpus, const features::Featurizer& featurizer,
                                     std::size_t threads) {
  const auto& names = featurizer.schema().names();
  for (const auto* m : {&emo, &info})
    if (m->schema_names() != names)
      throw ConfigError("support model was trained on a different feature schema (" +
                        std::to_string(m->schema_names().size()) + " features, current schema has " +
                        std::to_string(names.size()) + ")");
  const auto& posts = corpus.posts();
  std::vector<ScoredPost> out(posts.size());
  parallel_for(posts.size(), threads, [&](std::size_t i) {
    const auto v = featurizer.extract(posts[i].title);
    out[i] = ScoredPost{posts[i].id, posts[i].author, posts[i].num_comments, emo.predict(v), info.predict(v)};
  });
  return out;
}

void write_scores_csv(std::ostream& out, std::span<const ScoredPost> scores) {
  out << "id,emo_score,info_score\n";
  for (const auto& s : scores)
    out << csv_escape(s.id) << ',' << format_double(s.emo_score) << ',' << format_double(s.info_score) << '\n';
}

std::map<std::string, std::pair<double, double>> read_scores_csv(std::istream& in) {
  const auto records = read_csv(in);
  if (records.empty()) throw ValidationError("scores file is empty");
  static constexpr std::string_view kCols[] = {"id", "emo_score", "info_score"};
  const auto idx = header_index(records[0], kCols, "scores");
  std::map<std::string, std::pair<double, double>> out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    const std::string where = "scores line " + std::to_string(records[r].line);
    if (f.size() != records[0].fields.size()) throw ValidationError(where + ": wrong field count");
    const auto e = parse_double(f[idx.at("emo_score")]);
    const auto i = parse_double(f[idx.at("info_score")]);
    if (!e || !i) throw ValidationError(where + ": score is not a number");
    if (!out.emplace(f[idx.at("id")], std::make_pair(*e, *i)).second)
      throw ValidationError(where + ": duplicate id '" + f[idx.at("id")] + "'");
  }
  return out;
}

std::vector<ScoredPost> join_scores(const corpus::Corpus& corpus,
                                    const std::map<std::string, std::pair<double, double>>& scores) {
  std::vector<ScoredPost> out;
  for (const auto& p : corpus.posts()) {
    auto it = scores.find(p.id);
    if (it == scores.end()) throw ValidationError("post '" + p.id + "' has no score");
    out.push_back(ScoredPost{p.id, p.author, p.num_comments, it->second.first, it->second.second});
  }
  return out;
}

Aggregation aggregate_users(std::span<const ScoredPost> posts, std::size_t k_min) {
  if (k_min == 0) throw ArgumentError("k_min must be >= 1");
  struct Acc {
    std::size_t n = 0;
    double comments = 0, emo = 0, info = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& p : posts) {
    auto& a = acc[p.author];
    ++a.n;
    a.comments += static_cast<double>(p.num_comments);
    a.emo += p.emo_score;
    a.info += p.info_score;
  }
  Aggregation out;
  out.k_min = k_min;
  for (const auto& [user, a] : acc) {
    if (a.n < k_min) continue;
    const double n = static_cast<double>(a.n);
    out.users.push_back(UserAggregate{user, a.n, a.comments / n, a.emo / n, a.info / n});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Engagement report

EngagementReport engagement_report(const Aggregation& aggregation, std::string forum) {
  if (aggregation.users.size() < 3)
    throw ValidationError("engagement report needs at least 3 users with >= " + std::to_string(aggregation.k_min) +
                          " posts, found " + std::to_string(aggregation.users.size()));
  std::vector<double> comments, emo, info;
  for (const auto& u : aggregation.users) {
    comments.push_back(u.mean_comments);
    emo.push_back(u.mean_emo);
    info.push_back(u.mean_info);
  }
  EngagementReport rep;
  rep.forum = std::move(forum);
  rep.n_users = aggregation.users.size();
  auto row = [&](std::string_view label, const std::vector<double>& support, std::string_view what) {
    ReportRow r;
    r.label = std::string(label);
    try {
      r.result = stats::pearson(support, comments);
    } catch (const UndefinedError&) {
      const bool flat_support = std::all_of(support.begin(), support.end(), [&](double v) { return v == support[0]; });
      r.undefined_reason = flat_support ? "mean " + std::string(what) + " score is constant across users"
                                        : std::string("mean comment count is constant across users");
    }
    return r;
  };
  rep.rows[0] = row(kEmotionalLabel, emo, "emotional");
  rep.rows[1] = row(kInformationalLabel, info, "informational");
  return rep;
}

std::string p_flag(double p) {
  if (p < 0.001) return "<0.001";
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << p;
  return s.str();
}

void write_report_csv(std::ostream& out, const EngagementReport& report) {
  out << "forum,feature,pearson_r,p_value,p_flag,n_users\n";
  for (const auto& r : report.rows) {
    out << csv_escape(report.forum) << ',' << csv_escape(r.label) << ',';
    if (r.result)
      out << format_double(r.result->r) << ',' << format_double(r.result->p_two_tailed) << ','
          << p_flag(r.result->p_two_tailed);
    else
      out << ",," << csv_escape("undefined: " + r.undefined_reason);
    out << ',' << report.n_users << '\n';
  }
}

EngagementReport read_report_csv(std::istream& in) {
  const auto records = read_csv(in);
  static constexpr std::string_view kCols[] = {"forum", "feature", "pearson_r", "p_value", "p_flag", "n_users"};
  if (records.empty()) throw ValidationError("report file is empty");
  const auto idx = header_index(records[0], kCols, "report");
  if (records.size() != 3) throw ValidationError("report must have exactly two rows");
  EngagementReport rep;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& f = records[i + 1].fields;
    if (f.size() != records[0].fields.size()) throw ValidationError("report row has the wrong field count");
    rep.forum = f[idx.at("forum")];
    const auto users = parse_double(f[idx.at("n_users")]);
    if (!users || *users < 0) throw ValidationError("report n_users is not a count");
    rep.n_users = static_cast<std::size_t>(*users);
    auto& row = rep.rows[i];
    row.label = f[idx.at("feature")];
    const auto r = parse_double(f[idx.at("pearson_r")]);
    const auto p = parse_double(f[idx.at("p_value")]);
    if (r && p) {
      row.result = stats::CorrelationResult{*r, rep.n_users, *p};
    } else {
      std::string flag = f[idx.at("p_flag")];
      constexpr std::string_view kPrefix = "undefined: ";
      row.undefined_reason = flag.rfind(kPrefix, 0) == 0 ? flag.substr(kPrefix.size()) : flag;
    }
  }
  if (rep.rows[0].label != kEmotionalLabel || rep.rows[1].label != kInformationalLabel)
    throw ValidationError("report rows must be '" + std::string(kEmotionalLabel) + "' then '" +
                          std::string(kInformationalLabel) + "'");
  return rep;
}

std::string render_report_text(const EngagementReport& report) {
  constexpr int kLabel = 30;
  std::ostringstream out;
  out << std::left << std::setw(kLabel) << "Feature" << std::right << std::setw(10) << "Pearson r" << std::setw(9)
      << "p" << '\n';
  out << std::string(kLabel + 19, '-') << '\n';
  bool all_small = true;
  for (const auto& r : report.rows) {
    out << std::left << std::setw(kLabel) << r.label << std::right;
    if (r.result) {
      std::ostringstream rv;
      rv << std::fixed << std::setprecision(2) << r.result->r;
      std::string s = rv.str();
      if (s == "-0.00") s = "0.00";
      out << std::setw(10) << s << std::setw(9) << p_flag(r.result->p_two_tailed) << '\n';
      all_small = all_small && r.result->p_two_tailed < 0.001;
    } else {
      out << std::setw(10) << "undefined" << "  (" << r.undefined_reason << ")\n";
      all_small = false;
    }
  }
  out << std::string(kLabel + 19, '-') << '\n';
  out << "Correlation between social support sought and number of comments: /r/" << report.forum << '.';
  if (all_small) out << " p<0.001.";
  out << " Number of users = " << corpus::with_thousands(static_cast<std::int64_t>(report.n_users)) << '\n';
  return out.str();
}

std::string render_importance_table(std::string_view title, std::span<const forest::Importance> rows) {
  std::size_t width = 7;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  std::ostringstream out;
  out << title << '\n';
  out << std::left << std::setw(static_cast<int>(width)) << "Feature" << "  " << "Importance" << '\n';
  for (const auto& r : rows)
    out << std::left << std::setw(static_cast<int>(width)) << r.name << "  " << std::fixed << std::setprecision(3)
        << r.value << '\n';
  return out.str();
}

}  // namespace supportlens::pipeline
