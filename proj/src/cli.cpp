#include "supportlens/cli.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "supportlens/corpus.hpp"
#include "supportlens/error.hpp"
#include "supportlens/features.hpp"
#include "supportlens/forest.hpp"
#include "supportlens/lexicons.hpp"
#include "supportlens/pipeline.hpp"
#include "supportlens/rng.hpp"
#include "supportlens/topics.hpp"

namespace supportlens::cli {

namespace fs = std::filesystem;

namespace {

// Keys whose values are filesystem paths.
bool is_path_key(const std::string& key) { return key.rfind("paths.", 0) == 0; }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError(key + " = '" + text + "' is not a valid number");
  return v;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failure on " + p.string());
}

fs::path require_input(const fs::path& p, std::string_view what) {
  if (!fs::exists(p)) throw ValidationError(std::string(what) + " not found: " + p.string());
  return p;
}

std::string kind_of(const Error& e) {
  if (dynamic_cast<const IoError*>(&e)) return "io";
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const ValidationError*>(&e)) return "validation";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const ArgumentError*>(&e)) return "argument";
  if (dynamic_cast<const TrainingError*>(&e)) return "training";
  if (dynamic_cast<const LoadError*>(&e)) return "load";
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
  if (dynamic_cast<const UndefinedError*>(&e)) return "undefined";
  return "error";
}

std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

// Everything a subcommand needs.
struct Run {
  Config config;
  fs::path out_dir;
  pipeline::RunLog log;
  std::ostream& out;

  fs::path artifact(const char* name) const { return out_dir / name; }
  std::uint64_t seed(std::uint64_t stream) const { return mix_seed(config.seed(), stream); }
  std::size_t threads() const { return config.get_size("threads"); }

  fs::path lexicon_dir() const {
    return config.has("paths.lexicons") ? config.path("paths.lexicons") : lex::default_data_dir();
  }
  lex::LexiconSet lexicons() const { return lex::LexiconSet::load_dir(require_input(lexicon_dir(), "lexicon directory")); }
  topics::Stoplist stoplist() const {
    const fs::path p = config.has("paths.stopwords") ? config.path("paths.stopwords") : lexicon_dir() / "stopwords.txt";
    return topics::Stoplist::load(require_input(p, "stopword list"));
  }
  corpus::Corpus posts() const {
    return corpus::load_posts(require_input(artifact(artifact::kPosts), "ingested posts (run ingest first)"), "").corpus;
  }
  topics::TopicModel lda() const {
    return topics::TopicModel::load(require_input(artifact(artifact::kLda), "topic model (run train-lda first)"));
  }
  forest::ForestModel model(const char* name) const {
    return forest::ForestModel::load(require_input(artifact(name), "support model (run train-model first)"));
  }
};

void cmd_ingest(Run& run) {
  const fs::path src = require_input(run.config.path("paths.corpus"), "corpus");
  std::ostringstream skipped;
  auto result = corpus::load_posts(src, run.config.get("corpus.forum"), &skipped);
  corpus::save_posts(result.corpus, run.artifact(artifact::kPosts));
  const auto& r = result.report;
  run.log.add("ingest.forum", result.corpus.forum());
  run.log.add("ingest.lines_read", r.lines_read);
  run.log.add("ingest.posts", result.corpus.size());
  run.log.add("ingest.skipped_blank_title", r.skipped_blank_title);
  run.log.add("ingest.skipped_invalid", r.skipped_invalid);
  run.log.add("ingest.skipped_other_forum", r.skipped_other_forum);
  run.out << "ingested " << result.corpus.size() << " posts from " << result.corpus.forum() << " ("
          << r.skipped_total() << " skipped)\n";
}

void cmd_sample_titles(Run& run) {
  const auto c = run.posts();
  const auto idx = corpus::sample_indices(c.size(), run.config.get_size("sample.n"), run.seed(4));
  std::ostringstream csv;
  csv << "id,title\n";
  for (auto i : idx)
    csv << pipeline::csv_escape(c.posts()[i].id) << ',' << pipeline::csv_escape(c.posts()[i].title) << '\n';
  write_file(run.artifact(artifact::kSample), csv.str());
  run.log.add("sample.titles", idx.size());
  run.out << "sampled " << idx.size() << " titles\n";
}

void cmd_train_lda(Run& run) {
  const auto c = run.posts();
  const auto stop = run.stoplist();
  std::size_t n = run.config.get_size("lda.train_titles");
  if (n == 0 || n > c.size()) n = c.size();
  auto idx = corpus::sample_indices(c.size(), n, run.seed(1));
  std::vector<std::vector<std::string>> docs;
  for (auto i : idx) docs.push_back(topics::topic_terms(c.posts()[i].title, stop));

  topics::LdaParams p;
  p.topics = run.config.get_size("lda.K");
  if (p.topics < 1) throw ConfigError("lda.K must be >= 1");
  p.alpha = run.config.get_optional_double("lda.alpha");
  p.beta = run.config.get_double("lda.beta");
  p.iterations = run.config.get_size("lda.iterations");
  p.inference_sweeps = run.config.get_size("lda.inference_sweeps");
  p.min_doc_freq = run.config.get_size("lda.min_doc_freq");
  p.seed = run.seed(2);
  const auto model = topics::train_lda(docs, p);
  model.save(run.artifact(artifact::kLda));
  run.log.add("lda.titles", docs.size());
  run.log.add("lda.vocab", model.vocab().size());
  run.log.add("lda.seed", std::to_string(p.seed));
  for (std::size_t k = 0; k < model.topics(); ++k) {
    std::string words;
    for (const auto& w : model.top_words(k, 5)) words += (words.empty() ? "" : " ") + w;
    run.log.add("lda.topic_" + std::to_string(k), words);
  }
  run.out << "trained " << model.topics() << " topics over " << model.vocab().size() << " words\n";
}

forest::ForestParams forest_params(const Config& c) {
  forest::ForestParams p;
  p.n_trees = c.get_size("forest.n_trees");
  if (c.has("forest.mtry")) p.mtry = c.get_size("forest.mtry");
  p.min_leaf = c.get_size("forest.min_leaf");
  p.threads = c.get_size("threads");
  return p;
}

void cmd_train_model(Run& run) {
  const auto titles =
      pipeline::load_annotations(require_input(run.config.path("paths.annotations"), "annotations"), &run.log);
  const auto lexicons = run.lexicons();
  const auto stop = run.stoplist();
  const auto lda = run.lda();
  const features::Featurizer featurizer(lexicons, stop, lda,
                                        features::feature_schema(lexicons.categories.categories(), lda.topics()));
  const auto params = forest_params(run.config);
  for (auto dim : {pipeline::Dimension::kEmotional, pipeline::Dimension::kInformational}) {
    const auto m = pipeline::train_support_model(titles, dim, featurizer, params, run.seed(3), &run.log);
    m.model.save(run.artifact(dim == pipeline::Dimension::kEmotional ? artifact::kModelEmo : artifact::kModelInfo));
    run.out << dimension_name(dim) << " model: test r = ";
    if (m.test)
      run.out << pipeline::format_double(m.test->r) << " (n=" << m.test->n << ")\n";
    else
      run.out << "undefined (" << m.undefined_reason << ")\n";
  }
}

void cmd_score(Run& run) {
  const auto c = run.posts();
  const auto lexicons = run.lexicons();
  const auto stop = run.stoplist();
  const auto lda = run.lda();
  const auto emo = run.model(artifact::kModelEmo);
  const auto info = run.model(artifact::kModelInfo);
  const features::Featurizer featurizer(lexicons, stop, lda,
                                        features::feature_schema(lexicons.categories.categories(), lda.topics()));
  const auto scores = pipeline::score_corpus(emo, info, c, featurizer, run.threads());
  std::ostringstream csv;
  pipeline::write_scores_csv(csv, scores);
  write_file(run.artifact(artifact::kScores), csv.str());
  run.log.add("score.posts", scores.size());
  run.out << "scored " << scores.size() << " posts\n";
}

void cmd_analyze(Run& run) {
  const auto c = run.posts();
  std::ifstream in(require_input(run.artifact(artifact::kScores), "scores (run score first)"), std::ios::binary);
  const auto scored = pipeline::join_scores(c, pipeline::read_scores_csv(in));
  const auto agg = pipeline::aggregate_users(scored, run.config.get_size("analysis.k_min"));
  run.log.add("analyze.k_min", agg.k_min);
  run.log.add("analyze.users", agg.users.size());
  if (agg.no_qualifying_users())
    throw ValidationError("no users with >= " + std::to_string(agg.k_min) + " posts; engagement report not produced");
  const auto rep = pipeline::engagement_report(agg, c.forum());
  std::ostringstream csv;
  pipeline::write_report_csv(csv, rep);
  write_file(run.artifact(artifact::kReportCsv), csv.str());
  const std::string text = pipeline::render_report_text(rep);
  write_file(run.artifact(artifact::kReportText), text);
  for (const auto& row : rep.rows) {
    const std::string key = row.label == pipeline::kEmotionalLabel ? "analyze.emo" : "analyze.info";
    if (row.result) {
      run.log.add(key + ".r", row.result->r);
      run.log.add(key + ".p", row.result->p_two_tailed);
    } else {
      run.log.add(key + ".r", "undefined: " + row.undefined_reason);
    }
  }
  run.out << text;
}

void cmd_report(Run& run) {
  std::ifstream in(require_input(run.artifact(artifact::kReportCsv), "engagement report (run analyze first)"),
                   std::ios::binary);
  const auto rep = pipeline::read_report_csv(in);
  std::string text = pipeline::render_report_text(rep);
  const std::size_t k = run.config.get_size("report.top_k");
  for (const auto& [name, label] : {std::pair{artifact::kModelEmo, "Top features: emotional support sought"},
                                    std::pair{artifact::kModelInfo, "Top features: informational support sought"}}) {
    if (!fs::exists(run.artifact(name))) continue;
    const auto m = run.model(name);
    const auto top = m.importance_report(std::min(k, m.schema_names().size()));
    text += "\n" + pipeline::render_importance_table(label, top);
    if (m.importance_degenerate()) text += "(degenerate model: importances are uniform)\n";
  }
  write_file(run.artifact(artifact::kReport), text);
  run.out << text;
}

void cmd_summary(Run& run) {
  const auto result =
      corpus::load_posts(require_input(run.config.path("paths.corpus"), "corpus"), run.config.get("corpus.forum"));
  const auto& c = result.corpus;
  const auto s = corpus::corpus_summary(c);
  std::string text = corpus::render_summary_table({{c.forum(), s}});
  corpus::TimeWindow w = c.empty() ? corpus::TimeWindow{} : corpus::full_window(c);
  if (run.config.has("summary.window_start")) w.start = static_cast<std::int64_t>(run.config.get_double("summary.window_start"));
  if (run.config.has("summary.window_end")) w.end = static_cast<std::int64_t>(run.config.get_double("summary.window_end"));
  const auto rate = corpus::no_comment_rate(c, w);
  std::ostringstream line;
  line << "No-comment rate [" << w.start << ", " << w.end << "]: ";
  if (rate) {
    line << std::fixed << std::setprecision(2) << (*rate * 100.0) << "%\n";
    run.log.add("summary.no_comment_rate", *rate);
  } else {
    line << "undefined (no posts in window)\n";
    run.log.add("summary.no_comment_rate", std::string("undefined"));
  }
  text += line.str();
  run.log.add("summary.users", s.n_unique_users);
  run.log.add("summary.posts", s.n_posts);
  run.log.add("summary.comments", s.n_comments);
  write_file(run.artifact(artifact::kSummary), text);
  run.out << text;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

const std::map<std::string, std::string>& Config::defaults() {
  static const std::map<std::string, std::string> d = {
      {"seed", ""},
      {"threads", "0"},
      {"paths.corpus", ""},
      {"paths.lexicons", ""},
      {"paths.stopwords", ""},
      {"paths.annotations", ""},
      {"paths.out", "out"},
      {"corpus.forum", ""},
      {"sample.n", "1000"},
      {"lda.K", "20"},
      {"lda.alpha", ""},
      {"lda.beta", "0.01"},
      {"lda.iterations", "1000"},
      {"lda.inference_sweeps", "20"},
      {"lda.min_doc_freq", "2"},
      {"lda.train_titles", "45000"},
      {"forest.n_trees", "500"},
      {"forest.mtry", ""},
      {"forest.min_leaf", "5"},
      {"analysis.k_min", "5"},
      {"report.top_k", "5"},
      {"summary.window_start", ""},
      {"summary.window_end", ""},
  };
  return d;
}

Config Config::parse(std::istream& in, const fs::path& base) {
  Config c;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.find('=') == std::string::npos) throw ConfigError("config line " + std::to_string(n) + ": expected key=value");
    c.set(t, base);
  }
  return c;
}

Config Config::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse(in, path.parent_path());
}

void Config::set(const std::string& assignment, const fs::path& base) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), base);
}

void Config::set(const std::string& key, const std::string& value, const fs::path& base) {
  if (!defaults().contains(key)) throw ConfigError("unknown config key '" + key + "'");
  if (is_path_key(key) && !value.empty() && !base.empty() && fs::path(value).is_relative())
    values_[key] = (base / value).lexically_normal().string();
  else
    values_[key] = value;
}

bool Config::has(const std::string& key) const { return !get(key).empty(); }

std::string Config::get(const std::string& key) const {
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  auto d = defaults().find(key);
  if (d == defaults().end()) throw ConfigError("unknown config key '" + key + "'");
  return d->second;
}

std::size_t Config::get_size(const std::string& key) const { return parse_number<std::size_t>(key, get(key)); }

double Config::get_double(const std::string& key) const {
  const double v = parse_number<double>(key, get(key));
  if (!std::isfinite(v)) throw ConfigError(key + " must be finite");
  return v;
}

std::optional<double> Config::get_optional_double(const std::string& key) const {
  if (!has(key) || get(key) == "auto") return std::nullopt;
  return get_double(key);
}

std::uint64_t Config::seed() const {
  if (!has("seed")) throw ConfigError("seed is required (set seed=N in the config or pass --seed)");
  return parse_number<std::uint64_t>("seed", get("seed"));
}

fs::path Config::path(const std::string& key) const {
  if (!has(key)) throw ConfigError(key + " is not set");
  return get(key);
}

std::map<std::string, std::string> Config::effective() const {
  std::map<std::string, std::string> out = defaults();
  for (const auto& [k, v] : values_) out[k] = v;
  return out;
}

// ---------------------------------------------------------------------------

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Social-support analysis of forum post titles", "supportlens"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--seed", seed, "random seed (overrides config)");
  app.add_option("--out", out_dir, "output directory (overrides paths.out)");
  app.add_option("--set", overrides, "override a config value: --set lda.K=10")->take_all();

  using Handler = void (*)(Run&);
  const std::vector<std::tuple<const char*, const char*, Handler>> commands = {
      {"ingest", "load a JSONL dump and write posts.jsonl", cmd_ingest},
      {"sample-titles", "draw a seeded sample of titles for annotation", cmd_sample_titles},
      {"train-lda", "train the topic model (lda.json)", cmd_train_lda},
      {"train-model", "train emotional and informational support models", cmd_train_model},
      {"score", "score every post (scores.csv)", cmd_score},
      {"analyze", "aggregate users and correlate support with comments", cmd_analyze},
      {"report", "render the engagement and feature-importance tables", cmd_report},
      {"summary", "corpus counts and no-comment rate", cmd_summary},
  };
  for (const auto& [name, help, _] : commands) app.add_subcommand(name, help);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << one_line(e.what()) << '\n';
    return 2;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  std::optional<Run> run;
  auto fail = [&](std::string_view kind, std::string_view what) {
    err << "error: " << kind << ": " << one_line(std::string(what)) << '\n';
    if (run && fs::is_directory(run->out_dir)) {
      try {
        run->log.add("status", "error: " + std::string(kind) + ": " + one_line(std::string(what)));
        run->log.append_to(run->artifact(artifact::kLog));
      } catch (const Error&) {
      }
    }
    return 1;
  };
  try {
    Config config = config_path.empty() ? Config{} : Config::load(config_path);
    for (const auto& o : overrides) config.set(o);
    if (seed) config.set("seed", std::to_string(*seed));
    if (!out_dir.empty()) config.set("paths.out", out_dir);
    (void)config.seed();

    run.emplace(Run{config, config.path("paths.out"), {}, out});
    fs::create_directories(run->out_dir);
    run->log.add("command", name);
    for (const auto& [k, v] : config.effective()) run->log.add("config." + k, v);
    for (const auto& [cmd, help, handler] : commands) {
      (void)help;
      if (name == cmd) handler(*run);
    }
    run->log.add("status", std::string("ok"));
    run->log.append_to(run->artifact(artifact::kLog));
    return 0;
  } catch (const Error& e) {
    return fail(kind_of(e), e.what());
  } catch (const fs::filesystem_error& e) {
    return fail("io", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
}

}  // namespace supportlens::cli
