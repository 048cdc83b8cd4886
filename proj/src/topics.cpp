#include "supportlens/topics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "supportlens/error.hpp"
#include "supportlens/rng.hpp"
#include "supportlens/textproc.hpp"

namespace supportlens::topics {

namespace {

using nlohmann::json;

constexpr double kRowSumTolerance = 1e-9;

std::size_t sample_cumulative(std::span<const double> cumulative, double u) {
  const double target = u * cumulative.back();
  for (std::size_t k = 0; k + 1 < cumulative.size(); ++k)
    if (target < cumulative[k]) return k;
  return cumulative.size() - 1;
}

}  // namespace

Stoplist Stoplist::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stoplist " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    for (auto& c : line) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    words.insert(line);
  }
  return Stoplist(std::move(words));
}

std::vector<std::string> topic_terms(std::string_view title, const Stoplist& stoplist) {
  std::vector<std::string> out;
  for (auto& tok : text::tokenize(title)) {
    const bool has_letter =
        std::any_of(tok.lower.begin(), tok.lower.end(), [](unsigned char c) { return c >= 0x80 || std::isalpha(c); });
    if (!has_letter || stoplist.contains(tok.lower)) continue;
    out.push_back(std::move(tok.lower));
  }
  return out;
}

// ---------------------------------------------------------------------------
// TopicModel

TopicModel::TopicModel(std::size_t topics, double alpha, double beta, std::vector<std::string> vocab,
                       std::vector<double> phi, std::uint64_t seed, std::size_t iterations,
                       std::size_t inference_sweeps)
    : topics_(topics),
      alpha_(alpha),
      beta_(beta),
      vocab_(std::move(vocab)),
      phi_(std::move(phi)),
      seed_(seed),
      iterations_(iterations),
      inference_sweeps_(inference_sweeps) {
  if (topics_ < 1) throw ValidationError("topic model needs at least one topic");
  if (!(alpha_ > 0.0) || !(beta_ > 0.0)) throw ValidationError("topic model priors must be positive");
  if (vocab_.empty()) throw ValidationError("topic model vocabulary is empty");
  if (phi_.size() != topics_ * vocab_.size())
    throw ValidationError("phi has " + std::to_string(phi_.size()) + " entries, expected " +
                          std::to_string(topics_ * vocab_.size()));
  for (std::size_t w = 0; w < vocab_.size(); ++w) {
    if (!index_.emplace(vocab_[w], static_cast<std::uint32_t>(w)).second)
      throw ValidationError("duplicate vocabulary word '" + vocab_[w] + "'");
  }
  for (std::size_t k = 0; k < topics_; ++k) {
    double sum = 0.0;
    for (double p : phi_row(k)) {
      if (!(p > 0.0 && p < 1.0 + kRowSumTolerance)) throw ValidationError("phi entry outside (0, 1]");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > kRowSumTolerance)
      throw ValidationError("phi row " + std::to_string(k) + " sums to " + std::to_string(sum));
  }
}

std::optional<std::uint32_t> TopicModel::word_id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<double> TopicModel::infer(std::span<const std::string> terms) const {
  std::vector<std::uint32_t> words;
  std::uint64_t h = fnv1a("");
  for (const auto& t : terms) {
    if (auto id = word_id(t)) {
      words.push_back(*id);
      h = fnv1a(t, h);
      h = fnv1a(" ", h);
    }
  }
  const auto k_count = topics_;
  if (words.empty()) return std::vector<double>(k_count, 1.0 / static_cast<double>(k_count));

  Rng rng(mix_seed(seed_, h));
  std::vector<std::uint32_t> n_k(k_count, 0);
  std::vector<std::uint32_t> z(words.size());
  for (auto& zi : z) {
    zi = static_cast<std::uint32_t>(rng.uniform_index(k_count));
    ++n_k[zi];
  }
  std::vector<double> cumulative(k_count);
  for (std::size_t sweep = 0; sweep < inference_sweeps_; ++sweep) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      --n_k[z[i]];
      double acc = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) {
        acc += (n_k[k] + alpha_) * phi(k, words[i]);
        cumulative[k] = acc;
      }
      z[i] = static_cast<std::uint32_t>(sample_cumulative(cumulative, rng.uniform01()));
      ++n_k[z[i]];
    }
  }
  std::vector<double> theta(k_count);
  double sum = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    theta[k] = n_k[k] + alpha_;
    sum += theta[k];
  }
  for (auto& t : theta) t /= sum;
  return theta;
}

std::vector<std::string> TopicModel::top_words(std::size_t topic, std::size_t k) const {
  if (topic >= topics_)
    throw ArgumentError("topic " + std::to_string(topic) + " out of range [0, " + std::to_string(topics_) + ")");
  if (k == 0) throw ArgumentError("top_words needs k >= 1");
  std::vector<std::size_t> order(vocab_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto row = phi_row(topic);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (row[a] != row[b]) return row[a] > row[b];
    return vocab_[a] < vocab_[b];
  });
  order.resize(std::min(k, order.size()));
  std::vector<std::string> out;
  for (auto w : order) out.push_back(vocab_[w]);
  return out;
}

std::string TopicModel::to_json() const {
  nlohmann::ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["K"] = topics_;
  j["alpha"] = alpha_;
  j["beta"] = beta_;
  j["seed"] = seed_;
  j["iterations"] = iterations_;
  j["inference_sweeps"] = inference_sweeps_;
  j["rng_id"] = std::string(kRngId);
  j["vocab"] = vocab_;
  j["phi"] = phi_;
  return j.dump() + "\n";
}

void TopicModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json();
  if (!out) throw IoError("write failure on " + path.string());
}

TopicModel TopicModel::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(std::string("topic model is not valid JSON (truncated or corrupted): ") + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw LoadError("unsupported topic model format_version " + std::to_string(version) + " (supported: " +
                      std::to_string(kModelFormatVersion) + ")");
    const auto rng_id = j.at("rng_id").get<std::string>();
    if (rng_id != kRngId)
      throw LoadError("topic model was written with rng '" + rng_id + "', this build uses '" + std::string(kRngId) + "'");
    return TopicModel(j.at("K").get<std::size_t>(), j.at("alpha").get<double>(), j.at("beta").get<double>(),
                      j.at("vocab").get<std::vector<std::string>>(), j.at("phi").get<std::vector<double>>(),
                      j.at("seed").get<std::uint64_t>(), j.at("iterations").get<std::size_t>(),
                      j.at("inference_sweeps").get<std::size_t>());
  } catch (const json::exception& e) {
    throw LoadError(std::string("topic model has missing or mistyped fields: ") + e.what());
  } catch (const ValidationError& e) {
    throw LoadError(std::string("topic model failed validation: ") + e.what());
  }
}

TopicModel TopicModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open topic model " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

// ---------------------------------------------------------------------------
// GibbsSampler

GibbsSampler::GibbsSampler(std::vector<std::vector<std::uint32_t>> docs, std::size_t vocab_size, std::size_t topics,
                           double alpha, double beta, std::uint64_t seed)
    : docs_(std::move(docs)),
      vocab_size_(vocab_size),
      topics_(topics),
      alpha_(alpha),
      beta_(beta),
      n_dk_(docs_.size() * topics, 0),
      n_kw_(topics * vocab_size, 0),
      n_k_(topics, 0),
      weights_(topics, 0.0),
      rng_(seed) {
  z_.resize(docs_.size());
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    z_[d].resize(docs_[d].size());
    for (std::size_t i = 0; i < docs_[d].size(); ++i) {
      const auto w = docs_[d][i];
      if (w >= vocab_size_) throw ArgumentError("word id out of vocabulary range");
      const auto k = static_cast<std::uint32_t>(rng_.uniform_index(topics_));
      z_[d][i] = k;
      ++n_dk_[d * topics_ + k];
      ++n_kw_[k * vocab_size_ + w];
      ++n_k_[k];
      ++total_tokens_;
    }
  }
}

void GibbsSampler::sweep() {
  const double v_beta = static_cast<double>(vocab_size_) * beta_;
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    std::uint32_t* doc_counts = &n_dk_[d * topics_];
    for (std::size_t i = 0; i < docs_[d].size(); ++i) {
      const auto w = docs_[d][i];
      auto k = z_[d][i];
      --doc_counts[k];
      --n_kw_[k * vocab_size_ + w];
      --n_k_[k];
      double acc = 0.0;
      for (std::size_t t = 0; t < topics_; ++t) {
        acc += (doc_counts[t] + alpha_) * (n_kw_[t * vocab_size_ + w] + beta_) / (n_k_[t] + v_beta);
        weights_[t] = acc;
      }
      k = static_cast<std::uint32_t>(sample_cumulative(weights_, rng_.uniform01()));
      z_[d][i] = k;
      ++doc_counts[k];
      ++n_kw_[k * vocab_size_ + w];
      ++n_k_[k];
    }
  }
}

bool GibbsSampler::counts_consistent() const {
  std::size_t doc_total = 0;
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    std::size_t row = 0;
    for (std::size_t k = 0; k < topics_; ++k) row += n_dk_[d * topics_ + k];
    if (row != docs_[d].size()) return false;
    doc_total += row;
  }
  std::size_t topic_total = 0;
  for (std::size_t k = 0; k < topics_; ++k) {
    std::size_t row = 0;
    for (std::size_t w = 0; w < vocab_size_; ++w) row += n_kw_[k * vocab_size_ + w];
    if (row != n_k_[k]) return false;
    topic_total += n_k_[k];
  }
  if (doc_total != total_tokens_ || topic_total != total_tokens_) return false;
  // Recount from assignments.
  std::vector<std::uint32_t> recount(topics_, 0);
  for (const auto& zd : z_)
    for (auto k : zd) ++recount[k];
  return recount == n_k_;
}

std::vector<double> GibbsSampler::phi() const {
  std::vector<double> out(topics_ * vocab_size_);
  const double v_beta = static_cast<double>(vocab_size_) * beta_;
  for (std::size_t k = 0; k < topics_; ++k) {
    const double denom = n_k_[k] + v_beta;
    for (std::size_t w = 0; w < vocab_size_; ++w) out[k * vocab_size_ + w] = (n_kw_[k * vocab_size_ + w] + beta_) / denom;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

TopicModel train_lda(std::span<const std::vector<std::string>> docs, const LdaParams& params,
                     const TrainOptions& options) {
  if (params.topics < 1) throw ArgumentError("LDA needs at least one topic");
  const double alpha = params.resolved_alpha();
  if (!(alpha > 0.0) || !(params.beta > 0.0)) throw ArgumentError("LDA priors must be positive");
  if (params.iterations < 1) throw ArgumentError("LDA needs at least one iteration");

  std::map<std::string, std::size_t> doc_freq;
  for (const auto& doc : docs) {
    std::vector<std::string> uniq(doc.begin(), doc.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (auto& w : uniq) ++doc_freq[w];
  }
  std::vector<std::string> vocab;
  std::unordered_map<std::string, std::uint32_t> index;
  for (const auto& [w, df] : doc_freq) {
    if (df < params.min_doc_freq) continue;
    index.emplace(w, static_cast<std::uint32_t>(vocab.size()));
    vocab.push_back(w);
  }
  std::vector<std::vector<std::uint32_t>> encoded;
  for (const auto& doc : docs) {
    std::vector<std::uint32_t> ids;
    for (const auto& w : doc)
      if (auto it = index.find(w); it != index.end()) ids.push_back(it->second);
    if (!ids.empty()) encoded.push_back(std::move(ids));
  }
  if (encoded.empty() || vocab.empty())
    throw TrainingError("no documents with in-vocabulary terms left after filtering (min document frequency " +
                        std::to_string(params.min_doc_freq) + ")");

  GibbsSampler sampler(std::move(encoded), vocab.size(), params.topics, alpha, params.beta, params.seed);
#ifndef NDEBUG
  const bool verify = true;
#else
  const bool verify = options.verify_counts;
#endif
  for (std::size_t it = 1; it <= params.iterations; ++it) {
    sampler.sweep();
    if (verify && !sampler.counts_consistent())
      throw TrainingError("Gibbs count conservation violated after sweep " + std::to_string(it));
    if (options.on_sweep) options.on_sweep(sampler, it);
  }
  return TopicModel(params.topics, alpha, params.beta, std::move(vocab), sampler.phi(), params.seed, params.iterations,
                    params.inference_sweeps);
}

double perplexity(const TopicModel& model, std::span<const std::vector<std::string>> docs) {
  double log_sum = 0.0;
  std::size_t n = 0;
  for (const auto& doc : docs) {
    const auto theta = model.infer(doc);
    for (const auto& w : doc) {
      const auto id = model.word_id(w);
      if (!id) continue;
      double p = 0.0;
      for (std::size_t k = 0; k < model.topics(); ++k) p += theta[k] * model.phi(k, *id);
      log_sum += std::log(p);
      ++n;
    }
  }
  if (n == 0) throw ArgumentError("perplexity needs at least one in-vocabulary term");
  return std::exp(-log_sum / static_cast<double>(n));
}

}  // namespace supportlens::topics
