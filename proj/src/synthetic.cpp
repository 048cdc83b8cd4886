#include "supportlens/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string_view>

#include "supportlens/error.hpp"
#include "supportlens/rng.hpp"

namespace supportlens::synth {

namespace {

constexpr std::string_view kDrugs[] = {"suboxone", "kratom", "gabapentin", "methadone", "weed", "xanax", "melatonin"};
constexpr std::string_view kTroubles[] = {"withdrawal", "cravings", "insomnia", "the sweats", "brain fog", "anxiety"};
constexpr std::string_view kFeelings[] = {"alone", "scared", "hopeless", "lost", "empty", "ashamed", "exhausted"};
constexpr std::string_view kGood[] = {"proud", "grateful", "happy", "hopeful", "calm"};
constexpr std::string_view kUnits[] = {"days", "weeks", "months"};

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  double u() { return rng_.uniform01(); }
  bool coin(double p) { return u() < p; }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(rng_.uniform_index(n)); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + index(hi - lo + 1); }
  template <std::size_t N>
  std::string pick(const std::string_view (&items)[N]) {
    return std::string(items[index(N)]);
  }
  double normal() {
    // Box-Muller; 1 - u() keeps the log argument positive.
    const double a = 1.0 - u();
    const double b = u();
    return std::sqrt(-2.0 * std::log(a)) * std::cos(2.0 * 3.14159265358979323846 * b);
  }
  std::int64_t poisson(double mean) {
    const double limit = std::exp(-mean);
    double prod = u();
    std::int64_t k = 0;
    while (prod > limit) {
      ++k;
      prod *= u();
    }
    return k;
  }

 private:
  Rng rng_;
};

std::string info_question(Draw& d) {
  switch (d.index(8)) {
    case 0: return "How do I get through " + d.pick(kTroubles) + "?";
    case 1: return "Any tips for " + d.pick(kTroubles) + "?";
    case 2: return "Should I tell my doctor about the " + d.pick(kDrugs) + "?";
    case 3: return "Is it safe to take " + d.pick(kDrugs) + " with " + d.pick(kDrugs) + "?";
    case 4: return "What helped you with " + d.pick(kTroubles) + "?";
    case 5: return "Does " + d.pick(kDrugs) + " help with " + d.pick(kTroubles) + "?";
    case 6: return "How long does " + d.pick(kTroubles) + " last?";
    default: return "Can anyone recommend a taper schedule for " + d.pick(kDrugs) + "?";
  }
}

std::string emo_statement(Draw& d) {
  switch (d.index(6)) {
    case 0: return "I feel so " + d.pick(kFeelings) + " today.";
    case 1: return "Day " + std::to_string(d.between(2, 90)) + " and I'm " + d.pick(kFeelings) + ".";
    case 2: return "I relapsed again and I hate myself.";
    case 3: return "Please tell me it gets better.";
    case 4: return "Nobody understands what I'm going through.";
    default: return "Feeling " + d.pick(kFeelings) + " and " + d.pick(kFeelings) + " tonight.";
  }
}

std::string neutral_statement(Draw& d) {
  switch (d.index(4)) {
    case 0: return std::to_string(d.between(1, 30)) + " " + d.pick(kUnits) + " clean";
    case 1: return "Update: " + std::to_string(d.between(1, 12)) + " " + d.pick(kUnits) + " " + d.pick(kGood);
    case 2: return "Went to my first meeting";
    default: return "Small win: cooked dinner " + std::to_string(d.between(2, 9)) + " nights in a row";
  }
}

double rating(Draw& d, bool present) {
  const double level = present ? 6.0 : 1.5;
  return std::clamp(std::round(level + 0.7 * d.normal()), 1.0, 7.0);
}

}  // namespace

PlantedData make_planted(const PlantedConfig& config, std::uint64_t seed) {
  if (config.min_posts < 1 || config.max_posts < config.min_posts)
    throw ArgumentError("planted config needs 1 <= min_posts <= max_posts");
  if (config.annotators < 1) throw ArgumentError("planted config needs at least one annotator");
  Draw d(mix_seed(seed, 0x5eed));

  struct Draft {
    std::string author;
    PlantedPost truth;
  };
  std::vector<Draft> drafts;
  const std::size_t total_users = config.users + config.casual_users;
  for (std::size_t u = 0; u < total_users; ++u) {
    const std::string author = "user" + std::to_string(1000 + u);
    const bool regular = u < config.users;
    const std::size_t n = regular ? d.between(config.min_posts, config.max_posts)
                                  : d.between(1, std::max<std::size_t>(config.min_posts, 2) - 1);
    const double p_info = d.u();
    const double p_emo = d.u();
    for (std::size_t i = 0; i < n; ++i) drafts.push_back({author, PlantedPost{d.coin(p_info), d.coin(p_emo)}});
  }
  for (std::size_t i = drafts.size(); i > 1; --i) std::swap(drafts[i - 1], drafts[d.index(i)]);

  PlantedData out;
  std::vector<corpus::Post> posts;
  std::int64_t t = 1450000000;  // December 2015
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    const auto& dr = drafts[i];
    std::string title;
    if (dr.truth.emo) title = emo_statement(d);
    if (dr.truth.info) title += (title.empty() ? "" : " ") + info_question(d);
    if (title.empty()) title = neutral_statement(d);
    const double mean = config.negated ? config.base_comments + config.info_effect * (dr.truth.info ? 0.0 : 1.0)
                                       : config.base_comments + config.info_effect * (dr.truth.info ? 1.0 : 0.0);
    t += static_cast<std::int64_t>(60 + d.index(36000));
    corpus::Post p;
    p.id = "p" + std::to_string(100000 + i);
    p.author = dr.author;
    p.created_utc = t;
    p.title = title;
    p.num_comments = d.poisson(mean);
    p.forum = config.forum;
    posts.push_back(std::move(p));
    out.truth.push_back(dr.truth);
  }

  // Annotate a sample of distinct titles.
  std::vector<std::size_t> distinct;
  std::map<std::string, bool> seen;
  for (std::size_t i = 0; i < posts.size(); ++i)
    if (seen.emplace(posts[i].title, true).second) distinct.push_back(i);
  for (auto k : corpus::sample_indices(distinct.size(), config.annotated_titles, mix_seed(seed, 0xa770))) {
    const std::size_t i = distinct[k];
    for (std::size_t a = 0; a < config.annotators; ++a)
      out.annotations.push_back(pipeline::AnnotationRow{posts[i].title, "a" + std::to_string(a + 1),
                                                        rating(d, out.truth[i].emo), rating(d, out.truth[i].info)});
  }
  out.corpus = corpus::Corpus(config.forum, std::move(posts));
  return out;
}

}  // namespace supportlens::synth
