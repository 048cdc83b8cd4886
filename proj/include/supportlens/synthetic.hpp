#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "supportlens/corpus.hpp"
#include "supportlens/pipeline.hpp"

namespace supportlens::synth {

/// Forum whose comment counts are driven by informational support: every
/// post asking for information or advice draws comments from a higher
/// Poisson mean than other posts (lower when `negated`). Emotional content
/// is planted independently and does not affect comments.
struct PlantedConfig {
  std::size_t users = 80;           // users with min_posts..max_posts posts
  std::size_t casual_users = 20;    // users with 1..min_posts-1 posts
  std::size_t min_posts = 5;
  std::size_t max_posts = 12;
  std::size_t annotated_titles = 300;
  std::size_t annotators = 3;
  double base_comments = 3.0;
  double info_effect = 8.0;
  bool negated = false;
  std::string forum = "Leaves";
};

struct PlantedPost {
  bool info = false;
  bool emo = false;
};

struct PlantedData {
  corpus::Corpus corpus;
  std::vector<PlantedPost> truth;  // parallel to corpus.posts()
  std::vector<pipeline::AnnotationRow> annotations;
};

PlantedData make_planted(const PlantedConfig& config, std::uint64_t seed);

}  // namespace supportlens::synth
