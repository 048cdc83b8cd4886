// Writes a planted-signal forum dump (posts.jsonl) and matching annotations
// (annotations.csv) for exercising the full pipeline.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "supportlens/error.hpp"
#include "supportlens/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a planted-signal corpus and annotations", "supportlens-synth"};
  std::uint64_t seed = 0;
  std::string out_dir;
  supportlens::synth::PlantedConfig config;
  app.add_option("--seed", seed, "generator seed")->required();
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_flag("--negated", config.negated, "informational posts draw fewer comments");
  app.add_option("--users", config.users, "users with at least min-posts posts");
  app.add_option("--casual-users", config.casual_users, "users below the posting threshold");
  app.add_option("--annotated", config.annotated_titles, "distinct titles to annotate");
  app.add_option("--forum", config.forum, "forum name");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto data = supportlens::synth::make_planted(config, seed);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    supportlens::corpus::save_posts(data.corpus, dir / "posts.jsonl");
    std::ofstream ann(dir / "annotations.csv", std::ios::binary);
    supportlens::pipeline::write_annotations_csv(ann, data.annotations);
    std::cout << data.corpus.size() << " posts, " << data.annotations.size() << " annotation rows\n";
  } catch (const supportlens::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
