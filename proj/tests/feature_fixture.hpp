#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "supportlens/features.hpp"

// Hand-labelled titles with expected counts, checked with zero tolerance.
namespace fixture {

struct LabelledTitle {
  std::string title;
  std::map<std::string, double> expected;
};

inline std::vector<LabelledTitle> load_feature_titles(const std::string& path) {
  static const std::map<std::string, std::string> kAlias = {
      {"s", "n_sentences"},          {"q", "n_question_sentences"}, {"neg", "n_negation_sentences"},
      {"adv", "advice_request_count"}, {"drug", "drug_mention_count"}, {"words", "title_word_count"}};
  std::ifstream in(path);
  std::vector<LabelledTitle> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    LabelledTitle t{line.substr(0, tab), {}};
    std::istringstream kv(line.substr(tab + 1));
    std::string item;
    while (kv >> item) {
      const auto eq = item.find('=');
      std::string key = item.substr(0, eq);
      if (auto a = kAlias.find(key); a != kAlias.end()) key = a->second;
      t.expected[key] = std::stod(item.substr(eq + 1));
    }
    out.push_back(std::move(t));
  }
  return out;
}

// One message per slot that differs. Categories absent from the labels must be 0.
inline std::vector<std::string> check_title(const supportlens::features::Featurizer& f, const LabelledTitle& t) {
  const auto& schema = f.schema();
  const auto v = f.extract(t.title);
  std::vector<std::string> bad;
  auto expect = [&](const std::string& name, double want) {
    const double got = v[schema.index_of(name)];
    if (got != want)
      bad.push_back("'" + t.title + "' " + name + ": expected " + std::to_string(want) + ", got " + std::to_string(got));
  };
  for (std::size_t c = 0; c < schema.n_categories(); ++c) {
    const auto& name = schema.names()[c];
    auto it = t.expected.find(name);
    expect(name, it == t.expected.end() ? 0.0 : it->second);
  }
  for (const auto& [name, want] : t.expected)
    if (schema.index_of(name) >= schema.n_categories()) expect(name, want);
  return bad;
}

}  // namespace fixture
