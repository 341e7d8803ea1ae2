#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "attribqa/corpus.hpp"
#include "attribqa/curation.hpp"
#include "attribqa/records.hpp"

namespace attribqa::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(ATTRIBQA_FIXTURE_DIR) / name;
}

inline std::vector<Sample> eval_samples() { return load_samples(fixture("eval_samples.jsonl")); }
inline std::vector<Sample> demo_pool() { return load_samples(fixture("demo_pool.jsonl")); }
inline std::vector<QAInstance> eval_corpus() {
  return load_corpus(fixture("eval_corpus.jsonl"), CorpusFormat::internal);
}

inline Sample crush_tour(const std::vector<Sample>& samples) {
  for (const Sample& s : samples) {
    if (s.instance.id == "3hop1__crush_tour") return s;
  }
  throw std::runtime_error("crush tour fixture missing");
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("attribqa-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace attribqa::testing
