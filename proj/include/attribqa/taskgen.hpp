#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "attribqa/chains.hpp"
#include "attribqa/corpus.hpp"
#include "attribqa/curation.hpp"

namespace attribqa {

enum class TaskKind { LA, AP, CG, QI };

TaskKind parse_task(std::string_view name);  // "la", "ap", "cg", "qi"
std::string_view to_string(TaskKind task);

// The prompt mode whose question rendering a task uses.
PromptMode task_prompt_mode(TaskKind task);

struct TaskExample {
  std::string id;
  TaskKind task = TaskKind::LA;
  std::string instruction;
  std::vector<Document> context_documents;
  std::string question;
  std::string target;
};

struct AugmentPolicy {
  std::size_t min_distractors = 0;
  std::optional<std::size_t> max_distractors;  // nullopt: all available
  bool shuffle = true;
  std::size_t copies = 1;
};

struct NoiseSpec {
  int ratio_percent = 100;
  std::uint64_t seed = 0;
};

// LA: CoC rendering; CG: CoT rendering; AP: bare answer; QI: one
// `"<quote>" [<doc>]` line per quote. Throws DataError for QI on a chain
// without quotes.
TaskExample build_example(const Sample& sample, TaskKind task);

// QI target lines, parsed back into quotes.
std::vector<Quote> parse_quote_list(std::string_view target);
std::string render_quote_list(const std::vector<Quote>& quotes);

// Keeps every supporting document, samples k distractors uniformly from
// [min, max], optionally shuffles, re-indexes 1..n and rewrites the target's
// citations. Output ids are `<id>#<copy>`.
std::vector<TaskExample> augment(const TaskExample& example, const std::set<int>& supporting_ids,
                                 const AugmentPolicy& policy, std::uint64_t seed);

struct NoisedInstance {
  QAInstance instance;
  std::map<int, int> index_map;  // old index -> new index for retained documents
};

// Supporting documents plus round-half-up(ratio/100 * D) of the D
// distractors, shuffled and re-indexed. For one seed, the retained
// distractors at a lower ratio are a subset of those at a higher ratio.
NoisedInstance apply_noise_mapped(const QAInstance& instance, const NoiseSpec& spec);
QAInstance apply_noise(const QAInstance& instance, const NoiseSpec& spec);

std::size_t noise_distractor_count(int ratio_percent, std::size_t available);

// Instruction-tuning record `{id, instruction, input, output}`.
nlohmann::json to_instruction_record(const TaskExample& example);

// Reads generic instruction records (JSON array or JSON lines) with
// `instruction`, optional `input`, `output`.
std::vector<nlohmann::json> load_mixin(const std::filesystem::path& path);

// Interleaves reasoning records with the mixin under `seed`. The mixin, when
// given, must be the same size as `examples`.
std::vector<nlohmann::json> export_records(const std::vector<TaskExample>& examples,
                                           const std::vector<nlohmann::json>* mixin,
                                           std::uint64_t seed);
void export_examples(const std::vector<TaskExample>& examples,
                     const std::vector<nlohmann::json>* mixin, std::uint64_t seed,
                     const std::filesystem::path& path);

struct TaskBuildConfig {
  std::vector<TaskKind> tasks{TaskKind::LA, TaskKind::AP, TaskKind::CG, TaskKind::QI};
  std::set<TaskKind> no_augment{TaskKind::QI};
  AugmentPolicy policy{0, std::nullopt, true, 2};
  std::uint64_t seed = 0;
};

// Full training set: every task for every sample, augmented per config.
std::vector<TaskExample> build_training_set(const std::vector<Sample>& samples,
                                            const TaskBuildConfig& config);

}  // namespace attribqa
