#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "attribqa/chains.hpp"
#include "attribqa/corpus.hpp"
#include "attribqa/curation.hpp"
#include "attribqa/llmio.hpp"
#include "attribqa/metrics.hpp"
#include "attribqa/prompting.hpp"

namespace attribqa {

struct EvalConfig {
  PromptMode mode = PromptMode::CoC;
  std::size_t shots = 5;
  std::size_t budget = 15872;  // 16K window minus max_output_tokens
  std::string model_name = "default";
  double temperature = 0.0;
  std::size_t max_output_tokens = 512;
  TokenCounter counter = default_token_count;
};

CompletionRequest make_request(const PromptBundle& bundle, const EvalConfig& config);

// `shots` demonstrations drawn from the pool (never the instance itself),
// each with its context noised at `ratio_percent` and its gold chain
// remapped and rendered in the config's mode.
std::vector<Demonstration> sample_demonstrations(const std::vector<Sample>& pool,
                                                 const std::string& exclude_id, std::size_t shots,
                                                 PromptMode mode, int ratio_percent,
                                                 std::uint64_t seed);

// Scores a raw response against the presented instance. Citation scores are
// present for CoC/CoQ only. Unparsable responses fall back to extract_answer
// with no citations.
ScoredPrediction score_response(const std::string& id, const std::string& response, PromptMode mode,
                                const QAInstance& presented);

struct TrialResult {
  std::uint64_t seed = 0;
  int ratio_percent = 100;
  std::vector<ScoredPrediction> predictions;
  double mean_documents = 0.0;
};

TrialResult run_trial(const std::vector<QAInstance>& corpus, const std::vector<Sample>& demo_pool,
                      ModelClient& client, const EvalConfig& config, int ratio_percent,
                      std::uint64_t seed);

struct CurvePoint {
  int ratio_percent = 0;
  MetricReport report;
  double mean_documents = 0.0;
};

struct CorrelationCell {
  std::optional<CorrelationResult> result;
  std::string error;
};

struct CorrelationRow {
  std::string pair;  // "EM vs. P" or "EM vs. R"
  CorrelationCell pearson;
  CorrelationCell spearman;
  CorrelationCell kendall;
};

struct EvaluationResult {
  std::optional<MetricReport> overall;
  std::vector<TrialResult> trials;
  std::vector<CurvePoint> curve;
  std::vector<CorrelationRow> correlations;
};

// Trial-level correlation of EM against citation precision and recall.
std::vector<CorrelationRow> correlation_table(const std::vector<TrialMeans>& points,
                                              const PermutationOptions& options = {});

// Every seed is one trial over contexts of shuffled relevant and irrelevant
// documents (noise ratio 100).
EvaluationResult evaluate(const std::vector<QAInstance>& corpus,
                          const std::vector<Sample>& demo_pool, ModelClient& client,
                          const EvalConfig& config, const std::vector<std::uint64_t>& seeds);

// One trial per ratio x seed; noise applies to the test instances and to the
// demonstrations. The overall report carries the EM range across ratios.
EvaluationResult sweep_noise(const std::vector<QAInstance>& corpus,
                             const std::vector<Sample>& demo_pool, ModelClient& client,
                             const EvalConfig& config, const std::vector<int>& ratios,
                             const std::vector<std::uint64_t>& seeds);

struct RunLabels {
  std::string model;
  std::string dataset;
  std::string kind;  // "evaluate" or "sweep-noise"
};

nlohmann::json run_to_json(const RunLabels& labels, const EvalConfig& config,
                           const std::vector<std::uint64_t>& seeds, const std::vector<int>& ratios,
                           const EvaluationResult& result);

struct Generation {
  std::string id;
  std::optional<std::string> raw;  // nullopt when the request failed
  std::string error;
  bool transport_error = false;
};

// Few-shot prompting over instances as stored (no reshuffling), collecting
// raw generations for curation. Failed requests do not abort the batch.
std::vector<Generation> generate_annotations(const std::vector<QAInstance>& corpus,
                                             const std::vector<Sample>& demo_pool,
                                             ModelClient& client, const EvalConfig& config,
                                             std::uint64_t seed);

}  // namespace attribqa
