#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace attribqa {

// Lowercase, drop ASCII punctuation, drop the articles a/an/the, collapse
// whitespace.
std::string normalize_answer(std::string_view text);

int exact_match(std::string_view prediction, const std::vector<std::string>& golds);
double f1_score(std::string_view prediction, const std::vector<std::string>& golds);

struct CitationScores {
  double precision = 0.0;
  double recall = 0.0;
};

// Set overlap; duplicate predictions count once. Precision is 0 for an empty
// prediction. Throws UsageError for an empty gold set.
CitationScores citation_scores(const std::vector<int>& predicted, const std::set<int>& gold);

struct ScoredPrediction {
  std::string id;
  int em = 0;
  double f1 = 0.0;
  std::optional<double> citation_precision;
  std::optional<double> citation_recall;
  std::size_t references = 1;
};

struct TrialMeans {
  double em = 0.0;
  double f1 = 0.0;
  std::optional<double> citation_precision;
  std::optional<double> citation_recall;
};

struct MetricReport {
  double mean_em = 0.0;
  double mean_f1 = 0.0;
  std::optional<double> mean_citation_precision;
  std::optional<double> mean_citation_recall;
  std::vector<TrialMeans> per_trial;
  std::optional<double> performance_range;
};

TrialMeans trial_means(const std::vector<ScoredPrediction>& predictions);

// Means over predictions, then over trials. Throws on empty or ragged input.
MetricReport aggregate(const std::vector<std::vector<ScoredPrediction>>& trials);

// max - min; throws on empty input.
double performance_range(const std::vector<double>& values);

enum class CorrelationMethod { pearson, spearman, kendall };
std::string_view to_string(CorrelationMethod method);

struct CorrelationResult {
  CorrelationMethod method = CorrelationMethod::pearson;
  double coefficient = 0.0;
  double p_value = 1.0;
};

struct PermutationOptions {
  std::size_t permutations = 10000;
  std::uint64_t seed = 0;
};

double pearson(const std::vector<double>& xs, const std::vector<double>& ys);
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);
// Tau-b, O(n log n).
double kendall_tau_b(const std::vector<double>& xs, const std::vector<double>& ys);

// 1-based ranks, ties receive their average rank.
std::vector<double> average_ranks(const std::vector<double>& values);

// Coefficient plus a two-sided permutation p-value. Throws DataError
// "undefined correlation" for fewer than 3 points, mismatched lengths or a
// constant series.
CorrelationResult correlation(const std::vector<double>& xs, const std::vector<double>& ys,
                              CorrelationMethod method, const PermutationOptions& options = {});

}  // namespace attribqa
