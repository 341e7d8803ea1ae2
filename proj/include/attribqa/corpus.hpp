#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace attribqa {

struct AttributionChain;

struct Document {
  int index = 0;  // 1-based position in the rendered context
  std::string title;
  std::string body;
  bool is_supporting = false;

  friend bool operator==(const Document&, const Document&) = default;
};

struct QAInstance {
  std::string id;
  std::string question;
  std::vector<Document> documents;
  std::string answer;
  std::vector<std::string> answer_aliases;
  int hop_count = 2;
  std::optional<std::vector<std::string>> decomposition;

  // Indices of the supporting documents.
  std::set<int> supporting_ids() const;
  // Gold answer followed by any aliases not equal to it.
  std::vector<std::string> references() const;
  const Document* find_document(int index) const;

  friend bool operator==(const QAInstance&, const QAInstance&) = default;
};

enum class CorpusFormat { musique, twowiki, hotpot, internal };

CorpusFormat parse_corpus_format(std::string_view name);
std::string_view to_string(CorpusFormat format);

// Violations of the Document / QAInstance invariants; empty means valid.
using ValidationReport = std::vector<std::string>;
ValidationReport validate_instance(const QAInstance& instance);

// Reads one record per line. Documents are re-indexed 1..n by position.
// Throws DataError naming the line on malformed or invalid records.
std::vector<QAInstance> load_corpus(const std::filesystem::path& path, CorpusFormat format);
std::vector<QAInstance> parse_corpus(std::string_view content, CorpusFormat format);

// Writes the internal one-record-per-line format.
void write_corpus(const std::filesystem::path& path, const std::vector<QAInstance>& corpus);

// n distinct instances drawn uniformly without replacement, in draw order.
std::vector<QAInstance> subsample(const std::vector<QAInstance>& corpus, std::size_t n,
                                  std::uint64_t seed);

struct CorpusStats {
  std::size_t total_samples = 0;
  std::size_t max_words_per_sample = 0;
  double mean_words_per_sample = 0.0;
  std::map<int, double> hop_distribution;
  std::optional<double> mean_words_per_step;
  std::optional<double> mean_words_per_quote;
  std::string word_count_basis;
};

// Text counted as one "sample" for the words-per-sample statistics: the
// rendered context and question block, plus the CoQ-rendered chain when one
// is supplied.
std::string render_sample(const QAInstance& instance, const AttributionChain* chain);

CorpusStats corpus_stats(const std::vector<QAInstance>& corpus,
                         const std::vector<AttributionChain>* chains = nullptr);

}  // namespace attribqa
