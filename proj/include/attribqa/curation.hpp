#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "attribqa/chains.hpp"
#include "attribqa/corpus.hpp"

namespace attribqa {

// Listed in the order the filters are reported; first-failure incidence
// uses this order.
enum class FailureKind {
  IncorrectAnswer,
  NonExistentAttribution,
  IncorrectCitation,
  RepeatedCitation,
  ExtremeQuote,
};

inline constexpr std::array<FailureKind, 5> kAllFailureKinds = {
    FailureKind::IncorrectAnswer, FailureKind::NonExistentAttribution,
    FailureKind::IncorrectCitation, FailureKind::RepeatedCitation, FailureKind::ExtremeQuote};

std::string_view to_string(FailureKind kind);
std::string_view display_name(FailureKind kind);  // "Incorrect Answer", ...
FailureKind parse_failure_kind(std::string_view name);

struct CheckResult {
  bool passed = true;
  std::vector<std::string> reasons;

  explicit operator bool() const noexcept { return passed; }
};

// Quotes must exceed this many words.
inline constexpr std::size_t kMinQuoteWordsExclusive = 5;

CheckResult check_answer(const AttributionChain& chain, std::string_view answer,
                         const std::vector<std::string>& aliases);
CheckResult check_attribution_existence(const AttributionChain& chain,
                                        const std::vector<Document>& documents);
CheckResult check_citation_correctness(const AttributionChain& chain,
                                       const std::set<int>& supporting_ids);
CheckResult check_repeated_citations(const AttributionChain& chain);
CheckResult check_quote_lengths(const AttributionChain& chain,
                                const std::vector<Document>& documents);

struct CurationVerdict {
  std::string sample_id;
  std::vector<FailureKind> failures;  // every failing check, in listing order
  std::vector<std::string> details;

  bool kept() const noexcept { return failures.empty(); }
};

struct CurationReport {
  std::size_t total_in = 0;
  std::size_t total_kept = 0;
  std::size_t no_citation_samples = 0;
  std::map<FailureKind, double> incidence_any;
  std::map<FailureKind, double> incidence_among_rejected;
};

struct Sample {
  QAInstance instance;
  AttributionChain chain;
};

struct CurationResult {
  std::vector<Sample> kept;
  std::vector<CurationVerdict> verdicts;
  CurationReport report;
};

CurationVerdict judge(const Sample& sample);

CurationReport summarize(const std::vector<CurationVerdict>& verdicts,
                         std::size_t no_citation_samples);

CurationResult curate(const std::vector<Sample>& samples);

}  // namespace attribqa
