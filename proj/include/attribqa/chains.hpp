#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace attribqa {

enum class PromptMode { AO, CoT, CoC, CoQ };

PromptMode parse_mode(std::string_view name);  // "ao", "cot", "coc", "coq"
std::string_view to_string(PromptMode mode);

inline constexpr std::string_view kAnswerMarker = "The answer is:";

struct Quote {
  std::string text;
  int doc = 0;

  friend bool operator==(const Quote&, const Quote&) = default;
};

struct ReasoningStep {
  std::string claim;
  // Every citation occurrence in the step, in textual order. A quote's
  // document is listed here as well.
  std::vector<int> citations;
  std::vector<Quote> quotes;

  friend bool operator==(const ReasoningStep&, const ReasoningStep&) = default;
};

struct AttributionChain {
  std::vector<ReasoningStep> steps;
  std::string answer;
  std::string raw;  // provenance only; ignored by equality

  std::vector<int> all_citations() const;
  std::vector<Quote> all_quotes() const;

  // The richest mode this chain carries enough information for.
  PromptMode information_level() const;

  friend bool operator==(const AttributionChain& a, const AttributionChain& b) {
    return a.steps == b.steps && a.answer == b.answer;
  }
};

// Answer after the LAST answer marker, trimmed and with one trailing period
// removed (abbreviations such as "U.S." are kept). Without a marker the whole
// trimmed text is returned.
std::string extract_answer(std::string_view text);

// Throws ParseError("no answer marker") for CoT/CoC/CoQ text lacking the
// marker, and ParseError("empty answer") when nothing follows it.
AttributionChain parse_chain(std::string_view text, PromptMode mode);

// Drops information only: CoQ -> {CoC, CoT, AO}, CoC -> {CoT, AO}, CoT -> AO.
// Throws UsageError when the target needs information the chain lacks.
AttributionChain convert(const AttributionChain& chain, PromptMode target);

// Canonical surface text. Throws DataError when the chain lacks a field the
// mode needs (a citation per CoC step, a quote per CoQ step, an answer).
std::string render_chain(const AttributionChain& chain, PromptMode mode);

// Rewrites citations and quote documents. Throws DataError
// "unmapped citation N" for any index missing from the map.
AttributionChain remap_citations(const AttributionChain& chain, const std::map<int, int>& index_map);

}  // namespace attribqa
