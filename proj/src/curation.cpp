#include "attribqa/curation.hpp"

#include <algorithm>

#include "attribqa/error.hpp"
#include "attribqa/metrics.hpp"
#include "attribqa/text.hpp"

namespace attribqa {

std::string_view to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::IncorrectAnswer: return "incorrect_answer";
    case FailureKind::NonExistentAttribution: return "non_existent_attribution";
    case FailureKind::IncorrectCitation: return "incorrect_citation";
    case FailureKind::RepeatedCitation: return "repeated_citation";
    case FailureKind::ExtremeQuote: return "extreme_quote";
  }
  return "?";
}

std::string_view display_name(FailureKind kind) {
  switch (kind) {
    case FailureKind::IncorrectAnswer: return "Incorrect Answer";
    case FailureKind::NonExistentAttribution: return "Non-Existent Attributions";
    case FailureKind::IncorrectCitation: return "Incorrect Citations";
    case FailureKind::RepeatedCitation: return "Repeated Citations";
    case FailureKind::ExtremeQuote: return "Extreme Quotes";
  }
  return "?";
}

FailureKind parse_failure_kind(std::string_view name) {
  for (FailureKind k : kAllFailureKinds) {
    if (to_string(k) == name) return k;
  }
  throw DataError("unknown failure kind: " + std::string(name));
}

namespace {

const Document* find_doc(const std::vector<Document>& docs, int index) {
  for (const auto& d : docs) {
    if (d.index == index) return &d;
  }
  return nullptr;
}

void fail(CheckResult& r, std::string reason) {
  r.passed = false;
  r.reasons.push_back(std::move(reason));
}

std::string shorten(const std::string& s) {
  return s.size() <= 60 ? s : s.substr(0, 57) + "...";
}

}  // namespace

CheckResult check_answer(const AttributionChain& chain, std::string_view answer,
                         const std::vector<std::string>& aliases) {
  std::vector<std::string> refs{std::string(answer)};
  refs.insert(refs.end(), aliases.begin(), aliases.end());
  CheckResult r;
  if (!exact_match(chain.answer, refs)) {
    fail(r, "answer \"" + shorten(chain.answer) + "\" does not match gold \"" +
                std::string(answer) + "\"");
  }
  return r;
}

CheckResult check_attribution_existence(const AttributionChain& chain,
                                        const std::vector<Document>& documents) {
  CheckResult r;
  std::set<int> reported;
  for (int c : chain.all_citations()) {
    if (!find_doc(documents, c) && reported.insert(c).second) {
      fail(r, "citation " + std::to_string(c) + " does not exist");
    }
  }
  for (const Quote& q : chain.all_quotes()) {
    const Document* d = find_doc(documents, q.doc);
    if (!d) {
      if (reported.insert(q.doc).second) {
        fail(r, "citation " + std::to_string(q.doc) + " does not exist");
      }
      continue;
    }
    if (!text::find_collapsed(d->body, q.text)) {
      fail(r, "quote \"" + shorten(q.text) + "\" not found in document " + std::to_string(q.doc));
    }
  }
  return r;
}

CheckResult check_citation_correctness(const AttributionChain& chain,
                                       const std::set<int>& supporting_ids) {
  CheckResult r;
  std::set<int> cited;
  for (int c : chain.all_citations()) cited.insert(c);
  for (const Quote& q : chain.all_quotes()) cited.insert(q.doc);
  for (int c : cited) {
    if (!supporting_ids.count(c)) {
      fail(r, "citation " + std::to_string(c) + " is not a supporting document");
    }
  }
  return r;
}

CheckResult check_repeated_citations(const AttributionChain& chain) {
  CheckResult r;
  std::map<int, int> seen;
  for (int c : chain.all_citations()) ++seen[c];
  for (const auto& [doc, count] : seen) {
    if (count > 1) {
      fail(r, "document " + std::to_string(doc) + " cited " + std::to_string(count) + " times");
    }
  }
  return r;
}

CheckResult check_quote_lengths(const AttributionChain& chain,
                                const std::vector<Document>& documents) {
  CheckResult r;
  for (const Quote& q : chain.all_quotes()) {
    const std::size_t words = text::count_words(q.text);
    if (words <= kMinQuoteWordsExclusive) {
      fail(r, "quote \"" + shorten(q.text) + "\" has " + std::to_string(words) +
                  " words; more than " + std::to_string(kMinQuoteWordsExclusive) + " required");
      continue;
    }
    // A quote that covers the whole cited body spans the document.
    if (const Document* d = find_doc(documents, q.doc)) {
      if (text::find_collapsed(q.text, d->body)) {
        fail(r, "quote spans the entire document " + std::to_string(q.doc));
      }
    }
  }
  return r;
}

CurationVerdict judge(const Sample& sample) {
  const QAInstance& inst = sample.instance;
  const AttributionChain& chain = sample.chain;
  CurationVerdict v;
  v.sample_id = inst.id;
  auto record = [&](FailureKind kind, const CheckResult& r) {
    if (r) return;
    v.failures.push_back(kind);
    v.details.insert(v.details.end(), r.reasons.begin(), r.reasons.end());
  };
  record(FailureKind::IncorrectAnswer, check_answer(chain, inst.answer, inst.answer_aliases));
  record(FailureKind::NonExistentAttribution, check_attribution_existence(chain, inst.documents));
  record(FailureKind::IncorrectCitation, check_citation_correctness(chain, inst.supporting_ids()));
  record(FailureKind::RepeatedCitation, check_repeated_citations(chain));
  record(FailureKind::ExtremeQuote, check_quote_lengths(chain, inst.documents));
  return v;
}

CurationReport summarize(const std::vector<CurationVerdict>& verdicts,
                         std::size_t no_citation_samples) {
  CurationReport report;
  report.total_in = verdicts.size();
  report.no_citation_samples = no_citation_samples;
  std::map<FailureKind, std::size_t> any;
  std::map<FailureKind, std::size_t> first;
  std::size_t rejected = 0;
  for (const auto& v : verdicts) {
    if (v.kept()) {
      ++report.total_kept;
      continue;
    }
    ++rejected;
    ++first[v.failures.front()];
    for (FailureKind k : v.failures) ++any[k];
  }
  for (FailureKind k : kAllFailureKinds) {
    report.incidence_any[k] =
        report.total_in ? static_cast<double>(any[k]) / static_cast<double>(report.total_in) : 0.0;
    report.incidence_among_rejected[k] =
        rejected ? static_cast<double>(first[k]) / static_cast<double>(rejected) : 0.0;
  }
  return report;
}

CurationResult curate(const std::vector<Sample>& samples) {
  CurationResult result;
  result.verdicts.reserve(samples.size());
  std::size_t no_citation = 0;
  for (const Sample& s : samples) {
    CurationVerdict v = judge(s);
    if (s.chain.all_citations().empty()) ++no_citation;
    if (v.kept()) result.kept.push_back(s);
    result.verdicts.push_back(std::move(v));
  }
  result.report = summarize(result.verdicts, no_citation);
  return result;
}

}  // namespace attribqa
