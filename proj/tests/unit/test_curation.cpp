#include <doctest.h>

#include "attribqa/curation.hpp"
#include "attribqa/text.hpp"
#include "fixtures.hpp"
#include "synthetic.hpp"
#include "golden_chains.hpp"

using namespace attribqa;
using namespace attribqa::testing;

namespace {

bool has(const CheckResult& r, const std::string& reason) {
  return std::find(r.reasons.begin(), r.reasons.end(), reason) != r.reasons.end();
}

AttributionChain coq(const std::string& quote, int doc) {
  return parse_chain("X is Y (\"" + quote + "\" [" + std::to_string(doc) + "]). The answer is: Y", PromptMode::CoQ);
}

}  // namespace

TEST_CASE("answer check") {
  auto c = parse_chain(kGoldenCoC, PromptMode::CoC);
  CHECK(check_answer(c, "jazz", {}).passed);
  AttributionChain beatles;
  beatles.answer = "The Beatles";
  CHECK(check_answer(beatles, "Beatles", {}).passed);
  beatles.answer = "Island Records";
  CHECK_FALSE(check_answer(beatles, "jazz", {}).passed);
  CHECK(check_answer(beatles, "jazz", {"Island Records"}).passed);
}

TEST_CASE("attribution existence") {
  const auto& s = crush_tour(eval_samples());
  auto c = parse_chain("X [21]. The answer is: jazz", PromptMode::CoC);
  auto r = check_attribution_existence(c, s.instance.documents);
  CHECK_FALSE(r.passed);
  CHECK(has(r, "citation 21 does not exist"));
  auto golden = check_attribution_existence(parse_chain(kGoldenCoQ, PromptMode::CoQ), s.instance.documents);
  CAPTURE(text::join(golden.reasons, "; "));
  CHECK(golden.passed);

  auto randy = eval_samples()[1].instance;
  REQUIRE(randy.id == "2hop1__randy_conrads");
  CHECK(check_attribution_existence(coq("Benny Beaver is the official mascot", 4), randy.documents).passed);
  CHECK_FALSE(check_attribution_existence(coq("Benny Beaver is the unofficial mascot", 4), randy.documents).passed);
  CHECK_FALSE(check_attribution_existence(coq("Benny Beaver is the official mascot", 7), randy.documents).passed);
}

TEST_CASE("citation correctness") {
  auto c = parse_chain(kGoldenCoC, PromptMode::CoC);
  CHECK(check_citation_correctness(c, {8, 17, 19}).passed);
  auto bad = parse_chain("A [8]. B [3]. The answer is: x", PromptMode::CoC);
  auto r = check_citation_correctness(bad, {8, 17});
  CHECK_FALSE(r.passed);
  CHECK(has(r, "citation 3 is not a supporting document"));
  CHECK(check_citation_correctness(parse_chain("A. The answer is: x", PromptMode::CoT), {1}).passed);
}

TEST_CASE("repeated citations") {
  CHECK(check_repeated_citations(parse_chain(kGoldenCoC, PromptMode::CoC)).passed);
  CHECK_FALSE(check_repeated_citations(parse_chain("A [8]. B [8]. The answer is: x", PromptMode::CoC)).passed);
  CHECK_FALSE(check_repeated_citations(parse_chain("A [4, 4]. The answer is: x", PromptMode::CoC)).passed);
}

TEST_CASE("quote length boundaries") {
  std::vector<Document> docs{Document{1, "T", "one two three four five six seven eight", true},
                             Document{2, "U", "alpha beta gamma delta epsilon zeta", true}};
  CHECK_FALSE(check_quote_lengths(coq("one two three four five", 1), docs).passed);
  CHECK(check_quote_lengths(coq("one two three four five six", 1), docs).passed);
  auto whole = check_quote_lengths(coq("alpha beta gamma delta epsilon zeta", 2), docs);
  CHECK_FALSE(whole.passed);
}

TEST_CASE("verdicts and reports") {
  const auto all = eval_samples();
  std::vector<Sample> three(all.begin(), all.begin() + 3);
  auto r = curate(three);
  CHECK(r.kept.size() == 3);
  for (FailureKind k : kAllFailureKinds) {
    CHECK(r.report.incidence_any.at(k) == 0.0);
    CHECK(r.report.incidence_among_rejected.at(k) == 0.0);
  }

  // Wrong answer and a repeated citation at once.
  Sample two = three[0];
  two.chain = parse_chain(
      "The Crush Tour is performed by the band Bon Jovi (\"The Crush Tour is a third concert\" [8]). The record "
      "label is Island Records (\"Bounce is the eighth studio album by American\" [17] [8]). The answer is: rock",
      PromptMode::CoQ);
  auto v = judge(two);
  CHECK(v.failures == std::vector<FailureKind>{FailureKind::IncorrectAnswer, FailureKind::RepeatedCitation});
  auto mixed = curate({three[0], two, three[1]});
  CHECK(mixed.report.total_kept == 2);
  CHECK(mixed.report.incidence_among_rejected.at(FailureKind::IncorrectAnswer) == 1.0);
  CHECK(mixed.report.incidence_among_rejected.at(FailureKind::RepeatedCitation) == 0.0);
  CHECK(mixed.report.incidence_any.at(FailureKind::RepeatedCitation) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("zero-citation samples pass the citation check but are counted") {
  Sample s = eval_samples()[0];
  s.chain = parse_chain("Bon Jovi performed it. The answer is: jazz", PromptMode::CoT);
  auto r = curate({s});
  CHECK(r.report.no_citation_samples == 1);
  CHECK(r.kept.size() == 1);
}

TEST_CASE("synthetic set exercises every failure kind exactly") {
  auto set = synthetic_curation_set();
  REQUIRE(set.size() == 50);
  auto r = curate(set);
  for (const auto& v : r.verdicts) {
    const Flaw f = synthetic_flaw(v.sample_id);
    CAPTURE(v.sample_id);
    if (f == Flaw::none) {
      CHECK(v.kept());
    } else {
      REQUIRE(v.failures.size() == 1);
      CHECK(static_cast<int>(v.failures[0]) == static_cast<int>(f) - 1);
    }
  }
  CHECK(r.report.total_kept == 10);
  for (FailureKind k : kAllFailureKinds) CHECK(r.report.incidence_among_rejected.at(k) == doctest::Approx(0.2));
}

TEST_CASE("failure kind names") {
  CHECK(to_string(FailureKind::IncorrectAnswer) == "incorrect_answer");
  CHECK(display_name(FailureKind::NonExistentAttribution) == "Non-Existent Attributions");
  CHECK(parse_failure_kind("extreme_quote") == FailureKind::ExtremeQuote);
}
