// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "attribqa/chains.hpp"
#include "attribqa/cli.hpp"
#include "attribqa/curation.hpp"
#include "attribqa/error.hpp"
#include "attribqa/metrics.hpp"
#include "attribqa/random.hpp"
#include "attribqa/records.hpp"
#include "attribqa/taskgen.hpp"
#include "fake_endpoint.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "scripted_model.hpp"
#include "synthetic.hpp"
#include "golden_chains.hpp"

using namespace attribqa;
using namespace attribqa::testing;

namespace {

// Collects violations for one criterion.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 10) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  std::size_t checks() const { return checks_; }
  std::size_t failed() const { return failed_; }
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  std::size_t checks_ = 0;
  std::size_t failed_ = 0;
  std::vector<std::string> failures_;
};

struct Criterion {
  std::string name;
  double time_limit_seconds;
  std::function<void(Checker&)> body;
};

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (int x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

void golden_chains(Checker& c) {
  const std::vector<std::vector<int>> want{{8}, {17}, {19}};
  for (auto [text, mode] : {std::pair{kGoldenCoC, PromptMode::CoC}, std::pair{kGoldenCoQ, PromptMode::CoQ}}) {
    const std::string name(to_string(mode));
    AttributionChain chain = parse_chain(text, mode);
    c.expect(chain.steps.size() == 3, name + ": 3 steps");
    c.expect(chain.answer == "jazz", name + ": answer jazz");
    for (std::size_t i = 0; i < std::min<std::size_t>(3, chain.steps.size()); ++i) {
      c.expect(chain.steps[i].citations == want[i],
               name + ": step " + std::to_string(i + 1) + " cites " + join_ints(chain.steps[i].citations));
      if (mode == PromptMode::CoQ) {
        const auto& q = chain.steps[i].quotes;
        c.expect(q.size() == 1 && q[0].doc == want[i][0], name + ": step " + std::to_string(i + 1) + " quote binding");
      } else {
        c.expect(chain.steps[i].quotes.empty(), name + ": no quotes");
      }
    }
    c.expect(render_chain(chain, mode) == text, name + ": byte-exact render");
  }
  const auto coq = parse_chain(kGoldenCoQ, PromptMode::CoQ);
  c.expect(coq.steps[0].quotes[0].text == "The Crush Tour is a third concert", "first quote text");
  c.expect(render_chain(parse_chain(kGoldenCoT, PromptMode::CoT), PromptMode::CoT) == kGoldenCoT,
           "CoT byte-exact render");
}

Sample boundary_sample(const std::string& chain_text) {
  Sample s;
  s.instance.id = "boundary";
  s.instance.question = "Which band recorded Bounce?";
  s.instance.answer = "The Bon Jovi Band";
  s.instance.answer_aliases = {s.instance.answer};
  s.instance.hop_count = 2;
  s.instance.documents = {
      Document{1, "Bounce", "Bounce is the eighth studio album by American rock band Bon Jovi.", true},
      Document{2, "Decoy", "Decoy is an unrelated record from a different decade entirely.", false},
      Document{3, "Bon Jovi", "Bon Jovi is an American rock band formed in 1983 in Sayreville.", true},
      Document{4, "Short", "one two three four five six", true},
  };
  s.chain = parse_chain(chain_text, PromptMode::CoQ);
  return s;
}

bool fails_with(const Sample& s, FailureKind kind) {
  auto v = judge(s);
  return std::find(v.failures.begin(), v.failures.end(), kind) != v.failures.end();
}

void filter_boundaries(Checker& c) {
  const std::string tail = " The answer is: Bon Jovi Band";
  const std::string good_second = " It is a band (\"Bon Jovi is an American rock band\" [3]).";
  auto five = boundary_sample("Bounce is by Bon Jovi (\"the eighth studio album by\" [1])." + good_second + tail);
  c.expect(fails_with(five, FailureKind::ExtremeQuote), "5-word quote rejected");
  auto six = boundary_sample("Bounce is by Bon Jovi (\"the eighth studio album by American\" [1])." + good_second + tail);
  c.expect(judge(six).kept(), "6-word quote accepted");
  auto whole = boundary_sample("Counting words (\"one two three four five six\" [4])." + good_second + tail);
  c.expect(fails_with(whole, FailureKind::ExtremeQuote), "whole-document quote rejected");
  auto repeated = boundary_sample("Bounce is by Bon Jovi (\"the eighth studio album by American\" [1])."
                                  " It is a band (\"American rock band Bon Jovi\" [1])." + tail);
  c.expect(fails_with(repeated, FailureKind::RepeatedCitation), "duplicate citation across steps rejected");
  auto distractor = boundary_sample("Bounce is by Bon Jovi (\"the eighth studio album by American\" [1])."
                                    " It is a band (\"an unrelated record from a different decade\" [2])." + tail);
  c.expect(fails_with(distractor, FailureKind::IncorrectCitation), "non-supporting citation rejected");
  auto fabricated = boundary_sample("Bounce is by Bon Jovi (\"the ninth studio album by American\" [1])." +
                                    good_second + tail);
  c.expect(fails_with(fabricated, FailureKind::NonExistentAttribution), "fabricated quote rejected");
  auto article = boundary_sample("Bounce is by Bon Jovi (\"the eighth studio album by American\" [1])." +
                                 good_second + " The answer is: Bon Jovi Band");
  c.expect(article.instance.answer == "The Bon Jovi Band" && judge(article).kept(),
           "article difference in answer accepted");
  auto wrong = boundary_sample("Bounce is by Bon Jovi (\"the eighth studio album by American\" [1])." + good_second +
                               " The answer is: Journey");
  c.expect(fails_with(wrong, FailureKind::IncorrectAnswer), "wrong answer rejected");
}

void curation_fixed_point(Checker& c) {
  const auto set = synthetic_curation_set();
  c.expect(set.size() == 50, "50 synthetic samples");
  auto first = curate(set);
  for (FailureKind k : kAllFailureKinds) {
    c.expect(first.report.incidence_any.at(k) > 0.0, "set contains " + std::string(to_string(k)));
  }
  auto second = curate(first.kept);
  c.expect(second.kept.size() == first.kept.size() && !first.kept.empty(), "second pass keeps 100%");
  for (FailureKind k : kAllFailureKinds) {
    c.expect(second.report.incidence_any.at(k) == 0.0, "zero incidence " + std::string(to_string(k)));
    c.expect(second.report.incidence_among_rejected.at(k) == 0.0, "zero rejected incidence " + std::string(to_string(k)));
  }
  for (std::size_t i = 0; i < second.kept.size(); ++i) {
    c.expect(sample_to_json(second.kept[i]) == sample_to_json(first.kept[i]), "kept samples unchanged");
  }
}

std::vector<int> target_citations(const TaskExample& ex) {
  std::vector<int> out;
  if (ex.task == TaskKind::QI) {
    for (const Quote& q : parse_quote_list(ex.target)) out.push_back(q.doc);
  } else {
    out = parse_chain(ex.target, PromptMode::CoC).all_citations();
  }
  return out;
}

void augmentation_invariant(Checker& c) {
  std::vector<Sample> samples = eval_samples();
  for (const Sample& s : curate(synthetic_curation_set()).kept) samples.push_back(s);
  Rng draw(20240601);
  const std::size_t draws = 1200;
  for (std::size_t n = 0; n < draws; ++n) {
    const Sample& s = samples[draw.uniform(samples.size())];
    const TaskKind task = draw.uniform(2) == 0 ? TaskKind::LA : TaskKind::QI;
    const std::size_t distractors = s.instance.documents.size() - s.instance.supporting_ids().size();
    AugmentPolicy policy;
    policy.min_distractors = draw.between(0, distractors + 1);
    if (draw.uniform(3) != 0) policy.max_distractors = policy.min_distractors + draw.between(0, distractors);
    policy.shuffle = draw.uniform(4) != 0;
    policy.copies = draw.between(1, 3);
    const std::uint64_t seed = draw.next();
    const std::string where = s.instance.id + " draw " + std::to_string(n);

    const TaskExample base = build_example(s, task);
    std::vector<std::string> cited_titles;
    for (int d : target_citations(base)) cited_titles.push_back(s.instance.find_document(d)->title);
    std::set<std::string> supporting_titles;
    for (const Document& d : s.instance.documents) {
      if (d.is_supporting) supporting_titles.insert(d.title);
    }

    const auto copies = augment(base, s.instance.supporting_ids(), policy, seed);
    const auto again = augment(base, s.instance.supporting_ids(), policy, seed);
    c.expect(copies.size() == policy.copies, where + ": copy count");
    for (std::size_t k = 0; k < copies.size(); ++k) {
      const TaskExample& ex = copies[k];
      c.expect(to_instruction_record(ex).dump() == to_instruction_record(again[k]).dump(),
               where + ": same seed, same bytes");
      std::set<std::string> kept;
      for (const Document& d : ex.context_documents) {
        if (d.is_supporting) kept.insert(d.title);
      }
      c.expect(kept == supporting_titles, where + ": supporting documents retained");
      const auto cites = target_citations(ex);
      c.expect(cites.size() == cited_titles.size(), where + ": citation count");
      for (std::size_t i = 0; i < std::min(cites.size(), cited_titles.size()); ++i) {
        const Document* d = cites[i] >= 1 && static_cast<std::size_t>(cites[i]) <= ex.context_documents.size()
                                ? &ex.context_documents[static_cast<std::size_t>(cites[i]) - 1]
                                : nullptr;
        c.expect(d && d->title == cited_titles[i], where + ": citation resolves to the same title");
      }
    }
  }
}

// Answer pairs with tokens, articles, punctuation and case mixed on purpose.
const std::vector<std::pair<std::string, std::vector<std::string>>>& answer_pairs() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> pairs = [] {
    const std::vector<std::pair<std::string, std::vector<std::string>>> base{
        {"jazz", {"jazz"}},
        {"The Beatles", {"Beatles"}},
        {"Island Records", {"Def Jam Records"}},
        {"Benny Beaver", {"Benny the Beaver"}},
        {"an apple a day", {"apple day"}},
        {"New York City", {"New York"}},
        {"", {"the"}},
        {"", {"Paris"}},
        {"Paris, France", {"Paris"}},
        {"U.S.", {"US"}},
        {"rock and roll", {"rock", "roll and rock"}},
        {"1992", {"in 1992"}},
        {"x x y", {"x y y"}},
        {"Manzanares River", {"the Manzanares"}},
        {"Gustave Eiffel's company", {"Gustave Eiffel"}},
        {"Dijon", {"Lyon", "Dijon, France"}},
        {"A-ha", {"a ha"}},
        {"Hollywood Records.", {"hollywood records"}},
        {"the the the", {"a an"}},
        {"Jon Bon Jovi", {"Bon Jovi", "John Francis Bongiovi"}},
        {"twenty one", {"21"}},
        {"Ronny Jordan", {"Jordan, Ronny"}},
        {"  spaced   out  ", {"spaced out"}},
        {"Oregon State University", {"Oregon State", "OSU"}},
        {"The Crush Tour", {"Crush Tour", "the Crush tour"}},
    };
    std::vector<std::pair<std::string, std::vector<std::string>>> out;
    for (const auto& [pred, golds] : base) {
      out.push_back({pred, golds});
      out.push_back({text::to_lower_ascii(pred), golds});
      out.push_back({"The " + pred + "!", golds});
      out.push_back({pred + " " + pred, golds});
    }
    return out;
  }();
  return pairs;
}

void metric_oracles(Checker& c) {
  const auto& pairs = answer_pairs();
  c.expect(pairs.size() == 100, "100 answer pairs");
  for (const auto& [pred, golds] : pairs) {
    const std::string where = "\"" + pred + "\"";
    c.expect(std::fabs(exact_match(pred, golds) - oracle::em(pred, golds)) <= 1e-9, where + ": EM");
    c.expect(std::fabs(f1_score(pred, golds) - oracle::f1(pred, golds)) <= 1e-9, where + ": F1");
  }

  Rng rng(99);
  for (int n = 0; n < 500; ++n) {
    std::vector<int> pred(rng.uniform(6));
    for (int& p : pred) p = static_cast<int>(rng.between(1, 10));
    std::set<int> gold;
    const std::size_t g = rng.between(1, 4);
    while (gold.size() < g) gold.insert(static_cast<int>(rng.between(1, 10)));
    const auto got = citation_scores(pred, gold);
    const auto want = oracle::citation_pr(pred, gold);
    c.expect(got.precision == want.precision && got.recall == want.recall, "citation P/R draw " + std::to_string(n));
  }

  int series = 0;
  while (series < 200) {
    const std::size_t len = rng.between(3, 8);
    std::vector<double> x(len), y(len);
    const std::uint64_t spread = rng.between(2, 10);
    for (std::size_t i = 0; i < len; ++i) {
      x[i] = static_cast<double>(rng.uniform(spread));
      y[i] = static_cast<double>(rng.uniform(spread));
    }
    const std::string where = "series " + std::to_string(series);
    const double ws = oracle::spearman(x, y);
    const double wk = oracle::kendall(x, y);
    if (std::isnan(ws) || std::isnan(wk)) {
      bool threw = false;
      try {
        correlation(x, y, CorrelationMethod::spearman, {100, 0});
      } catch (const DataError&) {
        threw = true;
      }
      c.expect(threw, where + ": undefined correlation reported");
    } else {
      c.expect(std::fabs(spearman(x, y) - ws) <= 1e-9, where + ": Spearman");
      c.expect(std::fabs(kendall_tau_b(x, y) - wk) <= 1e-9, where + ": Kendall");
      c.expect(std::fabs(correlation(x, y, CorrelationMethod::kendall, {100, 0}).coefficient - wk) <= 1e-9,
               where + ": Kendall via correlation");
    }
    ++series;
  }
}

void noise_monotonicity(Checker& c) {
  const Sample s = crush_tour(eval_samples());
  c.expect(s.instance.documents.size() == 20, "20-document fixture");
  const auto support = s.instance.supporting_ids();
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    std::size_t prev = 0;
    for (int ratio = 0; ratio <= 100; ratio += 20) {
      const QAInstance n = apply_noise(s.instance, NoiseSpec{ratio, seed});
      const std::string where = "seed " + std::to_string(seed) + " ratio " + std::to_string(ratio);
      c.expect(n.documents.size() >= prev, where + ": non-decreasing");
      prev = n.documents.size();
      std::size_t supporting = 0;
      for (const Document& d : n.documents) supporting += d.is_supporting ? 1 : 0;
      c.expect(supporting == support.size(), where + ": supporting retained");
      if (ratio == 0) c.expect(n.documents.size() == support.size(), where + ": supporting only");
      if (ratio == 100) {
        std::set<std::string> titles, all;
        for (const Document& d : n.documents) titles.insert(d.title);
        for (const Document& d : s.instance.documents) all.insert(d.title);
        c.expect(titles == all, where + ": full set");
      }
    }
  }
}

int run_cli(const std::vector<std::string>& args, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

void end_to_end_replay(Checker& c) {
  const auto cassette = fixture("cassette.jsonl");
  c.expect(std::filesystem::exists(cassette), "committed cassette present");
  if (!std::filesystem::exists(cassette)) return;
  c.expect(read_jsonl(cassette).size() >= 25, "cassette holds at least 25 responses");
  c.expect(eval_corpus().size() == 5, "5 fixture instances");
  const auto dir = scratch_dir("acceptance-replay");
  for (const char* mode : {"ao", "cot", "coc", "coq"}) {
    std::vector<std::string> outputs;
    for (int run = 0; run < 2; ++run) {
      const auto out = dir / (std::string(mode) + "-" + std::to_string(run) + ".json");
      std::string err;
      const int code = run_cli({"evaluate", "--corpus", fixture("eval_corpus.jsonl").string(), "--demos",
                                fixture("demo_pool.jsonl").string(), "--mode", mode, "--model", "fixture-model",
                                "--seeds", "1,2,3", "--cassette", "replay", "--cassette-file", cassette.string(),
                                "--out", out.string()},
                               &err);
      c.expect(code == cli::kOk, std::string(mode) + ": replay exits 0 (" + err + ")");
      outputs.push_back(std::filesystem::exists(out) ? read_text_file(out) : std::string());
    }
    c.expect(!outputs[0].empty() && outputs[0] == outputs[1], std::string(mode) + ": byte-identical runs");
    if (outputs[0].empty()) continue;
    const json run = json::parse(outputs[0]);
    c.expect(run.at("overall").is_object(), std::string(mode) + ": metric report present");
    c.expect(run.at("trials").size() == 3, std::string(mode) + ": one trial per seed");
    c.expect(run.at("overall").at("mean_citation_precision").is_number() ==
                 (std::string(mode) == "coc" || std::string(mode) == "coq"),
             std::string(mode) + ": citation metrics only for citing modes");
  }
}

void report_shape(Checker& c) {
  const auto dir = scratch_dir("acceptance-report");
  auto model = std::make_shared<ScriptedModel>(eval_samples());
  std::vector<std::string> runs;
  {
    FakeEndpoint endpoint(model);
    for (const char* name : {"model-a", "model-b"}) {
      for (const char* mode : {"cot", "coc"}) {
        const auto out = dir / (std::string(name) + "-" + mode + ".json");
        std::string err;
        const int code = run_cli({"sweep-noise", "--corpus", fixture("eval_corpus.jsonl").string(), "--demos",
                                  fixture("demo_pool.jsonl").string(), "--mode", mode, "--shots", "2", "--model",
                                  name, "--endpoint", endpoint.url(), "--ratios", "0,20,40,60,80,100", "--seeds",
                                  "1,2,3", "--dataset", "fixture", "--out", out.string()},
                                 &err);
        c.expect(code == cli::kOk, std::string("sweep ") + name + " " + mode + " (" + err + ")");
        runs.push_back(out.string());
      }
    }
  }
  const auto curation = dir / "curation.json";
  c.expect(run_cli({"curate", "--in", fixture("eval_annotations.jsonl").string(), "--corpus",
                    fixture("eval_corpus.jsonl").string(), "--out", (dir / "kept.jsonl").string(), "--report",
                    curation.string()}) == cli::kOk,
           "curate");
  const auto stats = dir / "stats.json";
  c.expect(run_cli({"stats", "--samples", (dir / "kept.jsonl").string(), "--out", stats.string()}) == cli::kOk,
           "stats");
  std::vector<std::string> args{"report", "--curation-report", curation.string(), "--stats", stats.string(),
                                "--out-dir", (dir / "report").string(), "--runs"};
  args.insert(args.end(), runs.begin(), runs.end());
  std::string err;
  c.expect(run_cli(args, &err) == cli::kOk, "report exits 0 (" + err + ")");
  if (!std::filesystem::exists(dir / "report" / "report.json")) return;
  const json t = read_json_file(dir / "report" / "report.json");

  const json& inc = t.at("error_incidence");
  c.expect(inc.at("rows").size() == 5, "five error kinds");
  std::set<std::string> kinds;
  for (const json& r : inc.at("rows")) {
    kinds.insert(r.at("key").get<std::string>());
    c.expect(r.at("any_failure").is_number() && r.at("first_failure").is_number(), "both denominators");
  }
  for (FailureKind k : kAllFailureKinds) c.expect(kinds.count(std::string(to_string(k))) == 1, "kind listed");

  const std::vector<std::string> stat_rows{"#Max Words per Sample",       "#Mean Words per Sample",
                                           "#Averaged Words per CoT Step", "#Averaged Words per Quote",
                                           "#Total Samples",              "2-Hop Samples [%]",
                                           "3-Hop Samples [%]",           "4-Hop Samples [%]"};
  const json& st = t.at("dataset_statistics").at("rows");
  c.expect(st.size() == stat_rows.size(), "statistics rows");
  for (std::size_t i = 0; i < std::min(st.size(), stat_rows.size()); ++i) {
    c.expect(st[i].at("entry") == stat_rows[i], "statistics row " + stat_rows[i]);
    c.expect(st[i].at("value").is_number(), "statistics value " + stat_rows[i]);
  }

  const json& corr = t.at("correlation");
  c.expect(corr.at("methods") == json({"pearson", "spearman", "kendall"}), "three methods");
  c.expect(corr.at("sections").size() == 1, "one dataset section");
  for (const json& section : corr.at("sections")) {
    c.expect(section.at("rows").size() == 2, "two metric pairs");
    std::vector<std::string> pairs;
    for (const json& row : section.at("rows")) {
      pairs.push_back(row.at("pair").get<std::string>());
      for (const char* m : {"pearson", "spearman", "kendall"}) {
        const json& cell = row.at(m);
        c.expect((cell.contains("coefficient") && cell.contains("p_value") && cell.contains("significant")) ||
                     cell.contains("error"),
                 std::string("cell ") + m);
      }
    }
    c.expect(pairs == std::vector<std::string>{"EM vs. P", "EM vs. R"}, "pair labels");
  }

  const json& range = t.at("performance_range");
  c.expect(range.at("modes") == json({"cot", "coc"}), "range modes");
  c.expect(range.at("rows").size() == 2, "one row per model");
  for (const json& row : range.at("rows")) {
    for (const char* mode : {"cot", "coc"}) {
      const json& v = row.at("cells").at("fixture").at(mode);
      c.expect(v.is_number() && v.get<double>() >= 0.0 && v.get<double>() <= 1.0, "range value in [0, 1]");
    }
  }
  for (const char* f : {"report.md", "citation_vs_em.csv", "noise_curve.csv"}) {
    c.expect(std::filesystem::exists(dir / "report" / f), std::string(f) + " written");
  }
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"golden chain parse and render", 1, golden_chains},
      {"filter boundaries", 1, filter_boundaries},
      {"curation fixed point", 5, curation_fixed_point},
      {"augmentation invariant", 30, augmentation_invariant},
      {"metric oracle equivalence", 60, metric_oracles},
      {"noise sweep monotonicity", 5, noise_monotonicity},
      {"end-to-end replay", 30, end_to_end_replay},
      {"report shape conformance", 5, report_shape},
  };
  int failed = 0;
  for (const Criterion& cr : criteria) {
    Checker c;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.body(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.expect(secs < cr.time_limit_seconds, "runtime over " + std::to_string(cr.time_limit_seconds) + " s");
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.3f s", secs);
    if (c.failed() == 0) {
      std::cout << "PASS " << cr.name << " (" << c.checks() << " checks, " << timing << ")\n";
    } else {
      ++failed;
      std::cout << "FAIL " << cr.name << " (" << c.failed() << " of " << c.checks() << " checks, " << timing
                << ")\n";
      for (const auto& f : c.failures()) std::cout << "     " << f << "\n";
    }
  }
  return failed == 0 ? 0 : 1;
}
