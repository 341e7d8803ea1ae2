#include "attribqa/evaluation.hpp"

#include <algorithm>

#include "attribqa/error.hpp"
#include "attribqa/random.hpp"
#include "attribqa/records.hpp"
#include "attribqa/taskgen.hpp"

namespace attribqa {

CompletionRequest make_request(const PromptBundle& bundle, const EvalConfig& config) {
  CompletionRequest r;
  r.model_name = config.model_name;
  r.system = bundle.system_or_instruction;
  for (const auto& [user, assistant] : bundle.turns) {
    r.turns.push_back(Turn{"user", user});
    r.turns.push_back(Turn{"assistant", assistant});
  }
  r.turns.push_back(Turn{"user", bundle.final_user});
  r.temperature = config.temperature;
  r.max_output_tokens = config.max_output_tokens;
  return r;
}

std::vector<Demonstration> sample_demonstrations(const std::vector<Sample>& pool,
                                                 const std::string& exclude_id, std::size_t shots,
                                                 PromptMode mode, int ratio_percent,
                                                 std::uint64_t seed) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].instance.id != exclude_id) eligible.push_back(i);
  }
  Rng rng(derive_seed(seed, exclude_id));
  std::vector<Demonstration> demos;
  for (std::size_t pick : rng.sample_indices(eligible.size(), std::min(shots, eligible.size()))) {
    const Sample& s = pool[eligible[pick]];
    NoisedInstance noised =
        apply_noise_mapped(s.instance, NoiseSpec{ratio_percent, derive_seed(seed, s.instance.id, 1)});
    AttributionChain chain;
    try {
      chain = remap_citations(s.chain, noised.index_map);
    } catch (const DataError& e) {
      throw DataError("demonstration " + s.instance.id + ": " + e.what());
    }
    demos.push_back(Demonstration{noised.instance, render_chain(convert(chain, mode), mode)});
  }
  return demos;
}

ScoredPrediction score_response(const std::string& id, const std::string& response, PromptMode mode,
                                const QAInstance& presented) {
  ScoredPrediction p;
  p.id = id;
  std::string answer;
  std::vector<int> cited;
  try {
    AttributionChain chain = parse_chain(response, mode);
    answer = chain.answer;
    cited = chain.all_citations();
  } catch (const ParseError&) {
    answer = extract_answer(response);
  }
  const auto refs = presented.references();
  p.references = refs.size();
  p.em = exact_match(answer, refs);
  p.f1 = f1_score(answer, refs);
  if (mode == PromptMode::CoC || mode == PromptMode::CoQ) {
    CitationScores cs = citation_scores(cited, presented.supporting_ids());
    p.citation_precision = cs.precision;
    p.citation_recall = cs.recall;
  }
  return p;
}

TrialResult run_trial(const std::vector<QAInstance>& corpus, const std::vector<Sample>& demo_pool,
                      ModelClient& client, const EvalConfig& config, int ratio_percent,
                      std::uint64_t seed) {
  TrialResult trial;
  trial.seed = seed;
  trial.ratio_percent = ratio_percent;
  std::vector<QAInstance> presented;
  std::vector<CompletionRequest> requests;
  presented.reserve(corpus.size());
  requests.reserve(corpus.size());
  std::size_t docs = 0;
  for (const QAInstance& inst : corpus) {
    QAInstance shown = apply_noise(inst, NoiseSpec{ratio_percent, derive_seed(seed, inst.id, 0)});
    auto demos =
        sample_demonstrations(demo_pool, inst.id, config.shots, config.mode, ratio_percent, seed);
    PromptBundle bundle = build_prompt(shown, config.mode, demos, config.budget, config.counter);
    requests.push_back(make_request(bundle, config));
    docs += shown.documents.size();
    presented.push_back(std::move(shown));
  }
  std::vector<std::string> responses = client.complete_all(requests);
  for (std::size_t i = 0; i < presented.size(); ++i) {
    trial.predictions.push_back(score_response(presented[i].id, responses[i], config.mode, presented[i]));
  }
  if (!corpus.empty()) trial.mean_documents = static_cast<double>(docs) / static_cast<double>(corpus.size());
  return trial;
}

namespace {

CorrelationCell correlate(const std::vector<double>& xs, const std::vector<double>& ys,
                          CorrelationMethod method, const PermutationOptions& options) {
  CorrelationCell cell;
  try {
    cell.result = correlation(xs, ys, method, options);
  } catch (const DataError& e) {
    cell.error = e.what();
  }
  return cell;
}

CorrelationRow correlation_row(std::string pair, const std::vector<double>& em,
                               const std::vector<double>& other, const PermutationOptions& options) {
  CorrelationRow row;
  row.pair = std::move(pair);
  row.pearson = correlate(em, other, CorrelationMethod::pearson, options);
  row.spearman = correlate(em, other, CorrelationMethod::spearman, options);
  row.kendall = correlate(em, other, CorrelationMethod::kendall, options);
  return row;
}

std::vector<TrialMeans> trial_points(const std::vector<TrialResult>& trials) {
  std::vector<TrialMeans> out;
  out.reserve(trials.size());
  for (const auto& t : trials) out.push_back(trial_means(t.predictions));
  return out;
}

}  // namespace

std::vector<CorrelationRow> correlation_table(const std::vector<TrialMeans>& points,
                                              const PermutationOptions& options) {
  std::vector<double> em_p, p, em_r, r;
  for (const TrialMeans& t : points) {
    if (t.citation_precision) {
      em_p.push_back(t.em);
      p.push_back(*t.citation_precision);
    }
    if (t.citation_recall) {
      em_r.push_back(t.em);
      r.push_back(*t.citation_recall);
    }
  }
  if (em_p.empty() && em_r.empty()) return {};
  return {correlation_row("EM vs. P", em_p, p, options),
          correlation_row("EM vs. R", em_r, r, options)};
}

EvaluationResult evaluate(const std::vector<QAInstance>& corpus,
                          const std::vector<Sample>& demo_pool, ModelClient& client,
                          const EvalConfig& config, const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw UsageError("evaluate needs at least one seed");
  EvaluationResult result;
  std::vector<std::vector<ScoredPrediction>> trials;
  for (std::uint64_t seed : seeds) {
    result.trials.push_back(run_trial(corpus, demo_pool, client, config, 100, seed));
    trials.push_back(result.trials.back().predictions);
  }
  result.overall = aggregate(trials);
  result.correlations = correlation_table(trial_points(result.trials));
  return result;
}

EvaluationResult sweep_noise(const std::vector<QAInstance>& corpus,
                             const std::vector<Sample>& demo_pool, ModelClient& client,
                             const EvalConfig& config, const std::vector<int>& ratios,
                             const std::vector<std::uint64_t>& seeds) {
  for (int r : ratios) {
    if (r < 0 || r > 100) throw UsageError("noise ratio " + std::to_string(r) + " outside 0..100");
  }
  if (!ratios.empty() && seeds.empty()) throw UsageError("sweep needs at least one seed");
  EvaluationResult result;
  if (ratios.empty()) return result;

  std::vector<std::vector<ScoredPrediction>> all;
  std::vector<double> curve_em;
  for (int ratio : ratios) {
    std::vector<std::vector<ScoredPrediction>> at_ratio;
    double docs = 0.0;
    for (std::uint64_t seed : seeds) {
      TrialResult t = run_trial(corpus, demo_pool, client, config, ratio, seed);
      docs += t.mean_documents;
      at_ratio.push_back(t.predictions);
      all.push_back(t.predictions);
      result.trials.push_back(std::move(t));
    }
    CurvePoint point;
    point.ratio_percent = ratio;
    point.report = aggregate(at_ratio);
    point.mean_documents = docs / static_cast<double>(seeds.size());
    curve_em.push_back(point.report.mean_em);
    result.curve.push_back(std::move(point));
  }
  result.overall = aggregate(all);
  result.overall->performance_range = performance_range(curve_em);
  result.correlations = correlation_table(trial_points(result.trials));
  return result;
}

namespace {

json cell_to_json(const CorrelationCell& c) {
  if (c.result) return json{{"coefficient", c.result->coefficient}, {"p_value", c.result->p_value}};
  return json{{"error", c.error}};
}

}  // namespace

nlohmann::json run_to_json(const RunLabels& labels, const EvalConfig& config,
                           const std::vector<std::uint64_t>& seeds, const std::vector<int>& ratios,
                           const EvaluationResult& result) {
  json trials = json::array();
  for (const TrialResult& t : result.trials) {
    trials.push_back(json{{"seed", t.seed},
                          {"ratio", t.ratio_percent},
                          {"means", trial_means(t.predictions)},
                          {"mean_documents", t.mean_documents},
                          {"predictions", t.predictions}});
  }
  json curve = json::array();
  for (const CurvePoint& p : result.curve) {
    curve.push_back(json{{"ratio", p.ratio_percent},
                         {"report", p.report},
                         {"mean_documents", p.mean_documents}});
  }
  json correlations = json::array();
  for (const CorrelationRow& row : result.correlations) {
    correlations.push_back(json{{"pair", row.pair},
                                {"pearson", cell_to_json(row.pearson)},
                                {"spearman", cell_to_json(row.spearman)},
                                {"kendall", cell_to_json(row.kendall)}});
  }
  return json{{"kind", labels.kind},
              {"labels",
               json{{"model", labels.model},
                    {"dataset", labels.dataset},
                    {"mode", std::string(to_string(config.mode))}}},
              {"config",
               json{{"shots", config.shots},
                    {"budget", config.budget},
                    {"model_name", config.model_name},
                    {"temperature", config.temperature},
                    {"seeds", seeds},
                    {"ratios", ratios}}},
              {"overall", result.overall ? json(*result.overall) : json(nullptr)},
              {"trials", trials},
              {"curve", curve},
              {"performance_range", result.overall && result.overall->performance_range
                                        ? json(*result.overall->performance_range)
                                        : json(nullptr)},
              {"correlation", correlations}};
}

std::vector<Generation> generate_annotations(const std::vector<QAInstance>& corpus,
                                             const std::vector<Sample>& demo_pool,
                                             ModelClient& client, const EvalConfig& config,
                                             std::uint64_t seed) {
  std::vector<CompletionRequest> requests;
  requests.reserve(corpus.size());
  for (const QAInstance& inst : corpus) {
    auto demos = sample_demonstrations(demo_pool, inst.id, config.shots, config.mode, 100, seed);
    requests.push_back(make_request(build_prompt(inst, config.mode, demos, config.budget, config.counter),
                                    config));
  }
  auto outcomes = client.complete_each(requests);
  std::vector<Generation> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Generation g;
    g.id = corpus[i].id;
    g.raw = outcomes[i].response;
    if (outcomes[i].error) {
      try {
        std::rethrow_exception(outcomes[i].error);
      } catch (const TransportError& e) {
        g.error = e.what();
        g.transport_error = true;
      } catch (const CassetteMiss& e) {
        g.error = e.what();
        g.transport_error = true;
      } catch (const std::exception& e) {
        g.error = e.what();
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace attribqa
