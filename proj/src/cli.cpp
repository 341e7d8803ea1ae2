#include "attribqa/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <set>

#include "attribqa/corpus.hpp"
#include "attribqa/curation.hpp"
#include "attribqa/error.hpp"
#include "attribqa/evaluation.hpp"
#include "attribqa/llmio.hpp"
#include "attribqa/records.hpp"
#include "attribqa/report.hpp"
#include "attribqa/review.hpp"
#include "attribqa/taskgen.hpp"
#include "attribqa/text.hpp"

namespace attribqa::cli {

namespace fs = std::filesystem;

namespace {

struct CorpusOpts {
  std::string path;
  std::string format = "internal";
};

struct ModelOpts {
  std::string model = "default";
  std::string cassette = "passthrough";
  std::string cassette_file;
  std::string endpoint;
  std::size_t jobs = 4;
  double temperature = 0.0;
  std::size_t max_tokens = 512;
  int retries = 4;
};

struct PromptOpts {
  std::string demos;
  std::string mode = "coc";
  std::size_t shots = 5;
  std::size_t budget = EvalConfig{}.budget;
};

struct Options {
  CorpusOpts corpus;
  ModelOpts model;
  PromptOpts prompt;
  PromptOpts gen_prompt{"", "coq"};
  std::string out;

  // generate
  std::size_t sample = 0;
  std::uint64_t sample_seed = 0;
  std::uint64_t seed = 0;

  // curate
  std::string raw;
  std::string samples;
  std::string report;
  std::string verdicts;

  // build-tasks
  std::vector<std::string> tasks{"la", "ap", "cg", "qi"};
  std::vector<std::string> no_augment{"qi"};
  std::size_t copies = 2;
  std::size_t min_distractors = 0;
  std::optional<std::size_t> max_distractors;
  bool no_shuffle = false;
  std::string mixin;

  // evaluate / sweep-noise
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<int> ratios{0, 20, 40, 60, 80, 100};
  std::string dataset;

  // report
  std::string curation_report;
  std::string stats;
  std::vector<std::string> runs;

  // serve-review
  std::string annotations = "annotations.jsonl";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
};

void add_corpus_options(CLI::App* sub, CorpusOpts& o, bool required) {
  auto* opt = sub->add_option("--corpus", o.path, "QA corpus (JSON lines)")->check(CLI::ExistingFile);
  if (required) opt->required();
  sub->add_option("--format", o.format, "Corpus format: internal, musique, 2wiki, hotpotqa")
      ->capture_default_str();
}

void add_model_options(CLI::App* sub, ModelOpts& o) {
  sub->add_option("--model", o.model, "Model name sent to the endpoint")->capture_default_str();
  sub->add_option("--cassette", o.cassette, "Cassette mode: record, replay, passthrough")
      ->capture_default_str();
  sub->add_option("--cassette-file", o.cassette_file, "Cassette path (JSON lines)");
  sub->add_option("--endpoint", o.endpoint, "Chat-completions URL (default: $ATTRIBQA_ENDPOINT)");
  sub->add_option("--jobs", o.jobs, "Requests in flight")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--temperature", o.temperature)->capture_default_str()->check(CLI::NonNegativeNumber);
  sub->add_option("--max-tokens", o.max_tokens, "Max output tokens")->capture_default_str();
  sub->add_option("--retries", o.retries, "Attempts per request")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_prompt_options(CLI::App* sub, PromptOpts& o, bool with_mode) {
  sub->add_option("--demos", o.demos, "Demonstration pool (annotated samples)")->check(CLI::ExistingFile);
  if (with_mode) sub->add_option("--mode", o.mode, "ao, cot, coc or coq")->capture_default_str();
  sub->add_option("--shots", o.shots, "Demonstrations per prompt")->capture_default_str();
  sub->add_option("--budget", o.budget, "Prompt token budget")->capture_default_str();
}

std::vector<QAInstance> read_corpus(const CorpusOpts& o) {
  return load_corpus(o.path, parse_corpus_format(o.format));
}

std::vector<Sample> read_demos(const PromptOpts& o) {
  if (o.demos.empty()) {
    if (o.shots > 0) throw UsageError("--demos is required when --shots > 0");
    return {};
  }
  return load_samples(o.demos);
}

std::unique_ptr<ModelClient> make_client(const ModelOpts& o) {
  const CassetteMode mode = parse_cassette_mode(o.cassette);
  std::optional<fs::path> file;
  if (!o.cassette_file.empty()) file = o.cassette_file;
  if (mode != CassetteMode::passthrough && !file) {
    throw UsageError("--cassette " + o.cassette + " needs --cassette-file");
  }
  auto cassette = std::make_shared<Cassette>(mode, file);
  std::shared_ptr<ChatBackend> backend;
  if (mode != CassetteMode::replay) {
    EndpointConfig cfg = EndpointConfig::from_environment();
    if (!o.endpoint.empty()) cfg.url = o.endpoint;
    if (cfg.url.empty()) throw UsageError("no endpoint: set ATTRIBQA_ENDPOINT or pass --endpoint");
    backend = std::make_shared<HttpChatBackend>(cfg);
  }
  RetryPolicy retry;
  retry.max_attempts = o.retries;
  return std::make_unique<ModelClient>(backend, cassette, retry, std::chrono::milliseconds{0}, o.jobs);
}

EvalConfig eval_config(const Options& o, const PromptOpts& p) {
  EvalConfig c;
  c.mode = parse_mode(p.mode);
  c.shots = p.shots;
  c.budget = p.budget;
  c.model_name = o.model.model;
  c.temperature = o.model.temperature;
  c.max_output_tokens = o.model.max_tokens;
  return c;
}

// Writes through a sibling temp file so a failed stage never leaves a
// truncated artifact behind.
template <class Write>
void write_atomically(const fs::path& path, Write write) {
  fs::path tmp = path;
  tmp += ".tmp";
  write(tmp);
  fs::rename(tmp, path);
}

void write_text(const fs::path& path, std::string_view content) {
  write_atomically(path, [&](const fs::path& p) { write_text_file(p, content); });
}

std::string run_json_text(const json& j) { return j.dump(2) + "\n"; }

std::string metric_line(const std::optional<MetricReport>& r) {
  if (!r) return "no trials";
  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
    return std::string(buf);
  };
  std::string s = "EM " + pct(r->mean_em) + " F1 " + pct(r->mean_f1);
  if (r->mean_citation_precision) s += " P " + pct(*r->mean_citation_precision);
  if (r->mean_citation_recall) s += " R " + pct(*r->mean_citation_recall);
  if (r->performance_range) s += " range " + pct(*r->performance_range);
  return s;
}

int cmd_generate(const Options& o, std::ostream& out, std::ostream& err) {
  auto corpus = read_corpus(o.corpus);
  if (o.sample > 0) corpus = subsample(corpus, o.sample, o.sample_seed);
  auto pool = read_demos(o.gen_prompt);
  auto client = make_client(o.model);
  EvalConfig config = eval_config(o, o.gen_prompt);
  auto generations = generate_annotations(corpus, pool, *client, config, o.seed);

  std::vector<json> records, failures;
  bool transport = false;
  for (const Generation& g : generations) {
    if (g.raw) {
      records.push_back(json{{"id", g.id}, {"mode", std::string(to_string(config.mode))}, {"raw", *g.raw}});
    } else {
      failures.push_back(json{{"id", g.id}, {"error", g.error}});
      transport = transport || g.transport_error;
    }
  }
  write_text(o.out, dump_jsonl(records));
  fs::path partial = o.out;
  partial += ".partial";
  if (!failures.empty()) {
    write_text_file(partial, dump_jsonl(failures));
    err << "generate: " << failures.size() << " of " << generations.size()
        << " requests failed; " << o.out << " is partial (failures in " << partial.string() << ")\n";
    return transport ? kTransport : kData;
  }
  fs::remove(partial);
  out << "generated " << records.size() << " annotations -> " << o.out << "\n";
  return kOk;
}

int cmd_curate(const Options& o, std::ostream& out, std::ostream&) {
  if (o.raw.empty() == o.samples.empty()) throw UsageError("curate needs exactly one of --in or --samples");
  std::vector<Sample> samples;
  std::map<std::string, std::string> unparsable;
  if (!o.samples.empty()) {
    samples = load_samples(o.samples);
  } else {
    if (o.corpus.path.empty()) throw UsageError("--in requires --corpus");
    std::map<std::string, QAInstance> by_id;
    for (QAInstance& q : read_corpus(o.corpus)) {
      std::string id = q.id;
      by_id.emplace(std::move(id), std::move(q));
    }
    std::size_t line = 0;
    for (const json& rec : read_jsonl(o.raw)) {
      ++line;
      if (!rec.contains("id") || !rec.contains("raw")) {
        throw DataError(o.raw + ": line " + std::to_string(line) + ": missing field: id or raw");
      }
      const std::string id = rec.at("id").get<std::string>();
      auto it = by_id.find(id);
      if (it == by_id.end()) throw DataError(o.raw + ": line " + std::to_string(line) + ": unknown id " + id);
      const std::string raw = rec.at("raw").get<std::string>();
      const PromptMode mode = parse_mode(rec.value("mode", std::string("coq")));
      Sample s{it->second, {}};
      try {
        s.chain = parse_chain(raw, mode);
      } catch (const ParseError& e) {
        // Unparsable output has no usable answer; the answer check rejects it.
        unparsable[id] = e.what();
        s.chain.raw = raw;
      }
      samples.push_back(std::move(s));
    }
  }
  CurationResult result = curate(samples);
  for (CurationVerdict& v : result.verdicts) {
    auto it = unparsable.find(v.sample_id);
    if (it != unparsable.end()) v.details.insert(v.details.begin(), "unparsable output: " + it->second);
  }
  write_atomically(o.out, [&](const fs::path& p) { write_samples(p, result.kept); });
  if (!o.report.empty()) write_text(o.report, run_json_text(json(result.report)));
  if (!o.verdicts.empty()) {
    std::vector<json> rows(result.verdicts.begin(), result.verdicts.end());
    write_text(o.verdicts, dump_jsonl(rows));
  }
  out << "kept " << result.report.total_kept << " of " << result.report.total_in << " -> " << o.out << "\n";
  return kOk;
}

int cmd_build_tasks(const Options& o, std::ostream& out, std::ostream&) {
  auto samples = load_samples(o.samples);
  TaskBuildConfig cfg;
  cfg.tasks.clear();
  for (const auto& t : o.tasks) cfg.tasks.push_back(parse_task(t));
  cfg.no_augment.clear();
  for (const auto& t : o.no_augment) {
    if (t != "none") cfg.no_augment.insert(parse_task(t));
  }
  cfg.policy.copies = o.copies;
  cfg.policy.min_distractors = o.min_distractors;
  cfg.policy.max_distractors = o.max_distractors;
  cfg.policy.shuffle = !o.no_shuffle;
  cfg.seed = o.seed;
  auto examples = build_training_set(samples, cfg);
  std::optional<std::vector<json>> mixin;
  if (!o.mixin.empty()) mixin = load_mixin(o.mixin);
  auto records = export_records(examples, mixin ? &*mixin : nullptr, o.seed);
  write_text(o.out, dump_jsonl(records));
  out << "wrote " << records.size() << " records (" << examples.size() << " reasoning) -> " << o.out << "\n";
  return kOk;
}

std::string dataset_label(const Options& o) {
  if (!o.dataset.empty()) return o.dataset;
  const CorpusFormat f = parse_corpus_format(o.corpus.format);
  if (f != CorpusFormat::internal) return std::string(to_string(f));
  return fs::path(o.corpus.path).stem().string();
}

int cmd_evaluate(const Options& o, bool sweep, std::ostream& out, std::ostream&) {
  auto corpus = read_corpus(o.corpus);
  auto pool = read_demos(o.prompt);
  auto client = make_client(o.model);
  EvalConfig config = eval_config(o, o.prompt);
  EvaluationResult result = sweep ? sweep_noise(corpus, pool, *client, config, o.ratios, o.seeds)
                                  : evaluate(corpus, pool, *client, config, o.seeds);
  RunLabels labels{o.model.model, dataset_label(o), sweep ? "sweep-noise" : "evaluate"};
  const std::vector<int> ratios = sweep ? o.ratios : std::vector<int>{100};
  write_text(o.out, run_json_text(run_to_json(labels, config, o.seeds, ratios, result)));
  out << labels.kind << " " << to_string(config.mode) << ": " << metric_line(result.overall) << " -> "
      << o.out << "\n";
  return kOk;
}

int cmd_stats(const Options& o, std::ostream& out, std::ostream&) {
  if (o.corpus.path.empty() == o.samples.empty()) throw UsageError("stats needs exactly one of --corpus or --samples");
  CorpusStats stats;
  if (!o.samples.empty()) {
    auto samples = load_samples(o.samples);
    std::vector<QAInstance> corpus;
    std::vector<AttributionChain> chains;
    for (auto& s : samples) {
      corpus.push_back(std::move(s.instance));
      chains.push_back(std::move(s.chain));
    }
    stats = corpus_stats(corpus, &chains);
  } else {
    stats = corpus_stats(read_corpus(o.corpus));
  }
  const std::string text = run_json_text(json(stats));
  if (o.out.empty()) {
    out << text;
  } else {
    write_text(o.out, text);
    out << "stats -> " << o.out << "\n";
  }
  return kOk;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream&) {
  ReportInputs inputs;
  if (!o.curation_report.empty()) inputs.curation = curation_report_from_json(read_json_file(o.curation_report));
  if (!o.stats.empty()) inputs.stats = corpus_stats_from_json(read_json_file(o.stats));
  for (const auto& r : o.runs) inputs.runs.push_back(read_json_file(r));
  Report report = render_report(inputs);
  write_report(report, o.out);
  out << "report -> " << o.out << "\n";
  return kOk;
}

int cmd_serve(const Options& o, std::ostream& out, std::ostream&) {
  ReviewStore store(load_samples(o.samples), fs::path(o.annotations));
  std::optional<fs::path> static_dir;
  if (!o.static_dir.empty()) static_dir = o.static_dir;
  ReviewServer server(store, static_dir);
  const int port = server.bind(o.host, o.port);
  out << "serving review API on http://" << o.host << ":" << port << std::endl;
  server.listen();
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Attribution-grounded multi-hop QA curation and evaluation", "attribqa"};
  app.set_config("--config", "", "Read options from a TOML or INI file");
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "Collect raw CoQ annotations with few-shot prompts");
  add_corpus_options(generate, o.corpus, true);
  add_prompt_options(generate, o.gen_prompt, true);
  add_model_options(generate, o.model);
  generate->add_option("--sample", o.sample, "Randomly subsample this many instances first");
  generate->add_option("--sample-seed", o.sample_seed)->capture_default_str();
  generate->add_option("--seed", o.seed, "Demonstration sampling seed")->capture_default_str();
  generate->add_option("--out", o.out, "Raw annotations (JSON lines)")->required();

  auto* curate_cmd = app.add_subcommand("curate", "Filter annotations and report error incidence");
  add_corpus_options(curate_cmd, o.corpus, false);
  curate_cmd->add_option("--in", o.raw, "Raw annotations from generate")->check(CLI::ExistingFile);
  curate_cmd->add_option("--samples", o.samples, "Already parsed samples")->check(CLI::ExistingFile);
  curate_cmd->add_option("--out", o.out, "Kept samples (JSON lines)")->required();
  curate_cmd->add_option("--report", o.report, "Curation report (JSON)");
  curate_cmd->add_option("--verdicts", o.verdicts, "Per-sample verdicts (JSON lines)");

  auto* tasks = app.add_subcommand("build-tasks", "Export multi-task instruction-tuning data");
  tasks->add_option("--samples", o.samples, "Curated samples")->required()->check(CLI::ExistingFile);
  tasks->add_option("--tasks", o.tasks, "Tasks: la, ap, cg, qi")->delimiter(',')->capture_default_str();
  tasks->add_option("--no-augment", o.no_augment, "Tasks left unaugmented ('none' for all augmented)")
      ->delimiter(',')
      ->capture_default_str();
  tasks->add_option("--copies", o.copies, "Augmented copies per example")->capture_default_str();
  tasks->add_option("--min-distractors", o.min_distractors)->capture_default_str();
  tasks->add_option("--max-distractors", o.max_distractors);
  tasks->add_flag("--no-shuffle", o.no_shuffle, "Keep document order when augmenting");
  tasks->add_option("--mixin", o.mixin, "Generic instruction data mixed in 1:1")->check(CLI::ExistingFile);
  tasks->add_option("--seed", o.seed)->capture_default_str();
  tasks->add_option("--out", o.out, "Instruction records (JSON lines)")->required();

  auto* eval = app.add_subcommand("evaluate", "Prompt, parse and score over trial seeds");
  auto* sweep = app.add_subcommand("sweep-noise", "Evaluate across distractor noise ratios");
  for (auto* sub : {eval, sweep}) {
    add_corpus_options(sub, o.corpus, true);
    add_prompt_options(sub, o.prompt, true);
    add_model_options(sub, o.model);
    sub->add_option("--seeds", o.seeds, "Trial seeds")->delimiter(',')->capture_default_str();
    sub->add_option("--dataset", o.dataset, "Dataset label for reports");
    sub->add_option("--out", o.out, "Run file (JSON)")->required();
  }
  sweep->add_option("--ratios", o.ratios, "Noise ratios in percent")->delimiter(',')->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  add_corpus_options(stats, o.corpus, false);
  stats->add_option("--samples", o.samples, "Annotated samples")->check(CLI::ExistingFile);
  stats->add_option("--out", o.out, "Statistics (JSON); stdout when omitted");

  auto* report = app.add_subcommand("report", "Render tables and plot series from run artifacts");
  report->add_option("--curation-report", o.curation_report)->check(CLI::ExistingFile);
  report->add_option("--stats", o.stats)->check(CLI::ExistingFile);
  report->add_option("--runs", o.runs, "Run files from evaluate / sweep-noise")->check(CLI::ExistingFile);
  report->add_option("--out-dir", o.out, "Output directory")->required();

  auto* serve = app.add_subcommand("serve-review", "Serve the annotation review API");
  serve->add_option("--samples", o.samples, "Curated samples")->required()->check(CLI::ExistingFile);
  serve->add_option("--annotations", o.annotations, "Annotation log (JSON lines)")->capture_default_str();
  serve->add_option("--host", o.host)->capture_default_str();
  serve->add_option("--port", o.port)->capture_default_str();
  serve->add_option("--static", o.static_dir, "Directory with the review UI build")->check(CLI::ExistingDirectory);

  std::vector<std::string> argv_storage{"attribqa"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kOk;
    if (!dynamic_cast<const CLI::CallForHelp*>(&e)) err << app.help();
    return kUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(o, out, err);
    if (curate_cmd->parsed()) return cmd_curate(o, out, err);
    if (tasks->parsed()) return cmd_build_tasks(o, out, err);
    if (eval->parsed()) return cmd_evaluate(o, false, out, err);
    if (sweep->parsed()) return cmd_evaluate(o, true, out, err);
    if (stats->parsed()) return cmd_stats(o, out, err);
    if (report->parsed()) return cmd_report(o, out, err);
    if (serve->parsed()) return cmd_serve(o, out, err);
    err << app.help();
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const CassetteMiss& e) {
    err << "error: " << e.what() << "\n";
    return kTransport;
  } catch (const TransportError& e) {
    err << "error: " << e.what() << "\n";
    return kTransport;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace attribqa::cli
