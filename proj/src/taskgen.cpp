#include "attribqa/taskgen.hpp"

#include <algorithm>

#include "attribqa/error.hpp"
#include "attribqa/prompting.hpp"
#include "attribqa/random.hpp"
#include "attribqa/records.hpp"
#include "attribqa/text.hpp"

namespace attribqa {

TaskKind parse_task(std::string_view name) {
  std::string n = text::to_lower_ascii(text::trim(name));
  if (n == "la") return TaskKind::LA;
  if (n == "ap") return TaskKind::AP;
  if (n == "cg") return TaskKind::CG;
  if (n == "qi") return TaskKind::QI;
  throw UsageError("unknown task: " + std::string(name));
}

std::string_view to_string(TaskKind task) {
  switch (task) {
    case TaskKind::LA: return "la";
    case TaskKind::AP: return "ap";
    case TaskKind::CG: return "cg";
    case TaskKind::QI: return "qi";
  }
  return "?";
}

PromptMode task_prompt_mode(TaskKind task) {
  switch (task) {
    case TaskKind::LA: return PromptMode::CoC;
    case TaskKind::CG: return PromptMode::CoT;
    case TaskKind::AP:
    case TaskKind::QI: return PromptMode::AO;
  }
  return PromptMode::AO;
}

std::string render_quote_list(const std::vector<Quote>& quotes) {
  std::vector<std::string> lines;
  lines.reserve(quotes.size());
  for (const Quote& q : quotes) lines.push_back("\"" + q.text + "\" [" + std::to_string(q.doc) + "]");
  return text::join(lines, "\n");
}

std::vector<Quote> parse_quote_list(std::string_view target) {
  std::vector<Quote> out;
  for (const std::string& raw : text::split(target, '\n')) {
    std::string_view line = text::trim(raw);
    if (line.empty()) continue;
    std::size_t open = line.rfind('[');
    std::size_t close = line.rfind(']');
    std::size_t first_quote = line.find('"');
    std::size_t last_quote = open == std::string_view::npos ? std::string_view::npos
                                                            : line.rfind('"', open);
    if (open == std::string_view::npos || close != line.size() - 1 ||
        first_quote == std::string_view::npos || last_quote == std::string_view::npos ||
        last_quote <= first_quote) {
      throw ParseError("malformed quote line: " + std::string(line));
    }
    std::string_view digits = line.substr(open + 1, close - open - 1);
    auto parsed = text::parse_int_list(digits);
    if (parsed.size() != 1) throw ParseError("malformed quote citation: " + std::string(line));
    out.push_back(Quote{std::string(line.substr(first_quote + 1, last_quote - first_quote - 1)),
                        static_cast<int>(parsed.front())});
  }
  return out;
}

TaskExample build_example(const Sample& sample, TaskKind task) {
  const QAInstance& inst = sample.instance;
  TaskExample ex;
  ex.id = inst.id + ":" + std::string(to_string(task));
  ex.task = task;
  ex.context_documents = inst.documents;
  ex.question = inst.question;
  switch (task) {
    case TaskKind::LA:
      ex.instruction = build_instruction(PromptMode::CoC);
      ex.target = render_chain(convert(sample.chain, PromptMode::CoC), PromptMode::CoC);
      break;
    case TaskKind::CG:
      ex.instruction = build_instruction(PromptMode::CoT);
      ex.target = render_chain(convert(sample.chain, PromptMode::CoT), PromptMode::CoT);
      break;
    case TaskKind::AP:
      ex.instruction = build_instruction(PromptMode::AO);
      ex.target = sample.chain.answer;
      break;
    case TaskKind::QI: {
      auto quotes = sample.chain.all_quotes();
      if (quotes.empty()) throw DataError("sample " + inst.id + " has no quotes for task qi");
      ex.instruction = quote_listing_instruction();
      ex.target = render_quote_list(quotes);
      break;
    }
  }
  return ex;
}

namespace {

// Keeps the documents at `positions` (in the given order), re-indexed 1..n.
std::vector<Document> reindex(const std::vector<Document>& docs,
                              const std::vector<std::size_t>& positions,
                              std::map<int, int>& index_map) {
  std::vector<Document> out;
  out.reserve(positions.size());
  for (std::size_t pos : positions) {
    Document d = docs[pos];
    index_map[d.index] = static_cast<int>(out.size()) + 1;
    d.index = static_cast<int>(out.size()) + 1;
    out.push_back(std::move(d));
  }
  return out;
}

std::string remap_target(TaskKind task, const std::string& target,
                         const std::map<int, int>& index_map) {
  switch (task) {
    case TaskKind::LA: {
      AttributionChain chain = parse_chain(target, PromptMode::CoC);
      return render_chain(remap_citations(chain, index_map), PromptMode::CoC);
    }
    case TaskKind::QI: {
      auto quotes = parse_quote_list(target);
      for (Quote& q : quotes) {
        auto it = index_map.find(q.doc);
        if (it == index_map.end()) throw DataError("unmapped citation " + std::to_string(q.doc));
        q.doc = it->second;
      }
      return render_quote_list(quotes);
    }
    case TaskKind::AP:
    case TaskKind::CG:
      return target;
  }
  return target;
}

}  // namespace

std::vector<TaskExample> augment(const TaskExample& example, const std::set<int>& supporting_ids,
                                 const AugmentPolicy& policy, std::uint64_t seed) {
  if (policy.copies < 1) throw UsageError("augment policy needs copies >= 1");
  if (policy.max_distractors && *policy.max_distractors < policy.min_distractors) {
    throw UsageError("augment policy has min_distractors > max_distractors");
  }
  std::vector<std::size_t> support_pos;
  std::vector<std::size_t> distractor_pos;
  for (std::size_t i = 0; i < example.context_documents.size(); ++i) {
    if (supporting_ids.count(example.context_documents[i].index)) {
      support_pos.push_back(i);
    } else {
      distractor_pos.push_back(i);
    }
  }
  if (support_pos.size() != supporting_ids.size()) {
    throw DataError("example " + example.id + ": supporting document missing from context");
  }

  const std::size_t available = distractor_pos.size();
  const std::size_t hi = std::min(policy.max_distractors.value_or(available), available);
  const std::size_t lo = std::min(policy.min_distractors, hi);

  std::vector<TaskExample> out;
  out.reserve(policy.copies);
  for (std::size_t copy = 0; copy < policy.copies; ++copy) {
    Rng rng(derive_seed(seed, example.id, copy));
    const std::size_t k = static_cast<std::size_t>(rng.between(lo, hi));
    std::vector<std::size_t> picked = rng.sample_indices(available, k);
    std::sort(picked.begin(), picked.end());

    std::vector<std::size_t> keep = support_pos;
    for (std::size_t p : picked) keep.push_back(distractor_pos[p]);
    std::sort(keep.begin(), keep.end());
    if (policy.shuffle) rng.shuffle(keep);

    TaskExample aug = example;
    aug.id = example.id + "#" + std::to_string(copy);
    std::map<int, int> index_map;
    aug.context_documents = reindex(example.context_documents, keep, index_map);
    aug.target = remap_target(example.task, example.target, index_map);
    out.push_back(std::move(aug));
  }
  return out;
}

std::size_t noise_distractor_count(int ratio_percent, std::size_t available) {
  if (ratio_percent < 0 || ratio_percent > 100) {
    throw UsageError("noise ratio " + std::to_string(ratio_percent) + " outside 0..100");
  }
  // round-half-up of ratio * available / 100
  return (static_cast<std::size_t>(ratio_percent) * available * 2 + 100) / 200;
}

NoisedInstance apply_noise_mapped(const QAInstance& instance, const NoiseSpec& spec) {
  std::vector<std::size_t> support_pos;
  std::vector<std::size_t> distractor_pos;
  for (std::size_t i = 0; i < instance.documents.size(); ++i) {
    (instance.documents[i].is_supporting ? support_pos : distractor_pos).push_back(i);
  }
  const std::size_t count = noise_distractor_count(spec.ratio_percent, distractor_pos.size());

  Rng rng(spec.seed);
  // One permutation per seed; lower ratios take a prefix of it.
  rng.shuffle(distractor_pos);
  std::vector<std::size_t> keep = support_pos;
  keep.insert(keep.end(), distractor_pos.begin(),
              distractor_pos.begin() + static_cast<long>(count));
  std::sort(keep.begin(), keep.end());
  rng.shuffle(keep);

  NoisedInstance out;
  out.instance = instance;
  out.instance.documents = reindex(instance.documents, keep, out.index_map);
  return out;
}

QAInstance apply_noise(const QAInstance& instance, const NoiseSpec& spec) {
  return apply_noise_mapped(instance, spec).instance;
}

nlohmann::json to_instruction_record(const TaskExample& example) {
  return json{{"id", example.id},
              {"instruction", example.instruction},
              {"input", render_user_turn(example.context_documents, example.question,
                                         task_prompt_mode(example.task))},
              {"output", example.target}};
}

std::vector<nlohmann::json> load_mixin(const std::filesystem::path& path) {
  const std::string content = read_text_file(path);
  std::vector<json> rows;
  std::string_view body = text::trim(content);
  if (!body.empty() && body.front() == '[') {
    json arr;
    try {
      arr = json::parse(body);
    } catch (const json::parse_error& e) {
      throw DataError(path.string() + ": invalid JSON: " + e.what());
    }
    rows.assign(arr.begin(), arr.end());
  } else {
    rows = parse_jsonl(content);
  }
  std::vector<json> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const json& r = rows[i];
    if (!r.is_object() || !r.contains("instruction") || !r.contains("output")) {
      throw DataError(path.string() + ": mixin record " + std::to_string(i + 1) +
                      " needs instruction and output");
    }
    out.push_back(json{{"id", r.value("id", "mixin-" + std::to_string(i + 1))},
                       {"instruction", r["instruction"]},
                       {"input", r.value("input", std::string{})},
                       {"output", r["output"]}});
  }
  return out;
}

std::vector<nlohmann::json> export_records(const std::vector<TaskExample>& examples,
                                           const std::vector<nlohmann::json>* mixin,
                                           std::uint64_t seed) {
  if (mixin && mixin->size() != examples.size()) {
    throw DataError("mixin has " + std::to_string(mixin->size()) + " records but there are " +
                    std::to_string(examples.size()) + " reasoning examples");
  }
  std::vector<json> records;
  records.reserve(examples.size() * (mixin ? 2 : 1));
  for (const auto& ex : examples) records.push_back(to_instruction_record(ex));
  if (mixin) records.insert(records.end(), mixin->begin(), mixin->end());
  Rng rng(seed);
  rng.shuffle(records);
  return records;
}

void export_examples(const std::vector<TaskExample>& examples,
                     const std::vector<nlohmann::json>* mixin, std::uint64_t seed,
                     const std::filesystem::path& path) {
  write_jsonl(path, export_records(examples, mixin, seed));
}

std::vector<TaskExample> build_training_set(const std::vector<Sample>& samples,
                                            const TaskBuildConfig& config) {
  std::vector<TaskExample> out;
  for (const Sample& s : samples) {
    const std::set<int> support = s.instance.supporting_ids();
    for (TaskKind task : config.tasks) {
      TaskExample ex = build_example(s, task);
      if (config.no_augment.count(task)) {
        out.push_back(std::move(ex));
        continue;
      }
      auto copies = augment(ex, support, config.policy, config.seed);
      out.insert(out.end(), copies.begin(), copies.end());
    }
  }
  return out;
}

}  // namespace attribqa
