#include "attribqa/corpus.hpp"

#include <algorithm>
#include <cctype>

#include "attribqa/chains.hpp"
#include "attribqa/error.hpp"
#include "attribqa/prompting.hpp"
#include "attribqa/random.hpp"
#include "attribqa/records.hpp"
#include "attribqa/text.hpp"

namespace attribqa {

std::set<int> QAInstance::supporting_ids() const {
  std::set<int> ids;
  for (const auto& d : documents) {
    if (d.is_supporting) ids.insert(d.index);
  }
  return ids;
}

std::vector<std::string> QAInstance::references() const {
  std::vector<std::string> refs{answer};
  for (const auto& a : answer_aliases) {
    if (std::find(refs.begin(), refs.end(), a) == refs.end()) refs.push_back(a);
  }
  return refs;
}

const Document* QAInstance::find_document(int index) const {
  for (const auto& d : documents) {
    if (d.index == index) return &d;
  }
  return nullptr;
}

CorpusFormat parse_corpus_format(std::string_view name) {
  std::string n = text::to_lower_ascii(name);
  if (n == "musique") return CorpusFormat::musique;
  if (n == "twowiki" || n == "2wiki") return CorpusFormat::twowiki;
  if (n == "hotpot" || n == "hotpotqa") return CorpusFormat::hotpot;
  if (n == "internal") return CorpusFormat::internal;
  throw UsageError("unknown corpus format: " + std::string(name));
}

std::string_view to_string(CorpusFormat format) {
  switch (format) {
    case CorpusFormat::musique: return "musique";
    case CorpusFormat::twowiki: return "twowiki";
    case CorpusFormat::hotpot: return "hotpot";
    case CorpusFormat::internal: return "internal";
  }
  return "?";
}

ValidationReport validate_instance(const QAInstance& instance) {
  ValidationReport report;
  std::set<int> seen;
  bool any_supporting = false;
  for (std::size_t pos = 0; pos < instance.documents.size(); ++pos) {
    const Document& d = instance.documents[pos];
    if (d.index < 1) report.push_back("index " + std::to_string(d.index) + " is below 1");
    if (!seen.insert(d.index).second) report.push_back("duplicate index " + std::to_string(d.index));
    if (text::trim(d.title).empty()) report.push_back("empty title at index " + std::to_string(d.index));
    if (text::trim(d.body).empty()) report.push_back("empty body at index " + std::to_string(d.index));
    any_supporting = any_supporting || d.is_supporting;
  }
  if (!seen.empty() && (*seen.begin() != 1 || *seen.rbegin() != static_cast<int>(seen.size()) ||
                        seen.size() != instance.documents.size())) {
    report.push_back("indices not contiguous from 1");
  }
  if (!any_supporting) report.push_back("no supporting document");
  if (instance.hop_count < 2 || instance.hop_count > 4) {
    report.push_back("hop_count " + std::to_string(instance.hop_count) + " not in {2,3,4}");
  }
  return report;
}

namespace {

const json& field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) throw DataError(std::string("missing field: ") + name);
  return *it;
}

std::string string_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_string()) throw DataError(std::string("wrong type for field: ") + name);
  return v.get<std::string>();
}

std::string id_field(const json& j) {
  if (j.contains("_id")) return string_field(j, "_id");
  return string_field(j, "id");
}

void set_aliases(QAInstance& q, const json& j) {
  if (j.contains("answer_aliases") && j["answer_aliases"].is_array()) {
    for (const json& a : j["answer_aliases"]) {
      if (a.is_string()) q.answer_aliases.push_back(a.get<std::string>());
    }
  }
  if (q.answer_aliases.empty()) q.answer_aliases = {q.answer};
}

QAInstance from_musique(const json& j) {
  QAInstance q;
  q.id = string_field(j, "id");
  q.question = string_field(j, "question");
  const json& paragraphs = field(j, "paragraphs");
  q.answer = string_field(j, "answer");
  set_aliases(q, j);
  int index = 1;
  for (const json& p : paragraphs) {
    Document d;
    d.index = index++;
    d.title = string_field(p, "title");
    d.body = string_field(p, "paragraph_text");
    d.is_supporting = p.value("is_supporting", false);
    q.documents.push_back(std::move(d));
  }
  if (j.contains("question_decomposition") && j["question_decomposition"].is_array()) {
    std::vector<std::string> subs;
    for (const json& step : j["question_decomposition"]) {
      if (step.is_object() && step.contains("question")) subs.push_back(step["question"].get<std::string>());
    }
    if (!subs.empty()) q.decomposition = subs;
  }
  // Ids look like "2hop__...", "3hop1__...", "4hop3__...".
  if (!q.id.empty() && std::isdigit(static_cast<unsigned char>(q.id[0])) &&
      q.id.compare(1, 3, "hop") == 0) {
    q.hop_count = q.id[0] - '0';
  } else if (q.decomposition) {
    q.hop_count = static_cast<int>(q.decomposition->size());
  }
  return q;
}

// HotpotQA and 2Wiki share the [title, [sentences]] context layout.
QAInstance from_title_sentences(const json& j, bool twowiki) {
  QAInstance q;
  q.id = id_field(j);
  q.question = string_field(j, "question");
  const json& context = field(j, "context");
  const json& facts = field(j, "supporting_facts");
  q.answer = string_field(j, "answer");
  set_aliases(q, j);

  std::set<std::string> supporting_titles;
  for (const json& f : facts) {
    if (f.is_array() && !f.empty() && f[0].is_string()) supporting_titles.insert(f[0].get<std::string>());
  }
  int index = 1;
  for (const json& entry : context) {
    if (!entry.is_array() || entry.size() != 2) throw DataError("malformed context entry");
    Document d;
    d.index = index++;
    d.title = entry[0].get<std::string>();
    std::vector<std::string> sentences;
    for (const json& s : entry[1]) sentences.push_back(s.get<std::string>());
    d.body = text::collapse_whitespace(text::join(sentences, " "));
    d.is_supporting = supporting_titles.count(d.title) > 0;
    q.documents.push_back(std::move(d));
  }
  if (twowiki) {
    int hops = static_cast<int>(supporting_titles.size());
    q.hop_count = std::clamp(hops, 2, 4);
  } else {
    q.hop_count = 2;
  }
  return q;
}

QAInstance convert_record(const json& j, CorpusFormat format) {
  if (!j.is_object()) throw DataError("record is not an object");
  switch (format) {
    case CorpusFormat::internal: return instance_from_json(j);
    case CorpusFormat::musique: return from_musique(j);
    case CorpusFormat::twowiki: return from_title_sentences(j, true);
    case CorpusFormat::hotpot: return from_title_sentences(j, false);
  }
  throw UsageError("unknown corpus format");
}

}  // namespace

std::vector<QAInstance> parse_corpus(std::string_view content, CorpusFormat format) {
  std::vector<QAInstance> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw DataError(where + "invalid JSON");
    }
    QAInstance q;
    try {
      q = convert_record(j, format);
    } catch (const json::exception& e) {
      throw DataError(where + e.what());
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
    ValidationReport violations = validate_instance(q);
    if (!violations.empty()) {
      throw DataError(where + "invalid record " + q.id + ": " + text::join(violations, "; "));
    }
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<QAInstance> load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  try {
    return parse_corpus(read_text_file(path), format);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_corpus(const std::filesystem::path& path, const std::vector<QAInstance>& corpus) {
  std::vector<json> rows(corpus.begin(), corpus.end());
  write_jsonl(path, rows);
}

std::vector<QAInstance> subsample(const std::vector<QAInstance>& corpus, std::size_t n,
                                  std::uint64_t seed) {
  if (n > corpus.size()) {
    throw UsageError("cannot subsample " + std::to_string(n) + " from " +
                     std::to_string(corpus.size()) + " instances");
  }
  Rng rng(seed);
  std::vector<QAInstance> out;
  out.reserve(n);
  for (std::size_t i : rng.sample_indices(corpus.size(), n)) out.push_back(corpus[i]);
  return out;
}

std::string render_sample(const QAInstance& instance, const AttributionChain* chain) {
  std::string out = render_user_turn(instance.documents, instance.question, PromptMode::AO);
  if (chain) {
    out += '\n';
    out += render_chain(*chain, chain->information_level());
  }
  return out;
}

CorpusStats corpus_stats(const std::vector<QAInstance>& corpus,
                         const std::vector<AttributionChain>* chains) {
  if (chains && chains->size() != corpus.size()) {
    throw DataError("chain count " + std::to_string(chains->size()) +
                    " does not match instance count " + std::to_string(corpus.size()));
  }
  CorpusStats stats;
  stats.total_samples = corpus.size();
  stats.word_count_basis =
      "whitespace tokens with leading/trailing ASCII punctuation stripped; a sample is the "
      "rendered context and question block" +
      std::string(chains ? " plus the rendered reasoning chain" : "");
  if (corpus.empty()) return stats;

  std::size_t total_words = 0;
  std::map<int, std::size_t> hops;
  std::size_t step_words = 0, steps = 0, quote_words = 0, quotes = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const AttributionChain* chain = chains ? &(*chains)[i] : nullptr;
    std::size_t words = text::count_words(render_sample(corpus[i], chain));
    total_words += words;
    stats.max_words_per_sample = std::max(stats.max_words_per_sample, words);
    ++hops[corpus[i].hop_count];
    if (chain) {
      for (const auto& s : chain->steps) {
        step_words += text::count_words(s.claim);
        ++steps;
        for (const auto& q : s.quotes) {
          quote_words += text::count_words(q.text);
          ++quotes;
        }
      }
    }
  }
  const double n = static_cast<double>(corpus.size());
  stats.mean_words_per_sample = static_cast<double>(total_words) / n;
  for (const auto& [h, c] : hops) stats.hop_distribution[h] = static_cast<double>(c) / n;
  if (steps) stats.mean_words_per_step = static_cast<double>(step_words) / static_cast<double>(steps);
  if (quotes) stats.mean_words_per_quote = static_cast<double>(quote_words) / static_cast<double>(quotes);
  return stats;
}

}  // namespace attribqa
