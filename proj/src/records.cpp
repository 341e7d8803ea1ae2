#include "attribqa/records.hpp"

#include <fstream>
#include <sstream>

#include "attribqa/error.hpp"

namespace attribqa {

namespace {

const json& require(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) throw DataError(std::string("missing field: ") + field);
  return *it;
}

template <typename T>
T require_as(const json& j, const char* field) {
  const json& v = require(j, field);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string("wrong type for field: ") + field);
  }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void to_json(json& j, const Document& d) {
  j = json{{"title", d.title}, {"body", d.body}, {"is_supporting", d.is_supporting}};
}

void to_json(json& j, const QAInstance& q) {
  j = json{{"id", q.id},
           {"question", q.question},
           {"documents", q.documents},
           {"answer", q.answer},
           {"answer_aliases", q.answer_aliases},
           {"hop_count", q.hop_count}};
  if (q.decomposition) j["decomposition"] = *q.decomposition;
}

void to_json(json& j, const Quote& q) { j = json{{"text", q.text}, {"doc", q.doc}}; }

void to_json(json& j, const ReasoningStep& s) {
  j = json{{"claim", s.claim}, {"citations", s.citations}, {"quotes", s.quotes}};
}

void to_json(json& j, const AttributionChain& c) {
  j = json{{"steps", c.steps}, {"answer", c.answer}, {"raw", c.raw}};
}

void to_json(json& j, const CurationVerdict& v) {
  json failures = json::array();
  for (FailureKind k : v.failures) failures.push_back(std::string(to_string(k)));
  j = json{{"sample_id", v.sample_id}, {"kept", v.kept()}, {"failures", failures},
           {"details", v.details}};
}

void to_json(json& j, const CurationReport& r) {
  json any = json::object();
  json first = json::object();
  for (FailureKind k : kAllFailureKinds) {
    any[std::string(to_string(k))] = r.incidence_any.count(k) ? r.incidence_any.at(k) : 0.0;
    first[std::string(to_string(k))] =
        r.incidence_among_rejected.count(k) ? r.incidence_among_rejected.at(k) : 0.0;
  }
  j = json{{"total_in", r.total_in},
           {"total_kept", r.total_kept},
           {"total_rejected", r.total_in - r.total_kept},
           {"no_citation_samples", r.no_citation_samples},
           {"incidence_any", any},
           {"incidence_among_rejected", first}};
}

CurationReport curation_report_from_json(const json& j) {
  CurationReport r;
  r.total_in = require_as<std::size_t>(j, "total_in");
  r.total_kept = require_as<std::size_t>(j, "total_kept");
  r.no_citation_samples = j.value("no_citation_samples", std::size_t{0});
  const json& any = require(j, "incidence_any");
  const json& first = require(j, "incidence_among_rejected");
  for (FailureKind k : kAllFailureKinds) {
    const std::string key(to_string(k));
    r.incidence_any[k] = any.value(key, 0.0);
    r.incidence_among_rejected[k] = first.value(key, 0.0);
  }
  return r;
}

void to_json(json& j, const CorpusStats& s) {
  json hops = json::object();
  for (const auto& [h, f] : s.hop_distribution) hops[std::to_string(h)] = f;
  j = json{{"total_samples", s.total_samples},
           {"max_words_per_sample", s.max_words_per_sample},
           {"mean_words_per_sample", s.mean_words_per_sample},
           {"hop_distribution", hops},
           {"mean_words_per_step", optional_number(s.mean_words_per_step)},
           {"mean_words_per_quote", optional_number(s.mean_words_per_quote)},
           {"word_count_basis", s.word_count_basis}};
}

void to_json(json& j, const ScoredPrediction& p) {
  j = json{{"id", p.id},
           {"em", p.em},
           {"f1", p.f1},
           {"citation_precision", optional_number(p.citation_precision)},
           {"citation_recall", optional_number(p.citation_recall)},
           {"references", p.references}};
}

void to_json(json& j, const TrialMeans& t) {
  j = json{{"em", t.em},
           {"f1", t.f1},
           {"citation_precision", optional_number(t.citation_precision)},
           {"citation_recall", optional_number(t.citation_recall)}};
}

void to_json(json& j, const MetricReport& r) {
  j = json{{"mean_em", r.mean_em},
           {"mean_f1", r.mean_f1},
           {"mean_citation_precision", optional_number(r.mean_citation_precision)},
           {"mean_citation_recall", optional_number(r.mean_citation_recall)},
           {"per_trial", r.per_trial},
           {"performance_range", optional_number(r.performance_range)}};
}

void to_json(json& j, const CorrelationResult& r) {
  j = json{{"method", std::string(to_string(r.method))},
           {"coefficient", r.coefficient},
           {"p_value", r.p_value}};
}

QAInstance instance_from_json(const json& j) {
  if (!j.is_object()) throw DataError("record is not an object");
  QAInstance q;
  q.id = require_as<std::string>(j, "id");
  q.question = require_as<std::string>(j, "question");
  const json& docs = require(j, "documents");
  if (!docs.is_array()) throw DataError("wrong type for field: documents");
  q.answer = require_as<std::string>(j, "answer");
  q.hop_count = require_as<int>(j, "hop_count");
  int index = 1;
  for (const json& d : docs) {
    Document doc;
    doc.index = index++;
    doc.title = require_as<std::string>(d, "title");
    doc.body = require_as<std::string>(d, "body");
    doc.is_supporting = require_as<bool>(d, "is_supporting");
    q.documents.push_back(std::move(doc));
  }
  if (j.contains("answer_aliases") && !j["answer_aliases"].is_null()) {
    q.answer_aliases = require_as<std::vector<std::string>>(j, "answer_aliases");
  }
  if (q.answer_aliases.empty()) q.answer_aliases = {q.answer};
  if (j.contains("decomposition") && !j["decomposition"].is_null()) {
    q.decomposition = require_as<std::vector<std::string>>(j, "decomposition");
  }
  return q;
}

AttributionChain chain_from_json(const json& j) {
  AttributionChain c;
  c.answer = require_as<std::string>(j, "answer");
  c.raw = j.value("raw", std::string{});
  for (const json& s : require(j, "steps")) {
    ReasoningStep step;
    step.claim = require_as<std::string>(s, "claim");
    step.citations = s.value("citations", std::vector<int>{});
    if (s.contains("quotes")) {
      for (const json& q : s["quotes"]) {
        step.quotes.push_back(Quote{require_as<std::string>(q, "text"), require_as<int>(q, "doc")});
      }
    }
    c.steps.push_back(std::move(step));
  }
  return c;
}

json chain_record(std::string_view id, const AttributionChain& chain) {
  json j = chain;
  j["id"] = std::string(id);
  return j;
}

json sample_to_json(const Sample& s) {
  json j = s.instance;
  j["chain"] = s.chain;
  return j;
}

Sample sample_from_json(const json& j) {
  Sample s;
  s.instance = instance_from_json(j);
  s.chain = chain_from_json(require(j, "chain"));
  return s;
}

std::vector<json> parse_jsonl(std::string_view content) {
  std::vector<json> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    std::string_view line =
        content.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    bool blank = line.find_first_not_of(" \t\r") == std::string_view::npos;
    if (!blank) {
      try {
        out.push_back(json::parse(line));
      } catch (const json::parse_error& e) {
        throw DataError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
      }
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  return parse_jsonl(read_text_file(path));
}

std::string dump_jsonl(const std::vector<json>& records) {
  std::string out;
  for (const json& r : records) {
    out += r.dump(-1, ' ', false, json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records) {
  write_text_file(path, dump_jsonl(records));
}

json read_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& value) {
  write_text_file(path, value.dump(2, ' ', false, json::error_handler_t::replace) + "\n");
}

std::vector<Sample> load_samples(const std::filesystem::path& path) {
  std::vector<Sample> out;
  std::size_t n = 0;
  for (const json& j : read_jsonl(path)) {
    ++n;
    try {
      out.push_back(sample_from_json(j));
    } catch (const DataError& e) {
      throw DataError(path.string() + ": record " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void write_samples(const std::filesystem::path& path, const std::vector<Sample>& samples) {
  std::vector<json> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back(sample_to_json(s));
  write_jsonl(path, rows);
}

}  // namespace attribqa
