#include "attribqa/review.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>

#include <httplib.h>

#include "attribqa/records.hpp"
#include "attribqa/text.hpp"

namespace attribqa {

std::string_view to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::DisorderedSteps: return "DisorderedSteps";
    case ErrorCategory::MissingSteps: return "MissingSteps";
    case ErrorCategory::IncorrectSteps: return "IncorrectSteps";
  }
  return "";
}

ErrorCategory parse_error_category(std::string_view name) {
  for (ErrorCategory c : {ErrorCategory::DisorderedSteps, ErrorCategory::MissingSteps,
                          ErrorCategory::IncorrectSteps}) {
    if (name == to_string(c)) return c;
  }
  throw UsageError("unknown error category: " + std::string(name));
}

json annotation_to_json(const Annotation& a) {
  return json{{"sample_id", a.sample_id},
              {"faithful", a.faithful},
              {"error_category",
               a.error_category ? json(std::string(to_string(*a.error_category))) : json(nullptr)},
              {"shortcut", a.shortcut},
              {"annotator_id", a.annotator_id},
              {"timestamp", a.timestamp}};
}

Annotation annotation_from_json(const json& j) {
  if (!j.is_object()) throw UsageError("annotation must be an object");
  Annotation a;
  auto field = [&](const char* key) -> const json& {
    auto it = j.find(key);
    if (it == j.end()) throw UsageError(std::string("missing field: ") + key);
    return *it;
  };
  const json& id = field("sample_id");
  const json& faithful = field("faithful");
  const json& annotator = field("annotator_id");
  if (!id.is_string() || !faithful.is_boolean() || !annotator.is_string()) {
    throw UsageError("annotation fields have wrong types");
  }
  a.sample_id = id.get<std::string>();
  a.faithful = faithful.get<bool>();
  a.annotator_id = annotator.get<std::string>();
  if (a.annotator_id.empty()) throw UsageError("empty annotator_id");
  if (auto it = j.find("shortcut"); it != j.end()) {
    if (!it->is_boolean()) throw UsageError("shortcut must be a boolean");
    a.shortcut = it->get<bool>();
  }
  if (auto it = j.find("error_category"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw UsageError("error_category must be a string");
    a.error_category = parse_error_category(it->get<std::string>());
  }
  if (auto it = j.find("timestamp"); it != j.end() && it->is_string()) a.timestamp = it->get<std::string>();
  if (a.faithful && a.error_category) throw UsageError("error_category given for a faithful sample");
  if (!a.faithful && !a.error_category) throw UsageError("error_category required for an unfaithful sample");
  return a;
}

json summary_to_json(const AssessmentSummary& s) {
  json split = json::object();
  for (const auto& [c, f] : s.category_split) split[std::string(to_string(c))] = f;
  json hops = json::object();
  for (const auto& [h, f] : s.per_hop_unfaithful) hops[std::to_string(h)] = f;
  return json{{"annotated_samples", s.annotated},
              {"unfaithful_fraction", s.unfaithful_fraction},
              {"category_split", split},
              {"shortcut_fraction", s.shortcut_fraction},
              {"per_hop_unfaithful", hops}};
}

AssessmentSummary summarize_annotations(const std::vector<Annotation>& log,
                                        const std::map<std::string, int>& hop_of) {
  std::map<std::string, const Annotation*> latest;
  for (const Annotation& a : log) latest[a.sample_id] = &a;
  if (latest.empty()) throw DataError("no annotations");

  AssessmentSummary s;
  s.annotated = latest.size();
  std::size_t unfaithful = 0, shortcut = 0;
  std::map<ErrorCategory, std::size_t> categories;
  std::map<int, std::pair<std::size_t, std::size_t>> hops;  // unfaithful, total
  for (const auto& [id, a] : latest) {
    auto hop = hop_of.find(id);
    auto& bucket = hops[hop == hop_of.end() ? 0 : hop->second];
    ++bucket.second;
    if (a->shortcut) ++shortcut;
    if (!a->faithful) {
      ++unfaithful;
      ++bucket.first;
      ++categories[*a->error_category];
    }
  }
  const double n = static_cast<double>(s.annotated);
  s.unfaithful_fraction = static_cast<double>(unfaithful) / n;
  s.shortcut_fraction = static_cast<double>(shortcut) / n;
  for (const auto& [c, k] : categories) {
    s.category_split[c] = static_cast<double>(k) / static_cast<double>(unfaithful);
  }
  for (const auto& [h, counts] : hops) {
    s.per_hop_unfaithful[h] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  return s;
}

ReviewStore::ReviewStore(std::vector<Sample> samples, std::optional<std::filesystem::path> log_path)
    : samples_(std::move(samples)), log_path_(std::move(log_path)) {
  std::sort(samples_.begin(), samples_.end(),
            [](const Sample& a, const Sample& b) { return a.instance.id < b.instance.id; });
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!by_id_.emplace(samples_[i].instance.id, i).second) {
      throw DataError("duplicate sample id " + samples_[i].instance.id);
    }
  }
  if (log_path_ && std::filesystem::exists(*log_path_)) {
    std::size_t line = 0;
    for (const json& j : read_jsonl(*log_path_)) {
      ++line;
      try {
        log_.push_back(annotation_from_json(j));
      } catch (const UsageError& e) {
        throw DataError(log_path_->string() + ": record " + std::to_string(line) + ": " + e.what());
      }
    }
  }
}

bool ReviewStore::annotated(const std::string& id, const std::optional<std::string>& annotator) const {
  return std::any_of(log_.begin(), log_.end(), [&](const Annotation& a) {
    return a.sample_id == id && (!annotator || a.annotator_id == *annotator);
  });
}

json ReviewStore::list(const SampleFilter& filter) const {
  if (filter.status && *filter.status != "annotated" && *filter.status != "unannotated") {
    throw UsageError("status must be annotated or unannotated");
  }
  std::lock_guard lock(mu_);
  json items = json::array();
  std::size_t matched = 0;
  for (const Sample& s : samples_) {
    if (filter.hop && s.instance.hop_count != *filter.hop) continue;
    const bool done = annotated(s.instance.id, filter.annotator);
    if (filter.status && (*filter.status == "annotated") != done) continue;
    if (matched >= filter.offset && items.size() < filter.limit) {
      items.push_back(json{{"id", s.instance.id},
                           {"question", s.instance.question},
                           {"hop_count", s.instance.hop_count},
                           {"status", done ? "annotated" : "unannotated"}});
    }
    ++matched;
  }
  return json{{"total", matched}, {"offset", filter.offset}, {"limit", filter.limit}, {"items", items}};
}

json ReviewStore::get(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw NotFound("unknown sample " + id);
  const Sample& s = samples_[it->second];

  json documents = json::array();
  for (const Document& d : s.instance.documents) documents.push_back(json{{"index", d.index},
                                                                          {"title", d.title},
                                                                          {"body", d.body},
                                                                          {"is_supporting", d.is_supporting}});
  json steps = json::array();
  json highlights = json::array();
  for (std::size_t i = 0; i < s.chain.steps.size(); ++i) {
    const ReasoningStep& step = s.chain.steps[i];
    json quotes = json::array();
    for (const Quote& q : step.quotes) {
      json quote{{"text", q.text}, {"doc", q.doc}};
      const Document* doc = s.instance.find_document(q.doc);
      std::optional<std::pair<std::size_t, std::size_t>> span;
      if (doc) span = text::find_collapsed(doc->body, q.text);
      if (span && span->first < span->second && span->second <= doc->body.size()) {
        quote["begin"] = span->first;
        quote["end"] = span->second;
        highlights.push_back(
            json{{"step", i}, {"doc", q.doc}, {"begin", span->first}, {"end", span->second}});
      } else {
        quote["unresolved"] = true;
      }
      quotes.push_back(quote);
    }
    steps.push_back(json{{"claim", step.claim}, {"citations", step.citations}, {"quotes", quotes}});
  }
  return json{{"id", s.instance.id},
              {"question", s.instance.question},
              {"answer", s.instance.answer},
              {"hop_count", s.instance.hop_count},
              {"documents", documents},
              {"chain", json{{"steps", steps}, {"answer", s.chain.answer}}},
              {"highlights", highlights}};
}

namespace {

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

Annotation ReviewStore::submit(Annotation annotation) {
  if (!by_id_.count(annotation.sample_id)) throw NotFound("unknown sample " + annotation.sample_id);
  if (annotation.faithful == annotation.error_category.has_value()) {
    throw UsageError(annotation.faithful ? "error_category given for a faithful sample"
                                         : "error_category required for an unfaithful sample");
  }
  if (annotation.timestamp.empty()) annotation.timestamp = utc_now();
  std::lock_guard lock(mu_);
  if (log_path_) {
    if (log_path_->has_parent_path()) std::filesystem::create_directories(log_path_->parent_path());
    std::ofstream out(*log_path_, std::ios::app | std::ios::binary);
    if (!out) throw DataError("cannot append to " + log_path_->string());
    out << annotation_to_json(annotation).dump() << '\n';
    out.flush();
    if (!out) throw DataError("write failed: " + log_path_->string());
  }
  log_.push_back(annotation);
  return annotation;
}

std::vector<Annotation> ReviewStore::annotations() const {
  std::lock_guard lock(mu_);
  return log_;
}

AssessmentSummary ReviewStore::summary() const {
  std::map<std::string, int> hop_of;
  for (const Sample& s : samples_) hop_of[s.instance.id] = s.instance.hop_count;
  return summarize_annotations(annotations(), hop_of);
}

namespace {

json error_body(const std::string& message) { return json{{"error", message}}; }

std::size_t parse_count(const std::string& value, const char* name) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(value, &pos);
    if (pos != value.size() || v < 0) throw std::invalid_argument(name);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw UsageError(std::string("bad ") + name + ": " + value);
  }
}

}  // namespace

ApiResponse handle_review_request(ReviewStore& store, const ApiRequest& request) {
  static const std::string kSamples = "/samples/";
  try {
    if (request.method == "GET" && request.path == "/samples") {
      SampleFilter f;
      auto q = [&](const char* key) -> std::optional<std::string> {
        auto it = request.query.find(key);
        if (it == request.query.end() || it->second.empty()) return std::nullopt;
        return it->second;
      };
      if (auto v = q("hop")) f.hop = static_cast<int>(parse_count(*v, "hop"));
      f.status = q("status");
      f.annotator = q("annotator");
      if (auto v = q("offset")) f.offset = parse_count(*v, "offset");
      if (auto v = q("limit")) f.limit = parse_count(*v, "limit");
      return {200, store.list(f)};
    }
    if (request.method == "GET" && request.path.rfind(kSamples, 0) == 0 &&
        request.path.size() > kSamples.size()) {
      return {200, store.get(request.path.substr(kSamples.size()))};
    }
    if (request.method == "POST" && request.path == "/annotations") {
      json body = json::parse(request.body, nullptr, false);
      if (body.is_discarded()) return {400, error_body("body is not JSON")};
      Annotation stored = store.submit(annotation_from_json(body));
      return {201, json{{"status", "stored"}, {"annotation", annotation_to_json(stored)}}};
    }
    if (request.method == "GET" && request.path == "/summary") {
      try {
        return {200, summary_to_json(store.summary())};
      } catch (const NotFound&) {
        throw;
      } catch (const DataError& e) {
        return {409, error_body(e.what())};
      }
    }
    return {404, error_body("no route for " + request.method + " " + request.path)};
  } catch (const NotFound& e) {
    return {404, error_body(e.what())};
  } catch (const UsageError& e) {
    return {400, error_body(e.what())};
  } catch (const DataError& e) {
    return {500, error_body(e.what())};
  }
}

struct ReviewServer::Impl {
  ReviewStore& store;
  httplib::Server server;
  explicit Impl(ReviewStore& s) : store(s) {}
};

ReviewServer::ReviewServer(ReviewStore& store, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(store)) {
  auto adapt = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query[k] = v;
    r.body = req.body;
    ApiResponse out = handle_review_request(impl_->store, r);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  impl_->server.Get("/samples", adapt);
  impl_->server.Get(R"(/samples/.+)", adapt);
  impl_->server.Post("/annotations", adapt);
  impl_->server.Get("/summary", adapt);
  if (static_dir) {
    if (!impl_->server.set_mount_point("/", static_dir->string())) {
      throw UsageError("cannot serve static files from " + static_dir->string());
    }
  }
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string& host, int port) {
  if (port == 0) {
    int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw TransportError("cannot bind " + host, false);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw TransportError("cannot bind " + host + ":" + std::to_string(port), false);
  }
  return port;
}

void ReviewServer::listen() { impl_->server.listen_after_bind(); }

void ReviewServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace attribqa
