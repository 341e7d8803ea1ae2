#include "attribqa/llmio.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <future>
#include <thread>

#include <httplib.h>

#include "attribqa/error.hpp"
#include "attribqa/records.hpp"
#include "attribqa/text.hpp"

namespace attribqa {

void validate_request(const CompletionRequest& request) {
  if (request.temperature < 0.0) throw UsageError("temperature must be >= 0");
  if (request.turns.empty()) throw UsageError("request needs at least one user turn");
  for (std::size_t i = 0; i < request.turns.size(); ++i) {
    const char* expected = i % 2 == 0 ? "user" : "assistant";
    if (request.turns[i].role != expected) {
      throw UsageError("turn " + std::to_string(i + 1) + " should have role " + expected);
    }
  }
  if (request.turns.back().role != "user") throw UsageError("last turn must be a user turn");
}

nlohmann::json request_to_json(const CompletionRequest& request) {
  json turns = json::array();
  for (const Turn& t : request.turns) turns.push_back(json{{"role", t.role}, {"text", t.text}});
  return json{{"model_name", request.model_name},
              {"system", request.system},
              {"turns", turns},
              {"temperature", request.temperature},
              {"max_output_tokens", request.max_output_tokens}};
}

CompletionRequest request_from_json(const nlohmann::json& j) {
  CompletionRequest r;
  r.model_name = j.at("model_name").get<std::string>();
  r.system = j.at("system").get<std::string>();
  for (const json& t : j.at("turns")) {
    r.turns.push_back(Turn{t.at("role").get<std::string>(), t.at("text").get<std::string>()});
  }
  r.temperature = j.at("temperature").get<double>();
  r.max_output_tokens = j.at("max_output_tokens").get<std::size_t>();
  return r;
}

std::string canonical_serialization(const CompletionRequest& request) {
  // nlohmann::json objects keep keys sorted.
  return request_to_json(request).dump(-1, ' ', false, json::error_handler_t::strict);
}

std::string fingerprint(const CompletionRequest& request) {
  const std::string data = canonical_serialization(request);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

CassetteMode parse_cassette_mode(std::string_view name) {
  std::string n = text::to_lower_ascii(name);
  if (n == "record") return CassetteMode::record;
  if (n == "replay") return CassetteMode::replay;
  if (n == "passthrough") return CassetteMode::passthrough;
  throw UsageError("unknown cassette mode: " + std::string(name));
}

std::string_view to_string(CassetteMode mode) {
  switch (mode) {
    case CassetteMode::record: return "record";
    case CassetteMode::replay: return "replay";
    case CassetteMode::passthrough: return "passthrough";
  }
  return "?";
}

Cassette::Cassette(CassetteMode mode, std::optional<std::filesystem::path> path)
    : mode_(mode), path_(std::move(path)) {
  if (mode_ == CassetteMode::replay && !path_) throw UsageError("replay needs a cassette file");
  if (path_ && std::filesystem::exists(*path_)) {
    for (const json& row : read_jsonl(*path_)) {
      entries_[row.at("fingerprint").get<std::string>()] = row.at("response").get<std::string>();
    }
  } else if (mode_ == CassetteMode::replay) {
    throw DataError("cassette file not found: " + path_->string());
  }
}

std::optional<std::string> Cassette::lookup(const std::string& fp) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(fp);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void Cassette::store(const CompletionRequest& request, const std::string& fp,
                     const std::string& response) {
  std::unique_lock lock(mutex_);
  if (!entries_.emplace(fp, response).second) return;
  if (!path_) return;
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  json row{{"fingerprint", fp},
           {"request", request_to_json(request)},
           {"response", response},
           {"recorded_at", stamp}};
  if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
  std::ofstream out(*path_, std::ios::app | std::ios::binary);
  out << row.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  if (!out) throw DataError("cannot append to cassette " + path_->string());
}

std::size_t Cassette::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

EndpointConfig EndpointConfig::from_environment() {
  EndpointConfig c;
  if (const char* v = std::getenv("ATTRIBQA_ENDPOINT")) c.url = v;
  if (const char* v = std::getenv("ATTRIBQA_API_KEY")) c.api_key = v;
  return c;
}

HttpChatBackend::HttpChatBackend(EndpointConfig config) : config_(std::move(config)) {
  const std::string& url = config_.url;
  std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw UsageError("endpoint URL needs a scheme: " + url);
  std::size_t path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/v1/chat/completions" : url.substr(path_start);
}

nlohmann::json HttpChatBackend::request_body(const CompletionRequest& request) {
  json messages = json::array();
  if (!request.system.empty()) messages.push_back(json{{"role", "system"}, {"content", request.system}});
  for (const Turn& t : request.turns) messages.push_back(json{{"role", t.role}, {"content", t.text}});
  return json{{"model", request.model_name},
              {"messages", messages},
              {"temperature", request.temperature},
              {"max_tokens", request.max_output_tokens}};
}

std::string HttpChatBackend::send(const CompletionRequest& request) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = client.Post(path_, headers, request_body(request).dump(), "application/json");
  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500) {
    throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw TransportError("endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body,
                         false);
  }
  try {
    json body = json::parse(res->body);
    return body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed completion response: ") + e.what(), false);
  }
}

void RateLimiter::acquire() {
  if (min_interval_.count() <= 0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + min_interval_;
  }
  std::this_thread::sleep_until(slot);
}

ModelClient::ModelClient(std::shared_ptr<ChatBackend> backend, std::shared_ptr<Cassette> cassette,
                         RetryPolicy retry, std::chrono::milliseconds min_interval,
                         std::size_t max_in_flight)
    : backend_(std::move(backend)),
      cassette_(std::move(cassette)),
      retry_(retry),
      limiter_(min_interval),
      max_in_flight_(std::max<std::size_t>(1, max_in_flight)) {
  if (!cassette_) cassette_ = std::make_shared<Cassette>(CassetteMode::passthrough);
  if (!backend_ && cassette_->mode() != CassetteMode::replay) {
    throw UsageError("a model endpoint is required unless replaying a cassette");
  }
}

std::string ModelClient::call_with_retries(const CompletionRequest& request) {
  auto delay = retry_.initial_delay;
  for (int attempt = 1;; ++attempt) {
    try {
      limiter_.acquire();
      ++backend_calls_;
      return backend_->send(request);
    } catch (const TransportError& e) {
      if (!e.transient() || attempt >= retry_.max_attempts) {
        throw TransportError("giving up after " + std::to_string(attempt) + " attempt(s): " +
                                 e.what(),
                             e.transient());
      }
    }
    std::this_thread::sleep_for(delay);
    delay = std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(delay.count()) * retry_.multiplier));
  }
}

std::string ModelClient::complete(const CompletionRequest& request) {
  validate_request(request);
  const std::string fp = fingerprint(request);
  switch (cassette_->mode()) {
    case CassetteMode::replay: {
      auto hit = cassette_->lookup(fp);
      if (!hit) throw CassetteMiss(fp);
      return *hit;
    }
    case CassetteMode::record: {
      if (auto hit = cassette_->lookup(fp)) return *hit;
      std::string response = call_with_retries(request);
      cassette_->store(request, fp, response);
      return response;
    }
    case CassetteMode::passthrough:
      return call_with_retries(request);
  }
  return {};
}

std::vector<std::string> ModelClient::complete_all(const std::vector<CompletionRequest>& requests) {
  std::vector<std::string> out(requests.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      std::size_t i = next++;
      if (i >= requests.size()) return;
      try {
        out[i] = complete(requests[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = requests.size();
        return;
      }
    }
  };
  const std::size_t n = std::min(max_in_flight_, requests.size());
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<ModelClient::Outcome> ModelClient::complete_each(
    const std::vector<CompletionRequest>& requests) {
  std::vector<Outcome> out(requests.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) {
      try {
        out[i].response = complete(requests[i]);
      } catch (...) {
        out[i].error = std::current_exception();
      }
    }
  };
  const std::size_t n = std::min(max_in_flight_, requests.size());
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return out;
}

}  // namespace attribqa
