#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace attribqa {

struct Turn {
  std::string role;  // "user" or "assistant"
  std::string text;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct CompletionRequest {
  std::string model_name;
  std::string system;
  std::vector<Turn> turns;
  double temperature = 0.0;
  std::size_t max_output_tokens = 512;

  friend bool operator==(const CompletionRequest&, const CompletionRequest&) = default;
};

// Throws UsageError unless turns alternate user/assistant, starting and
// ending with a user turn, and temperature >= 0.
void validate_request(const CompletionRequest& request);

// Sorted-key compact JSON; texts are kept verbatim.
std::string canonical_serialization(const CompletionRequest& request);
nlohmann::json request_to_json(const CompletionRequest& request);
CompletionRequest request_from_json(const nlohmann::json& j);

// Hex SHA-256 of the canonical serialization.
std::string fingerprint(const CompletionRequest& request);

enum class CassetteMode { record, replay, passthrough };
CassetteMode parse_cassette_mode(std::string_view name);
std::string_view to_string(CassetteMode mode);

// Map fingerprint -> response text backed by a line-delimited file of
// `{fingerprint, request, response, recorded_at}`. Record mode appends;
// writes serialize through one lock.
class Cassette {
 public:
  explicit Cassette(CassetteMode mode, std::optional<std::filesystem::path> path = std::nullopt);

  CassetteMode mode() const noexcept { return mode_; }
  std::optional<std::string> lookup(const std::string& fingerprint) const;
  void store(const CompletionRequest& request, const std::string& fingerprint,
             const std::string& response);
  std::size_t size() const;

 private:
  CassetteMode mode_;
  std::optional<std::filesystem::path> path_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::string> entries_;
};

// One round trip to a model. Transient failures throw TransportError.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string send(const CompletionRequest& request) = 0;
};

struct EndpointConfig {
  std::string url;  // e.g. http://localhost:8000/v1/chat/completions
  std::string api_key;
  std::chrono::seconds timeout{120};

  // ATTRIBQA_ENDPOINT / ATTRIBQA_API_KEY.
  static EndpointConfig from_environment();
};

// OpenAI-style chat-completions endpoint.
class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(EndpointConfig config);
  std::string send(const CompletionRequest& request) override;

  static nlohmann::json request_body(const CompletionRequest& request);

 private:
  EndpointConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_delay{500};
  double multiplier = 2.0;
};

// Spaces consecutive backend calls at least `min_interval` apart.
class RateLimiter {
 public:
  explicit RateLimiter(std::chrono::milliseconds min_interval = std::chrono::milliseconds{0})
      : min_interval_(min_interval) {}
  void acquire();

 private:
  std::chrono::milliseconds min_interval_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point next_{};
};

class ModelClient {
 public:
  // `backend` may be null in replay mode.
  ModelClient(std::shared_ptr<ChatBackend> backend, std::shared_ptr<Cassette> cassette,
              RetryPolicy retry = {}, std::chrono::milliseconds min_interval = {},
              std::size_t max_in_flight = 4);

  // Replay: stored response or CassetteMiss. Record: backend call, then
  // persist. Passthrough: backend call only.
  std::string complete(const CompletionRequest& request);

  // Bounded-parallel; results in request order.
  std::vector<std::string> complete_all(const std::vector<CompletionRequest>& requests);

  // Like complete_all but never stops early: each slot holds a response or
  // the exception that request raised.
  struct Outcome {
    std::optional<std::string> response;
    std::exception_ptr error;
  };
  std::vector<Outcome> complete_each(const std::vector<CompletionRequest>& requests);

  std::size_t backend_calls() const noexcept { return backend_calls_; }

 private:
  std::string call_with_retries(const CompletionRequest& request);

  std::shared_ptr<ChatBackend> backend_;
  std::shared_ptr<Cassette> cassette_;
  RetryPolicy retry_;
  RateLimiter limiter_;
  std::size_t max_in_flight_;
  std::atomic<std::size_t> backend_calls_{0};
};

}  // namespace attribqa
