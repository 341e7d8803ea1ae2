#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "attribqa/curation.hpp"
#include "attribqa/error.hpp"

namespace attribqa {

enum class ErrorCategory { DisorderedSteps, MissingSteps, IncorrectSteps };
std::string_view to_string(ErrorCategory c);
ErrorCategory parse_error_category(std::string_view name);

struct Annotation {
  std::string sample_id;
  bool faithful = true;
  std::optional<ErrorCategory> error_category;
  bool shortcut = false;
  std::string annotator_id;
  std::string timestamp;
};

nlohmann::json annotation_to_json(const Annotation& a);
// Throws UsageError on a malformed record or when the category rule
// (present iff unfaithful) is broken.
Annotation annotation_from_json(const nlohmann::json& j);

struct NotFound : DataError {
  using DataError::DataError;
};

struct SampleFilter {
  std::optional<int> hop;
  std::optional<std::string> status;  // "annotated" or "unannotated"
  std::optional<std::string> annotator;
  std::size_t offset = 0;
  std::size_t limit = 50;
};

struct AssessmentSummary {
  std::size_t annotated = 0;
  double unfaithful_fraction = 0.0;
  std::map<ErrorCategory, double> category_split;  // fractions of unfaithful
  double shortcut_fraction = 0.0;
  std::map<int, double> per_hop_unfaithful;
};

nlohmann::json summary_to_json(const AssessmentSummary& s);

// Latest annotation per sample, in log order. Throws DataError when empty.
AssessmentSummary summarize_annotations(const std::vector<Annotation>& log,
                                        const std::map<std::string, int>& hop_of);

class ReviewStore {
 public:
  // Loads the existing annotation log if present; new annotations are
  // appended to it.
  ReviewStore(std::vector<Sample> samples, std::optional<std::filesystem::path> log_path);

  nlohmann::json list(const SampleFilter& filter) const;
  nlohmann::json get(const std::string& id) const;  // throws NotFound
  Annotation submit(Annotation annotation);
  AssessmentSummary summary() const;
  std::vector<Annotation> annotations() const;

 private:
  bool annotated(const std::string& id, const std::optional<std::string>& annotator) const;

  std::vector<Sample> samples_;  // sorted by id
  std::map<std::string, std::size_t> by_id_;
  std::optional<std::filesystem::path> log_path_;
  mutable std::mutex mu_;
  std::vector<Annotation> log_;
};

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// Routes: GET /samples, GET /samples/{id}, POST /annotations, GET /summary.
ApiResponse handle_review_request(ReviewStore& store, const ApiRequest& request);

class ReviewServer {
 public:
  explicit ReviewServer(ReviewStore& store, std::optional<std::filesystem::path> static_dir = {});
  ~ReviewServer();
  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  // Binds (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace attribqa
