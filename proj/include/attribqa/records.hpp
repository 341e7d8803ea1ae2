#pragma once

// JSON mappings for the line-delimited record formats.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "attribqa/chains.hpp"
#include "attribqa/corpus.hpp"
#include "attribqa/curation.hpp"
#include "attribqa/metrics.hpp"

namespace attribqa {

using json = nlohmann::json;

void to_json(json& j, const Document& d);
void to_json(json& j, const QAInstance& q);
void to_json(json& j, const Quote& q);
void to_json(json& j, const ReasoningStep& s);
void to_json(json& j, const AttributionChain& c);
void to_json(json& j, const CurationVerdict& v);
void to_json(json& j, const CurationReport& r);
void to_json(json& j, const CorpusStats& s);
void to_json(json& j, const ScoredPrediction& p);
void to_json(json& j, const TrialMeans& t);
void to_json(json& j, const MetricReport& r);
void to_json(json& j, const CorrelationResult& r);

// Internal-format instance. Throws DataError("missing field: <name>").
QAInstance instance_from_json(const json& j);
AttributionChain chain_from_json(const json& j);
CurationReport curation_report_from_json(const json& j);

// `{id, steps, answer, raw}`.
json chain_record(std::string_view id, const AttributionChain& chain);

// Sample record: internal instance fields plus a `chain` object.
json sample_to_json(const Sample& s);
Sample sample_from_json(const json& j);

// Line-delimited JSON. Blank lines are skipped; errors name the line.
std::vector<json> read_jsonl(const std::filesystem::path& path);
std::vector<json> parse_jsonl(std::string_view content);
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records);
std::string dump_jsonl(const std::vector<json>& records);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

std::vector<Sample> load_samples(const std::filesystem::path& path);
void write_samples(const std::filesystem::path& path, const std::vector<Sample>& samples);

}  // namespace attribqa
