#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "attribqa/corpus.hpp"
#include "attribqa/curation.hpp"

namespace attribqa {

struct ReportInputs {
  std::optional<CurationReport> curation;
  std::optional<CorpusStats> stats;
  std::vector<nlohmann::json> runs;  // run files written by evaluate / sweep-noise
};

struct Report {
  std::string markdown;
  std::string citation_csv;  // trial-level EM and citation precision/recall
  std::string noise_curve_csv;  // EM per noise ratio
  nlohmann::json tables;
};

CorpusStats corpus_stats_from_json(const nlohmann::json& j);

// Renders from serialized artifacts only; nothing is rescored. Run files are
// pooled per dataset for the correlation table and per model x dataset x mode
// for the range table.
Report render_report(const ReportInputs& inputs);

// Writes report.md, report.json, citation_vs_em.csv and noise_curve.csv.
void write_report(const Report& report, const std::filesystem::path& directory);

}  // namespace attribqa
