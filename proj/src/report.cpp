#include "attribqa/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "attribqa/error.hpp"
#include "attribqa/evaluation.hpp"
#include "attribqa/records.hpp"
#include "attribqa/text.hpp"

namespace attribqa {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string percent(double fraction) { return fixed(100.0 * fraction, 2) + "%"; }

std::optional<double> optional_number(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) return std::nullopt;
  return it->get<double>();
}

std::string csv_number(const std::optional<double>& v) {
  return v ? fixed(*v, 6) : std::string();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct RunView {
  std::string kind;
  std::string model;
  std::string dataset;
  std::string mode;
  const json* body = nullptr;
};

RunView view_run(const json& run, std::size_t n) {
  const std::string where = "run file " + std::to_string(n + 1) + ": ";
  if (!run.is_object()) throw DataError(where + "not an object");
  for (const char* key : {"kind", "labels", "trials"}) {
    if (!run.contains(key)) throw DataError(where + "missing field: " + key);
  }
  const json& labels = run.at("labels");
  for (const char* key : {"model", "dataset", "mode"}) {
    if (!labels.contains(key) || !labels.at(key).is_string()) {
      throw DataError(where + "missing field: labels." + key);
    }
  }
  RunView v;
  v.kind = run.at("kind").get<std::string>();
  if (v.kind != "evaluate" && v.kind != "sweep-noise") throw DataError(where + "unknown kind " + v.kind);
  v.model = labels.at("model").get<std::string>();
  v.dataset = labels.at("dataset").get<std::string>();
  v.mode = labels.at("mode").get<std::string>();
  v.body = &run;
  return v;
}

TrialMeans means_from_json(const json& j) {
  TrialMeans t;
  t.em = j.at("em").get<double>();
  t.f1 = j.at("f1").get<double>();
  t.citation_precision = optional_number(j, "citation_precision");
  t.citation_recall = optional_number(j, "citation_recall");
  return t;
}

template <class T>
void push_unique(std::vector<T>& v, const T& x) {
  if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

json cell_json(const CorrelationCell& c) {
  if (!c.result) return json{{"error", c.error}};
  return json{{"coefficient", c.result->coefficient},
              {"p_value", c.result->p_value},
              {"significant", c.result->p_value < 0.05}};
}

std::string cell_text(const CorrelationCell& c) {
  if (!c.result) return "n/a";
  return fixed(c.result->coefficient, 3) + (c.result->p_value < 0.05 ? "*" : "");
}

const std::vector<std::string>& stats_labels() {
  static const std::vector<std::string> labels{
      "#Max Words per Sample",  "#Mean Words per Sample", "#Averaged Words per CoT Step",
      "#Averaged Words per Quote", "#Total Samples",      "2-Hop Samples [%]",
      "3-Hop Samples [%]",      "4-Hop Samples [%]"};
  return labels;
}

}  // namespace

CorpusStats corpus_stats_from_json(const json& j) {
  CorpusStats s;
  try {
    s.total_samples = j.at("total_samples").get<std::size_t>();
    s.max_words_per_sample = j.at("max_words_per_sample").get<std::size_t>();
    s.mean_words_per_sample = j.at("mean_words_per_sample").get<double>();
    for (const auto& [k, v] : j.at("hop_distribution").items()) {
      s.hop_distribution[std::stoi(k)] = v.get<double>();
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("stats: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw DataError("stats: bad hop key");
  }
  s.mean_words_per_step = optional_number(j, "mean_words_per_step");
  s.mean_words_per_quote = optional_number(j, "mean_words_per_quote");
  s.word_count_basis = j.value("word_count_basis", std::string());
  return s;
}

Report render_report(const ReportInputs& inputs) {
  Report out;
  std::string md = "# Evaluation report\n";

  // Error incidence.
  json incidence_rows = json::array();
  md += "\n## Error incidence\n\n";
  if (inputs.curation) {
    const CurationReport& r = *inputs.curation;
    md += "Samples in: " + std::to_string(r.total_in) + ", kept: " + std::to_string(r.total_kept) +
          ", rejected: " + std::to_string(r.total_in - r.total_kept) + "\n\n";
  } else {
    md += "No curation report supplied.\n\n";
  }
  md += "| Error Type | Portion (any failure, of all samples) | Portion (first failure, of rejected) |\n";
  md += "|---|---:|---:|\n";
  for (FailureKind k : kAllFailureKinds) {
    std::optional<double> any, first;
    if (inputs.curation) {
      const auto& a = inputs.curation->incidence_any;
      const auto& f = inputs.curation->incidence_among_rejected;
      any = a.count(k) ? a.at(k) : 0.0;
      first = f.count(k) ? f.at(k) : 0.0;
    }
    md += "| " + std::string(display_name(k)) + " | " + (any ? percent(*any) : "n/a") + " | " +
          (first ? percent(*first) : "n/a") + " |\n";
    incidence_rows.push_back(json{{"error_type", std::string(display_name(k))},
                                  {"key", std::string(to_string(k))},
                                  {"any_failure", any ? json(*any) : json(nullptr)},
                                  {"first_failure", first ? json(*first) : json(nullptr)}});
  }
  json incidence{{"rows", incidence_rows}};
  if (inputs.curation) {
    incidence["total_in"] = inputs.curation->total_in;
    incidence["total_kept"] = inputs.curation->total_kept;
  }
  out.tables["error_incidence"] = incidence;

  // Dataset statistics.
  md += "\n## Dataset statistics\n\n| Entry | Value |\n|---|---:|\n";
  json stat_rows = json::array();
  std::vector<std::optional<std::string>> values(stats_labels().size());
  std::vector<json> raw(stats_labels().size(), json(nullptr));
  if (inputs.stats) {
    const CorpusStats& s = *inputs.stats;
    auto hop = [&](int h) { return s.hop_distribution.count(h) ? s.hop_distribution.at(h) : 0.0; };
    values = {std::to_string(s.max_words_per_sample),
              fixed(s.mean_words_per_sample, 2),
              s.mean_words_per_step ? std::optional(fixed(*s.mean_words_per_step, 2)) : std::nullopt,
              s.mean_words_per_quote ? std::optional(fixed(*s.mean_words_per_quote, 2)) : std::nullopt,
              std::to_string(s.total_samples),
              percent(hop(2)),
              percent(hop(3)),
              percent(hop(4))};
    raw = {json(s.max_words_per_sample),
           json(s.mean_words_per_sample),
           s.mean_words_per_step ? json(*s.mean_words_per_step) : json(nullptr),
           s.mean_words_per_quote ? json(*s.mean_words_per_quote) : json(nullptr),
           json(s.total_samples),
           json(hop(2)),
           json(hop(3)),
           json(hop(4))};
  }
  for (std::size_t i = 0; i < stats_labels().size(); ++i) {
    md += "| " + stats_labels()[i] + " | " + values[i].value_or("n/a") + " |\n";
    stat_rows.push_back(json{{"entry", stats_labels()[i]}, {"value", raw[i]}});
  }
  json stats{{"rows", stat_rows}};
  if (inputs.stats && !inputs.stats->word_count_basis.empty()) {
    md += "\nWords per sample count: " + inputs.stats->word_count_basis + "\n";
    stats["word_count_basis"] = inputs.stats->word_count_basis;
  }
  out.tables["dataset_statistics"] = stats;

  std::vector<RunView> runs;
  for (std::size_t i = 0; i < inputs.runs.size(); ++i) runs.push_back(view_run(inputs.runs[i], i));

  // Correlation of citation quality with EM, pooled per dataset.
  std::vector<std::string> datasets;
  for (const RunView& r : runs) push_unique(datasets, r.dataset);
  md += "\n## Citation quality vs. answer accuracy\n\n";
  md += "Trial-level correlation; * marks p < 0.05 (permutation test).\n\n";
  md += "| Entry | Pearson | Spearman | Kendall |\n|---|---:|---:|---:|\n";
  json sections = json::array();
  for (const std::string& dataset : datasets) {
    std::vector<TrialMeans> points;
    for (const RunView& r : runs) {
      if (r.dataset != dataset) continue;
      for (const json& t : r.body->at("trials")) points.push_back(means_from_json(t.at("means")));
    }
    std::vector<CorrelationRow> rows = correlation_table(points);
    if (rows.empty()) {
      for (const char* pair : {"EM vs. P", "EM vs. R"}) {
        CorrelationRow row;
        row.pair = pair;
        row.pearson.error = row.spearman.error = row.kendall.error = "no citation scores";
        rows.push_back(row);
      }
    }
    md += "| *" + dataset + "* | | | |\n";
    json section_rows = json::array();
    for (const CorrelationRow& row : rows) {
      md += "| " + row.pair + " | " + cell_text(row.pearson) + " | " + cell_text(row.spearman) +
            " | " + cell_text(row.kendall) + " |\n";
      section_rows.push_back(json{{"pair", row.pair},
                                  {"pearson", cell_json(row.pearson)},
                                  {"spearman", cell_json(row.spearman)},
                                  {"kendall", cell_json(row.kendall)}});
    }
    sections.push_back(json{{"dataset", dataset}, {"points", points.size()}, {"rows", section_rows}});
  }
  out.tables["correlation"] =
      json{{"methods", {"pearson", "spearman", "kendall"}}, {"sections", sections}};

  // EM range across noise ratios per model, dataset and mode.
  std::vector<std::string> models, range_datasets;
  std::map<std::string, double> ranges;  // model \t dataset \t mode
  for (const RunView& r : runs) {
    if (r.kind != "sweep-noise" || (r.mode != "cot" && r.mode != "coc")) continue;
    auto range = optional_number(*r.body, "performance_range");
    if (!range) continue;
    const std::string key = r.model + "\t" + r.dataset + "\t" + r.mode;
    if (ranges.count(key)) throw DataError("duplicate sweep for " + r.model + "/" + r.dataset + "/" + r.mode);
    ranges[key] = *range;
    push_unique(models, r.model);
    push_unique(range_datasets, r.dataset);
  }
  md += "\n## Robustness to noise\n\n";
  md += "EM range (percentage points) as the noise ratio varies; bold marks the smaller range.\n\n";
  md += "| Model |";
  std::string rule = "|---|";
  for (const std::string& d : range_datasets) {
    md += " " + d + " CoT | " + d + " CoC |";
    rule += "---:|---:|";
  }
  md += "\n" + rule + "\n";
  json range_rows = json::array();
  std::size_t compared = 0, coc_smaller = 0;
  for (const std::string& m : models) {
    md += "| " + m + " |";
    json cells = json::object();
    for (const std::string& d : range_datasets) {
      auto get = [&](const char* mode) -> std::optional<double> {
        auto it = ranges.find(m + "\t" + d + "\t" + mode);
        if (it == ranges.end()) return std::nullopt;
        return it->second;
      };
      auto cot = get("cot");
      auto coc = get("coc");
      bool bold_coc = false, bold_cot = false;
      if (cot && coc) {
        ++compared;
        bold_coc = *coc <= *cot;
        bold_cot = !bold_coc;
        if (bold_coc) ++coc_smaller;
      }
      auto show = [](const std::optional<double>& v, bool bold) {
        if (!v) return std::string("n/a");
        std::string s = fixed(100.0 * *v, 1);
        return bold ? "**" + s + "**" : s;
      };
      md += " " + show(cot, bold_cot) + " | " + show(coc, bold_coc) + " |";
      cells[d] = json{{"cot", cot ? json(*cot) : json(nullptr)},
                      {"coc", coc ? json(*coc) : json(nullptr)}};
    }
    md += "\n";
    range_rows.push_back(json{{"model", m}, {"cells", cells}});
  }
  if (compared > 0) {
    md += "\nCoC range is no larger than CoT in " + std::to_string(coc_smaller) + " of " +
          std::to_string(compared) + " cases.\n";
  }
  out.tables["performance_range"] =
      json{{"datasets", range_datasets}, {"modes", {"cot", "coc"}}, {"rows", range_rows}};

  // Plot series.
  out.citation_csv = "model,dataset,mode,kind,ratio,seed,em,f1,citation_precision,citation_recall\n";
  out.noise_curve_csv = "model,dataset,mode,ratio,mean_documents,em,f1,citation_precision,citation_recall\n";
  for (const RunView& r : runs) {
    const std::string prefix =
        csv_field(r.model) + "," + csv_field(r.dataset) + "," + csv_field(r.mode) + ",";
    for (const json& t : r.body->at("trials")) {
      TrialMeans m = means_from_json(t.at("means"));
      out.citation_csv += prefix + r.kind + "," + std::to_string(t.value("ratio", 100)) + "," +
                         std::to_string(t.value("seed", std::uint64_t{0})) + "," + fixed(m.em, 6) +
                         "," + fixed(m.f1, 6) + "," + csv_number(m.citation_precision) + "," +
                         csv_number(m.citation_recall) + "\n";
    }
    if (r.kind != "sweep-noise" || !r.body->contains("curve")) continue;
    for (const json& p : r.body->at("curve")) {
      const json& rep = p.at("report");
      out.noise_curve_csv += prefix + std::to_string(p.at("ratio").get<int>()) + "," +
                         fixed(p.value("mean_documents", 0.0), 6) + "," +
                         fixed(rep.at("mean_em").get<double>(), 6) + "," +
                         fixed(rep.at("mean_f1").get<double>(), 6) + "," +
                         csv_number(optional_number(rep, "mean_citation_precision")) + "," +
                         csv_number(optional_number(rep, "mean_citation_recall")) + "\n";
    }
  }

  out.markdown = md;
  return out;
}

void write_report(const Report& report, const std::filesystem::path& directory) {
  write_text_file(directory / "report.md", report.markdown);
  write_json_file(directory / "report.json", report.tables);
  write_text_file(directory / "citation_vs_em.csv", report.citation_csv);
  write_text_file(directory / "noise_curve.csv", report.noise_curve_csv);
}

}  // namespace attribqa
