// JSON-in, JSON-out bindings; the Python package converts to and from dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "attribqa/chains.hpp"
#include "attribqa/cli.hpp"
#include "attribqa/curation.hpp"
#include "attribqa/error.hpp"
#include "attribqa/llmio.hpp"
#include "attribqa/metrics.hpp"
#include "attribqa/prompting.hpp"
#include "attribqa/records.hpp"
#include "attribqa/taskgen.hpp"

namespace py = pybind11;
using namespace attribqa;

namespace {

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("invalid JSON argument: ") + e.what());
  }
}

std::string parse_chain_json(const std::string& text, const std::string& mode) {
  return json(parse_chain(text, parse_mode(mode))).dump();
}

std::string render_chain_json(const std::string& chain, const std::string& mode) {
  return render_chain(chain_from_json(parse(chain)), parse_mode(mode));
}

std::string curate_json(const std::string& samples_json) {
  std::vector<Sample> samples;
  for (const json& j : parse(samples_json)) samples.push_back(sample_from_json(j));
  CurationResult r = curate(samples);
  json kept = json::array();
  for (const Sample& s : r.kept) kept.push_back(sample_to_json(s));
  return json{{"kept", kept}, {"verdicts", r.verdicts}, {"report", r.report}}.dump();
}

std::string apply_noise_json(const std::string& instance, int ratio, std::uint64_t seed) {
  return json(apply_noise(instance_from_json(parse(instance)), NoiseSpec{ratio, seed})).dump();
}

std::string build_prompt_json(const std::string& instance, const std::string& mode,
                              const std::string& demos_json, std::size_t budget) {
  std::vector<Demonstration> demos;
  for (const json& d : parse(demos_json)) {
    demos.push_back(Demonstration{instance_from_json(d.at("instance")), d.at("target").get<std::string>()});
  }
  PromptBundle b = build_prompt(instance_from_json(parse(instance)), parse_mode(mode), demos, budget);
  return json{{"instruction", b.system_or_instruction},
              {"turns", b.turns},
              {"final_user", b.final_user},
              {"demos_kept", b.demos_kept},
              {"estimated_tokens", b.estimated_tokens}}
      .dump();
}

std::string correlation_json(const std::vector<double>& xs, const std::vector<double>& ys,
                             const std::string& method, std::size_t permutations, std::uint64_t seed) {
  CorrelationMethod m;
  if (method == "pearson") {
    m = CorrelationMethod::pearson;
  } else if (method == "spearman") {
    m = CorrelationMethod::spearman;
  } else if (method == "kendall") {
    m = CorrelationMethod::kendall;
  } else {
    throw UsageError("unknown correlation method: " + method);
  }
  return json(correlation(xs, ys, m, {permutations, seed})).dump();
}

std::string fingerprint_json(const std::string& request) {
  return fingerprint(request_from_json(parse(request)));
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = cli::run(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "attribqa core bindings";

  auto data_error = py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", data_error.ptr());
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);

  m.def("parse_chain", &parse_chain_json, py::arg("text"), py::arg("mode"));
  m.def("render_chain", &render_chain_json, py::arg("chain"), py::arg("mode"));
  m.def("extract_answer", [](const std::string& t) { return extract_answer(t); }, py::arg("text"));
  m.def("normalize_answer", [](const std::string& t) { return normalize_answer(t); }, py::arg("text"));
  m.def("exact_match", [](const std::string& p, const std::vector<std::string>& g) { return exact_match(p, g); },
        py::arg("prediction"), py::arg("golds"));
  m.def("f1_score", [](const std::string& p, const std::vector<std::string>& g) { return f1_score(p, g); },
        py::arg("prediction"), py::arg("golds"));
  m.def(
      "citation_scores",
      [](const std::vector<int>& predicted, const std::set<int>& gold) {
        CitationScores s = citation_scores(predicted, gold);
        return py::make_tuple(s.precision, s.recall);
      },
      py::arg("predicted"), py::arg("gold"));
  m.def("correlation", &correlation_json, py::arg("xs"), py::arg("ys"), py::arg("method"),
        py::arg("permutations") = 10000, py::arg("seed") = 0);
  m.def("curate", &curate_json, py::arg("samples"));
  m.def("apply_noise", &apply_noise_json, py::arg("instance"), py::arg("ratio"), py::arg("seed"));
  m.def("build_prompt", &build_prompt_json, py::arg("instance"), py::arg("mode"), py::arg("demos"),
        py::arg("budget"));
  m.def("instruction", [](const std::string& mode) { return build_instruction(parse_mode(mode)); },
        py::arg("mode"));
  m.def("fingerprint", &fingerprint_json, py::arg("request"));
  m.def("run_cli", &run_cli, py::arg("args"));
}
