#include <doctest.h>

#include <sstream>

#include "attribqa/cli.hpp"
#include "attribqa/records.hpp"
#include "fake_endpoint.hpp"
#include "fixtures.hpp"
#include "scripted_model.hpp"

using namespace attribqa;
using namespace attribqa::testing;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run attribqa_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fx(const char* name) { return fixture(name).string(); }

}  // namespace

TEST_CASE("usage errors exit 1") {
  auto r = attribqa_cli({"frobnicate"});
  CHECK(r.code == cli::kUsage);
  CHECK(r.err.find("generate") != std::string::npos);
  CHECK(attribqa_cli({}).code == cli::kUsage);
  CHECK(attribqa_cli({"evaluate", "--corpus", fx("eval_corpus.jsonl")}).code == cli::kUsage);
  auto help = attribqa_cli({"sweep-noise", "--help"});
  CHECK(help.code == cli::kOk);
  CHECK(help.out.find("--ratios") != std::string::npos);
  auto dir = scratch_dir("cli-usage");
  CHECK(attribqa_cli({"evaluate", "--corpus", fx("eval_corpus.jsonl"), "--demos", fx("demo_pool.jsonl"),
                      "--cassette", "replay", "--out", (dir / "r.json").string()})
            .code == cli::kUsage);
  CHECK(attribqa_cli({"curate", "--out", (dir / "k.jsonl").string()}).code == cli::kUsage);
}

TEST_CASE("data errors exit 2") {
  auto dir = scratch_dir("cli-data");
  write_text_file(dir / "bad.jsonl", "{\"id\": \"x\"}\n");
  auto r = attribqa_cli({"stats", "--corpus", (dir / "bad.jsonl").string()});
  CHECK(r.code == cli::kData);
  CHECK(r.err.find("missing field") != std::string::npos);
}

TEST_CASE("curate, stats and build-tasks") {
  auto dir = scratch_dir("cli-pipeline");
  const auto kept = dir / "kept.jsonl";
  auto r = attribqa_cli({"curate", "--in", fx("eval_annotations.jsonl"), "--corpus", fx("eval_corpus.jsonl"),
                         "--out", kept.string(), "--report", (dir / "cur.json").string(), "--verdicts",
                         (dir / "v.jsonl").string()});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("kept 5 of 5") != std::string::npos);
  CHECK(load_samples(kept).size() == 5);
  CHECK(read_json_file(dir / "cur.json").at("total_in") == 5);
  CHECK(read_jsonl(dir / "v.jsonl").size() == 5);
  CHECK_FALSE(std::filesystem::exists(dir / "kept.jsonl.tmp"));

  write_text_file(dir / "raw.jsonl", "{\"id\": \"2hop1__randy_conrads\", \"raw\": \"no marker\"}\n");
  r = attribqa_cli({"curate", "--in", (dir / "raw.jsonl").string(), "--corpus", fx("eval_corpus.jsonl"), "--out",
                    (dir / "k2.jsonl").string(), "--verdicts", (dir / "v2.jsonl").string()});
  CHECK(r.code == cli::kOk);
  auto v = read_jsonl(dir / "v2.jsonl");
  CHECK(v[0].dump().find("unparsable output") != std::string::npos);

  r = attribqa_cli({"stats", "--samples", kept.string()});
  CHECK(r.code == cli::kOk);
  CHECK(json::parse(r.out).at("total_samples") == 5);

  r = attribqa_cli({"build-tasks", "--samples", kept.string(), "--out", (dir / "train.jsonl").string()});
  CHECK(r.code == cli::kOk);
  CHECK(read_jsonl(dir / "train.jsonl").size() == 35);
  r = attribqa_cli({"build-tasks", "--samples", kept.string(), "--tasks", "ap", "--no-augment", "none", "--copies",
                    "3", "--out", (dir / "ap.jsonl").string()});
  CHECK(read_jsonl(dir / "ap.jsonl").size() == 15);
}

TEST_CASE("record against an endpoint, then replay offline") {
  auto dir = scratch_dir("cli-cassette");
  auto model = std::make_shared<ScriptedModel>(eval_samples());
  const auto cassette = (dir / "c.jsonl").string();
  std::vector<std::string> common{"evaluate", "--corpus", fx("eval_corpus.jsonl"), "--demos", fx("demo_pool.jsonl"),
                                  "--mode", "coq", "--seeds", "1,2", "--cassette-file", cassette};
  {
    FakeEndpoint endpoint(model);
    auto args = common;
    for (std::string a : {"--cassette", "record", "--endpoint"}) args.push_back(a);
    args.push_back(endpoint.url());
    args.push_back("--out");
    args.push_back((dir / "rec.json").string());
    auto r = attribqa_cli(args);
    REQUIRE(r.code == cli::kOk);
    CHECK(r.out.find("evaluate coq: EM ") != std::string::npos);
  }
  CHECK(model->calls == 10);
  CHECK(read_jsonl(cassette).size() == 10);

  auto args = common;
  args.insert(args.end(), {"--cassette", "replay", "--out", (dir / "replay.json").string()});
  CHECK(attribqa_cli(args).code == cli::kOk);
  CHECK(read_text_file(dir / "rec.json") == read_text_file(dir / "replay.json"));
  CHECK(model->calls == 10);

  args = common;
  args.insert(args.end(), {"--cassette", "replay", "--seeds", "9", "--out", (dir / "miss.json").string()});
  auto miss = attribqa_cli(args);
  CHECK(miss.code == cli::kTransport);
  CHECK_FALSE(std::filesystem::exists(dir / "miss.json"));
}

TEST_CASE("generate writes raw annotations and a partial marker on failure") {
  auto dir = scratch_dir("cli-generate");
  FakeEndpoint endpoint(std::make_shared<ScriptedModel>(eval_samples()));
  auto r = attribqa_cli({"generate", "--corpus", fx("eval_corpus.jsonl"), "--demos", fx("demo_pool.jsonl"),
                         "--shots", "2", "--endpoint", endpoint.url(), "--out", (dir / "raw.jsonl").string()});
  REQUIRE(r.code == cli::kOk);
  auto raw = read_jsonl(dir / "raw.jsonl");
  CHECK(raw.size() == 5);
  CHECK(raw[0].at("mode") == "coq");
  CHECK_FALSE(std::filesystem::exists(dir / "raw.jsonl.partial"));

  r = attribqa_cli({"generate", "--corpus", fx("eval_corpus.jsonl"), "--demos", fx("demo_pool.jsonl"), "--endpoint",
                    "http://127.0.0.1:1/v1/chat/completions", "--retries", "1", "--out",
                    (dir / "down.jsonl").string()});
  CHECK(r.code == cli::kTransport);
  CHECK(read_jsonl(dir / "down.jsonl.partial").size() == 5);
}

TEST_CASE("config file supplies options") {
  auto dir = scratch_dir("cli-config");
  write_text_file(dir / "c.toml", "[stats]\nsamples = \"" + fx("eval_samples.jsonl") + "\"\n");
  auto r = attribqa_cli({"--config", (dir / "c.toml").string(), "stats"});
  CHECK(r.code == cli::kOk);
  CHECK(json::parse(r.out).at("total_samples") == 5);
}
