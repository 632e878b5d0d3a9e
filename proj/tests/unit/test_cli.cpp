#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "retrace/pipeline.hpp"
#include "test_support.hpp"

using namespace retrace;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string mini(const std::string& rel) { return (testing::data_dir() / "mini" / rel).string(); }

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({"ingest", "--bogus"}).code == 2);
  CHECK(invoke({"no-such-command"}).code == 2);
}

TEST_CASE("report without periods names the missing stage") {
  testing::TempDir w;
  auto r = invoke({"-w", w.path().string(), "report"});
  CHECK(r.code == 1);
  CHECK(r.err.find("periods missing") != std::string::npos);
  CHECK(r.err.find("retrace segment") != std::string::npos);
}

TEST_CASE("config errors name the offending field") {
  testing::TempDir w;
  std::ofstream(w / "bad.json") << R"({"lda": {"k": 0, "colour": 1}})";
  auto r = invoke({"--config", (w / "bad.json").string(), "-w", w.path().string(), "segment"});
  CHECK(r.code == 1);
  CHECK(r.err.find("lda.colour") != std::string::npos);
}

TEST_CASE("config loading, relative paths and environment overrides") {
  auto cfg = cli::PipelineConfig::load(mini("pipeline.json"));
  CHECK(cfg.lda.k == 3);
  CHECK(cfg.sources.size() == 2);
  CHECK(cfg.metadata == testing::data_dir() / "mini/metadata.json");
  std::map<std::string, std::string> env{{"RETRACE_LDA_K", "5"}, {"RETRACE_LAMBDA", "0.6"}};
  cfg.apply_env([&](const char* name) -> const char* {
    auto it = env.find(name);
    return it == env.end() ? nullptr : it->second.c_str();
  });
  CHECK(cfg.lda.k == 5);
  CHECK(cfg.lambda == 0.6);
  env["RETRACE_LDA_K"] = "five";
  CHECK_THROWS_AS(cfg.apply_env([&](const char* name) -> const char* {
    auto it = env.find(name);
    return it == env.end() ? nullptr : it->second.c_str();
  }),
                  ValidationError);
}

TEST_CASE("mini pipeline end to end through the command line") {
  testing::TempDir w;
  std::vector<std::string> base{"--config", mini("pipeline.json"), "-w", w.path().string()};
  auto step = [&](std::vector<std::string> args) {
    args.insert(args.begin(), base.begin(), base.end());
    auto r = invoke(args);
    INFO(r.err);
    REQUIRE(r.code == 0);
    return r;
  };
  step({"ingest", "--input", mini("retractions.csv"), "--exclusions", mini("exclusions.json"), "--humanities-only"});
  auto rejects = read_json(w / "rejects.json");
  CHECK(rejects.dump().find("R7") != std::string::npos);

  step({"harvest"});
  auto citations = read_json(w / "citations.json");
  CHECK(citations["quarantine"].size() == 2);

  step({"affinity", "score"});
  step({"affinity", "filter"});
  auto audit = read_json(w / "affinity.json");
  std::map<std::string, int> totals;
  for (const auto& item : audit["items"]) totals[item["id"]] = item["score"]["total"];
  CHECK(totals == std::map<std::string, int>{{"R1", 2}, {"R2", 4}, {"R3", 2}, {"R4", 5}, {"R6", 0}});

  step({"segment"});
  step({"corpus", "build"});
  step({"topics", "fit"});
  step({"topics", "export"});
  step({"report", "--in-text", mini("intext.json"), "--svg", (w / "svg").string()});
  CHECK(std::filesystem::exists(w / "svg"));
  step({"export-vis"});
  auto manifest = read_json(w / "bundle/manifest.json");
  CHECK(manifest["artifacts"].size() == 5);
  CHECK(manifest["topics"]["status"] == "present");

  // A changed corpus invalidates the model reference.
  auto corpus = read_json(w / "corpus.json");
  corpus["documents"].erase(0);
  write_json(w / "corpus.json", corpus);
  auto stale = invoke({"--config", mini("pipeline.json"), "-w", w.path().string(), "topics", "export"});
  CHECK(stale.code == 1);
}

TEST_CASE("select-k on the two-block documents picks two") {
  testing::TempDir w;
  auto docs = (testing::data_dir() / "topics/two_block_documents.json").string();
  auto cfg = (testing::data_dir() / "topics/two_block_config.json").string();
  REQUIRE(invoke({"--config", cfg, "-w", w.path().string(), "corpus", "build", "--documents", docs}).code == 0);
  auto r = invoke({"--config", cfg, "-w", w.path().string(), "topics", "select-k", "--k", "2..6", "--seed", "7"});
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("chosen_k=2") != std::string::npos);
  CHECK(read_json(w / "coherence.json")["chosen_k"] == 2);
}

TEST_CASE("annotation export and import through the command line") {
  testing::TempDir w;
  std::vector<std::string> base{"--config", mini("pipeline.json"), "-w", w.path().string()};
  std::ofstream(w / "in.csv") << "citation_id,sentiment,intent,mentions_retraction,annotator\n"
                                 "it-002,negative,critiques,true,a1\n";
  auto args = base;
  for (const char* a : {"annotate", "import", "--csv"}) args.push_back(a);
  args.push_back((w / "in.csv").string());
  args.push_back("--in-text");
  args.push_back(mini("intext.json"));
  auto r = invoke(args);
  INFO(r.err);
  REQUIRE(r.code == 0);
  args = base;
  for (const char* a : {"annotate", "export", "--csv"}) args.push_back(a);
  args.push_back((w / "out.csv").string());
  args.push_back("--in-text");
  args.push_back(mini("intext.json"));
  REQUIRE(invoke(args).code == 0);
  CHECK(read_file(w / "out.csv").find("it-002") != std::string::npos);
}
