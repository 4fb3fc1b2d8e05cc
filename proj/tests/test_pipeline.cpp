#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include "fixtures.hpp"
#include "hgcml/binio.hpp"
#include "hgcml/config.hpp"
#include "hgcml/error.hpp"
#include "hgcml/pipeline.hpp"

namespace hgcml {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(HGCML_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, testing::read_file(log)};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Toy network files plus a config using all three metapaths.
fs::path toy_project(const std::string& name, const std::function<void(nlohmann::json&)>& edit = {}) {
  const auto dir = testing::scratch_dir(name);
  testing::write_toy_files(dir);
  nlohmann::json doc = nlohmann::json::parse(R"({
    "data": {"nodes": "nodes.tsv", "edges": "edges.tsv", "features": "features.tsv", "labels": "labels.tsv"},
    "schema": {"node_types": ["A", "P", "S", "C"],
               "relations": [{"name": "AP", "src": "A", "dst": "P"}, {"name": "PS", "src": "P", "dst": "S"},
                             {"name": "PC", "src": "P", "dst": "C"}],
               "target_type": "A"},
    "metapaths": [{"name": "APA", "relations": ["AP", "~AP"]},
                  {"name": "APSPA", "relations": ["AP", "PS", "~PS", "~AP"]},
                  {"name": "APCPA", "relations": ["AP", "PC", "~PC", "~AP"]}],
    "positives": {"k_t": 1, "k_s": 1},
    "model": {"dim": 4},
    "train": {"max_epochs": 5},
    "eval": {"probe_runs": 2, "kmeans_runs": 2, "train_frac": 0.5}
  })");
  if (edit) edit(doc);
  std::ofstream(dir / "config.json") << doc.dump(2);
  return dir;
}

TEST(Cli, PrepareCachesThreeViewsDeterministically) {
  const auto dir = toy_project("prepare");
  const auto r = run_cli("prepare --config " + (dir / "config.json").string(), dir / "log.txt");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto summary = lines_of(testing::read_file(dir / "run" / kSummaryFile));
  ASSERT_EQ(summary.size(), 3u);
  EXPECT_EQ(summary[0].substr(0, 8), "APA\t4\t1\t");
  for (const char* v : {"APA", "APSPA", "APCPA"}) EXPECT_TRUE(fs::exists(dir / "run" / "views" / (std::string(v) + ".tsv")));
  EXPECT_EQ(testing::read_file(dir / "run" / "views" / "APA.tsv"), "0\t1\n");
  const std::string first = testing::read_file(dir / "run" / kSummaryFile);
  ASSERT_EQ(run_cli("prepare --config " + (dir / "config.json").string(), dir / "log.txt").code, 0);
  EXPECT_EQ(testing::read_file(dir / "run" / kSummaryFile), first);
}

TEST(Cli, DataErrorsExitTwo) {
  const auto dir = toy_project("missing_features", [](nlohmann::json& d) { d["data"]["features"] = "absent.bin"; });
  const auto r = run_cli("prepare --config " + (dir / "config.json").string(), dir / "log.txt");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("FeatureRowMissing"), std::string::npos) << r.output;
}

TEST(Cli, ConfigErrorsExitThree) {
  const auto unknown = toy_project("unknown_key", [](nlohmann::json& d) { d["modle"] = nlohmann::json::object(); });
  EXPECT_EQ(run_cli("prepare --config " + (unknown / "config.json").string(), unknown / "log.txt").code, 3);
  const auto mode = toy_project("bad_mode", [](nlohmann::json& d) { d["model"]["fusion"] = "max"; });
  EXPECT_EQ(run_cli("train --config " + (mode / "config.json").string(), mode / "log.txt").code, 3);
  const auto big_k = toy_project("big_k", [](nlohmann::json& d) { d["positives"]["k_t"] = 4; });
  const auto r = run_cli("positives --config " + (big_k / "config.json").string(), big_k / "log.txt");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.output.find("KTooLarge"), std::string::npos) << r.output;
}

TEST(Cli, DivergenceExitsFourAndKeepsCheckpoint) {
  const auto dir = toy_project("diverge", [](nlohmann::json& d) { d["train"]["lr"] = 1e308; });
  const auto r = run_cli("train --config " + (dir / "config.json").string(), dir / "log.txt");
  EXPECT_EQ(r.code, 4) << r.output;
  EXPECT_TRUE(fs::exists(dir / "run" / kCheckpointFile));
  EXPECT_NE(r.output.find("warning: train.lr"), std::string::npos) << r.output;
}

TEST(Cli, PositivesAnchorOnlyAndSizeBounds) {
  const auto dir = toy_project("anchor_only", [](nlohmann::json& d) { d["positives"] = {{"k_t", 0}, {"k_s", 0}}; });
  ASSERT_EQ(run_cli("positives --config " + (dir / "config.json").string(), dir / "log.txt").code, 0);
  EXPECT_EQ(testing::read_file(dir / "run" / kPositivesFile), "0\t0\n1\t1\n2\t2\n3\t3\n");

  const auto syn = testing::scratch_dir("synth_positives");
  ASSERT_EQ(run_cli("synth --out " + syn.string(), syn / "log.txt").code, 0);
  ASSERT_EQ(run_cli("positives --config " + (syn / "config.json").string(), syn / "log.txt").code, 0);
  const std::string first = testing::read_file(syn / "run" / kPositivesFile);
  for (const auto& line : lines_of(first)) {
    const auto ids = line.substr(line.find('\t') + 1);
    const auto count = static_cast<std::size_t>(std::count(ids.begin(), ids.end(), ',')) + 1;
    EXPECT_GE(count, 1u);
    EXPECT_LE(count, 17u);
  }
  ASSERT_EQ(run_cli("positives --config " + (syn / "config.json").string(), syn / "log.txt").code, 0);
  EXPECT_EQ(testing::read_file(syn / "run" / kPositivesFile), first);
}

TEST(Cli, SynthCountsNodes) {
  const auto dir = testing::scratch_dir("synth_counts");
  ASSERT_EQ(run_cli("synth --blocks 3 --size 30 --out " + dir.string(), dir / "log.txt").code, 0);
  std::size_t targets = 0, aux = 0;
  for (const auto& line : lines_of(testing::read_file(dir / "nodes.tsv"))) (line.ends_with("\tA") ? targets : aux)++;
  EXPECT_EQ(targets, 90u);
  EXPECT_GT(aux, 0u);
  EXPECT_EQ(lines_of(testing::read_file(dir / "labels.tsv")).size(), 90u);
  EXPECT_TRUE(has_hgf1_magic(dir / "features.bin"));
}

TEST(Cli, FullPipelineWithOverrides) {
  const auto dir = toy_project("full");
  const auto cfg = (dir / "config.json").string();
  const auto out = dir / "elsewhere";
  for (const char* cmd : {"prepare", "positives", "train", "embed", "eval"}) {
    const auto r = run_cli(std::string(cmd) + " --config " + cfg + " --seed 3 --out " + out.string(), dir / "log.txt");
    ASSERT_EQ(r.code, 0) << cmd << ": " << r.output;
  }
  for (const char* f : {kSummaryFile, kPositivesFile, kCheckpointFile, kTraceFile, kEmbeddingsFile, kReportFile})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  EXPECT_FALSE(fs::exists(dir / "run"));
  const Matrix emb = read_hgf1(out / kEmbeddingsFile);
  EXPECT_EQ(emb.rows(), 4u);
  EXPECT_EQ(emb.cols(), 4u);
  EXPECT_EQ(lines_of(testing::read_file(out / kReportFile)).size(), 2u);
}

TEST(Pipeline, EvalOnOneHotClassEmbeddings) {
  const auto dir = testing::scratch_dir("onehot");
  SynthConfig sc;
  RunConfig cfg = cmd_synth(sc, dir, std::cerr);
  const Hin hin = load_hin(cfg.files(), cfg.build_schema());
  Matrix emb(hin.num_targets(), 3);
  for (std::size_t i = 0; i < emb.rows(); ++i) emb(i, static_cast<std::size_t>(hin.labels[i])) = 1.0;
  fs::create_directories(cfg.output_dir());
  write_hgf1(cfg.output_dir() / kEmbeddingsFile, emb);
  std::ostringstream log;
  const EvalReport r = cmd_eval(cfg, log);
  EXPECT_EQ(r.micro_f1.mean, 1.0);
  EXPECT_EQ(r.nmi.mean, 1.0);
}

TEST(Pipeline, EmbedRejectsMismatchedCheckpoint) {
  const auto dir = toy_project("mismatch");
  RunConfig cfg = load_config(dir / "config.json");
  std::ostringstream log;
  cmd_train(cfg, log);
  cfg.model.dim = 8;
  try {
    cmd_embed(cfg, log);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
  }
}

}  // namespace
}  // namespace hgcml
