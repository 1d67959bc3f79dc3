#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "seqmtl/cli/commands.hpp"
#include "support.hpp"

using namespace seqmtl;
using namespace seqmtl::cli;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SEQMTL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_corpus_file(const fs::path& p, const std::string& id, std::size_t tokens, std::uint64_t seed,
                       std::vector<std::string> types = {"claim", "premise"}) {
  SyntheticSpec s;
  s.id = id;
  s.min_tokens = tokens;
  s.seed = seed;
  s.types = std::move(types);
  cmd_gen_synth(s, p);
}

// Small sizes and a tiny model so searches take well under a second per run.
nlohmann::json small_config(const std::vector<std::pair<std::string, std::string>>& datasets) {
  nlohmann::json j;
  for (const auto& [id, path] : datasets) j["datasets"].push_back({{"id", id}, {"path", path}});
  j["embedding_dim"] = 8;
  j["output_dir"] = "out";
  j["scenario_sizes"] = {{"train", 2000}, {"dev", 600}, {"test_min", 600}, {"subsets", {1000}}};
  j["train"] = {{"batch_size", 16}, {"max_epochs", 2}, {"patience", 2}};
  j["search_space"] = {{"layouts", {{4}}}};
  j["top_k"] = 2;
  return j;
}

fs::path write_config(const fs::path& dir, const nlohmann::json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

}  // namespace

TEST(ExitCodes, MapErrorKinds) {
  EXPECT_EQ(exit_code_for(ErrorKind::config), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::malformed_line), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::insufficient_data), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::empty_records), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::non_finite_loss), 4);
}

TEST(Config, ParsesAndResolvesRelativePaths) {
  testing_support::TempDir dir("cfg");
  write_corpus_file(dir.path() / "a.conll", "a", 200, 1);
  auto j = small_config({{"a", "a.conll"}});
  j["train"]["patience"] = 7;
  const ExperimentConfig c = parse_config(j, dir.path());
  ASSERT_EQ(c.datasets.size(), 1u);
  EXPECT_EQ(c.datasets[0].path, dir.path() / "a.conll");
  EXPECT_EQ(c.output_dir, dir.path() / "out");
  EXPECT_EQ(c.patience, 7u);
  EXPECT_EQ(c.batch_size, 16u);
  EXPECT_EQ(c.sizes.subsets, (std::vector<std::size_t>{1000}));
  EXPECT_EQ(c.space.layouts, (std::vector<std::vector<std::size_t>>{{4}}));
  EXPECT_EQ(c.top_k, 2u);
}

TEST(Config, RejectsBadInput) {
  testing_support::TempDir dir("cfgbad");
  write_corpus_file(dir.path() / "a.conll", "a", 200, 1);
  auto expect_config_error = [&](const nlohmann::json& j) {
    try {
      parse_config(j, dir.path());
      ADD_FAILURE() << j.dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::config) << e.what();
    }
  };
  expect_config_error(nlohmann::json::object());
  expect_config_error(small_config({{"a", "a.conll"}, {"a", "a.conll"}}));
  expect_config_error(small_config({{"a", "missing.conll"}}));
  auto bad_emb = small_config({{"a", "a.conll"}});
  bad_emb["embeddings"] = {{"glove", "nope.txt"}};
  expect_config_error(bad_emb);
  auto bad_type = small_config({{"a", "a.conll"}});
  bad_type["train"]["max_epochs"] = "many";
  expect_config_error(bad_type);

  std::ofstream(dir.path() / "broken.json") << "{ not json";
  EXPECT_THROW(load_config(dir.path() / "broken.json"), Error);
  EXPECT_EQ(run_cli("prepare --config " + (dir.path() / "broken.json").string()), 2);
}

TEST(Prepare, WritesOneManifestPerSizeDeterministically) {
  testing_support::TempDir dir("prep");
  write_corpus_file(dir.path() / "a.conll", "a", 40000, 3);
  nlohmann::json j;
  j["datasets"] = {{{"id", "a"}, {"path", "a.conll"}}};
  const ExperimentConfig c = parse_config(j, dir.path());
  std::ostringstream log;
  const auto paths = cmd_prepare(c, log);
  ASSERT_EQ(paths.size(), 4u);
  for (const char* k : {"1K", "6K", "12K", "21K"}) EXPECT_TRUE(fs::exists(c.output_dir / "scenarios" / "a" / (std::string(k) + ".json")));
  const std::string first = read_file(scenario_path(c, "a", 1000));
  cmd_prepare(c, log);
  EXPECT_EQ(read_file(scenario_path(c, "a", 1000)), first);
  const auto m = nlohmann::json::parse(first);
  EXPECT_EQ(m.at("k").get<std::size_t>(), 1000u);
}

TEST(Prepare, TooSmallCorpusNamesTheDataset) {
  testing_support::TempDir dir("prepsmall");
  write_corpus_file(dir.path() / "tiny.conll", "tiny", 10000, 3);
  nlohmann::json j;
  j["datasets"] = {{{"id", "tinyset"}, {"path", "tiny.conll"}}};
  const fs::path cfg = write_config(dir.path(), j);
  try {
    std::ostringstream log;
    cmd_prepare(load_config(cfg), log);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::insufficient_data);
    EXPECT_NE(std::string(e.what()).find("tinyset"), std::string::npos) << e.what();
  }
  EXPECT_EQ(run_cli("prepare --config " + cfg.string()), 3);
}

TEST(Prepare, MalformedCorpusIsADataError) {
  testing_support::TempDir dir("prepbad");
  std::ofstream(dir.path() / "bad.conll") << "word\tX-claim\n";
  const fs::path cfg = write_config(dir.path(), small_config({{"bad", "bad.conll"}}));
  EXPECT_EQ(run_cli("prepare --config " + cfg.string()), 3);
}

TEST(Search, RecordsRunsAndResumes) {
  testing_support::TempDir dir("search");
  write_corpus_file(dir.path() / "a.conll", "a", 3400, 5);
  write_corpus_file(dir.path() / "b.conll", "b", 3400, 6, {"major"});
  const ExperimentConfig c = parse_config(small_config({{"a", "a.conll"}, {"b", "b.conll"}}), dir.path());
  std::ostringstream log;
  cmd_prepare(c, log);
  Workspace ws(c);

  SearchRequest req;
  req.mode = TrainMode::stl;
  req.main = "a";
  req.k = 1000;
  req.runs = 2;
  const auto first = cmd_search(ws, req, log);
  ASSERT_EQ(first.size(), 2u);
  for (const auto& r : first) EXPECT_TRUE(r.completed) << r.failure;
  EXPECT_EQ(count_lines(results_path(c)), 3u);  // header + 2

  const fs::path run0 = c.output_dir / "runs" / "a" / "stl" / "1K" / "run_0.json";
  ASSERT_TRUE(fs::exists(run0));
  EXPECT_TRUE(fs::exists(c.output_dir / "runs" / "a" / "stl" / "1K" / "run_0.ckpt"));
  const auto manifest = nlohmann::json::parse(read_file(run0));
  EXPECT_EQ(manifest.at("scenario_manifest").at("hash").get<std::string>(),
            hex64(fnv1a(read_file(scenario_path(c, "a", 1000)))));
  EXPECT_EQ(manifest.get<RunRecord>().test_score, first[0].test_score);

  EXPECT_TRUE(cmd_search(ws, req, log).empty());
  req.runs = 3;
  const auto third = cmd_search(ws, req, log);
  ASSERT_EQ(third.size(), 1u);
  EXPECT_EQ(third[0].run_id, 2u);

  req.mode = TrainMode::mtl;
  req.runs = 1;
  const auto mtl = cmd_search(ws, req, log);
  ASSERT_EQ(mtl.size(), 1u);
  EXPECT_EQ(mtl[0].plan.aux, (std::vector<std::string>{"b"}));
  EXPECT_EQ(read_results_file(results_path(c)).size(), 4u);

  const ReportFiles rep = cmd_report(c);
  EXPECT_TRUE(fs::exists(rep.report));
  EXPECT_TRUE(fs::exists(rep.curves));
}

TEST(Search, MtlWithoutAuxiliariesIsAConfigError) {
  testing_support::TempDir dir("mtlnoaux");
  write_corpus_file(dir.path() / "a.conll", "a", 3400, 5);
  const fs::path cfg = write_config(dir.path(), small_config({{"a", "a.conll"}}));
  ASSERT_EQ(run_cli("prepare --config " + cfg.string()), 0);
  EXPECT_EQ(run_cli("search --config " + cfg.string() + " --mode mtl --main a --k 1K --runs 1"), 2);
  EXPECT_EQ(run_cli("search --config " + cfg.string() + " --mode nope --main a --k 1K"), 2);
  EXPECT_EQ(run_cli("search --config " + cfg.string() + " --main zzz --k 1K"), 2);
  // A size that was never prepared.
  EXPECT_EQ(run_cli("train --config " + cfg.string() + " --main a --k 6K"), 2);
}

TEST(Search, TrainBeforePrepareIsAConfigError) {
  testing_support::TempDir dir("noprep");
  write_corpus_file(dir.path() / "a.conll", "a", 3400, 5);
  const ExperimentConfig c = parse_config(small_config({{"a", "a.conll"}}), dir.path());
  Workspace ws(c);
  SearchRequest req;
  req.main = "a";
  req.k = 1000;
  try {
    std::ostringstream log;
    cmd_search(ws, req, log);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
    EXPECT_NE(std::string(e.what()).find("prepare"), std::string::npos);
  }
}

TEST(Report, VarFixtureGivesExpectedDeltas) {
  testing_support::TempDir dir("report");
  write_corpus_file(dir.path() / "var.conll", "var", 200, 1);
  const ExperimentConfig c = parse_config(small_config({{"var", "var.conll"}}), dir.path());
  const std::map<std::size_t, std::pair<double, double>> table{
      {1000, {0.3130, 0.3710}}, {6000, {0.3889, 0.4214}}, {12000, {0.4285, 0.4563}}, {21000, {0.4334, 0.4739}}};
  std::size_t id = 0;
  for (const auto& [k, scores] : table) {
    for (auto [mode, score] : {std::pair{TrainMode::stl, scores.first}, std::pair{TrainMode::mtl, scores.second}}) {
      RunRecord r;
      r.run_id = id++;
      r.dataset = "var";
      r.k = k;
      r.plan.mode = mode;
      r.completed = true;
      r.dev_score = 0.5;
      r.test_score = score;
      append_result(results_path(c), r);
    }
  }
  const ReportFiles f = cmd_report(c);
  const std::string curves = read_file(f.curves);
  EXPECT_NE(curves.find("var,1K,1.000000,1.185304,0.185304"), std::string::npos) << curves;
  EXPECT_NE(curves.find("var,21K,1.384665,1.514058,0.129393"), std::string::npos) << curves;
  EXPECT_EQ(f.content.curves.size(), 4u);
  EXPECT_NE(read_file(f.report).find("31.30"), std::string::npos);
}

TEST(Report, NoResultsIsAnError) {
  testing_support::TempDir dir("noresults");
  write_corpus_file(dir.path() / "a.conll", "a", 200, 1);
  const fs::path cfg = write_config(dir.path(), small_config({{"a", "a.conll"}}));
  EXPECT_THROW(cmd_report(load_config(cfg)), Error);
  EXPECT_EQ(run_cli("report --config " + cfg.string()), 3);
}

TEST(GenSynth, WritesAParsableCorpus) {
  testing_support::TempDir dir("gen");
  const fs::path out = dir.path() / "s.conll";
  ASSERT_EQ(run_cli("gen-synth --out " + out.string() + " --tokens 500 --seed 4 --types x,y,z --id s"), 0);
  std::ifstream in(out);
  const Dataset ds = parse_corpus(in, "s");
  EXPECT_GE(ds.token_count(), 500u);
  EXPECT_EQ(ds.tagset.size(), 7u);
  EXPECT_EQ(run_cli("gen-synth --out " + out.string() + " --types ,"), 2);
}

TEST(EndToEnd, CommandLinePipeline) {
  testing_support::TempDir dir("e2e");
  const std::string d = dir.path().string();
  ASSERT_EQ(run_cli("gen-synth --out " + d + "/a.conll --tokens 3400 --seed 8 --id a"), 0);
  ASSERT_EQ(run_cli("gen-synth --out " + d + "/b.conll --tokens 3400 --seed 9 --types major --id b"), 0);
  const fs::path cfg = write_config(dir.path(), small_config({{"a", "a.conll"}, {"b", "b.conll"}}));
  const std::string cf = " --config " + cfg.string();
  ASSERT_EQ(run_cli("prepare" + cf), 0);
  ASSERT_EQ(run_cli("train" + cf + " --main a --k 1K --mode stl --no-checkpoints"), 0);
  ASSERT_EQ(run_cli("train" + cf + " --main a --k 1K --mode stl --no-checkpoints"), 0);
  ASSERT_EQ(run_cli("search" + cf + " --main a --k 1K --mode mtl --runs 2 --jobs 2"), 0);
  ASSERT_EQ(run_cli("search" + cf + " --main a --k 1K --mode union --runs 1"), 0);
  ASSERT_EQ(run_cli("report" + cf), 0);
  const auto records = read_results_file(dir.path() / "out" / "results.csv");
  ASSERT_EQ(records.size(), 5u);
  // Repeated `train` calls number their runs after the recorded ones.
  EXPECT_EQ(records[0].run_id, 0u);
  EXPECT_EQ(records[1].run_id, 1u);
  EXPECT_FALSE(fs::exists(dir.path() / "out" / "runs" / "a" / "stl" / "1K" / "run_0.ckpt"));
  EXPECT_TRUE(fs::exists(dir.path() / "out" / "runs" / "a" / "mtl" / "1K" / "run_1.ckpt"));
  EXPECT_NE(read_file(dir.path() / "out" / "report.txt").find("1K"), std::string::npos);
}
