// Copyright 2026 The segnas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <stdlib.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "segnas/commands.h"
#include "segnas/config.h"
#include "segnas/errors.h"
#include "segnas/external_evaluator.h"
#include "segnas/run_store.h"

namespace segnas {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class RunnerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::string pattern =
        (fs::temp_directory_path() / "segnas_runner_XXXXXX").string();
    ASSERT_NE(mkdtemp(pattern.data()), nullptr);
    root_ = pattern;
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path root_;
};

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

SearchConfig StandardRun(std::uint64_t seed = 3) {
  SearchConfig config;
  config.seed = seed;
  return config;
}

// Every run file except the wall-time log must match byte for byte.
void ExpectSameRunFiles(const fs::path& a, const fs::path& b) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(a)) {
    names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  std::size_t count_b = 0;
  for (const auto& entry : fs::directory_iterator(b)) {
    (void)entry;
    ++count_b;
  }
  EXPECT_EQ(names.size(), count_b);
  for (const std::string& name : names) {
    if (name == "timings.csv") continue;
    EXPECT_EQ(ReadFile(a / name), ReadFile(b / name)) << name;
  }
}

struct Cli {
  int code;
  std::string out;
};

Cli RunCli(const std::string& args) {
  const std::string command = std::string(SEGNAS_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

TEST_F(RunnerTest, ConfigRoundTripAndHash) {
  SearchConfig config = StandardRun();
  config.objectives = {Objective::kError, Objective::kLatency};
  config.initial_genomes = {Genome(SpaceId::kXception)};
  config.evaluator = EvaluatorSpec::Parse("table:/data/t.csv");
  const json doc = ConfigToJson(config);
  const SearchConfig back = ConfigFromJson(doc);
  EXPECT_EQ(ConfigToJson(back), doc);
  EXPECT_EQ(ConfigHash(back), ConfigHash(config));
  EXPECT_EQ(ConfigHash(config).size(), 16u);

  SearchConfig other = config;
  other.seed = 4;
  EXPECT_NE(ConfigHash(other), ConfigHash(config));
}

TEST_F(RunnerTest, ConfigRejectsBadDocuments) {
  EXPECT_THROW(ConfigFromJson(json::parse(R"({"generations": 3})")),
               ConfigError);
  EXPECT_THROW(
      ConfigFromJson(json::parse(R"({"space": "xception", "seeds": 3})")),
      ConfigError);
  EXPECT_THROW(ConfigFromJson(json::parse(
                   R"({"space": "xception", "objectives": ["accuracy"]})")),
               ConfigError);
  EXPECT_THROW(ConfigFromJson(json::parse(
                   R"({"space": "xception", "population_size": "many"})")),
               ConfigError);
  EXPECT_THROW(LoadConfigFile((root_ / "missing.json").string()), ConfigError);
  WriteFile(root_ / "broken.json", "{not json");
  EXPECT_THROW(LoadConfigFile((root_ / "broken.json").string()), ConfigError);
}

TEST_F(RunnerTest, SearchWritesRunFiles) {
  std::ostringstream log;
  ASSERT_EQ(CmdSearch(StandardRun(), root_ / "run", std::nullopt, log),
            kExitOk)
      << log.str();
  for (const char* name : {"run.json", "fronts.csv", "metrics.csv",
                           "timings.csv", "checkpoint.json", "gen_0001.jsonl",
                           "gen_0020.jsonl"}) {
    EXPECT_TRUE(fs::exists(root_ / "run" / name)) << name;
  }
  EXPECT_FALSE(fs::exists(root_ / "run" / "gen_0021.jsonl"));

  std::istringstream gen1(ReadFile(root_ / "run" / "gen_0001.jsonl"));
  std::string line;
  int rows = 0;
  while (std::getline(gen1, line)) {
    const json row = json::parse(line);
    EXPECT_TRUE(row.contains("genome"));
    EXPECT_FALSE(row.contains("wall_time_ms"));
    ++rows;
  }
  EXPECT_EQ(rows, 12);

  std::istringstream metrics(ReadFile(root_ / "run" / "metrics.csv"));
  std::getline(metrics, line);
  EXPECT_EQ(line, "generation,hypervolume,hyperarea_difference,front_size");
  int generations = 0;
  while (std::getline(metrics, line)) ++generations;
  EXPECT_EQ(generations, 20);

  const json checkpoint = json::parse(ReadFile(root_ / "run" / "checkpoint.json"));
  EXPECT_EQ(checkpoint["stats"]["unique_evaluations"], 240);

  // A second search into the same directory is refused.
  EXPECT_EQ(CmdSearch(StandardRun(), root_ / "run", std::nullopt, log),
            kExitUsage);
}

TEST_F(RunnerTest, SameSeedSameBytes) {
  std::ostringstream log;
  ASSERT_EQ(CmdSearch(StandardRun(), root_ / "a", std::nullopt, log), kExitOk);
  ASSERT_EQ(CmdSearch(StandardRun(), root_ / "b", std::nullopt, log), kExitOk);
  ExpectSameRunFiles(root_ / "a", root_ / "b");
}

TEST_F(RunnerTest, ResumeReproducesUninterruptedRun) {
  std::ostringstream log;
  ASSERT_EQ(CmdSearch(StandardRun(), root_ / "full", std::nullopt, log),
            kExitOk);
  ASSERT_EQ(CmdSearch(StandardRun(), root_ / "split", 10, log), kExitOk);
  EXPECT_TRUE(fs::exists(root_ / "split" / "gen_0010.jsonl"));
  EXPECT_FALSE(fs::exists(root_ / "split" / "gen_0011.jsonl"));
  ASSERT_EQ(CmdResume(root_ / "split", std::nullopt, log), kExitOk)
      << log.str();
  ExpectSameRunFiles(root_ / "full", root_ / "split");

  // Resuming a completed run is a no-op.
  const std::string before = ReadFile(root_ / "split" / "checkpoint.json");
  EXPECT_EQ(CmdResume(root_ / "split", std::nullopt, log), kExitOk);
  EXPECT_EQ(ReadFile(root_ / "split" / "checkpoint.json"), before);
}

TEST_F(RunnerTest, ResumeRefusesEditedConfig) {
  std::ostringstream log;
  ASSERT_EQ(CmdSearch(StandardRun(), root_ / "run", 3, log), kExitOk);
  json run = json::parse(ReadFile(root_ / "run" / "run.json"));
  run["config"]["seed"] = 99;
  WriteFile(root_ / "run" / "run.json", run.dump(2));
  EXPECT_EQ(CmdResume(root_ / "run", std::nullopt, log), kExitUsage);
}

TEST_F(RunnerTest, ResumeRejectsCorruptCheckpoint) {
  std::ostringstream log;
  ASSERT_EQ(CmdSearch(StandardRun(), root_ / "run", 2, log), kExitOk);
  WriteFile(root_ / "run" / "checkpoint.json", "{\"truncated\": ");
  EXPECT_EQ(CmdResume(root_ / "run", std::nullopt, log), kExitCheckpoint);
  fs::remove(root_ / "run" / "checkpoint.json");
  EXPECT_EQ(CmdResume(root_ / "run", std::nullopt, log), kExitCheckpoint);
  EXPECT_EQ(CmdResume(root_ / "nowhere", std::nullopt, log), kExitCheckpoint);
}

TEST_F(RunnerTest, StateSurvivesJsonRoundTrip) {
  std::ostringstream log;
  ASSERT_EQ(CmdSearch(StandardRun(), root_ / "run", 4, log), kExitOk);
  const RunStore store(root_ / "run");
  const SearchConfig config = store.LoadConfig();
  const SearchState state = store.LoadCheckpoint(ConfigHash(config));
  EXPECT_EQ(state.generation, 4);
  const json once = StateToJson(state, ConfigHash(config));
  EXPECT_EQ(StateToJson(StateFromJson(once), ConfigHash(config)), once);
}

TEST_F(RunnerTest, EvaluatorFailureKeepsCheckpointAndResumes) {
  SearchConfig config = StandardRun();
  config.generations = 6;
  config.evaluator = EvaluatorSpec::Parse(
      std::string("external:") + SEGNAS_FAKE_WORKER + " --die-after 30");
  config.evaluator.retries = 0;
  config.evaluator.timeout_s = 5;
  std::ostringstream log;
  EXPECT_EQ(CmdSearch(config, root_ / "run", std::nullopt, log),
            kExitEvaluator);
  const RunStore store(root_ / "run");
  const SearchState kept = store.LoadCheckpoint(store.StoredConfigHash());
  EXPECT_EQ(kept.generation, 2);

  ::setenv(kWorkerCommandEnv, SEGNAS_FAKE_WORKER, 1);
  const int code = CmdResume(root_ / "run", std::nullopt, log);
  ::unsetenv(kWorkerCommandEnv);
  ASSERT_EQ(code, kExitOk) << log.str();

  SearchConfig healthy = config;
  healthy.evaluator = EvaluatorSpec::Parse(
      std::string("external:") + SEGNAS_FAKE_WORKER);
  ASSERT_EQ(CmdSearch(healthy, root_ / "ref", std::nullopt, log), kExitOk);
  EXPECT_EQ(ReadFile(root_ / "run" / "fronts.csv"),
            ReadFile(root_ / "ref" / "fronts.csv"));
}

TEST_F(RunnerTest, DecodeCommand) {
  std::ostringstream out;
  std::ostringstream err;
  ASSERT_EQ(CmdDecode("xception:0100001111011110010100", std::nullopt, false,
                      out, err),
            kExitOk);
  EXPECT_NE(out.str().find("entry_stride: 2\n"), std::string::npos);
  EXPECT_NE(out.str().find("middle_blocks: 1111011110010100\n"),
            std::string::npos);
  EXPECT_NE(out.str().find("active_blocks: 10\n"), std::string::npos);

  out.str("");
  ASSERT_EQ(CmdDecode("mobilenetv2:00011101011011111111111", std::nullopt,
                      false, out, err),
            kExitOk);
  EXPECT_NE(out.str().find("strides: (2,2,1,2)\n"), std::string::npos);
  EXPECT_NE(out.str().find("dilations: (2,2,1,3,4,2)\n"), std::string::npos);

  out.str("");
  ASSERT_EQ(CmdDecode("xception:" + std::string(22, '0'), std::nullopt, false,
                      out, err),
            kExitOk);
  EXPECT_NE(out.str().find("active_blocks: 0\n"), std::string::npos);

  out.str("");
  ASSERT_EQ(CmdDecode("xception:" + std::string(22, '0'), 129, true, out, err),
            kExitOk);
  EXPECT_EQ(out.str().rfind("index,kind,", 0), 0u);

  EXPECT_EQ(CmdDecode("xception:0101", std::nullopt, false, out, err),
            kExitUsage);
  EXPECT_EQ(CmdDecode("resnet:0", std::nullopt, false, out, err), kExitUsage);
}

TEST_F(RunnerTest, FrontAndGenesCommands) {
  std::ostringstream log;
  ASSERT_EQ(CmdSearch(StandardRun(), root_ / "run", std::nullopt, log),
            kExitOk);
  std::ostringstream out;
  std::ostringstream err;
  ASSERT_EQ(CmdFront(root_ / "run", 1, false, out, err), kExitOk);
  std::istringstream first(out.str());
  std::string line;
  std::getline(first, line);
  EXPECT_EQ(line, "generation,genome,flops,error");
  double previous_cost = -1;
  while (std::getline(first, line)) {
    EXPECT_EQ(line.rfind("1,xception:", 0), 0u);
    const double cost = std::stod(line.substr(line.find(',', 2) + 1));
    EXPECT_GE(cost, previous_cost);
    previous_cost = cost;
  }

  out.str("");
  ASSERT_EQ(CmdFront(root_ / "run", std::nullopt, true, out, err), kExitOk);
  EXPECT_NE(out.str().find("\n20,xception:"), std::string::npos);
  EXPECT_NE(out.str().find("\n1,xception:"), std::string::npos);

  EXPECT_EQ(CmdFront(root_ / "run", 21, false, out, err), kExitUsage);
  EXPECT_EQ(CmdFront(root_ / "empty", std::nullopt, false, out, err),
            kExitUsage);

  out.str("");
  ASSERT_EQ(CmdGenes(root_ / "run", out, err), kExitOk);
  std::istringstream genes(out.str());
  std::getline(genes, line);
  EXPECT_EQ(line, "bit,label,frequency");
  int bits = 0;
  while (std::getline(genes, line)) ++bits;
  EXPECT_EQ(bits, 22);
}

TEST_F(RunnerTest, CommandLine) {
  const Cli decode = RunCli("decode xception:0100001111011110010100");
  EXPECT_EQ(decode.code, 0);
  EXPECT_NE(decode.out.find("active_blocks: 10"), std::string::npos);
  EXPECT_EQ(RunCli("decode xception:01").code, kExitUsage);
  EXPECT_EQ(RunCli("bogus").code, kExitUsage);

  WriteFile(root_ / "config.json",
            R"({"space": "mobilenetv2", "generations": 3, "seed": 5})");
  const fs::path out = root_ / "cli_run";
  const Cli search = RunCli("search --config " + (root_ / "config.json").string() +
                            " --out " + out.string() + " --halt-after 2");
  EXPECT_EQ(search.code, 0) << search.out;
  EXPECT_EQ(RunCli("resume --out " + out.string()).code, 0);
  const Cli front = RunCli("front --out " + out.string());
  EXPECT_EQ(front.code, 0);
  EXPECT_NE(front.out.find("3,mobilenetv2:"), std::string::npos);
  EXPECT_EQ(RunCli("genes --out " + out.string()).code, 0);

  WriteFile(root_ / "bad.json", R"({"space": "vgg"})");
  EXPECT_EQ(RunCli("search --config " + (root_ / "bad.json").string() +
                   " --out " + (root_ / "bad_run").string())
                .code,
            kExitUsage);
}

}  // namespace
}  // namespace segnas
