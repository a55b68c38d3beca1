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

#include "segnas/run_store.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "segnas/config.h"
#include "segnas/errors.h"

namespace segnas {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kCheckpointFormat = 1;

void WriteFileAtomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string GenerationFileName(int generation) {
  char name[32];
  std::snprintf(name, sizeof(name), "gen_%04d.jsonl", generation);
  return name;
}

json CrowdingToJson(const std::optional<double>& crowding) {
  if (!crowding) return nullptr;
  if (std::isinf(*crowding)) return "inf";
  return *crowding;
}

std::optional<double> CrowdingFromJson(const json& node) {
  if (node.is_null()) return std::nullopt;
  if (node.is_string()) {
    if (node.get<std::string>() != "inf") {
      throw CheckpointError("bad crowding value");
    }
    return std::numeric_limits<double>::infinity();
  }
  return node.get<double>();
}

json IndividualToJson(const Individual& ind) {
  return {{"genome", ind.genome.Canonical()},
          {"objectives", ind.objectives},
          {"rank", ind.rank ? json(*ind.rank) : json(nullptr)},
          {"crowding", CrowdingToJson(ind.crowding)},
          {"born", ind.born},
          {"evaluator_id", ind.meta.evaluator_id},
          {"subset_fraction", ind.meta.subset_fraction}};
}

Individual IndividualFromJson(const json& node) {
  Individual ind;
  ind.genome = Genome::Parse(node.at("genome").get<std::string>());
  ind.objectives = node.at("objectives").get<ObjectiveVector>();
  if (!node.at("rank").is_null()) ind.rank = node["rank"].get<int>();
  ind.crowding = CrowdingFromJson(node.at("crowding"));
  ind.born = node.at("born").get<int>();
  ind.meta.evaluator_id = node.at("evaluator_id").get<std::string>();
  ind.meta.subset_fraction = node.at("subset_fraction").get<double>();
  return ind;
}

json PointsToJson(const std::vector<FrontPoint>& points) {
  json out = json::array();
  for (const FrontPoint& p : points) {
    out.push_back({{"genome", p.genome.Canonical()},
                   {"objectives", p.objectives}});
  }
  return out;
}

std::vector<FrontPoint> PointsFromJson(const json& node) {
  std::vector<FrontPoint> points;
  for (const json& p : node) {
    points.push_back({p.at("objectives").get<ObjectiveVector>(),
                      Genome::Parse(p.at("genome").get<std::string>())});
  }
  return points;
}

json MetricsToJson(const std::optional<GenerationMetrics>& metrics) {
  if (!metrics) return nullptr;
  return {{"hypervolume", metrics->hypervolume},
          {"hyperarea_difference", metrics->hyperarea_difference},
          {"front_size", metrics->front_size}};
}

std::optional<GenerationMetrics> MetricsFromJson(const json& node) {
  if (node.is_null()) return std::nullopt;
  GenerationMetrics m;
  m.hypervolume = node.at("hypervolume").get<double>();
  m.hyperarea_difference = node.at("hyperarea_difference").get<double>();
  m.front_size = node.at("front_size").get<std::size_t>();
  return m;
}

}  // namespace

std::string FormatFixed6(double value) {
  char text[64];
  std::snprintf(text, sizeof(text), "%.6f", value);
  if (std::string(text) == "-0.000000") return "0.000000";
  return text;
}

json StateToJson(const SearchState& state, const std::string& config_hash) {
  json doc;
  doc["format"] = kCheckpointFormat;
  doc["config_hash"] = config_hash;
  doc["generation"] = state.generation;
  doc["completed"] = state.completed;
  doc["stop_reason"] = state.stop_reason;
  doc["stall"] = state.stall;
  doc["stats"] = {{"requests", state.stats.requests},
                  {"cache_hits", state.stats.cache_hits},
                  {"unique_evaluations", state.stats.unique_evaluations}};
  doc["reference"] =
      state.reference ? json(*state.reference) : json(nullptr);
  doc["rng_state"] = state.rng_state;
  json population = json::array();
  for (const Individual& ind : state.population) {
    population.push_back(IndividualToJson(ind));
  }
  doc["population"] = population;
  json cache = json::array();
  for (const auto& [genome, entry] : state.cache) {
    cache.push_back({{"genome", genome.Canonical()},
                     {"objectives", entry.objectives},
                     {"born", entry.born},
                     {"evaluator_id", entry.meta.evaluator_id},
                     {"subset_fraction", entry.meta.subset_fraction}});
  }
  doc["cache"] = cache;
  doc["archive"] = PointsToJson(state.archive);
  json history = json::array();
  for (const GenerationSummary& s : state.history) {
    history.push_back({{"generation", s.generation},
                       {"objective_names", s.front.objective_names},
                       {"front", PointsToJson(s.front.points)},
                       {"metrics", MetricsToJson(s.metrics)}});
  }
  doc["history"] = history;
  return doc;
}

SearchState StateFromJson(const json& doc) {
  try {
    if (doc.at("format").get<int>() != kCheckpointFormat) {
      throw CheckpointError("unsupported checkpoint format");
    }
    SearchState state;
    state.generation = doc.at("generation").get<int>();
    state.completed = doc.at("completed").get<bool>();
    state.stop_reason = doc.at("stop_reason").get<std::string>();
    state.stall = doc.at("stall").get<int>();
    const json& stats = doc.at("stats");
    state.stats.requests = stats.at("requests").get<std::int64_t>();
    state.stats.cache_hits = stats.at("cache_hits").get<std::int64_t>();
    state.stats.unique_evaluations =
        stats.at("unique_evaluations").get<std::int64_t>();
    if (!doc.at("reference").is_null()) {
      state.reference = doc["reference"].get<ObjectiveVector>();
    }
    state.rng_state = doc.at("rng_state").get<std::string>();
    for (const json& node : doc.at("population")) {
      state.population.push_back(IndividualFromJson(node));
    }
    for (const json& node : doc.at("cache")) {
      CachedEvaluation entry;
      entry.objectives = node.at("objectives").get<ObjectiveVector>();
      entry.born = node.at("born").get<int>();
      entry.meta.evaluator_id = node.at("evaluator_id").get<std::string>();
      entry.meta.subset_fraction = node.at("subset_fraction").get<double>();
      state.cache[Genome::Parse(node.at("genome").get<std::string>())] =
          entry;
    }
    state.archive = PointsFromJson(doc.at("archive"));
    for (const json& node : doc.at("history")) {
      GenerationSummary s;
      s.generation = node.at("generation").get<int>();
      s.front.generation = s.generation;
      s.front.objective_names =
          node.at("objective_names").get<std::vector<std::string>>();
      s.front.points = PointsFromJson(node.at("front"));
      s.metrics = MetricsFromJson(node.at("metrics"));
      state.history.push_back(std::move(s));
    }
    return state;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint: ") + e.what());
  } catch (const CodecError& e) {
    throw CheckpointError(std::string("corrupt checkpoint: ") + e.what());
  }
}

std::string FrontsCsv(const SearchConfig& config, const SearchState& state) {
  std::ostringstream out;
  out << "genome";
  for (const std::string& name : config.ObjectiveNames()) out << ',' << name;
  out << ",generation\n";
  for (const GenerationSummary& s : state.history) {
    for (const FrontPoint& p : s.front.points) {
      out << p.genome.Canonical();
      for (double v : p.objectives) out << ',' << FormatFixed6(v);
      out << ',' << s.generation << '\n';
    }
  }
  return out.str();
}

std::string MetricsCsv(const SearchState& state) {
  std::ostringstream out;
  out << "generation,hypervolume,hyperarea_difference,front_size\n";
  for (const GenerationSummary& s : state.history) {
    out << s.generation << ',';
    if (s.metrics) {
      out << FormatFixed6(s.metrics->hypervolume) << ','
          << FormatFixed6(s.metrics->hyperarea_difference) << ',';
    } else {
      out << ",,";
    }
    out << s.front.points.size() << '\n';
  }
  return out.str();
}

void RunStore::Initialize(const SearchConfig& config) const {
  fs::create_directories(dir_);
  if (fs::exists(dir_ / "run.json")) {
    throw ConfigError(dir_.string() +
                      " already holds a run; use resume or a new directory");
  }
  json doc{{"config", ConfigToJson(config)},
           {"config_hash", ConfigHash(config)}};
  WriteFileAtomic(dir_ / "run.json", doc.dump(2) + "\n");
}

SearchConfig RunStore::LoadConfig() const {
  json doc;
  try {
    doc = json::parse(ReadFile(dir_ / "run.json"));
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("run.json is not valid JSON: ") +
                          e.what());
  }
  if (!doc.contains("config") || !doc.contains("config_hash")) {
    throw CheckpointError("run.json lacks config or config_hash");
  }
  SearchConfig config = ConfigFromJson(doc["config"]);
  if (ConfigHash(config) != doc["config_hash"].get<std::string>()) {
    throw ConfigError(
        "run.json config does not match its recorded hash; refusing to "
        "continue an edited run");
  }
  return config;
}

std::string RunStore::StoredConfigHash() const {
  try {
    return json::parse(ReadFile(dir_ / "run.json"))
        .at("config_hash")
        .get<std::string>();
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("run.json is unreadable: ") + e.what());
  }
}

void RunStore::WriteGeneration(const SearchConfig& config,
                               const GenerationRecord& record,
                               const SearchState& state) const {
  std::ostringstream gen;
  const auto names = config.ObjectiveNames();
  for (std::size_t i = 0; i < record.individuals.size(); ++i) {
    const Individual& ind = record.individuals[i];
    json objectives = json::object();
    for (std::size_t m = 0; m < names.size(); ++m) {
      objectives[names[m]] = ind.objectives[m];
    }
    json crowding = CrowdingToJson(ind.crowding);
    if (crowding.is_number()) crowding = Quantize(crowding.get<double>());
    // Keys are emitted in sorted order by nlohmann::json.
    json line{{"generation", record.generation},
              {"genome", ind.genome.Canonical()},
              {"objectives", objectives},
              {"rank", ind.rank ? json(*ind.rank) : json(nullptr)},
              {"crowding", crowding},
              {"survived", static_cast<bool>(record.survived[i])},
              {"born", ind.born},
              {"evaluator_id", ind.meta.evaluator_id},
              {"subset_fraction", ind.meta.subset_fraction}};
    gen << line.dump() << '\n';
  }
  WriteFileAtomic(dir_ / GenerationFileName(record.generation), gen.str());
  WriteFileAtomic(dir_ / "fronts.csv", FrontsCsv(config, state));
  WriteFileAtomic(dir_ / "metrics.csv", MetricsCsv(state));

  const fs::path timings = dir_ / "timings.csv";
  const bool fresh = !fs::exists(timings);
  std::ofstream out(timings, std::ios::app);
  if (fresh) out << "generation,genome,wall_time_ms\n";
  for (const EvaluationTiming& t : record.timings) {
    out << record.generation << ',' << t.genome.Canonical() << ','
        << t.wall_time_ms << '\n';
  }
  out.close();

  WriteFileAtomic(dir_ / "checkpoint.json",
                  StateToJson(state, ConfigHash(config)).dump() + "\n");
}

bool RunStore::HasCheckpoint() const {
  return fs::exists(dir_ / "checkpoint.json");
}

SearchState RunStore::LoadCheckpoint(
    const std::string& expected_config_hash) const {
  if (!HasCheckpoint()) {
    throw CheckpointError("no checkpoint in " + dir_.string());
  }
  json doc;
  try {
    doc = json::parse(ReadFile(dir_ / "checkpoint.json"));
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint: ") + e.what());
  }
  if (!doc.contains("config_hash") || !doc["config_hash"].is_string()) {
    throw CheckpointError("corrupt checkpoint: missing config hash");
  }
  if (doc["config_hash"].get<std::string>() != expected_config_hash) {
    throw ConfigError("checkpoint was written for a different config");
  }
  return StateFromJson(doc);
}

}  // namespace segnas
