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

#include "segnas/config.h"

#include <cstdio>
#include <fstream>
#include <set>

#include "segnas/errors.h"

namespace segnas {

using json = nlohmann::json;

namespace {

void RejectUnknownKeys(const json& obj, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T Get(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  try {
    return obj[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key +
                      "' has the wrong type");
  }
}

template <typename T>
std::optional<T> GetOptional(const json& obj, const char* key) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  return Get<T>(obj, key, T{});
}

EvaluatorSpec ParseEvaluator(const json& node) {
  if (node.is_string()) return EvaluatorSpec::Parse(node.get<std::string>());
  RejectUnknownKeys(node, {"spec", "workers", "timeout_s", "retries"},
                    "evaluator");
  EvaluatorSpec spec =
      EvaluatorSpec::Parse(Get<std::string>(node, "spec", "synthetic"));
  spec.workers = Get<int>(node, "workers", spec.workers);
  spec.timeout_s = Get<double>(node, "timeout_s", spec.timeout_s);
  spec.retries = Get<int>(node, "retries", spec.retries);
  return spec;
}

}  // namespace

SearchConfig ConfigFromJson(const json& doc) {
  RejectUnknownKeys(doc,
                    {"space", "objectives", "population_size", "generations",
                     "seed", "crossover_rate", "mutation_rate",
                     "subset_fraction", "evaluator", "stop_rule",
                     "input_side", "surrogate", "throughput",
                     "initial_genomes"},
                    "config");
  SearchConfig config;
  if (!doc.contains("space")) throw ConfigError("config needs a 'space'");
  try {
    config.space = ParseSpaceName(Get<std::string>(doc, "space", ""));
  } catch (const CodecError& e) {
    throw ConfigError(e.what());
  }
  if (doc.contains("objectives")) {
    config.objectives.clear();
    for (const auto& name :
         Get<std::vector<std::string>>(doc, "objectives", {})) {
      config.objectives.push_back(ParseObjective(name));
    }
  }
  config.population_size =
      Get<int>(doc, "population_size", config.population_size);
  config.generations = Get<int>(doc, "generations", config.generations);
  config.seed = Get<std::uint64_t>(doc, "seed", config.seed);
  config.crossover_rate =
      Get<double>(doc, "crossover_rate", config.crossover_rate);
  config.mutation_rate = GetOptional<double>(doc, "mutation_rate");
  config.subset_fraction =
      Get<double>(doc, "subset_fraction", config.subset_fraction);
  if (doc.contains("evaluator")) {
    config.evaluator = ParseEvaluator(doc["evaluator"]);
  }
  if (doc.contains("stop_rule")) {
    const json& s = doc["stop_rule"];
    RejectUnknownKeys(s, {"enabled", "epsilon", "patience"}, "stop_rule");
    config.stop.enabled = Get<bool>(s, "enabled", config.stop.enabled);
    config.stop.epsilon = Get<double>(s, "epsilon", config.stop.epsilon);
    config.stop.patience = Get<int>(s, "patience", config.stop.patience);
  }
  config.input_side = GetOptional<int>(doc, "input_side");
  if (doc.contains("surrogate")) {
    const json& s = doc["surrogate"];
    RejectUnknownKeys(s,
                      {"base_xception", "base_mobilenetv2", "removal",
                       "stride", "aspp", "noise"},
                      "surrogate");
    SurrogateConstants& c = config.surrogate;
    c.base_xception = Get<double>(s, "base_xception", c.base_xception);
    c.base_mobilenetv2 = Get<double>(s, "base_mobilenetv2", c.base_mobilenetv2);
    c.removal = Get<double>(s, "removal", c.removal);
    c.stride = Get<double>(s, "stride", c.stride);
    c.aspp = Get<double>(s, "aspp", c.aspp);
    c.noise = Get<double>(s, "noise", c.noise);
  }
  if (doc.contains("throughput")) {
    const json& t = doc["throughput"];
    RejectUnknownKeys(t,
                      {"conv", "depthwise", "pointwise", "pool", "upsample",
                       "concat", "batchnorm", "overhead_cycles"},
                      "throughput");
    ThroughputModel& m = config.throughput;
    m.conv = Get<double>(t, "conv", m.conv);
    m.depthwise = Get<double>(t, "depthwise", m.depthwise);
    m.pointwise = Get<double>(t, "pointwise", m.pointwise);
    m.pool = Get<double>(t, "pool", m.pool);
    m.upsample = Get<double>(t, "upsample", m.upsample);
    m.concat = Get<double>(t, "concat", m.concat);
    m.batchnorm = Get<double>(t, "batchnorm", m.batchnorm);
    m.overhead_cycles = Get<double>(t, "overhead_cycles", m.overhead_cycles);
  }
  for (const auto& text :
       Get<std::vector<std::string>>(doc, "initial_genomes", {})) {
    try {
      config.initial_genomes.push_back(Genome::Parse(text));
    } catch (const CodecError& e) {
      throw ConfigError(e.what());
    }
  }
  config.Validate();
  return config;
}

SearchConfig LoadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " +
                      e.what());
  }
  return ConfigFromJson(doc);
}

json ConfigToJson(const SearchConfig& config) {
  json doc;
  doc["space"] = std::string(SpaceName(config.space));
  doc["objectives"] = config.ObjectiveNames();
  doc["population_size"] = config.population_size;
  doc["generations"] = config.generations;
  doc["seed"] = config.seed;
  doc["crossover_rate"] = config.crossover_rate;
  doc["mutation_rate"] = config.MutationRate();
  doc["subset_fraction"] = config.subset_fraction;
  doc["evaluator"] = {{"spec", config.evaluator.ToString()},
                      {"workers", config.evaluator.workers},
                      {"timeout_s", config.evaluator.timeout_s},
                      {"retries", config.evaluator.retries}};
  doc["stop_rule"] = {{"enabled", config.stop.enabled},
                      {"epsilon", config.stop.epsilon},
                      {"patience", config.stop.patience}};
  doc["input_side"] = config.input_side.value_or(DefaultInputSide(config.space));
  const SurrogateConstants& c = config.surrogate;
  doc["surrogate"] = {{"base_xception", c.base_xception},
                      {"base_mobilenetv2", c.base_mobilenetv2},
                      {"removal", c.removal},
                      {"stride", c.stride},
                      {"aspp", c.aspp},
                      {"noise", c.noise}};
  const ThroughputModel& m = config.throughput;
  doc["throughput"] = {{"conv", m.conv},
                       {"depthwise", m.depthwise},
                       {"pointwise", m.pointwise},
                       {"pool", m.pool},
                       {"upsample", m.upsample},
                       {"concat", m.concat},
                       {"batchnorm", m.batchnorm},
                       {"overhead_cycles", m.overhead_cycles}};
  json seeds = json::array();
  for (const Genome& g : config.initial_genomes) seeds.push_back(g.Canonical());
  doc["initial_genomes"] = seeds;
  return doc;
}

std::string ConfigHash(const SearchConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : ConfigToJson(config).dump()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace segnas
