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

#ifndef SEGNAS_RUN_STORE_H_
#define SEGNAS_RUN_STORE_H_

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "segnas/search.h"

namespace segnas {

// On-disk layout of one run directory:
//
//   run.json          normalized config and its hash
//   gen_NNNN.jsonl    every individual ranked in generation NNNN
//   fronts.csv        archive front of every generation
//   metrics.csv       hypervolume, hyperarea difference, front size
//   timings.csv       evaluator wall time (excluded from replay checks)
//   checkpoint.json   full engine state after the last finished generation
//
// Objective values in CSV files carry exactly 6 decimal places.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }

  // Creates the directory and writes run.json. Refuses a directory that
  // already holds a run.
  void Initialize(const SearchConfig& config) const;

  // Config from run.json. Throws ConfigError if the stored hash does not
  // match the stored document, CheckpointError if the file is unreadable.
  SearchConfig LoadConfig() const;
  std::string StoredConfigHash() const;

  // Writes the generation file, rewrites fronts/metrics from the state
  // history, and replaces the checkpoint atomically (written last).
  void WriteGeneration(const SearchConfig& config,
                       const GenerationRecord& record,
                       const SearchState& state) const;

  bool HasCheckpoint() const;
  // Throws CheckpointError on a missing or unreadable file and ConfigError if
  // it was written for a different config.
  SearchState LoadCheckpoint(const std::string& expected_config_hash) const;

 private:
  std::filesystem::path dir_;
};

nlohmann::json StateToJson(const SearchState& state,
                           const std::string& config_hash);
SearchState StateFromJson(const nlohmann::json& doc);

// Both ordered by generation; objective columns follow the config order.
std::string FrontsCsv(const SearchConfig& config, const SearchState& state);
std::string MetricsCsv(const SearchState& state);

std::string FormatFixed6(double value);

}  // namespace segnas

#endif  // SEGNAS_RUN_STORE_H_
