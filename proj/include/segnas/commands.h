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

#ifndef SEGNAS_COMMANDS_H_
#define SEGNAS_COMMANDS_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include "segnas/evaluator.h"
#include "segnas/search.h"

namespace segnas {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,      // bad config, arguments, or genome text
  kExitEvaluator = 3,  // evaluator or transport failure; checkpoint intact
  kExitCheckpoint = 4, // unreadable checkpoint or run archive
};

std::unique_ptr<Evaluator> MakeEvaluator(const SearchConfig& config);

// `halt_after` stops the session after that many generations in total,
// leaving a resumable run behind.
int CmdSearch(const SearchConfig& config, const std::filesystem::path& out_dir,
              std::optional<int> halt_after, std::ostream& log);
int CmdSearch(const std::filesystem::path& config_path,
              const std::filesystem::path& out_dir,
              std::optional<int> halt_after, std::ostream& log);
int CmdResume(const std::filesystem::path& out_dir,
              std::optional<int> halt_after, std::ostream& log);
int CmdDecode(const std::string& genome_text, std::optional<int> input_side,
              bool layer_csv, std::ostream& out, std::ostream& err);
// One generation's front (or all with `all`) as
// generation,genome,<cost objectives...>,error sorted by the first cost.
int CmdFront(const std::filesystem::path& out_dir,
             std::optional<int> generation, bool all, std::ostream& out,
             std::ostream& err);
int CmdGenes(const std::filesystem::path& out_dir, std::ostream& out,
             std::ostream& err);

}  // namespace segnas

#endif  // SEGNAS_COMMANDS_H_
