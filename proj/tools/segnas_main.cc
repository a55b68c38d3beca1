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

// Command-line front end:
//
//   segnas search --config <file> --out <dir> [--halt-after N]
//   segnas resume --out <dir> [--halt-after N]
//   segnas decode <genome> [--input-side N] [--layers]
//   segnas front --out <dir> [--generation N] [--all]
//   segnas genes --out <dir>

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "segnas/commands.h"

namespace {

template <typename T>
std::optional<T> IfSet(const CLI::Option* option, const T& value) {
  if (option->count() == 0) return std::nullopt;
  return value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-objective architecture search over DeepLabV3+ subnets"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int halt_after = 0;
  auto* search = app.add_subcommand("search", "run a new search");
  search->add_option("--config", config_path, "search config (JSON)")
      ->required();
  search->add_option("--out", out_dir, "run directory")->required();
  auto* search_halt = search->add_option(
      "--halt-after", halt_after, "stop after this many generations");

  auto* resume = app.add_subcommand("resume", "continue an interrupted run");
  resume->add_option("--out", out_dir, "run directory")->required();
  auto* resume_halt = resume->add_option(
      "--halt-after", halt_after, "stop after this many generations");

  std::string genome;
  int input_side = 0;
  bool layers = false;
  auto* decode = app.add_subcommand("decode", "print architecture and cost");
  decode->add_option("genome", genome, "<space>:<bits>")->required();
  auto* side_option =
      decode->add_option("--input-side", input_side, "input image side");
  decode->add_flag("--layers", layers, "per-layer CSV instead of a summary");

  int generation = 0;
  bool all = false;
  auto* front = app.add_subcommand("front", "emit front plot data as CSV");
  front->add_option("--out", out_dir, "run directory")->required();
  auto* generation_option =
      front->add_option("--generation", generation, "generation to emit");
  front->add_flag("--all", all, "every generation, tagged");

  auto* genes = app.add_subcommand("genes", "gene frequency of the final front");
  genes->add_option("--out", out_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : segnas::kExitUsage;
  }

  try {
    if (*search) {
      return segnas::CmdSearch(config_path, out_dir,
                               IfSet(search_halt, halt_after), std::cerr);
    }
    if (*resume) {
      return segnas::CmdResume(out_dir, IfSet(resume_halt, halt_after),
                               std::cerr);
    }
    if (*decode) {
      return segnas::CmdDecode(genome, IfSet(side_option, input_side), layers,
                               std::cout, std::cerr);
    }
    if (*front) {
      return segnas::CmdFront(out_dir, IfSet(generation_option, generation),
                              all, std::cout, std::cerr);
    }
    if (*genes) return segnas::CmdGenes(out_dir, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return segnas::kExitUsage;
}
