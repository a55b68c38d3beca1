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

#include "segnas/commands.h"

#include <algorithm>
#include <numeric>

#include "segnas/config.h"
#include "segnas/cost_model.h"
#include "segnas/errors.h"
#include "segnas/external_evaluator.h"
#include "segnas/pareto.h"
#include "segnas/run_store.h"

namespace segnas {

namespace {

std::string Tuple(std::initializer_list<int> values) {
  std::string out = "(";
  for (int v : values) {
    if (out.size() > 1) out += ',';
    out += std::to_string(v);
  }
  return out + ")";
}

template <typename Container>
std::string Tuple(const Container& values) {
  std::string out = "(";
  for (int v : values) {
    if (out.size() > 1) out += ',';
    out += std::to_string(v);
  }
  return out + ")";
}

int RunLoop(SearchEngine& engine, const RunStore& store,
            std::optional<int> halt_after, std::ostream& log) {
  try {
    while (!engine.done()) {
      if (halt_after && engine.state().generation >= *halt_after) {
        log << "halted after generation " << engine.state().generation
            << "; continue with resume\n";
        return kExitOk;
      }
      const GenerationRecord record = engine.Step();
      store.WriteGeneration(engine.config(), record, engine.state());
      log << "generation " << record.generation << ": front "
          << record.front.points.size();
      if (record.metrics) {
        log << ", hypervolume " << FormatFixed6(record.metrics->hypervolume);
      }
      log << '\n';
    }
  } catch (const EvaluationError& e) {
    log << "evaluation failed: " << e.what()
        << "\ncheckpoint holds generation " << engine.state().generation
        << '\n';
    return kExitEvaluator;
  }
  const SearchState& s = engine.state();
  log << "done (" << s.stop_reason << "): " << s.generation
      << " generations, " << s.stats.unique_evaluations
      << " unique evaluations, " << s.stats.cache_hits << " cache hits\n";
  return kExitOk;
}

// Indices of the objectives in plotting order: costs first, error last.
std::vector<std::size_t> PlotOrder(const SearchConfig& config) {
  std::vector<std::size_t> order;
  std::optional<std::size_t> error;
  for (std::size_t i = 0; i < config.objectives.size(); ++i) {
    if (config.objectives[i] == Objective::kError) {
      error = i;
    } else {
      order.push_back(i);
    }
  }
  if (error) order.push_back(*error);
  return order;
}

void WriteFrontRows(const GenerationSummary& summary,
                    const std::vector<std::size_t>& order, std::ostream& out) {
  std::vector<FrontPoint> points = summary.front.points;
  std::stable_sort(points.begin(), points.end(),
                   [&](const FrontPoint& a, const FrontPoint& b) {
                     for (std::size_t m : order) {
                       if (a.objectives[m] != b.objectives[m]) {
                         return a.objectives[m] < b.objectives[m];
                       }
                     }
                     return false;
                   });
  for (const FrontPoint& p : points) {
    out << summary.generation << ',' << p.genome.Canonical();
    for (std::size_t m : order) out << ',' << FormatFixed6(p.objectives[m]);
    out << '\n';
  }
}

}  // namespace

std::unique_ptr<Evaluator> MakeEvaluator(const SearchConfig& config) {
  switch (config.evaluator.kind) {
    case EvaluatorSpec::Kind::kSynthetic:
      return std::make_unique<SyntheticEvaluator>(
          config.surrogate, config.throughput, config.input_side);
    case EvaluatorSpec::Kind::kTable:
      return std::make_unique<TableEvaluator>(
          TableEvaluator::FromCsv(config.evaluator.argument));
    case EvaluatorSpec::Kind::kExternal: {
      ExternalEvaluatorOptions options;
      options.command = config.evaluator.argument;
      options.space = config.space;
      options.workers = config.evaluator.workers;
      options.timeout_s = config.evaluator.timeout_s;
      options.retries = config.evaluator.retries;
      return std::make_unique<ExternalEvaluator>(options);
    }
  }
  throw ConfigError("unknown evaluator kind");
}

int CmdSearch(const SearchConfig& config, const std::filesystem::path& out_dir,
              std::optional<int> halt_after, std::ostream& log) {
  const RunStore store(out_dir);
  std::unique_ptr<Evaluator> evaluator;
  try {
    config.Validate();
    store.Initialize(config);
  } catch (const ConfigError& e) {
    log << "invalid config: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    evaluator = MakeEvaluator(config);
  } catch (const ConfigError& e) {
    log << "invalid config: " << e.what() << '\n';
    return kExitUsage;
  } catch (const EvaluationError& e) {
    log << "cannot start evaluator: " << e.what() << '\n';
    return kExitEvaluator;
  }
  SearchEngine engine(config, *evaluator);
  return RunLoop(engine, store, halt_after, log);
}

int CmdSearch(const std::filesystem::path& config_path,
              const std::filesystem::path& out_dir,
              std::optional<int> halt_after, std::ostream& log) {
  SearchConfig config;
  try {
    config = LoadConfigFile(config_path.string());
  } catch (const ConfigError& e) {
    log << "invalid config: " << e.what() << '\n';
    return kExitUsage;
  }
  return CmdSearch(config, out_dir, halt_after, log);
}

int CmdResume(const std::filesystem::path& out_dir,
              std::optional<int> halt_after, std::ostream& log) {
  const RunStore store(out_dir);
  SearchConfig config;
  SearchState state;
  try {
    config = store.LoadConfig();
    state = store.LoadCheckpoint(ConfigHash(config));
  } catch (const ConfigError& e) {
    log << "refusing to resume: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CheckpointError& e) {
    log << "cannot resume: " << e.what() << '\n';
    return kExitCheckpoint;
  }
  if (state.completed) {
    log << "run already completed (" << state.stop_reason << ")\n";
    return kExitOk;
  }
  std::unique_ptr<Evaluator> evaluator;
  try {
    evaluator = MakeEvaluator(config);
  } catch (const ConfigError& e) {
    log << "invalid config: " << e.what() << '\n';
    return kExitUsage;
  } catch (const EvaluationError& e) {
    log << "cannot start evaluator: " << e.what() << '\n';
    return kExitEvaluator;
  }
  SearchEngine engine(config, *evaluator, std::move(state));
  log << "resuming after generation " << engine.state().generation << '\n';
  return RunLoop(engine, store, halt_after, log);
}

int CmdDecode(const std::string& genome_text, std::optional<int> input_side,
              bool layer_csv, std::ostream& out, std::ostream& err) {
  Genome genome(SpaceId::kXception);
  try {
    genome = Genome::Parse(genome_text);
  } catch (const CodecError& e) {
    err << "cannot parse genome: " << e.what() << '\n';
    return kExitUsage;
  }
  if (input_side && *input_side <= 0) {
    err << "input side must be positive\n";
    return kExitUsage;
  }
  const Architecture arch = Decode(genome);
  const LayerGraph graph = BuildLayerGraph(arch, input_side);
  const CostReport cost = ComputeCost(graph, ThroughputModel{});
  if (layer_csv) {
    WriteLayerCsv(graph, cost, out);
    return kExitOk;
  }
  out << "genome: " << genome.Canonical() << '\n';
  if (const auto* x = std::get_if<XceptionArch>(&arch)) {
    out << "entry_stride: " << x->entry_stride << '\n'
        << "middle_atrous: " << x->middle_atrous << '\n'
        << "exit_atrous: "
        << Tuple({x->exit_atrous.first, x->exit_atrous.second}) << '\n'
        << "aspp_rates: " << Tuple(x->aspp_rates) << '\n'
        << "middle_blocks: " << MaskString(*x) << '\n'
        << "active_blocks: " << x->ActiveBlocks() << '\n';
  } else {
    const auto& m = std::get<MobileNetV2Arch>(arch);
    out << "strides: " << Tuple(m.strides) << '\n'
        << "dilations: " << Tuple(m.dilations) << '\n'
        << "group_layers: " << GroupString(m) << '\n'
        << "active_layers: " << m.ActiveLayers() << '\n';
  }
  out << "input_side: " << graph.input_side << '\n'
      << "layers: " << graph.layers.size() << '\n'
      << "params: " << cost.params << " ("
      << FormatFixed6(static_cast<double>(cost.params) / 1e6) << " M)\n"
      << "flops: " << cost.flops << " ("
      << FormatFixed6(static_cast<double>(cost.flops) / 1e9) << " G)\n"
      << "latency_cycles: " << FormatFixed6(cost.latency_cycles) << " ("
      << FormatFixed6(cost.latency_cycles / 1e6) << " M)\n";
  return kExitOk;
}

int CmdFront(const std::filesystem::path& out_dir,
             std::optional<int> generation, bool all, std::ostream& out,
             std::ostream& err) {
  const RunStore store(out_dir);
  SearchConfig config;
  SearchState state;
  try {
    config = store.LoadConfig();
    state = store.LoadCheckpoint(ConfigHash(config));
  } catch (const Error& e) {
    err << "no run archive: " << e.what() << '\n';
    return kExitUsage;
  }
  if (state.history.empty()) {
    err << "run archive holds no generations\n";
    return kExitUsage;
  }
  const auto order = PlotOrder(config);
  out << "generation,genome";
  for (std::size_t m : order) {
    out << ',' << ObjectiveName(config.objectives[m]);
  }
  out << '\n';
  if (all) {
    for (const GenerationSummary& s : state.history) {
      WriteFrontRows(s, order, out);
    }
    return kExitOk;
  }
  const int wanted = generation.value_or(state.history.back().generation);
  for (const GenerationSummary& s : state.history) {
    if (s.generation == wanted) {
      WriteFrontRows(s, order, out);
      return kExitOk;
    }
  }
  err << "generation " << wanted << " is not recorded\n";
  return kExitUsage;
}

int CmdGenes(const std::filesystem::path& out_dir, std::ostream& out,
             std::ostream& err) {
  const RunStore store(out_dir);
  SearchConfig config;
  SearchState state;
  try {
    config = store.LoadConfig();
    state = store.LoadCheckpoint(ConfigHash(config));
  } catch (const Error& e) {
    err << "no run archive: " << e.what() << '\n';
    return kExitUsage;
  }
  if (state.history.empty() || state.history.back().front.points.empty()) {
    err << "run archive holds no front\n";
    return kExitUsage;
  }
  if (!state.completed) {
    err << "warning: run is not complete; using generation "
        << state.generation << '\n';
  }
  const ParetoFront& front = state.history.back().front;
  const auto frequency = GeneFrequency(front);
  const auto labels = BitLabels(config.space);
  out << "bit,label,frequency\n";
  for (std::size_t i = 0; i < frequency.size(); ++i) {
    out << i << ',' << labels[i] << ',' << FormatFixed6(frequency[i]) << '\n';
  }
  return kExitOk;
}

}  // namespace segnas
