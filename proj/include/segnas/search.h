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

#ifndef SEGNAS_SEARCH_H_
#define SEGNAS_SEARCH_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "segnas/cost_model.h"
#include "segnas/evaluator.h"
#include "segnas/genome.h"
#include "segnas/nsga2.h"
#include "segnas/pareto.h"
#include "segnas/random.h"

namespace segnas {

struct StopRule {
  bool enabled = false;
  // Fraction of the reference box area below which a generation counts as
  // stalled.
  double epsilon = 1e-4;
  int patience = 3;
};

struct EvaluatorSpec {
  enum class Kind { kSynthetic, kTable, kExternal };
  Kind kind = Kind::kSynthetic;
  std::string argument;  // table path or worker command
  int workers = 1;
  double timeout_s = 1.0;
  int retries = 1;

  // "synthetic", "table:<path>", "external:<command>".
  std::string ToString() const;
  static EvaluatorSpec Parse(const std::string& text);
};

struct SearchConfig {
  SpaceId space = SpaceId::kXception;
  std::vector<Objective> objectives = {Objective::kError, Objective::kFlops};
  int population_size = 12;
  int generations = 20;
  std::uint64_t seed = 0;
  double crossover_rate = 0.9;
  std::optional<double> mutation_rate;  // 1 / genome length when unset
  double subset_fraction = 0.2;
  EvaluatorSpec evaluator;
  StopRule stop;
  std::optional<int> input_side;
  SurrogateConstants surrogate;
  ThroughputModel throughput;
  // Genomes placed in the initial population ahead of the random draws.
  std::vector<Genome> initial_genomes;

  double MutationRate() const;
  bool MetricsEnabled() const { return objectives.size() == 2; }
  std::vector<std::string> ObjectiveNames() const;
  // Throws ConfigError describing the first violated constraint.
  void Validate() const;
};

// M-1 distinct genomes (the `initial` ones first, then uniform random draws)
// followed by the supernet genome.
std::vector<Genome> SeedPopulation(SpaceId space, int size, Rng& rng,
                                   const std::vector<Genome>& initial = {});

struct GenerationMetrics {
  double hypervolume = 0.0;
  double hyperarea_difference = 0.0;
  std::size_t front_size = 0;
};

struct CachedEvaluation {
  ObjectiveVector objectives;
  EvalMeta meta;
  int born = 0;
};

struct EvaluationStats {
  std::int64_t requests = 0;
  std::int64_t cache_hits = 0;
  std::int64_t unique_evaluations = 0;
};

// Per-generation summary kept in the checkpoint.
struct GenerationSummary {
  int generation = 0;
  ParetoFront front;
  std::optional<GenerationMetrics> metrics;
};

// Everything needed to continue a run exactly where it stopped.
struct SearchState {
  int generation = 0;  // completed generations
  std::vector<Individual> population;
  std::map<Genome, CachedEvaluation> cache;
  std::vector<FrontPoint> archive;
  std::optional<ObjectiveVector> reference;
  int stall = 0;
  bool completed = false;
  std::string stop_reason;
  EvaluationStats stats;
  std::string rng_state;
  std::vector<GenerationSummary> history;
};

struct EvaluationTiming {
  Genome genome{SpaceId::kXception};
  std::int64_t wall_time_ms = 0;
};

struct GenerationRecord {
  int generation = 0;
  // Parents and offspring ranked together; generation 1 holds the seeds.
  std::vector<Individual> individuals;
  std::vector<bool> survived;
  ParetoFront front;  // cumulative non-dominated archive
  std::optional<GenerationMetrics> metrics;
  std::vector<EvaluationTiming> timings;
};

// mu+lambda NSGA-II over genomes. All random draws happen on the calling
// thread; evaluation batches may run in parallel inside the evaluator.
class SearchEngine {
 public:
  SearchEngine(SearchConfig config, Evaluator& evaluator);
  SearchEngine(SearchConfig config, Evaluator& evaluator, SearchState state);

  bool done() const { return state_.completed; }
  const SearchState& state() const { return state_; }
  const SearchConfig& config() const { return config_; }

  // Runs the next generation. State is committed only if the generation
  // finishes, so an evaluator failure leaves the previous state intact.
  GenerationRecord Step();

 private:
  struct Evaluated {
    std::vector<CachedEvaluation> results;
    std::vector<EvaluationTiming> timings;
  };

  Evaluated EvaluateGenomes(const std::vector<Genome>& genomes,
                            int generation) const;
  ObjectiveVector ObjectivesFor(const Genome& genome,
                                const EvalResponse* response) const;

  SearchConfig config_;
  Evaluator& evaluator_;
  SearchState state_;
};

// In-memory result of a complete run.
struct RunArchive {
  SearchConfig config;
  std::vector<GenerationRecord> records;
  SearchState state;
};

RunArchive Evolve(const SearchConfig& config, Evaluator& evaluator);

}  // namespace segnas

#endif  // SEGNAS_SEARCH_H_
