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

#include "segnas/search.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "segnas/errors.h"

namespace segnas {

namespace {

// Re-mutation attempts when an offspring repeats an evaluated genome.
constexpr int kNoveltyRetries = 64;

}  // namespace

std::string EvaluatorSpec::ToString() const {
  switch (kind) {
    case Kind::kSynthetic:
      return "synthetic";
    case Kind::kTable:
      return "table:" + argument;
    case Kind::kExternal:
      return "external:" + argument;
  }
  return "synthetic";
}

EvaluatorSpec EvaluatorSpec::Parse(const std::string& text) {
  EvaluatorSpec spec;
  if (text == "synthetic") return spec;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest =
      colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "table" && !rest.empty()) {
    spec.kind = Kind::kTable;
  } else if (head == "external" && !rest.empty()) {
    spec.kind = Kind::kExternal;
    spec.timeout_s = 600.0;
  } else {
    throw ConfigError("evaluator must be synthetic, table:<path> or "
                      "external:<command>, got '" + text + "'");
  }
  spec.argument = rest;
  return spec;
}

double SearchConfig::MutationRate() const {
  return mutation_rate.value_or(1.0 / GenomeLength(space));
}

std::vector<std::string> SearchConfig::ObjectiveNames() const {
  std::vector<std::string> names;
  for (Objective o : objectives) names.emplace_back(ObjectiveName(o));
  return names;
}

void SearchConfig::Validate() const {
  GenomeLength(space);
  if (objectives.empty() || objectives.size() > 4) {
    throw ConfigError("between one and four objectives are supported");
  }
  std::set<Objective> unique(objectives.begin(), objectives.end());
  if (unique.size() != objectives.size()) {
    throw ConfigError("objectives must not repeat");
  }
  if (population_size < 2) throw ConfigError("population size must be >= 2");
  if (generations < 1) throw ConfigError("generations must be >= 1");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
    throw ConfigError("crossover rate must lie in [0, 1]");
  }
  const double mutation = MutationRate();
  if (!(mutation >= 0.0 && mutation <= 1.0)) {
    throw ConfigError("mutation rate must lie in [0, 1]");
  }
  if (!(subset_fraction > 0.0 && subset_fraction <= 1.0)) {
    throw ConfigError("subset fraction must lie in (0, 1]");
  }
  if (stop.enabled) {
    if (!MetricsEnabled()) {
      throw ConfigError("the hyperarea stop rule needs exactly two objectives");
    }
    if (!(stop.epsilon >= 0.0) || stop.patience < 1) {
      throw ConfigError("stop rule needs epsilon >= 0 and patience >= 1");
    }
  }
  if (input_side && *input_side <= 0) {
    throw ConfigError("input side must be positive");
  }
  if (evaluator.workers < 1 || !(evaluator.timeout_s > 0.0) ||
      evaluator.retries < 0) {
    throw ConfigError("evaluator needs workers >= 1, timeout > 0, retries >= 0");
  }
  throughput.Validate();
  std::set<Genome> seen;
  for (const Genome& g : initial_genomes) {
    if (g.space() != space) {
      throw ConfigError("initial genome " + g.Canonical() +
                        " is from another search space");
    }
    seen.insert(g);
  }
  if (static_cast<int>(seen.size()) > population_size) {
    throw ConfigError("more initial genomes than population slots");
  }
}

std::vector<Genome> SeedPopulation(SpaceId space, int size, Rng& rng,
                                   const std::vector<Genome>& initial) {
  if (size < 2) throw ConfigError("population size must be >= 2");
  const Genome supernet = SupernetGenome(space);
  std::vector<Genome> seeds;
  std::set<Genome> seen;
  for (const Genome& g : initial) {
    if (g.space() != space) {
      throw ConfigError("initial genome is from another search space");
    }
    if (seen.insert(g).second) seeds.push_back(g);
  }
  const bool has_supernet = seen.count(supernet) > 0;
  const std::size_t random_target = has_supernet ? size : size - 1;
  if (seeds.size() > random_target) {
    throw ConfigError("more initial genomes than population slots");
  }
  const std::uint64_t space_size = 1ull << GenomeLength(space);
  seen.insert(supernet);
  while (seeds.size() < random_target) {
    const Genome g(space, static_cast<std::uint32_t>(rng.Below(space_size)));
    if (seen.insert(g).second) seeds.push_back(g);
  }
  if (!has_supernet) seeds.push_back(supernet);
  return seeds;
}

SearchEngine::SearchEngine(SearchConfig config, Evaluator& evaluator)
    : config_(std::move(config)), evaluator_(evaluator) {
  config_.Validate();
  state_.rng_state = Rng(config_.seed).SaveState();
}

SearchEngine::SearchEngine(SearchConfig config, Evaluator& evaluator,
                           SearchState state)
    : config_(std::move(config)),
      evaluator_(evaluator),
      state_(std::move(state)) {
  config_.Validate();
}

ObjectiveVector SearchEngine::ObjectivesFor(
    const Genome& genome, const EvalResponse* response) const {
  std::optional<CostReport> cost;
  auto cost_report = [&]() -> const CostReport& {
    if (!cost) cost = CostOf(genome, config_.throughput, config_.input_side);
    return *cost;
  };
  ObjectiveVector out;
  for (Objective o : config_.objectives) {
    switch (o) {
      case Objective::kError:
        out.push_back(Quantize(response->miou_error_pct));
        break;
      case Objective::kFlops:
        out.push_back(Quantize(static_cast<double>(cost_report().flops) / 1e9));
        break;
      case Objective::kParams:
        out.push_back(
            Quantize(static_cast<double>(cost_report().params) / 1e6));
        break;
      case Objective::kLatency: {
        const double cycles = response && response->latency_cycles
                                  ? *response->latency_cycles
                                  : cost_report().latency_cycles;
        out.push_back(Quantize(cycles / 1e6));
        break;
      }
    }
  }
  return out;
}

SearchEngine::Evaluated SearchEngine::EvaluateGenomes(
    const std::vector<Genome>& genomes, int generation) const {
  const bool want_error =
      std::count(config_.objectives.begin(), config_.objectives.end(),
                 Objective::kError) > 0;
  const bool want_latency =
      std::count(config_.objectives.begin(), config_.objectives.end(),
                 Objective::kLatency) > 0;
  const bool needs_evaluator = want_error || want_latency;

  std::vector<EvalResponse> responses;
  if (needs_evaluator && !genomes.empty()) {
    std::vector<EvalRequest> requests;
    requests.reserve(genomes.size());
    for (const Genome& g : genomes) {
      requests.push_back({g, config_.subset_fraction, true, want_latency});
    }
    responses = evaluator_.EvaluateBatch(requests);
    if (responses.size() != genomes.size()) {
      throw EvaluationError("evaluator returned the wrong number of results");
    }
  }

  Evaluated out;
  for (std::size_t i = 0; i < genomes.size(); ++i) {
    const EvalResponse* response = needs_evaluator ? &responses[i] : nullptr;
    if (response) {
      const double e = response->miou_error_pct;
      if (!std::isfinite(e) || e < 0.0 || e > 100.0) {
        throw EvaluationError("error for " + genomes[i].Canonical() +
                              " is outside [0, 100]");
      }
      if (response->latency_cycles &&
          !(std::isfinite(*response->latency_cycles) &&
            *response->latency_cycles >= 0.0)) {
        throw EvaluationError("latency for " + genomes[i].Canonical() +
                              " is not a non-negative number");
      }
    }
    CachedEvaluation result;
    result.objectives = ObjectivesFor(genomes[i], response);
    result.meta.evaluator_id = response ? response->evaluator_id : "cost-model";
    result.meta.subset_fraction = config_.subset_fraction;
    result.born = generation;
    out.results.push_back(std::move(result));
    out.timings.push_back(
        {genomes[i], response ? response->wall_time_ms : 0});
  }
  return out;
}

GenerationRecord SearchEngine::Step() {
  if (state_.completed) throw Error("search already completed");
  SearchState next = state_;
  Rng rng(0);
  rng.LoadState(state_.rng_state);
  const int generation = next.generation + 1;
  const std::size_t m = config_.population_size;
  const double mutation = config_.MutationRate();

  // Requested genomes for this generation, in slot order.
  std::vector<Genome> requested;
  if (generation == 1) {
    requested = SeedPopulation(config_.space, config_.population_size, rng,
                               config_.initial_genomes);
  } else {
    const double retry_rate =
        std::max(mutation, 1.0 / GenomeLength(config_.space));
    std::set<Genome> batch;
    while (requested.size() < m) {
      const std::size_t a = TournamentSelect(next.population, rng);
      const std::size_t b = TournamentSelect(next.population, rng);
      auto [first, second] =
          Crossover(next.population[a].genome, next.population[b].genome,
                    config_.crossover_rate, rng);
      for (const Genome& parent : {first, second}) {
        if (requested.size() == m) break;
        Genome child = Mutate(parent, mutation, rng);
        for (int tries = 0;
             tries < kNoveltyRetries &&
             (next.cache.count(child) || batch.count(child));
             ++tries) {
          child = Mutate(child, retry_rate, rng);
        }
        batch.insert(child);
        requested.push_back(child);
      }
    }
  }

  // Evaluate each genome not yet in the cache once.
  std::vector<Genome> fresh;
  std::set<Genome> fresh_set;
  for (const Genome& g : requested) {
    if (!next.cache.count(g) && fresh_set.insert(g).second) fresh.push_back(g);
  }
  Evaluated evaluated = EvaluateGenomes(fresh, generation);
  next.stats.requests += static_cast<std::int64_t>(requested.size());
  next.stats.unique_evaluations += static_cast<std::int64_t>(fresh.size());
  next.stats.cache_hits +=
      static_cast<std::int64_t>(requested.size() - fresh.size());
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    next.cache[fresh[i]] = evaluated.results[i];
  }

  std::vector<Individual> offspring;
  for (const Genome& g : requested) {
    const CachedEvaluation& c = next.cache.at(g);
    Individual ind;
    ind.genome = g;
    ind.objectives = c.objectives;
    ind.meta = c.meta;
    ind.born = c.born;
    offspring.push_back(std::move(ind));
  }

  GenerationRecord record;
  record.generation = generation;
  record.timings = std::move(evaluated.timings);

  std::vector<Individual> pool;
  if (generation > 1) pool = next.population;
  pool.insert(pool.end(), offspring.begin(), offspring.end());
  for (Individual& ind : pool) {
    ind.rank.reset();
    ind.crowding.reset();
  }
  RankAndCrowd(pool);
  const auto survivors = SelectSurvivors(pool, m);
  record.survived.assign(pool.size(), false);
  next.population.clear();
  for (std::size_t i : survivors) {
    record.survived[i] = true;
    next.population.push_back(pool[i]);
  }
  record.individuals = std::move(pool);

  // Cumulative archive of non-dominated points.
  std::vector<FrontPoint> candidates = next.archive;
  for (const Individual& ind : offspring) {
    candidates.push_back({ind.objectives, ind.genome});
  }
  record.front = ExtractFront(std::span<const FrontPoint>(candidates),
                              generation, config_.ObjectiveNames());
  next.archive = record.front.points;

  if (config_.MetricsEnabled()) {
    if (!next.reference) {
      std::vector<ObjectiveVector> seeds;
      for (const Individual& ind : offspring) seeds.push_back(ind.objectives);
      next.reference = ReferencePointFor(seeds);
    }
    const auto inside = ClipToReference(record.front, *next.reference);
    GenerationMetrics metrics;
    metrics.hypervolume =
        Hypervolume2d(std::span<const ObjectiveVector>(inside), *next.reference);
    metrics.front_size = record.front.points.size();
    if (!next.history.empty() && next.history.back().metrics) {
      metrics.hyperarea_difference =
          metrics.hypervolume - next.history.back().metrics->hypervolume;
    }
    record.metrics = metrics;

    if (config_.stop.enabled && generation > 1) {
      const double box = (*next.reference)[0] * (*next.reference)[1];
      if (metrics.hyperarea_difference < config_.stop.epsilon * std::abs(box)) {
        ++next.stall;
      } else {
        next.stall = 0;
      }
      if (next.stall >= config_.stop.patience) {
        next.completed = true;
        next.stop_reason = "hyperarea";
      }
    }
  }

  next.history.push_back({generation, record.front, record.metrics});
  next.generation = generation;
  if (generation >= config_.generations && !next.completed) {
    next.completed = true;
    next.stop_reason = "generations";
  }
  next.rng_state = rng.SaveState();
  state_ = std::move(next);
  return record;
}

RunArchive Evolve(const SearchConfig& config, Evaluator& evaluator) {
  SearchEngine engine(config, evaluator);
  RunArchive archive;
  archive.config = engine.config();
  while (!engine.done()) archive.records.push_back(engine.Step());
  archive.state = engine.state();
  return archive;
}

}  // namespace segnas
