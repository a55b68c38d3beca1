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

#ifndef SEGNAS_NSGA2_H_
#define SEGNAS_NSGA2_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "segnas/genome.h"
#include "segnas/random.h"

namespace segnas {

// All objectives are minimized. Units: error in percent, FLOPs in G,
// parameters in M, latency in M cycles.
enum class Objective { kError, kFlops, kParams, kLatency };

std::string_view ObjectiveName(Objective objective);
Objective ParseObjective(std::string_view name);

using ObjectiveVector = std::vector<double>;

struct EvalMeta {
  std::string evaluator_id;
  double subset_fraction = 0.2;
};

struct Individual {
  Genome genome{SpaceId::kXception};
  ObjectiveVector objectives;
  std::optional<int> rank;         // set by environmental selection
  std::optional<double> crowding;  // may be +inf
  EvalMeta meta;
  int born = 0;  // generation that first produced this genome
};

// Rounds to 6 decimal places so evaluator noise below that cannot create
// spurious non-dominance.
double Quantize(double value);

// a is no worse in every objective and strictly better in one.
bool Dominates(std::span<const double> a, std::span<const double> b);

// Fast non-dominated sort. Returns fronts of indices into `objectives`,
// each front in ascending index order. Throws EvaluationError on NaN or
// mismatched arity.
std::vector<std::vector<std::size_t>> NonDominatedSort(
    std::span<const ObjectiveVector> objectives);
std::vector<std::vector<std::size_t>> NonDominatedSort(
    std::span<const Individual> individuals);

// Crowding distance of every member of one front. Boundary points of each
// objective get +inf; a degenerate objective (max == min) contributes 0.
std::vector<double> CrowdingDistance(
    std::span<const ObjectiveVector> front);

// Assigns rank and crowding to every individual in place.
void RankAndCrowd(std::vector<Individual>& population);

// True if a beats b under the crowded-comparison operator. Ties return false
// both ways.
bool CrowdedLess(const Individual& a, const Individual& b);

// Binary tournament on a ranked population; returns the winner's index.
std::size_t TournamentSelect(std::span<const Individual> population,
                             Rng& rng);

// With probability `rate`, uniform crossover (each bit swapped with p=0.5);
// otherwise the parents are copied.
std::pair<Genome, Genome> Crossover(const Genome& a, const Genome& b,
                                    double rate, Rng& rng);

// Flips every bit independently with probability `per_bit_rate`.
Genome Mutate(const Genome& genome, double per_bit_rate, Rng& rng);

// Elitist truncation of a ranked pool to `size` survivors: whole fronts
// first, then the last front by descending crowding. Returns the kept indices
// in survivor order.
std::vector<std::size_t> SelectSurvivors(std::span<const Individual> pool,
                                         std::size_t size);

}  // namespace segnas

#endif  // SEGNAS_NSGA2_H_
