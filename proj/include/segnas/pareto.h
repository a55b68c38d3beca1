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

#ifndef SEGNAS_PARETO_H_
#define SEGNAS_PARETO_H_

#include <span>
#include <string>
#include <vector>

#include "segnas/genome.h"
#include "segnas/nsga2.h"

namespace segnas {

struct FrontPoint {
  ObjectiveVector objectives;
  Genome genome{SpaceId::kXception};
};

// Mutually non-dominated points sorted ascending by objective (first, then
// second, ...), ties broken by genome.
struct ParetoFront {
  std::vector<FrontPoint> points;
  int generation = 0;
  std::vector<std::string> objective_names;

  std::vector<Genome> Genomes() const;
};

// Rank-0 set of the input, deduplicated by objective vector. Among equal
// objective vectors the smallest genome is kept.
ParetoFront ExtractFront(std::span<const Individual> individuals,
                         int generation = 0,
                         std::vector<std::string> objective_names = {});
ParetoFront ExtractFront(std::span<const FrontPoint> points,
                         int generation = 0,
                         std::vector<std::string> objective_names = {});

// Area dominated by `points` and bounded by `ref` (two objectives only).
// Dominated points are allowed and contribute nothing. Throws MetricError if
// a point does not dominate the reference point or the arity is not 2.
double Hypervolume2d(std::span<const ObjectiveVector> points,
                     const ObjectiveVector& ref);
double Hypervolume2d(const ParetoFront& front, const ObjectiveVector& ref);

// HV(current) - HV(previous) under a shared reference point.
double HyperareaDifference(const ParetoFront& previous,
                           const ParetoFront& current,
                           const ObjectiveVector& ref);

// Objective-wise maximum scaled by `margin` (1.1 by default). Non-positive
// maxima are pushed up by (margin - 1), or by 1 when the maximum is zero, so
// the result always lies strictly above every input.
ObjectiveVector ReferencePointFor(std::span<const ObjectiveVector> points,
                                  double margin = 1.1);

// Points strictly inside the reference box; the rest contribute no area.
std::vector<ObjectiveVector> ClipToReference(const ParetoFront& front,
                                             const ObjectiveVector& ref);

// Fraction of genomes with bit i set, for every bit position.
std::vector<double> GeneFrequency(std::span<const Genome> genomes);
std::vector<double> GeneFrequency(const ParetoFront& front);

}  // namespace segnas

#endif  // SEGNAS_PARETO_H_
