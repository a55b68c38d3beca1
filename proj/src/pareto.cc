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

#include "segnas/pareto.h"

#include <algorithm>
#include <cmath>

#include "segnas/errors.h"

namespace segnas {

namespace {

bool PointLess(const FrontPoint& a, const FrontPoint& b) {
  if (a.objectives != b.objectives) return a.objectives < b.objectives;
  return a.genome < b.genome;
}

}  // namespace

std::vector<Genome> ParetoFront::Genomes() const {
  std::vector<Genome> out;
  out.reserve(points.size());
  for (const FrontPoint& p : points) out.push_back(p.genome);
  return out;
}

ParetoFront ExtractFront(std::span<const FrontPoint> points, int generation,
                         std::vector<std::string> objective_names) {
  ParetoFront front;
  front.generation = generation;
  front.objective_names = std::move(objective_names);
  if (points.empty()) return front;

  std::vector<ObjectiveVector> objectives;
  objectives.reserve(points.size());
  for (const FrontPoint& p : points) objectives.push_back(p.objectives);
  const auto fronts =
      NonDominatedSort(std::span<const ObjectiveVector>(objectives));
  for (std::size_t i : fronts.front()) front.points.push_back(points[i]);

  std::sort(front.points.begin(), front.points.end(), PointLess);
  front.points.erase(
      std::unique(front.points.begin(), front.points.end(),
                  [](const FrontPoint& a, const FrontPoint& b) {
                    return a.objectives == b.objectives;
                  }),
      front.points.end());
  return front;
}

ParetoFront ExtractFront(std::span<const Individual> individuals,
                         int generation,
                         std::vector<std::string> objective_names) {
  std::vector<FrontPoint> points;
  points.reserve(individuals.size());
  for (const Individual& ind : individuals) {
    points.push_back({ind.objectives, ind.genome});
  }
  return ExtractFront(std::span<const FrontPoint>(points), generation,
                      std::move(objective_names));
}

double Hypervolume2d(std::span<const ObjectiveVector> points,
                     const ObjectiveVector& ref) {
  if (ref.size() != 2) {
    throw MetricError("hypervolume is implemented for two objectives only");
  }
  std::vector<ObjectiveVector> sorted(points.begin(), points.end());
  for (const ObjectiveVector& p : sorted) {
    if (p.size() != 2) {
      throw MetricError("hypervolume is implemented for two objectives only");
    }
    if (std::isnan(p[0]) || std::isnan(p[1]) || !Dominates(p, ref)) {
      throw MetricError("front point does not dominate the reference point");
    }
  }
  std::sort(sorted.begin(), sorted.end());
  // Staircase: each point that lowers the running minimum of the second
  // objective adds the slab between the old and new minimum.
  double area = 0.0;
  double floor = ref[1];
  for (const ObjectiveVector& p : sorted) {
    if (p[1] >= floor) continue;
    area += (ref[0] - p[0]) * (floor - p[1]);
    floor = p[1];
  }
  return area;
}

double Hypervolume2d(const ParetoFront& front, const ObjectiveVector& ref) {
  std::vector<ObjectiveVector> points;
  points.reserve(front.points.size());
  for (const FrontPoint& p : front.points) points.push_back(p.objectives);
  return Hypervolume2d(std::span<const ObjectiveVector>(points), ref);
}

double HyperareaDifference(const ParetoFront& previous,
                           const ParetoFront& current,
                           const ObjectiveVector& ref) {
  return Hypervolume2d(current, ref) - Hypervolume2d(previous, ref);
}

ObjectiveVector ReferencePointFor(std::span<const ObjectiveVector> points,
                                  double margin) {
  if (points.empty()) throw MetricError("no points to bound");
  ObjectiveVector ref = points.front();
  for (const ObjectiveVector& p : points) {
    if (p.size() != ref.size()) {
      throw MetricError("objective vectors have different lengths");
    }
    for (std::size_t m = 0; m < p.size(); ++m) ref[m] = std::max(ref[m], p[m]);
  }
  for (double& r : ref) {
    if (r > 0.0) {
      r *= margin;
    } else if (r < 0.0) {
      r += (margin - 1.0) * -r;
    } else {
      r = 1.0;
    }
  }
  return ref;
}

std::vector<ObjectiveVector> ClipToReference(const ParetoFront& front,
                                             const ObjectiveVector& ref) {
  std::vector<ObjectiveVector> inside;
  for (const FrontPoint& p : front.points) {
    bool strictly = p.objectives.size() == ref.size();
    for (std::size_t m = 0; strictly && m < ref.size(); ++m) {
      strictly = p.objectives[m] < ref[m];
    }
    if (strictly) inside.push_back(p.objectives);
  }
  return inside;
}

std::vector<double> GeneFrequency(std::span<const Genome> genomes) {
  if (genomes.empty()) throw MetricError("gene frequency of an empty front");
  const SpaceId space = genomes.front().space();
  std::vector<double> counts(GenomeLength(space), 0.0);
  for (const Genome& g : genomes) {
    if (g.space() != space) {
      throw MetricError("gene frequency over genomes of mixed spaces");
    }
    for (int i = 0; i < g.size(); ++i) counts[i] += g.bit(i);
  }
  for (double& c : counts) c /= static_cast<double>(genomes.size());
  return counts;
}

std::vector<double> GeneFrequency(const ParetoFront& front) {
  const auto genomes = front.Genomes();
  return GeneFrequency(std::span<const Genome>(genomes));
}

}  // namespace segnas
