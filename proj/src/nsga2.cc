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

#include "segnas/nsga2.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "segnas/errors.h"

namespace segnas {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void CheckObjectives(std::span<const ObjectiveVector> objectives) {
  if (objectives.empty()) return;
  const std::size_t k = objectives.front().size();
  for (const ObjectiveVector& v : objectives) {
    if (v.size() != k) {
      throw EvaluationError("objective vectors have different lengths");
    }
    for (double x : v) {
      if (std::isnan(x)) throw EvaluationError("objective value is NaN");
    }
  }
}

std::vector<ObjectiveVector> ObjectivesOf(
    std::span<const Individual> individuals) {
  std::vector<ObjectiveVector> out;
  out.reserve(individuals.size());
  for (const Individual& ind : individuals) out.push_back(ind.objectives);
  return out;
}

}  // namespace

std::string_view ObjectiveName(Objective objective) {
  switch (objective) {
    case Objective::kError:
      return "error";
    case Objective::kFlops:
      return "flops";
    case Objective::kParams:
      return "params";
    case Objective::kLatency:
      return "latency";
  }
  return "unknown";
}

Objective ParseObjective(std::string_view name) {
  if (name == "error") return Objective::kError;
  if (name == "flops") return Objective::kFlops;
  if (name == "params") return Objective::kParams;
  if (name == "latency") return Objective::kLatency;
  throw ConfigError("unknown objective '" + std::string(name) + "'");
}

double Quantize(double value) {
  if (!std::isfinite(value)) return value;
  const double q = std::round(value * 1e6) / 1e6;
  return q == 0.0 ? 0.0 : q;  // no negative zero
}

bool Dominates(std::span<const double> a, std::span<const double> b) {
  bool strictly = false;
  for (std::size_t m = 0; m < a.size(); ++m) {
    if (a[m] > b[m]) return false;
    if (a[m] < b[m]) strictly = true;
  }
  return strictly;
}

std::vector<std::vector<std::size_t>> NonDominatedSort(
    std::span<const ObjectiveVector> objectives) {
  CheckObjectives(objectives);
  const std::size_t n = objectives.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> domination_count(n, 0);
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      if (Dominates(objectives[p], objectives[q])) {
        dominated[p].push_back(q);
      } else if (Dominates(objectives[q], objectives[p])) {
        ++domination_count[p];
      }
    }
    if (domination_count[p] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t p : current) {
      for (std::size_t q : dominated[p]) {
        if (--domination_count[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<std::vector<std::size_t>> NonDominatedSort(
    std::span<const Individual> individuals) {
  const auto objectives = ObjectivesOf(individuals);
  return NonDominatedSort(std::span<const ObjectiveVector>(objectives));
}

std::vector<double> CrowdingDistance(std::span<const ObjectiveVector> front) {
  const std::size_t n = front.size();
  std::vector<double> distance(n, 0.0);
  if (n <= 2) {
    std::fill(distance.begin(), distance.end(), kInf);
    return distance;
  }
  const std::size_t k = front.front().size();
  std::vector<std::size_t> order(n);
  for (std::size_t m = 0; m < k; ++m) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return front[a][m] < front[b][m];
                     });
    const double lo = front[order.front()][m];
    const double hi = front[order.back()][m];
    if (hi == lo) continue;
    distance[order.front()] = kInf;
    distance[order.back()] = kInf;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      distance[order[i]] +=
          (front[order[i + 1]][m] - front[order[i - 1]][m]) / (hi - lo);
    }
  }
  return distance;
}

void RankAndCrowd(std::vector<Individual>& population) {
  const auto fronts = NonDominatedSort(std::span<const Individual>(population));
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    std::vector<ObjectiveVector> members;
    members.reserve(fronts[r].size());
    for (std::size_t i : fronts[r]) members.push_back(population[i].objectives);
    const auto crowding =
        CrowdingDistance(std::span<const ObjectiveVector>(members));
    for (std::size_t j = 0; j < fronts[r].size(); ++j) {
      population[fronts[r][j]].rank = static_cast<int>(r);
      population[fronts[r][j]].crowding = crowding[j];
    }
  }
}

bool CrowdedLess(const Individual& a, const Individual& b) {
  const int ra = a.rank.value_or(std::numeric_limits<int>::max());
  const int rb = b.rank.value_or(std::numeric_limits<int>::max());
  if (ra != rb) return ra < rb;
  return a.crowding.value_or(0.0) > b.crowding.value_or(0.0);
}

std::size_t TournamentSelect(std::span<const Individual> population,
                             Rng& rng) {
  const std::size_t n = population.size();
  if (n == 0) throw Error("tournament on an empty population");
  if (n == 1) return 0;
  const std::size_t a = rng.Below(n);
  std::size_t b = rng.Below(n - 1);
  if (b >= a) ++b;
  if (CrowdedLess(population[a], population[b])) return a;
  if (CrowdedLess(population[b], population[a])) return b;
  return rng.Bernoulli(0.5) ? a : b;
}

std::pair<Genome, Genome> Crossover(const Genome& a, const Genome& b,
                                    double rate, Rng& rng) {
  if (a.space() != b.space()) {
    throw CodecError("crossover between different search spaces");
  }
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw ConfigError("crossover rate must lie in [0, 1]");
  }
  if (!rng.Bernoulli(rate)) return {a, b};
  std::uint32_t swap = 0;
  for (int i = 0; i < a.size(); ++i) {
    if (rng.Bernoulli(0.5)) swap |= 1u << i;
  }
  const std::uint32_t child_a = (a.packed() & ~swap) | (b.packed() & swap);
  const std::uint32_t child_b = (b.packed() & ~swap) | (a.packed() & swap);
  return {Genome(a.space(), child_a), Genome(a.space(), child_b)};
}

Genome Mutate(const Genome& genome, double per_bit_rate, Rng& rng) {
  if (!(per_bit_rate >= 0.0 && per_bit_rate <= 1.0)) {
    throw ConfigError("mutation rate must lie in [0, 1]");
  }
  std::uint32_t flips = 0;
  for (int i = 0; i < genome.size(); ++i) {
    if (rng.Bernoulli(per_bit_rate)) flips |= 1u << i;
  }
  return Genome(genome.space(), genome.packed() ^ flips);
}

std::vector<std::size_t> SelectSurvivors(std::span<const Individual> pool,
                                         std::size_t size) {
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return CrowdedLess(pool[a], pool[b]);
                   });
  if (order.size() > size) order.resize(size);
  return order;
}

}  // namespace segnas
