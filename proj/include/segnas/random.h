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

#ifndef SEGNAS_RANDOM_H_
#define SEGNAS_RANDOM_H_

#include <cstdint>
#include <random>
#include <string>

namespace segnas {

// Seeded 64-bit Mersenne Twister with distribution code written out by hand,
// so draws do not depend on the standard library's distribution
// implementations. The full engine state round-trips through text for
// checkpoints.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double Uniform01();
  bool Bernoulli(double p);
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t Below(std::uint64_t n);

  std::string SaveState() const;
  void LoadState(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace segnas

#endif  // SEGNAS_RANDOM_H_
