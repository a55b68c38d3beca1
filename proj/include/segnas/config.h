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

#ifndef SEGNAS_CONFIG_H_
#define SEGNAS_CONFIG_H_

#include <string>

#include "json.hpp"
#include "segnas/search.h"

namespace segnas {

// Search configuration document. Every key is optional except "space";
// unknown keys are rejected.
//
//   {
//     "space": "xception" | "mobilenetv2",
//     "objectives": ["error", "flops"],      // error|flops|params|latency
//     "population_size": 12,
//     "generations": 20,
//     "seed": 0,
//     "crossover_rate": 0.9,
//     "mutation_rate": null,                  // null = 1 / genome length
//     "subset_fraction": 0.2,
//     "evaluator": "synthetic" | {"spec": "table:<path>" |
//                  "external:<command>", "workers": 1, "timeout_s": 600,
//                  "retries": 1},
//     "stop_rule": {"enabled": false, "epsilon": 1e-4, "patience": 3},
//     "input_side": null,
//     "surrogate": {"base_xception": 23.14, "base_mobilenetv2": 33.03,
//                   "removal": 0.6, "stride": 2.0, "aspp": 0.3,
//                   "noise": 0.2},
//     "throughput": {"conv": 1, "depthwise": 0.25, "pointwise": 1,
//                    "pool": 1, "upsample": 1, "concat": 1,
//                    "batchnorm": 1, "overhead_cycles": 10000},
//     "initial_genomes": ["xception:0000..."]
//   }
SearchConfig ConfigFromJson(const nlohmann::json& doc);
SearchConfig LoadConfigFile(const std::string& path);

// Fully populated document with every default spelled out.
nlohmann::json ConfigToJson(const SearchConfig& config);

// 64-bit FNV-1a of the normalized document, as 16 hex digits.
std::string ConfigHash(const SearchConfig& config);

}  // namespace segnas

#endif  // SEGNAS_CONFIG_H_
