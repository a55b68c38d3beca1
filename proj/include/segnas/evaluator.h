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

#ifndef SEGNAS_EVALUATOR_H_
#define SEGNAS_EVALUATOR_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "segnas/cost_model.h"
#include "segnas/genome.h"

namespace segnas {

struct EvalRequest {
  Genome genome{SpaceId::kXception};
  double subset_fraction = 0.2;
  bool want_error = true;
  bool want_latency = false;
};

struct EvalResponse {
  double miou_error_pct = 0.0;
  std::optional<double> latency_cycles;
  std::string evaluator_id;
  std::int64_t wall_time_ms = 0;
};

// Throws EvaluationError for a fraction outside (0, 1].
void ValidateRequest(const EvalRequest& request);

// Accuracy (and optionally latency) oracle for candidate genomes.
// Implementations must be safe to call from `capacity()` threads at once.
class Evaluator {
 public:
  virtual ~Evaluator() = default;

  virtual std::string id() const = 0;
  virtual int capacity() const { return 1; }
  virtual EvalResponse Evaluate(const EvalRequest& request) = 0;

  // Responses in request order. The default runs up to capacity() requests
  // concurrently on worker threads.
  virtual std::vector<EvalResponse> EvaluateBatch(
      std::span<const EvalRequest> requests);
};

// Closed-form stand-in for supernet accuracy:
//   error = base(space) + removal * removed layers + stride * excess^2
//           - aspp * [large ASPP rates] + noise * u(genome)
// clamped to [0, 100], with u(genome) in [-1, 1) derived from a hash of the
// canonical genome text. For Xception the stride excess is
// max(0, entry_stride - 2); for MobileNetV2 it is the summed squared excess of
// each stride over its supernet value and the ASPP term does not apply.
struct SurrogateConstants {
  double base_xception = 23.14;
  double base_mobilenetv2 = 33.03;
  double removal = 0.6;
  double stride = 2.0;
  double aspp = 0.3;
  double noise = 0.2;

  friend bool operator==(const SurrogateConstants&,
                         const SurrogateConstants&) = default;
};

// 64-bit FNV-1a of the canonical genome text mapped to [-1, 1).
double HashNoise(const Genome& genome);

double SurrogateError(const Genome& genome, const SurrogateConstants& c);

class SyntheticEvaluator : public Evaluator {
 public:
  explicit SyntheticEvaluator(SurrogateConstants constants = {},
                              ThroughputModel throughput = {},
                              std::optional<int> input_side = std::nullopt);

  std::string id() const override { return "synthetic"; }
  int capacity() const override { return 1; }
  EvalResponse Evaluate(const EvalRequest& request) override;
  std::vector<EvalResponse> EvaluateBatch(
      std::span<const EvalRequest> requests) override;

  const SurrogateConstants& constants() const { return constants_; }

 private:
  SurrogateConstants constants_;
  ThroughputModel throughput_;
  std::optional<int> input_side_;
};

// Looks results up in a CSV with header
//   genome,subset_fraction,miou_error_pct[,latency_cycles]
class TableEvaluator : public Evaluator {
 public:
  static TableEvaluator FromCsv(const std::string& path);
  static TableEvaluator FromCsvText(const std::string& text,
                                    std::string id = "table");

  std::string id() const override { return id_; }
  int capacity() const override { return 64; }
  EvalResponse Evaluate(const EvalRequest& request) override;
  std::vector<EvalResponse> EvaluateBatch(
      std::span<const EvalRequest> requests) override;

  std::size_t size() const { return rows_.size(); }

 private:
  struct Row {
    double miou_error_pct;
    std::optional<double> latency_cycles;
  };
  // Keyed by canonical genome and fraction in millionths.
  using Key = std::pair<std::string, std::int64_t>;

  TableEvaluator() = default;
  static Key KeyOf(const std::string& genome, double fraction);

  std::string id_;
  std::map<Key, Row> rows_;
};

}  // namespace segnas

#endif  // SEGNAS_EVALUATOR_H_
