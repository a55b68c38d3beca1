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

#ifndef SEGNAS_COST_MODEL_H_
#define SEGNAS_COST_MODEL_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "segnas/genome.h"

namespace segnas {

enum class LayerKind {
  kConv,
  kDepthwiseConv,
  kPointwiseConv,
  kPool,
  kUpsample,
  kConcat,
  kBatchNorm,
};

std::string_view LayerKindName(LayerKind kind);

struct Spatial {
  std::int64_t h = 0;
  std::int64_t w = 0;
  friend bool operator==(const Spatial&, const Spatial&) = default;
};

struct LayerRecord {
  std::string name;
  LayerKind kind = LayerKind::kConv;
  int kh = 1;
  int kw = 1;
  std::int64_t in_channels = 0;
  std::int64_t out_channels = 0;
  int stride = 1;
  int dilation = 1;
  Spatial in_spatial;
  Spatial out_spatial;
  bool bias = false;
};

// Layers in execution order. Branches (ASPP, decoder skip) are flattened, so
// each record carries its own input shape rather than relying on its
// predecessor.
struct LayerGraph {
  SpaceId space = SpaceId::kXception;
  int input_side = 0;
  std::vector<LayerRecord> layers;
};

// 513 for Xception, 384 for MobileNetV2.
int DefaultInputSide(SpaceId space);

// Output side of a same-padded strided op: ceil(in / stride).
std::int64_t SamePaddedSide(std::int64_t in, int stride);

LayerGraph BuildLayerGraph(const Architecture& arch,
                           std::optional<int> input_side = std::nullopt);

std::int64_t LayerParams(const LayerRecord& layer);
std::int64_t LayerFlops(const LayerRecord& layer);
std::int64_t CountParams(const LayerGraph& graph);
std::int64_t CountFlops(const LayerGraph& graph);

// Multiply-accumulates per cycle for each layer kind plus a fixed per-layer
// overhead. Defaults are placeholders, not measurements of any device.
struct ThroughputModel {
  double conv = 1.0;
  double depthwise = 0.25;
  double pointwise = 1.0;
  double pool = 1.0;
  double upsample = 1.0;
  double concat = 1.0;
  double batchnorm = 1.0;
  double overhead_cycles = 10000.0;

  double For(LayerKind kind) const;
  // Throws ConfigError on non-positive throughput or negative overhead.
  void Validate() const;
};

double LayerCycles(const LayerRecord& layer, const ThroughputModel& model);
double LatencyProxy(const LayerGraph& graph, const ThroughputModel& model);

struct LayerCost {
  std::int64_t params = 0;
  std::int64_t flops = 0;
  double cycles = 0.0;
};

struct CostReport {
  std::int64_t flops = 0;
  std::int64_t params = 0;
  double latency_cycles = 0.0;
  std::vector<LayerCost> per_layer;
};

CostReport ComputeCost(const LayerGraph& graph, const ThroughputModel& model);

// Convenience: decode, build at the default (or given) side, and cost.
CostReport CostOf(const Genome& genome, const ThroughputModel& model,
                  std::optional<int> input_side = std::nullopt);

// index,kind,kh,kw,cin,cout,stride,dilation,hout,wout,params,flops,cycles
void WriteLayerCsv(const LayerGraph& graph, const CostReport& report,
                   std::ostream& out);

}  // namespace segnas

#endif  // SEGNAS_COST_MODEL_H_
