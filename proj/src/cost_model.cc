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

#include "segnas/cost_model.h"

#include <cstdio>
#include <string>

#include "segnas/errors.h"

namespace segnas {

namespace {

constexpr int kNumClasses = 21;

struct Tensor {
  std::int64_t channels = 0;
  Spatial spatial;
};

// Appends layer records while threading tensor shapes through the network.
class GraphBuilder {
 public:
  explicit GraphBuilder(LayerGraph* graph) : graph_(graph) {}

  Tensor Conv(const Tensor& in, const std::string& name, int kernel,
              std::int64_t filters, int stride = 1, int dilation = 1,
              bool bias = false) {
    const LayerKind kind =
        kernel == 1 ? LayerKind::kPointwiseConv : LayerKind::kConv;
    return Add(in, name, kind, kernel, filters, stride, dilation, bias);
  }

  Tensor Depthwise(const Tensor& in, const std::string& name, int stride = 1,
                   int dilation = 1) {
    return Add(in, name, LayerKind::kDepthwiseConv, 3, in.channels, stride,
               dilation, false);
  }

  Tensor BatchNorm(const Tensor& in, const std::string& name) {
    return Add(in, name, LayerKind::kBatchNorm, 1, in.channels, 1, 1, false);
  }

  Tensor GlobalPool(const Tensor& in, const std::string& name) {
    LayerRecord r = Base(in, name, LayerKind::kPool);
    r.kh = static_cast<int>(in.spatial.h);
    r.kw = static_cast<int>(in.spatial.w);
    r.out_channels = in.channels;
    r.out_spatial = {1, 1};
    return Push(r);
  }

  Tensor Upsample(const Tensor& in, const std::string& name, Spatial to) {
    LayerRecord r = Base(in, name, LayerKind::kUpsample);
    r.out_channels = in.channels;
    r.out_spatial = to;
    return Push(r);
  }

  Tensor Concat(const std::vector<Tensor>& inputs, const std::string& name) {
    LayerRecord r = Base(inputs.front(), name, LayerKind::kConcat);
    r.in_channels = 0;
    for (const Tensor& t : inputs) r.in_channels += t.channels;
    r.out_channels = r.in_channels;
    r.out_spatial = inputs.front().spatial;
    return Push(r);
  }

  // Depthwise 3x3 + BN + pointwise + BN.
  Tensor SepConvBn(const Tensor& in, const std::string& name,
                   std::int64_t filters, int stride = 1, int dilation = 1) {
    Tensor x = Depthwise(in, name + "_depthwise", stride, dilation);
    x = BatchNorm(x, name + "_depthwise_BN");
    x = Conv(x, name + "_pointwise", 1, filters);
    return BatchNorm(x, name + "_pointwise_BN");
  }

 private:
  LayerRecord Base(const Tensor& in, const std::string& name, LayerKind kind) {
    LayerRecord r;
    r.name = name;
    r.kind = kind;
    r.in_channels = in.channels;
    r.in_spatial = in.spatial;
    return r;
  }

  Tensor Add(const Tensor& in, const std::string& name, LayerKind kind,
             int kernel, std::int64_t filters, int stride, int dilation,
             bool bias) {
    LayerRecord r = Base(in, name, kind);
    r.kh = r.kw = kernel;
    r.out_channels = filters;
    r.stride = stride;
    r.dilation = dilation;
    r.bias = bias;
    r.out_spatial = {SamePaddedSide(in.spatial.h, stride),
                     SamePaddedSide(in.spatial.w, stride)};
    return Push(r);
  }

  Tensor Push(const LayerRecord& r) {
    graph_->layers.push_back(r);
    return Tensor{r.out_channels, r.out_spatial};
  }

  LayerGraph* graph_;
};

enum class Skip { kConv, kSum, kNone };

struct BlockOutput {
  Tensor out;
  Tensor skip;  // output of the second separable conv
};

// Three separable convs; the last one carries the stride. The residual path
// is a strided 1x1 conv + BN, an identity add, or absent.
BlockOutput XceptionBlock(GraphBuilder& b, const Tensor& in,
                          const std::string& prefix,
                          const std::array<std::int64_t, 3>& depths, Skip skip,
                          int stride, int rate = 1) {
  Tensor x = in;
  Tensor second;
  for (int i = 0; i < 3; ++i) {
    x = b.SepConvBn(x, prefix + "_separable_conv" + std::to_string(i + 1),
                    depths[i], i == 2 ? stride : 1, rate);
    if (i == 1) second = x;
  }
  if (skip == Skip::kConv) {
    Tensor shortcut = b.Conv(in, prefix + "_shortcut", 1, depths[2], stride);
    b.BatchNorm(shortcut, prefix + "_shortcut_BN");
  }
  return {x, second};
}

LayerGraph BuildXception(const XceptionArch& arch, int side) {
  LayerGraph graph;
  graph.space = SpaceId::kXception;
  graph.input_side = side;
  GraphBuilder b(&graph);

  Tensor x{3, {side, side}};
  x = b.Conv(x, "entry_flow_conv1_1", 3, 32, 2);
  x = b.BatchNorm(x, "entry_flow_conv1_1_BN");
  x = b.Conv(x, "entry_flow_conv1_2", 3, 64);
  x = b.BatchNorm(x, "entry_flow_conv1_2_BN");
  x = XceptionBlock(b, x, "entry_flow_block1", {128, 128, 128}, Skip::kConv, 2)
          .out;
  const BlockOutput block2 = XceptionBlock(b, x, "entry_flow_block2",
                                           {256, 256, 256}, Skip::kConv, 2);
  const Tensor low_level = block2.skip;
  x = XceptionBlock(b, block2.out, "entry_flow_block3", {728, 728, 728},
                    Skip::kConv, arch.entry_stride)
          .out;

  for (int i = 0; i < 16; ++i) {
    if (!arch.middle_blocks[i]) continue;
    x = XceptionBlock(b, x, "middle_flow_unit_" + std::to_string(i + 1),
                      {728, 728, 728}, Skip::kSum, 1, arch.middle_atrous)
            .out;
  }

  x = XceptionBlock(b, x, "exit_flow_block1", {728, 1024, 1024}, Skip::kConv,
                    1, arch.exit_atrous.first)
          .out;
  x = XceptionBlock(b, x, "exit_flow_block2", {1536, 1536, 2048}, Skip::kNone,
                    1, arch.exit_atrous.second)
          .out;

  // ASPP: image pooling, 1x1, and three atrous separable branches.
  Tensor pooled = b.GlobalPool(x, "aspp_image_pooling");
  pooled = b.Conv(pooled, "aspp_image_pooling_conv", 1, 256);
  pooled = b.BatchNorm(pooled, "aspp_image_pooling_BN");
  pooled = b.Upsample(pooled, "aspp_image_pooling_upsample", x.spatial);
  Tensor aspp0 = b.Conv(x, "aspp0", 1, 256);
  aspp0 = b.BatchNorm(aspp0, "aspp0_BN");
  std::vector<Tensor> branches = {pooled, aspp0};
  for (int i = 0; i < 3; ++i) {
    branches.push_back(b.SepConvBn(x, "aspp" + std::to_string(i + 1), 256, 1,
                                   arch.aspp_rates[i]));
  }
  x = b.Concat(branches, "aspp_concat");
  x = b.Conv(x, "concat_projection", 1, 256);
  x = b.BatchNorm(x, "concat_projection_BN");

  // Decoder at output stride 4.
  x = b.Upsample(x, "decoder_upsample", low_level.spatial);
  Tensor skip = b.Conv(low_level, "feature_projection0", 1, 48);
  skip = b.BatchNorm(skip, "feature_projection0_BN");
  x = b.Concat({x, skip}, "decoder_concat");
  x = b.SepConvBn(x, "decoder_conv0", 256);
  x = b.SepConvBn(x, "decoder_conv1", 256);
  x = b.Conv(x, "logits_semantic", 1, kNumClasses, 1, 1, /*bias=*/true);
  b.Upsample(x, "logits_upsample", {side, side});
  return graph;
}

// Inverted residual blocks of the output-stride-8 MobileNetV2 backbone.
struct BottleneckSpec {
  std::int64_t filters;
  int expansion;
};

constexpr std::array<BottleneckSpec, 17> kBottlenecks = {{
    {16, 1},
    {24, 6}, {24, 6},
    {32, 6}, {32, 6}, {32, 6},
    {64, 6}, {64, 6}, {64, 6}, {64, 6},
    {96, 6}, {96, 6}, {96, 6},
    {160, 6}, {160, 6}, {160, 6},
    {320, 6},
}};

// First bottleneck of each channel group.
constexpr std::array<int, kMobileNetGroupCount> kGroupStart = {1, 3, 6, 10,
                                                               13};

LayerGraph BuildMobileNetV2(const MobileNetV2Arch& arch, int side) {
  LayerGraph graph;
  graph.space = SpaceId::kMobileNetV2;
  graph.input_side = side;
  GraphBuilder b(&graph);

  std::array<bool, 17> present;
  present.fill(true);
  for (int g = 0; g < kMobileNetGroupCount; ++g) {
    for (int j = 0; j < kMobileNetGroupSizes[g]; ++j) {
      present[kGroupStart[g] + j] = arch.group_layers[g].at(j);
    }
  }

  // Bottleneck layers are numbered from 1, so layer n is block n-1. The
  // second stride gene sits on the first 32-channel block, which keeps every
  // strided block mandatory.
  std::array<int, 17> stride;
  stride.fill(1);
  stride[1] = arch.strides[0];
  stride[3] = arch.strides[1];
  stride[13] = arch.strides[2];
  stride[16] = arch.strides[3];
  std::array<int, 17> rate = {1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2};
  for (int i = 0; i < 6; ++i) rate[11 + i] = arch.dilations[i];

  Tensor x{3, {side, side}};
  x = b.Conv(x, "Conv", 3, 32, 2);
  x = b.BatchNorm(x, "Conv_BN");
  for (int id = 0; id < 17; ++id) {
    if (!present[id]) continue;
    const std::string prefix =
        id == 0 ? "expanded_conv" : "block_" + std::to_string(id);
    const BottleneckSpec& spec = kBottlenecks[id];
    if (id != 0) {
      x = b.Conv(x, prefix + "_expand", 1, x.channels * spec.expansion);
      x = b.BatchNorm(x, prefix + "_expand_BN");
    }
    x = b.Depthwise(x, prefix + "_depthwise", stride[id], rate[id]);
    x = b.BatchNorm(x, prefix + "_depthwise_BN");
    x = b.Conv(x, prefix + "_project", 1, spec.filters);
    x = b.BatchNorm(x, prefix + "_project_BN");
  }

  // Two-branch ASPP: image pooling and 1x1.
  Tensor pooled = b.GlobalPool(x, "aspp_image_pooling");
  pooled = b.Conv(pooled, "aspp_image_pooling_conv", 1, 256);
  pooled = b.BatchNorm(pooled, "aspp_image_pooling_BN");
  pooled = b.Upsample(pooled, "aspp_image_pooling_upsample", x.spatial);
  Tensor aspp0 = b.Conv(x, "aspp0", 1, 256);
  aspp0 = b.BatchNorm(aspp0, "aspp0_BN");
  x = b.Concat({pooled, aspp0}, "aspp_concat");
  x = b.Conv(x, "concat_projection", 1, 256);
  x = b.BatchNorm(x, "concat_projection_BN");
  x = b.Conv(x, "logits_semantic", 1, kNumClasses, 1, 1, /*bias=*/true);
  b.Upsample(x, "logits_upsample", {side, side});
  return graph;
}

std::int64_t Elements(std::int64_t channels, const Spatial& s) {
  return channels * s.h * s.w;
}

}  // namespace

std::string_view LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv:
      return "conv";
    case LayerKind::kDepthwiseConv:
      return "depthwise_conv";
    case LayerKind::kPointwiseConv:
      return "pointwise_conv";
    case LayerKind::kPool:
      return "pool";
    case LayerKind::kUpsample:
      return "upsample";
    case LayerKind::kConcat:
      return "concat";
    case LayerKind::kBatchNorm:
      return "batchnorm";
  }
  return "unknown";
}

int DefaultInputSide(SpaceId space) {
  return space == SpaceId::kXception ? 513 : 384;
}

std::int64_t SamePaddedSide(std::int64_t in, int stride) {
  return (in + stride - 1) / stride;
}

LayerGraph BuildLayerGraph(const Architecture& arch,
                           std::optional<int> input_side) {
  const int side = input_side.value_or(DefaultInputSide(SpaceOf(arch)));
  if (side <= 0) throw ConfigError("input side must be positive");
  if (const auto* x = std::get_if<XceptionArch>(&arch)) {
    return BuildXception(*x, side);
  }
  return BuildMobileNetV2(std::get<MobileNetV2Arch>(arch), side);
}

std::int64_t LayerParams(const LayerRecord& layer) {
  switch (layer.kind) {
    case LayerKind::kConv:
    case LayerKind::kPointwiseConv:
      return std::int64_t{layer.kh} * layer.kw * layer.in_channels *
                 layer.out_channels +
             (layer.bias ? layer.out_channels : 0);
    case LayerKind::kDepthwiseConv:
      return std::int64_t{layer.kh} * layer.kw * layer.in_channels +
             (layer.bias ? layer.out_channels : 0);
    case LayerKind::kBatchNorm:
      // gamma and beta; moving statistics are not trainable.
      return 2 * layer.out_channels;
    case LayerKind::kPool:
    case LayerKind::kUpsample:
    case LayerKind::kConcat:
      return 0;
  }
  return 0;
}

std::int64_t LayerFlops(const LayerRecord& layer) {
  const std::int64_t out_cells = layer.out_spatial.h * layer.out_spatial.w;
  switch (layer.kind) {
    case LayerKind::kConv:
    case LayerKind::kPointwiseConv:
      return 2 * std::int64_t{layer.kh} * layer.kw * layer.in_channels *
             layer.out_channels * out_cells;
    case LayerKind::kDepthwiseConv:
      return 2 * std::int64_t{layer.kh} * layer.kw * layer.in_channels *
             out_cells;
    case LayerKind::kBatchNorm:
      return 2 * Elements(layer.out_channels, layer.out_spatial);
    case LayerKind::kPool:
      return 2 * Elements(layer.in_channels, layer.in_spatial);
    case LayerKind::kUpsample:
      return 2 * Elements(layer.out_channels, layer.out_spatial);
    case LayerKind::kConcat:
      return 0;
  }
  return 0;
}

std::int64_t CountParams(const LayerGraph& graph) {
  std::int64_t total = 0;
  for (const LayerRecord& layer : graph.layers) total += LayerParams(layer);
  return total;
}

std::int64_t CountFlops(const LayerGraph& graph) {
  std::int64_t total = 0;
  for (const LayerRecord& layer : graph.layers) total += LayerFlops(layer);
  return total;
}

double ThroughputModel::For(LayerKind kind) const {
  switch (kind) {
    case LayerKind::kConv:
      return conv;
    case LayerKind::kDepthwiseConv:
      return depthwise;
    case LayerKind::kPointwiseConv:
      return pointwise;
    case LayerKind::kPool:
      return pool;
    case LayerKind::kUpsample:
      return upsample;
    case LayerKind::kConcat:
      return concat;
    case LayerKind::kBatchNorm:
      return batchnorm;
  }
  return conv;
}

void ThroughputModel::Validate() const {
  for (double t : {conv, depthwise, pointwise, pool, upsample, concat,
                   batchnorm}) {
    if (!(t > 0.0)) {
      throw ConfigError("throughput constants must be positive");
    }
  }
  if (!(overhead_cycles >= 0.0)) {
    throw ConfigError("per-layer overhead must be non-negative");
  }
}

double LayerCycles(const LayerRecord& layer, const ThroughputModel& model) {
  // Two FLOPs per multiply-accumulate for every kind.
  const double macs = static_cast<double>(LayerFlops(layer)) / 2.0;
  return macs / model.For(layer.kind) + model.overhead_cycles;
}

double LatencyProxy(const LayerGraph& graph, const ThroughputModel& model) {
  model.Validate();
  double total = 0.0;
  for (const LayerRecord& layer : graph.layers) {
    total += LayerCycles(layer, model);
  }
  return total;
}

CostReport ComputeCost(const LayerGraph& graph, const ThroughputModel& model) {
  model.Validate();
  CostReport report;
  report.per_layer.reserve(graph.layers.size());
  for (const LayerRecord& layer : graph.layers) {
    LayerCost cost{LayerParams(layer), LayerFlops(layer),
                   LayerCycles(layer, model)};
    report.params += cost.params;
    report.flops += cost.flops;
    report.latency_cycles += cost.cycles;
    report.per_layer.push_back(cost);
  }
  return report;
}

CostReport CostOf(const Genome& genome, const ThroughputModel& model,
                  std::optional<int> input_side) {
  return ComputeCost(BuildLayerGraph(Decode(genome), input_side), model);
}

void WriteLayerCsv(const LayerGraph& graph, const CostReport& report,
                   std::ostream& out) {
  out << "index,kind,kh,kw,cin,cout,stride,dilation,hout,wout,params,flops,"
         "cycles\n";
  char cycles[64];
  for (std::size_t i = 0; i < graph.layers.size(); ++i) {
    const LayerRecord& l = graph.layers[i];
    std::snprintf(cycles, sizeof(cycles), "%.6f", report.per_layer[i].cycles);
    out << i << ',' << LayerKindName(l.kind) << ',' << l.kh << ',' << l.kw
        << ',' << l.in_channels << ',' << l.out_channels << ',' << l.stride
        << ',' << l.dilation << ',' << l.out_spatial.h << ','
        << l.out_spatial.w << ',' << report.per_layer[i].params << ','
        << report.per_layer[i].flops << ',' << cycles << '\n';
  }
}

}  // namespace segnas
