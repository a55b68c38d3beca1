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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "segnas/errors.h"

namespace segnas {
namespace {

Genome X(const std::string& bits) {
  return Genome::FromBitString(SpaceId::kXception, bits);
}

Genome M(const std::string& bits) {
  return Genome::FromBitString(SpaceId::kMobileNetV2, bits);
}

const LayerRecord& FindLayer(const LayerGraph& graph, const std::string& name) {
  for (const LayerRecord& layer : graph.layers) {
    if (layer.name == name) return layer;
  }
  ADD_FAILURE() << "missing layer " << name;
  static const LayerRecord kEmpty;
  return kEmpty;
}

// Independent closed form for one middle block: three separable convs
// (3x3 depthwise + BN, 1x1 pointwise + BN) at 728 channels.
constexpr std::int64_t kMiddleBlockParams =
    3 * (9 * 728 + 2 * 728 + 728 * 728 + 2 * 728);

TEST(CostModelTest, SamePadding) {
  EXPECT_EQ(SamePaddedSide(513, 2), 257);
  EXPECT_EQ(SamePaddedSide(65, 3), 22);
  EXPECT_EQ(SamePaddedSide(65, 4), 17);
  EXPECT_EQ(SamePaddedSide(33, 1), 33);
}

TEST(CostModelTest, ConvolutionFormulas) {
  LayerRecord conv;
  conv.kind = LayerKind::kConv;
  conv.kh = conv.kw = 3;
  conv.in_channels = 4;
  conv.out_channels = 8;
  conv.in_spatial = {10, 10};
  conv.out_spatial = {5, 5};
  EXPECT_EQ(LayerParams(conv), 3 * 3 * 4 * 8);
  EXPECT_EQ(LayerFlops(conv), 2 * 3 * 3 * 4 * 8 * 5 * 5);
  conv.bias = true;
  EXPECT_EQ(LayerParams(conv), 3 * 3 * 4 * 8 + 8);
  EXPECT_EQ(LayerFlops(conv), 2 * 3 * 3 * 4 * 8 * 5 * 5);

  LayerRecord dw = conv;
  dw.kind = LayerKind::kDepthwiseConv;
  dw.bias = false;
  dw.out_channels = 4;
  EXPECT_EQ(LayerParams(dw), 3 * 3 * 4);
  EXPECT_EQ(LayerFlops(dw), 2 * 3 * 3 * 4 * 5 * 5);

  LayerRecord bn;
  bn.kind = LayerKind::kBatchNorm;
  bn.in_channels = bn.out_channels = 16;
  bn.in_spatial = bn.out_spatial = {3, 3};
  EXPECT_EQ(LayerParams(bn), 32);
  EXPECT_EQ(LayerFlops(bn), 2 * 16 * 9);

  LayerRecord concat;
  concat.kind = LayerKind::kConcat;
  concat.in_channels = concat.out_channels = 64;
  concat.out_spatial = {7, 7};
  EXPECT_EQ(LayerParams(concat), 0);
  EXPECT_EQ(LayerFlops(concat), 0);
}

TEST(CostModelTest, DilationNeverChangesParams) {
  LayerRecord dw;
  dw.kind = LayerKind::kDepthwiseConv;
  dw.kh = dw.kw = 3;
  dw.in_channels = dw.out_channels = 728;
  dw.in_spatial = dw.out_spatial = {33, 33};
  const std::int64_t params = LayerParams(dw);
  const std::int64_t flops = LayerFlops(dw);
  for (int rate : {2, 4, 12, 36}) {
    dw.dilation = rate;
    EXPECT_EQ(LayerParams(dw), params);
    EXPECT_EQ(LayerFlops(dw), flops);
  }
}

TEST(CostModelTest, MiddleBlockDeltaIsClosedForm) {
  EXPECT_EQ(kMiddleBlockParams, 1618344);
  const Genome full = SupernetGenome(SpaceId::kXception);
  const ThroughputModel model;
  const std::int64_t base = CostOf(full, model).params;
  for (int block = 0; block < kXceptionMiddleBlocks; ++block) {
    const Genome g = full.WithBit(kXceptionMiddleOffset + block, false);
    EXPECT_EQ(base - CostOf(g, model).params, kMiddleBlockParams);
  }
  // Within 5% of the reference per-block delta (41.26 - 38.00) / 2.
  EXPECT_NEAR(kMiddleBlockParams / 1e6, 1.63, 0.05 * 1.63);
}

TEST(CostModelTest, StrideAndAtrousDoNotChangeParams) {
  const ThroughputModel model;
  const std::int64_t f1 = CostOf(X("100000" "1111111011011111"), model).params;
  const std::int64_t p2 = CostOf(X("010000" "1111111011011111"), model).params;
  EXPECT_EQ(f1, p2);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Genome g(SpaceId::kXception,
                   static_cast<std::uint32_t>(rng() & ((1u << 22) - 1)));
    Genome h = g;
    for (int bit = 0; bit < kXceptionMiddleOffset; ++bit) {
      h = h.WithBit(bit, rng() & 1);
    }
    EXPECT_EQ(CostOf(g, model).params, CostOf(h, model).params);
  }
  for (int i = 0; i < 200; ++i) {
    const Genome g(SpaceId::kMobileNetV2,
                   static_cast<std::uint32_t>(rng() & ((1u << 23) - 1)));
    Genome h = g;
    for (int bit = 0; bit < kMobileNetGroupOffset; ++bit) {
      h = h.WithBit(bit, rng() & 1);
    }
    EXPECT_EQ(CostOf(g, model).params, CostOf(h, model).params);
  }
}

TEST(CostModelTest, MiddleFlowSpatialFollowsEntryStride) {
  const LayerGraph s2 = BuildLayerGraph(DecodeXception(X("010000" "1111111111111111")));
  const LayerGraph s3 = BuildLayerGraph(DecodeXception(X("100000" "1111111111111111")));
  const LayerGraph s4 = BuildLayerGraph(DecodeXception(X("110000" "1111111111111111")));
  const std::string name = "middle_flow_unit_1_separable_conv1_depthwise";
  EXPECT_EQ(FindLayer(s2, name).out_spatial.h, 33);
  EXPECT_EQ(FindLayer(s3, name).out_spatial.h, 22);
  EXPECT_EQ(FindLayer(s4, name).out_spatial.h, 17);

  // Middle-flow FLOPs scale with the spatial area: 22^2 / 33^2.
  const LayerRecord& a = FindLayer(s2, name);
  const LayerRecord& b = FindLayer(s3, name);
  EXPECT_EQ(LayerFlops(b) * 1089, LayerFlops(a) * 484);
}

TEST(CostModelTest, GraphShapes) {
  const LayerGraph g = BuildLayerGraph(XceptionSupernet());
  EXPECT_EQ(g.input_side, 513);
  EXPECT_EQ(FindLayer(g, "entry_flow_conv1_1").out_spatial.h, 257);
  EXPECT_EQ(FindLayer(g, "aspp_concat").out_channels, 1280);
  EXPECT_EQ(FindLayer(g, "aspp3_depthwise").dilation, 18);
  EXPECT_EQ(FindLayer(g, "decoder_upsample").out_spatial.h, 129);
  EXPECT_EQ(FindLayer(g, "logits_semantic").out_channels, 21);
  EXPECT_TRUE(FindLayer(g, "logits_semantic").bias);
  EXPECT_EQ(g.layers.back().out_spatial.h, 513);

  const LayerGraph m = BuildLayerGraph(MobileNetV2Supernet());
  EXPECT_EQ(m.input_side, 384);
  EXPECT_EQ(m.layers.back().out_spatial.h, 384);
  EXPECT_EQ(BuildLayerGraph(MobileNetV2Supernet(), 224).layers.back()
                .out_spatial.h,
            224);
  EXPECT_THROW(BuildLayerGraph(XceptionSupernet(), 0), ConfigError);
}

TEST(CostModelTest, XceptionBaselineCalibration) {
  const CostReport r = CostOf(SupernetGenome(SpaceId::kXception), {});
  EXPECT_NEAR(r.params / 1e6, 41.26, 0.10 * 41.26);
  EXPECT_NEAR(r.flops / 1e9, 101.47, 0.15 * 101.47);
}

TEST(CostModelTest, MobileNetReferenceRowsOrderByLatency) {
  const ThroughputModel model;
  const double base =
      CostOf(M("0000" "111" "111111" "1111111111"), model).latency_cycles;
  const double l1 =
      CostOf(M("0001" "110" "101101" "1111111111"), model).latency_cycles;
  const double l2 =
      CostOf(M("0100" "111" "100101" "1111111111"), model).latency_cycles;
  EXPECT_GT(base, l1);
  EXPECT_GT(l1, l2);
}

TEST(CostModelTest, LatencyIsLinearInLayerWork) {
  ThroughputModel model;
  model.overhead_cycles = 0;
  const LayerGraph g = BuildLayerGraph(XceptionSupernet());
  const double base = LatencyProxy(g, model);
  ThroughputModel doubled = model;
  doubled.conv *= 2;
  doubled.depthwise *= 2;
  doubled.pointwise *= 2;
  doubled.pool *= 2;
  doubled.upsample *= 2;
  doubled.concat *= 2;
  doubled.batchnorm *= 2;
  EXPECT_NEAR(LatencyProxy(g, doubled), base / 2, base * 1e-12);

  ThroughputModel with_overhead = model;
  with_overhead.overhead_cycles = 100;
  EXPECT_NEAR(LatencyProxy(g, with_overhead),
              base + 100.0 * static_cast<double>(g.layers.size()),
              base * 1e-12);

  LayerRecord conv;
  conv.kind = LayerKind::kConv;
  conv.kh = conv.kw = 1;
  conv.in_channels = 2;
  conv.out_channels = 3;
  conv.in_spatial = conv.out_spatial = {4, 4};
  EXPECT_DOUBLE_EQ(LayerCycles(conv, model), 2.0 * 3 * 16);
}

TEST(CostModelTest, ThroughputValidation) {
  ThroughputModel model;
  EXPECT_NO_THROW(model.Validate());
  model.depthwise = 0;
  EXPECT_THROW(model.Validate(), ConfigError);
  model = {};
  model.overhead_cycles = -1;
  EXPECT_THROW(model.Validate(), ConfigError);
}

TEST(CostModelTest, ReportSumsLayers) {
  const LayerGraph g = BuildLayerGraph(MobileNetV2Supernet());
  const CostReport r = ComputeCost(g, {});
  ASSERT_EQ(r.per_layer.size(), g.layers.size());
  std::int64_t params = 0;
  std::int64_t flops = 0;
  for (const LayerCost& c : r.per_layer) {
    params += c.params;
    flops += c.flops;
  }
  EXPECT_EQ(params, r.params);
  EXPECT_EQ(flops, r.flops);
  EXPECT_EQ(r.params, CountParams(g));
  EXPECT_EQ(r.flops, CountFlops(g));
}

TEST(CostModelTest, LayerCsv) {
  const LayerGraph g = BuildLayerGraph(MobileNetV2Supernet());
  std::ostringstream out;
  WriteLayerCsv(g, ComputeCost(g, {}), out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line,
            "index,kind,kh,kw,cin,cout,stride,dilation,hout,wout,params,flops,"
            "cycles");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, g.layers.size());
}

TEST(CostModelTest, MaskMonotonicity) {
  std::mt19937_64 rng(17);
  const ThroughputModel model;
  for (int i = 0; i < 300; ++i) {
    const Genome b(SpaceId::kMobileNetV2,
                   static_cast<std::uint32_t>(rng() & ((1u << 23) - 1)));
    Genome a = b;
    for (int bit = kMobileNetGroupOffset; bit < 23; ++bit) {
      if (a.bit(bit) && (rng() & 1)) a = a.WithBit(bit, false);
    }
    const CostReport ca = CostOf(a, model);
    const CostReport cb = CostOf(b, model);
    EXPECT_LE(ca.flops, cb.flops);
    EXPECT_LE(ca.params, cb.params);
  }
}

TEST(CostModelTest, MobileNetStrideReducesFlops) {
  const ThroughputModel model;
  const Genome base = SupernetGenome(SpaceId::kMobileNetV2);
  for (int bit = 0; bit < 4; ++bit) {
    EXPECT_LT(CostOf(base.WithBit(bit, true), model).flops,
              CostOf(base, model).flops);
  }
}

}  // namespace
}  // namespace segnas
