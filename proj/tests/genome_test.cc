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

#include "segnas/genome.h"

#include <gtest/gtest.h>

#include <random>

#include "segnas/errors.h"

namespace segnas {
namespace {

// Reference model genomes in our bit layout.
constexpr const char* kBaselineX = "010000" "1111111111111111";
constexpr const char* kF1 = "100000" "1111111011011111";
constexpr const char* kP1 = "010000" "1111011110010100";
constexpr const char* kMobileBaseline = "0000" "111" "111111" "1111111111";
constexpr const char* kL1 = "0001" "110" "101101" "1111111111";
constexpr const char* kL2 = "0100" "111" "100101" "1111111111";

TEST(GenomeTest, LengthsAndNames) {
  EXPECT_EQ(GenomeLength(SpaceId::kXception), 22);
  EXPECT_EQ(GenomeLength(SpaceId::kMobileNetV2), 23);
  EXPECT_EQ(ParseSpaceName(SpaceName(SpaceId::kMobileNetV2)),
            SpaceId::kMobileNetV2);
  EXPECT_THROW(ParseSpaceName("resnet"), CodecError);
}

TEST(GenomeTest, Cardinality) {
  EXPECT_EQ(SpaceCardinality(SpaceId::kXception), 4194304u);
  EXPECT_EQ(SpaceCardinality(SpaceId::kMobileNetV2), 8388608u);
  EXPECT_EQ(SpaceCardinality(SpaceId::kXception),
            1ull << GenomeLength(SpaceId::kXception));
  EXPECT_EQ(SpaceCardinality(SpaceId::kMobileNetV2),
            1ull << GenomeLength(SpaceId::kMobileNetV2));
  EXPECT_THROW(SpaceCardinality(static_cast<SpaceId>(7)), CodecError);
}

TEST(GenomeTest, TextForms) {
  const Genome g = Genome::FromBitString(SpaceId::kXception, kF1);
  EXPECT_EQ(g.BitString(), kF1);
  EXPECT_EQ(g.Canonical(), std::string("xception:") + kF1);
  EXPECT_EQ(Genome::Parse(g.Canonical()), g);
  EXPECT_TRUE(g.bit(0));
  EXPECT_FALSE(g.bit(1));

  EXPECT_THROW(Genome::Parse("xception:0101"), CodecError);
  EXPECT_THROW(Genome::Parse(std::string("mobilenetv2:") + kF1), CodecError);
  EXPECT_THROW(Genome::Parse(kF1), CodecError);
  EXPECT_THROW(Genome::FromBitString(SpaceId::kXception,
                                     "01000011111111111111x1"),
               CodecError);
  EXPECT_THROW(Genome(SpaceId::kXception, 1u << 22), CodecError);
}

TEST(GenomeTest, DecodesXceptionTableRows) {
  const XceptionArch base =
      DecodeXception(Genome::FromBitString(SpaceId::kXception, kBaselineX));
  EXPECT_EQ(base, XceptionSupernet());
  EXPECT_EQ(base.entry_stride, 2);
  EXPECT_EQ(base.ActiveBlocks(), 16);

  const XceptionArch f1 =
      DecodeXception(Genome::FromBitString(SpaceId::kXception, kF1));
  EXPECT_EQ(f1.entry_stride, 3);
  EXPECT_EQ(f1.middle_atrous, 1);
  EXPECT_EQ(f1.exit_atrous, (std::pair{1, 2}));
  EXPECT_EQ(f1.aspp_rates, (std::array{6, 12, 18}));
  EXPECT_EQ(MaskString(f1), "1111111011011111");
  EXPECT_EQ(f1.ActiveBlocks(), 14);

  const XceptionArch p1 =
      DecodeXception(Genome::FromBitString(SpaceId::kXception, kP1));
  EXPECT_EQ(p1.entry_stride, 2);
  EXPECT_EQ(MaskString(p1), "1111011110010100");
  EXPECT_EQ(p1.ActiveBlocks(), 10);
}

TEST(GenomeTest, ZeroXceptionGenomeTakesFirstChoices) {
  const XceptionArch a = DecodeXception(Genome(SpaceId::kXception));
  EXPECT_EQ(a.entry_stride, 1);
  EXPECT_EQ(a.middle_atrous, 1);
  EXPECT_EQ(a.exit_atrous, (std::pair{1, 2}));
  EXPECT_EQ(a.aspp_rates, (std::array{6, 12, 18}));
  EXPECT_EQ(a.ActiveBlocks(), 0);
  EXPECT_EQ(EncodeXception(a), Genome(SpaceId::kXception));
}

TEST(GenomeTest, XceptionFieldCodes) {
  const XceptionArch a = DecodeXception(
      Genome::FromBitString(SpaceId::kXception, "111111" "0000000000000001"));
  EXPECT_EQ(a.entry_stride, 4);
  EXPECT_EQ(a.middle_atrous, 4);
  EXPECT_EQ(a.exit_atrous, (std::pair{2, 4}));
  EXPECT_EQ(a.aspp_rates, (std::array{12, 24, 36}));
  EXPECT_TRUE(a.middle_blocks[15]);
  EXPECT_FALSE(a.middle_blocks[0]);
}

TEST(GenomeTest, EncodeXceptionRejectsOutOfSetFields) {
  XceptionArch a = XceptionSupernet();
  a.entry_stride = 5;
  EXPECT_THROW(EncodeXception(a), ValidationError);
  a = XceptionSupernet();
  a.exit_atrous = {1, 4};
  EXPECT_THROW(EncodeXception(a), ValidationError);
  a = XceptionSupernet();
  a.aspp_rates = {6, 12, 36};
  EXPECT_THROW(EncodeXception(a), ValidationError);
  a = XceptionSupernet();
  a.middle_atrous = 0;
  EXPECT_THROW(EncodeXception(a), ValidationError);
}

TEST(GenomeTest, WrongSpaceIsACodecError) {
  EXPECT_THROW(DecodeXception(Genome(SpaceId::kMobileNetV2)), CodecError);
  EXPECT_THROW(DecodeMobileNetV2(Genome(SpaceId::kXception)), CodecError);
}

TEST(GenomeTest, DecodesMobileNetTableRows) {
  const MobileNetV2Arch base = DecodeMobileNetV2(
      Genome::FromBitString(SpaceId::kMobileNetV2, kMobileBaseline));
  EXPECT_EQ(base, MobileNetV2Supernet());
  EXPECT_EQ(base.strides, (std::array{2, 2, 1, 1}));
  EXPECT_EQ(base.dilations, (std::array{2, 2, 2, 4, 4, 4}));
  EXPECT_EQ(GroupString(base), "1111111111");
  EXPECT_EQ(SupernetGenome(SpaceId::kMobileNetV2).BitString(), kMobileBaseline);

  const MobileNetV2Arch l1 =
      DecodeMobileNetV2(Genome::FromBitString(SpaceId::kMobileNetV2, kL1));
  EXPECT_EQ(l1.strides, (std::array{2, 2, 1, 2}));
  EXPECT_EQ(l1.dilations, (std::array{2, 2, 1, 3, 4, 2}));
  EXPECT_EQ(GroupString(l1), "1111111111");

  const MobileNetV2Arch l2 =
      DecodeMobileNetV2(Genome::FromBitString(SpaceId::kMobileNetV2, kL2));
  EXPECT_EQ(l2.strides, (std::array{2, 3, 1, 1}));
  EXPECT_EQ(l2.dilations, (std::array{2, 2, 2, 3, 2, 2}));
}

TEST(GenomeTest, ZeroMobileNetGenomeKeepsFirstLayerOfEachGroup) {
  const MobileNetV2Arch a = DecodeMobileNetV2(Genome(SpaceId::kMobileNetV2));
  EXPECT_EQ(a.strides, (std::array{2, 2, 1, 1}));
  EXPECT_EQ(a.dilations, (std::array{1, 1, 1, 1, 1, 1}));
  for (int g = 0; g < kMobileNetGroupCount; ++g) {
    ASSERT_EQ(static_cast<int>(a.group_layers[g].size()),
              kMobileNetGroupSizes[g]);
    EXPECT_TRUE(a.group_layers[g][0]);
    for (int j = 1; j < kMobileNetGroupSizes[g]; ++j) {
      EXPECT_FALSE(a.group_layers[g][j]);
    }
  }
  EXPECT_EQ(a.ActiveLayers(), 5);
}

TEST(GenomeTest, EncodeMobileNetRejectsMissingFirstLayer) {
  MobileNetV2Arch a = MobileNetV2Supernet();
  a.group_layers[2][0] = false;
  EXPECT_THROW(EncodeMobileNetV2(a), ValidationError);
  a = MobileNetV2Supernet();
  a.group_layers[1].push_back(true);
  EXPECT_THROW(EncodeMobileNetV2(a), ValidationError);
  a = MobileNetV2Supernet();
  a.dilations[0] = 3;
  EXPECT_THROW(EncodeMobileNetV2(a), ValidationError);
  a = MobileNetV2Supernet();
  a.strides[2] = 3;
  EXPECT_THROW(EncodeMobileNetV2(a), ValidationError);
}

TEST(GenomeTest, MobileNetRoundTripOnRandomGenomes) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100000; ++i) {
    const Genome g(SpaceId::kMobileNetV2,
                   static_cast<std::uint32_t>(rng() & ((1u << 23) - 1)));
    const MobileNetV2Arch a = DecodeMobileNetV2(g);
    EXPECT_EQ(EncodeMobileNetV2(a), g);
    EXPECT_EQ(DecodeMobileNetV2(EncodeMobileNetV2(a)), a);
  }
}

TEST(GenomeTest, XceptionDistinctGenomesDecodeToDistinctArchitectures) {
  // Sample pairs differing in one bit: any single-bit change must change the
  // decoded architecture.
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    const Genome g(SpaceId::kXception,
                   static_cast<std::uint32_t>(rng() & ((1u << 22) - 1)));
    const int bit = static_cast<int>(rng() % 22);
    EXPECT_NE(DecodeXception(g), DecodeXception(g.WithBit(bit, !g.bit(bit))));
  }
}

TEST(GenomeTest, BitLabelsCoverEveryBit) {
  EXPECT_EQ(BitLabels(SpaceId::kXception).size(), 22u);
  EXPECT_EQ(BitLabels(SpaceId::kMobileNetV2).size(), 23u);
  EXPECT_EQ(BitLabels(SpaceId::kXception)[6 + 9], "block_10");
  EXPECT_EQ(BitLabels(SpaceId::kMobileNetV2)[13], "group24_layer2");
  EXPECT_EQ(BitLabels(SpaceId::kMobileNetV2)[22], "group160_layer3");
}

}  // namespace
}  // namespace segnas
