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

#ifndef SEGNAS_GENOME_H_
#define SEGNAS_GENOME_H_

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace segnas {

enum class SpaceId : int { kXception = 0, kMobileNetV2 = 1 };

// Lower-case name used in canonical genome text ("xception", "mobilenetv2").
std::string_view SpaceName(SpaceId space);
SpaceId ParseSpaceName(std::string_view name);

// 22 for Xception, 23 for MobileNetV2.
int GenomeLength(SpaceId space);

// Product of the choice-set sizes of every searchable field.
std::uint64_t SpaceCardinality(SpaceId space);

// Fixed-length bitstring. Bit i is the i-th character of the text form and is
// stored at bit position i of the packed word, so every value below
// 2^GenomeLength(space) is a legal genome.
class Genome {
 public:
  Genome(SpaceId space, std::uint32_t packed);

  // All-zero genome of the given space.
  explicit Genome(SpaceId space) : Genome(space, 0) {}

  // "0101..." of exactly GenomeLength(space) characters.
  static Genome FromBitString(SpaceId space, std::string_view bits);
  // "<space>:<bits>".
  static Genome Parse(std::string_view canonical);

  SpaceId space() const { return space_; }
  int size() const { return GenomeLength(space_); }
  std::uint32_t packed() const { return packed_; }

  bool bit(int index) const;
  Genome WithBit(int index, bool value) const;

  std::string BitString() const;
  std::string Canonical() const;

  friend bool operator==(const Genome&, const Genome&) = default;
  friend auto operator<=>(const Genome& a, const Genome& b) {
    if (auto c = a.space_ <=> b.space_; c != 0) return c;
    return a.packed_ <=> b.packed_;
  }

 private:
  SpaceId space_;
  std::uint32_t packed_;
};

inline constexpr int kXceptionMiddleBlocks = 16;
// Index of the first middle-block bit in an Xception genome.
inline constexpr int kXceptionMiddleOffset = 6;
// Index of the first free group bit in a MobileNetV2 genome.
inline constexpr int kMobileNetGroupOffset = 13;

struct XceptionArch {
  int entry_stride = 2;                        // {1,2,3,4}
  int middle_atrous = 1;                       // {1,2,3,4}
  std::pair<int, int> exit_atrous = {1, 2};    // {(1,2),(2,4)}
  std::array<int, 3> aspp_rates = {6, 12, 18}; // {(6,12,18),(12,24,36)}
  std::array<bool, 16> middle_blocks{};        // b1..b16

  int ActiveBlocks() const;
  friend bool operator==(const XceptionArch&, const XceptionArch&) = default;
};

inline constexpr int kMobileNetGroupCount = 5;
inline constexpr std::array<int, kMobileNetGroupCount> kMobileNetGroupSizes = {
    2, 3, 4, 3, 3};
inline constexpr std::array<int, kMobileNetGroupCount> kMobileNetGroupChannels =
    {24, 32, 64, 96, 160};

struct MobileNetV2Arch {
  // Strides of bottleneck layers 2, 3, 14 and 17: {2,3},{2,3},{1,2},{1,2}.
  std::array<int, 4> strides = {2, 2, 1, 1};
  // Depthwise dilation of layers 12..17: {1,2} for 12-14, {1..4} for 15-17.
  std::array<int, 6> dilations = {2, 2, 2, 4, 4, 4};
  // One vector per channel group; element 0 is the mandatory first layer.
  std::array<std::vector<bool>, kMobileNetGroupCount> group_layers;

  int ActiveLayers() const;
  friend bool operator==(const MobileNetV2Arch&,
                         const MobileNetV2Arch&) = default;
};

using Architecture = std::variant<XceptionArch, MobileNetV2Arch>;

XceptionArch DecodeXception(const Genome& genome);
Genome EncodeXception(const XceptionArch& arch);
MobileNetV2Arch DecodeMobileNetV2(const Genome& genome);
Genome EncodeMobileNetV2(const MobileNetV2Arch& arch);

Architecture Decode(const Genome& genome);
Genome Encode(const Architecture& arch);
SpaceId SpaceOf(const Architecture& arch);

// The unpruned network: full DeepLabV3+ for each backbone.
XceptionArch XceptionSupernet();
MobileNetV2Arch MobileNetV2Supernet();
Genome SupernetGenome(SpaceId space);

// 0/1 rendering of the middle-block mask or the ten free group-layer bits,
// matching the strings used in result tables ("1111111011011111").
std::string MaskString(const XceptionArch& arch);
std::string GroupString(const MobileNetV2Arch& arch);

// Human-readable label of every bit position, e.g. "entry_stride[0]",
// "block_7", "group96_layer2".
std::vector<std::string> BitLabels(SpaceId space);

}  // namespace segnas

template <>
struct std::hash<segnas::Genome> {
  std::size_t operator()(const segnas::Genome& g) const noexcept {
    return std::hash<std::uint64_t>()(
        (static_cast<std::uint64_t>(g.space()) << 32) | g.packed());
  }
};

#endif  // SEGNAS_GENOME_H_
