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

#include <string>

#include "segnas/errors.h"

namespace segnas {

namespace {

constexpr int kXceptionLength = 22;
constexpr int kMobileNetLength = 23;

// Two-bit fields read most-significant bit first, as they appear in text.
int ReadCode2(const Genome& g, int first) {
  return (g.bit(first) ? 2 : 0) + (g.bit(first + 1) ? 1 : 0);
}

void WriteCode2(std::uint32_t& packed, int first, int code) {
  if (code & 2) packed |= 1u << first;
  if (code & 1) packed |= 1u << (first + 1);
}

void SetBit(std::uint32_t& packed, int index, bool value) {
  if (value) packed |= 1u << index;
}

void CheckSpace(const Genome& g, SpaceId expected) {
  if (g.space() != expected) {
    throw CodecError("expected a " + std::string(SpaceName(expected)) +
                     " genome, got " + std::string(SpaceName(g.space())));
  }
}

int ChoiceIndex(int value, std::initializer_list<int> choices,
                const char* field) {
  int i = 0;
  for (int c : choices) {
    if (c == value) return i;
    ++i;
  }
  throw ValidationError(std::string(field) + " = " + std::to_string(value) +
                        " is outside its choice set");
}

}  // namespace

std::string_view SpaceName(SpaceId space) {
  switch (space) {
    case SpaceId::kXception:
      return "xception";
    case SpaceId::kMobileNetV2:
      return "mobilenetv2";
  }
  throw CodecError("unknown search space id " +
                   std::to_string(static_cast<int>(space)));
}

SpaceId ParseSpaceName(std::string_view name) {
  if (name == "xception") return SpaceId::kXception;
  if (name == "mobilenetv2") return SpaceId::kMobileNetV2;
  throw CodecError("unknown search space '" + std::string(name) + "'");
}

int GenomeLength(SpaceId space) {
  switch (space) {
    case SpaceId::kXception:
      return kXceptionLength;
    case SpaceId::kMobileNetV2:
      return kMobileNetLength;
  }
  throw CodecError("unknown search space id " +
                   std::to_string(static_cast<int>(space)));
}

std::uint64_t SpaceCardinality(SpaceId space) {
  switch (space) {
    case SpaceId::kXception:
      // entry stride, middle atrous, exit rates, ASPP rates, 16 blocks.
      return 4ull * 4 * 2 * 2 * (1ull << 16);
    case SpaceId::kMobileNetV2: {
      std::uint64_t groups = 1;
      for (int size : kMobileNetGroupSizes) groups <<= (size - 1);
      // four strides, three binary dilations, three 4-way dilations.
      return 2ull * 2 * 2 * 2 * (2 * 2 * 2) * (4 * 4 * 4) * groups;
    }
  }
  throw CodecError("unknown search space id " +
                   std::to_string(static_cast<int>(space)));
}

Genome::Genome(SpaceId space, std::uint32_t packed)
    : space_(space), packed_(packed) {
  const int length = GenomeLength(space);
  if ((packed >> length) != 0) {
    throw CodecError("packed genome has bits beyond length " +
                     std::to_string(length));
  }
}

Genome Genome::FromBitString(SpaceId space, std::string_view bits) {
  const int length = GenomeLength(space);
  if (static_cast<int>(bits.size()) != length) {
    throw CodecError(std::string(SpaceName(space)) + " genome needs " +
                     std::to_string(length) + " bits, got " +
                     std::to_string(bits.size()));
  }
  std::uint32_t packed = 0;
  for (int i = 0; i < length; ++i) {
    if (bits[i] == '1') {
      packed |= 1u << i;
    } else if (bits[i] != '0') {
      throw CodecError("genome bit string may only contain 0 and 1");
    }
  }
  return Genome(space, packed);
}

Genome Genome::Parse(std::string_view canonical) {
  const auto colon = canonical.find(':');
  if (colon == std::string_view::npos) {
    throw CodecError("genome text must look like <space>:<bits>, got '" +
                     std::string(canonical) + "'");
  }
  return FromBitString(ParseSpaceName(canonical.substr(0, colon)),
                       canonical.substr(colon + 1));
}

bool Genome::bit(int index) const {
  if (index < 0 || index >= size()) {
    throw CodecError("bit index " + std::to_string(index) + " out of range");
  }
  return (packed_ >> index) & 1u;
}

Genome Genome::WithBit(int index, bool value) const {
  if (index < 0 || index >= size()) {
    throw CodecError("bit index " + std::to_string(index) + " out of range");
  }
  const std::uint32_t mask = 1u << index;
  return Genome(space_, value ? (packed_ | mask) : (packed_ & ~mask));
}

std::string Genome::BitString() const {
  std::string out(size(), '0');
  for (int i = 0; i < size(); ++i) {
    if ((packed_ >> i) & 1u) out[i] = '1';
  }
  return out;
}

std::string Genome::Canonical() const {
  return std::string(SpaceName(space_)) + ":" + BitString();
}

int XceptionArch::ActiveBlocks() const {
  int n = 0;
  for (bool b : middle_blocks) n += b;
  return n;
}

int MobileNetV2Arch::ActiveLayers() const {
  int n = 0;
  for (const auto& group : group_layers) {
    for (bool b : group) n += b;
  }
  return n;
}

XceptionArch DecodeXception(const Genome& genome) {
  CheckSpace(genome, SpaceId::kXception);
  XceptionArch arch;
  arch.entry_stride = ReadCode2(genome, 0) + 1;
  arch.middle_atrous = ReadCode2(genome, 2) + 1;
  arch.exit_atrous = genome.bit(4) ? std::pair{2, 4} : std::pair{1, 2};
  arch.aspp_rates = genome.bit(5) ? std::array{12, 24, 36}
                                  : std::array{6, 12, 18};
  for (int i = 0; i < 16; ++i) {
    arch.middle_blocks[i] = genome.bit(kXceptionMiddleOffset + i);
  }
  return arch;
}

Genome EncodeXception(const XceptionArch& arch) {
  std::uint32_t packed = 0;
  WriteCode2(packed, 0,
             ChoiceIndex(arch.entry_stride, {1, 2, 3, 4}, "entry_stride"));
  WriteCode2(packed, 2,
             ChoiceIndex(arch.middle_atrous, {1, 2, 3, 4}, "middle_atrous"));
  if (arch.exit_atrous == std::pair{2, 4}) {
    packed |= 1u << 4;
  } else if (arch.exit_atrous != std::pair{1, 2}) {
    throw ValidationError("exit_atrous must be (1,2) or (2,4)");
  }
  if (arch.aspp_rates == std::array{12, 24, 36}) {
    packed |= 1u << 5;
  } else if (arch.aspp_rates != std::array{6, 12, 18}) {
    throw ValidationError("aspp_rates must be (6,12,18) or (12,24,36)");
  }
  for (int i = 0; i < 16; ++i) {
    SetBit(packed, kXceptionMiddleOffset + i, arch.middle_blocks[i]);
  }
  return Genome(SpaceId::kXception, packed);
}

MobileNetV2Arch DecodeMobileNetV2(const Genome& genome) {
  CheckSpace(genome, SpaceId::kMobileNetV2);
  MobileNetV2Arch arch;
  arch.strides[0] = genome.bit(0) ? 3 : 2;
  arch.strides[1] = genome.bit(1) ? 3 : 2;
  arch.strides[2] = genome.bit(2) ? 2 : 1;
  arch.strides[3] = genome.bit(3) ? 2 : 1;
  for (int i = 0; i < 3; ++i) arch.dilations[i] = genome.bit(4 + i) ? 2 : 1;
  for (int i = 0; i < 3; ++i) {
    arch.dilations[3 + i] = ReadCode2(genome, 7 + 2 * i) + 1;
  }
  int next = kMobileNetGroupOffset;
  for (int g = 0; g < kMobileNetGroupCount; ++g) {
    auto& group = arch.group_layers[g];
    group.assign(kMobileNetGroupSizes[g], true);
    for (int j = 1; j < kMobileNetGroupSizes[g]; ++j) {
      group[j] = genome.bit(next++);
    }
  }
  return arch;
}

Genome EncodeMobileNetV2(const MobileNetV2Arch& arch) {
  std::uint32_t packed = 0;
  SetBit(packed, 0, ChoiceIndex(arch.strides[0], {2, 3}, "layer2_stride"));
  SetBit(packed, 1, ChoiceIndex(arch.strides[1], {2, 3}, "layer3_stride"));
  SetBit(packed, 2, ChoiceIndex(arch.strides[2], {1, 2}, "layer14_stride"));
  SetBit(packed, 3, ChoiceIndex(arch.strides[3], {1, 2}, "layer17_stride"));
  for (int i = 0; i < 3; ++i) {
    SetBit(packed, 4 + i,
           ChoiceIndex(arch.dilations[i], {1, 2}, "layer12_14_dilation"));
  }
  for (int i = 0; i < 3; ++i) {
    WriteCode2(packed, 7 + 2 * i,
               ChoiceIndex(arch.dilations[3 + i], {1, 2, 3, 4},
                           "layer15_17_dilation"));
  }
  int next = kMobileNetGroupOffset;
  for (int g = 0; g < kMobileNetGroupCount; ++g) {
    const auto& group = arch.group_layers[g];
    if (static_cast<int>(group.size()) != kMobileNetGroupSizes[g]) {
      throw ValidationError("group " + std::to_string(g) + " must have " +
                            std::to_string(kMobileNetGroupSizes[g]) +
                            " layers");
    }
    if (!group[0]) {
      throw ValidationError("the first layer of group " + std::to_string(g) +
                            " is mandatory");
    }
    for (int j = 1; j < kMobileNetGroupSizes[g]; ++j) {
      SetBit(packed, next++, group[j]);
    }
  }
  return Genome(SpaceId::kMobileNetV2, packed);
}

Architecture Decode(const Genome& genome) {
  if (genome.space() == SpaceId::kXception) return DecodeXception(genome);
  return DecodeMobileNetV2(genome);
}

Genome Encode(const Architecture& arch) {
  if (const auto* x = std::get_if<XceptionArch>(&arch)) {
    return EncodeXception(*x);
  }
  return EncodeMobileNetV2(std::get<MobileNetV2Arch>(arch));
}

SpaceId SpaceOf(const Architecture& arch) {
  return std::holds_alternative<XceptionArch>(arch) ? SpaceId::kXception
                                                    : SpaceId::kMobileNetV2;
}

XceptionArch XceptionSupernet() {
  XceptionArch arch;
  arch.middle_blocks.fill(true);
  return arch;
}

MobileNetV2Arch MobileNetV2Supernet() {
  MobileNetV2Arch arch;
  for (int g = 0; g < kMobileNetGroupCount; ++g) {
    arch.group_layers[g].assign(kMobileNetGroupSizes[g], true);
  }
  return arch;
}

Genome SupernetGenome(SpaceId space) {
  if (space == SpaceId::kXception) return EncodeXception(XceptionSupernet());
  return EncodeMobileNetV2(MobileNetV2Supernet());
}

std::string MaskString(const XceptionArch& arch) {
  std::string out;
  for (bool b : arch.middle_blocks) out += b ? '1' : '0';
  return out;
}

std::string GroupString(const MobileNetV2Arch& arch) {
  std::string out;
  for (const auto& group : arch.group_layers) {
    for (std::size_t j = 1; j < group.size(); ++j) out += group[j] ? '1' : '0';
  }
  return out;
}

std::vector<std::string> BitLabels(SpaceId space) {
  std::vector<std::string> labels;
  if (space == SpaceId::kXception) {
    labels = {"entry_stride[0]",  "entry_stride[1]", "middle_atrous[0]",
              "middle_atrous[1]", "exit_atrous",     "aspp_rates"};
    for (int i = 1; i <= 16; ++i) labels.push_back("block_" + std::to_string(i));
    return labels;
  }
  labels = {"layer2_stride", "layer3_stride", "layer14_stride",
            "layer17_stride", "layer12_dilation", "layer13_dilation",
            "layer14_dilation"};
  for (int layer = 15; layer <= 17; ++layer) {
    for (int b = 0; b < 2; ++b) {
      labels.push_back("layer" + std::to_string(layer) + "_dilation[" +
                       std::to_string(b) + "]");
    }
  }
  for (int g = 0; g < kMobileNetGroupCount; ++g) {
    for (int j = 2; j <= kMobileNetGroupSizes[g]; ++j) {
      labels.push_back("group" + std::to_string(kMobileNetGroupChannels[g]) +
                       "_layer" + std::to_string(j));
    }
  }
  return labels;
}

}  // namespace segnas
