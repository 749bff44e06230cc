// Copyright 2026 The CCQ Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Bit-exact group payloads. The byte layouts are documented in FORMAT.md;
// the unit tests pin them value by value.

#ifndef CCQ_PACKING_HPP_
#define CCQ_PACKING_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "ccq/coding.hpp"

namespace ccq {

// How one group of `group_size` weights maps onto packed words.
//
// A group that ends mid-word (group_size % weights_per_word == 1) stores the
// final weight's state in the tail word's leading bits and the quantized
// group scale in the remaining, otherwise redundant, bits. Groups that fill
// their words exactly have no spare bits, so the 4-bit scale moves to a
// side-band nibble stream. The clustered family always uses the side band:
// after clustering a code byte has no redundant bits left to borrow.
struct GroupGeometry {
  int group_size = 0;
  int full_words = 0;           // words carrying weights_per_word weights each
  bool has_tail = false;        // one extra word carrying a single weight
  int words_per_group = 0;      // full_words + has_tail
  bool embedded_scale = false;  // scale inside the tail word vs side-band
  int payload_bytes = 0;        // stored bytes per group
};

// Validates group_size against the family's modular rule and returns the
// geometry. Throws ConfigError for residues the format does not define.
GroupGeometry group_geometry(const Scheme& scheme, int group_size);

// One packed group. For side-band families the 4-bit scale code rides along
// in `sideband_scale`; the container interleaves those nibbles separately.
struct PackedGroup {
  Family family{};
  std::vector<std::uint8_t> payload;
  std::uint16_t sideband_scale = 0;
};

// codes: words_per_group entries. Full words use all code_bits; a tail word
// must carry only its leading state (the bits the scale will occupy must be
// zero). scale_code must fit scale_bits. Throws EncodingError otherwise.
PackedGroup pack_group(std::span<const std::uint16_t> codes, std::uint16_t scale_code,
                       const Scheme& scheme, int group_size);

struct UnpackedGroup {
  std::vector<std::uint16_t> codes;
  std::uint16_t scale_code = 0;
};

// Exact inverse of pack_group, implemented through the family LayoutSpec
// masks alone. The tail code comes back with only its leading state bits set.
UnpackedGroup unpack_group(const PackedGroup& group, const Scheme& scheme, int group_size);

// Per-channel scale compression: super = max(scales) / (2^bits - 1) (1.0 when
// every scale is zero), codes = round(scale / super) clamped to [0, 2^bits).
// Scales must be non-negative (DomainError otherwise), which keeps the
// round-trip exact: code * super never needs a sign.
struct QuantizedScales {
  float super_scale = 1.0f;
  std::vector<std::uint16_t> codes;
};

QuantizedScales quantize_scales(std::span<const float> scales, int scale_bits);

// Side-band nibble stream: group 2k in the low nibble of byte k, group 2k+1
// in the high nibble; a trailing odd nibble pads with zero.
std::vector<std::uint8_t> pack_cluster_scales(std::span<const std::uint16_t> scale_codes);
std::vector<std::uint16_t> unpack_cluster_scales(std::span<const std::uint8_t> bytes,
                                                 std::size_t group_count);

// Logical payload accounting for the bits-per-weight figure: code bits plus
// 4 side-band scale bits per group where the scale is not embedded. Physical
// padding (the odd trailing nibble) is container overhead, not payload.
struct PayloadBits {
  std::uint64_t code_bits = 0;
  std::uint64_t scale_bits = 0;
  std::uint64_t weights = 0;

  double bits_per_weight() const {
    return weights == 0 ? 0.0 : double(code_bits + scale_bits) / double(weights);
  }
};

PayloadBits payload_bits(const Scheme& scheme, int group_size, std::int64_t group_count);

}  // namespace ccq

#endif  // CCQ_PACKING_HPP_
