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

#include "ccq/packing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ccq {

GroupGeometry group_geometry(const Scheme& scheme, int group_size) {
  if (group_size <= 0) throw ConfigError("group_size must be positive");
  const int per_word = scheme.weights_per_word;
  const int rem = group_size % per_word;
  if (rem > 1) {
    throw ConfigError("group_size " + std::to_string(group_size) + " leaves " +
                      std::to_string(rem) + " weights in the last word of family " +
                      family_name(scheme.family) + "; only remainders 0 and 1 have a layout");
  }
  if (scheme.family == Family::Bpw25 && rem == 0) {
    // A full hybrid group has no redundant bits and the 13-bit scale has no
    // side-band form; the format only defines the tail-word layout here.
    throw ConfigError("family 2.5 requires group_size % 7 == 1, got " +
                      std::to_string(group_size));
  }
  GroupGeometry geo;
  geo.group_size = group_size;
  geo.full_words = group_size / per_word;
  geo.has_tail = rem == 1;
  geo.words_per_group = geo.full_words + (geo.has_tail ? 1 : 0);
  geo.embedded_scale = geo.has_tail && !scheme.uses_cluster;
  geo.payload_bytes = geo.words_per_group * scheme.stored_word_bytes;
  return geo;
}

namespace {

// Bits of a tail word that carry its single valid state.
std::uint16_t tail_state_mask(const Scheme& scheme) {
  const int word_bits = scheme.stored_word_bytes * 8;
  return std::uint16_t(scheme.layout.weight_mask << (word_bits - scheme.state_bits));
}

void put_word(std::vector<std::uint8_t>& out, std::uint16_t word, int word_bytes) {
  out.push_back(std::uint8_t(word & 0xFF));
  if (word_bytes == 2) out.push_back(std::uint8_t(word >> 8));
}

std::uint16_t get_word(std::span<const std::uint8_t> payload, int index, int word_bytes) {
  if (word_bytes == 2) {
    return std::uint16_t(payload[2 * index] | (std::uint16_t(payload[2 * index + 1]) << 8));
  }
  return payload[index];
}

}  // namespace

PackedGroup pack_group(std::span<const std::uint16_t> codes, std::uint16_t scale_code,
                       const Scheme& scheme, int group_size) {
  const GroupGeometry geo = group_geometry(scheme, group_size);
  if (codes.size() != std::size_t(geo.words_per_group)) {
    throw EncodingError("expected " + std::to_string(geo.words_per_group) + " code words, got " +
                        std::to_string(codes.size()));
  }
  if (scale_code >= (1u << scheme.scale_bits)) {
    throw EncodingError("scale code " + std::to_string(scale_code) + " exceeds " +
                        std::to_string(scheme.scale_bits) + " bits");
  }
  const std::uint32_t code_limit =
      scheme.uses_cluster ? 0x100u : (1u << scheme.code_bits);
  for (int w = 0; w < geo.full_words; ++w) {
    if (codes[w] >= code_limit) {
      throw EncodingError("code word " + std::to_string(codes[w]) + " exceeds " +
                          (scheme.uses_cluster ? std::string("8 clustered")
                                               : std::to_string(scheme.code_bits)) +
                          " bits");
    }
  }

  PackedGroup packed;
  packed.family = scheme.family;
  packed.payload.reserve(std::size_t(geo.payload_bytes));
  for (int w = 0; w < geo.full_words; ++w) {
    put_word(packed.payload, codes[w], scheme.stored_word_bytes);
  }
  if (geo.has_tail) {
    std::uint16_t word = codes[geo.full_words];
    if (scheme.uses_cluster) {
      // A clustered tail byte is a full 8-bit cluster index; nothing to trim.
      if (word >= code_limit) throw EncodingError("clustered tail code exceeds 8 bits");
    } else {
      if ((word & ~tail_state_mask(scheme)) != 0) {
        throw EncodingError("tail code word may only use its leading state bits");
      }
      word = std::uint16_t(word | scale_code);
    }
    put_word(packed.payload, word, scheme.stored_word_bytes);
  }
  if (!geo.embedded_scale) packed.sideband_scale = scale_code;
  return packed;
}

UnpackedGroup unpack_group(const PackedGroup& group, const Scheme& scheme, int group_size) {
  const GroupGeometry geo = group_geometry(scheme, group_size);
  if (group.family != scheme.family) throw EncodingError("packed group family mismatch");
  if (group.payload.size() != std::size_t(geo.payload_bytes)) {
    throw EncodingError("packed group holds " + std::to_string(group.payload.size()) +
                        " bytes, layout needs " + std::to_string(geo.payload_bytes));
  }
  UnpackedGroup out;
  out.codes.resize(std::size_t(geo.words_per_group));
  for (int w = 0; w < geo.full_words; ++w) {
    out.codes[w] = get_word(group.payload, w, scheme.stored_word_bytes);
  }
  if (geo.has_tail) {
    const std::uint16_t word =
        get_word(group.payload, geo.full_words, scheme.stored_word_bytes);
    if (scheme.uses_cluster) {
      out.codes[geo.full_words] = word;
    } else {
      out.codes[geo.full_words] = std::uint16_t(word & tail_state_mask(scheme));
      out.scale_code = std::uint16_t(word & scheme.layout.scale_mask);
    }
  }
  if (!geo.embedded_scale) out.scale_code = group.sideband_scale;
  return out;
}

QuantizedScales quantize_scales(std::span<const float> scales, int scale_bits) {
  if (scale_bits < 1 || scale_bits > 16) throw ConfigError("scale_bits out of range");
  float max_scale = 0.0f;
  for (const float s : scales) {
    if (s < 0.0f || std::isnan(s)) throw DomainError("group scales must be non-negative");
    max_scale = std::max(max_scale, s);
  }
  const std::uint32_t levels = (1u << scale_bits) - 1u;
  QuantizedScales q;
  q.super_scale = max_scale == 0.0f ? 1.0f : float(double(max_scale) / double(levels));
  q.codes.reserve(scales.size());
  for (const float s : scales) {
    const long code = std::lround(double(s) / double(q.super_scale));
    q.codes.push_back(std::uint16_t(std::clamp<long>(code, 0, long(levels))));
  }
  return q;
}

std::vector<std::uint8_t> pack_cluster_scales(std::span<const std::uint16_t> scale_codes) {
  std::vector<std::uint8_t> bytes((scale_codes.size() + 1) / 2, 0);
  for (std::size_t i = 0; i < scale_codes.size(); ++i) {
    if (scale_codes[i] > 0xF) {
      throw EncodingError("side-band scale code " + std::to_string(scale_codes[i]) +
                          " exceeds 4 bits");
    }
    bytes[i / 2] |= std::uint8_t(scale_codes[i] << (4 * (i % 2)));
  }
  return bytes;
}

std::vector<std::uint16_t> unpack_cluster_scales(std::span<const std::uint8_t> bytes,
                                                 std::size_t group_count) {
  if (bytes.size() != (group_count + 1) / 2) {
    throw EncodingError("side-band scale stream holds " + std::to_string(bytes.size()) +
                        " bytes, " + std::to_string(group_count) + " groups need " +
                        std::to_string((group_count + 1) / 2));
  }
  std::vector<std::uint16_t> codes(group_count);
  for (std::size_t i = 0; i < group_count; ++i) {
    codes[i] = std::uint16_t((bytes[i / 2] >> (4 * (i % 2))) & 0xF);
  }
  return codes;
}

PayloadBits payload_bits(const Scheme& scheme, int group_size, std::int64_t group_count) {
  const GroupGeometry geo = group_geometry(scheme, group_size);
  PayloadBits bits;
  bits.code_bits = std::uint64_t(group_count) * geo.payload_bytes * 8;
  bits.scale_bits = geo.embedded_scale ? 0 : std::uint64_t(group_count) * 4;
  bits.weights = std::uint64_t(group_count) * group_size;
  return bits;
}

}  // namespace ccq
