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
// The .ccq container: an 8-byte magic/version block, a length-prefixed JSON
// header, then 8-byte-aligned little-endian binary sections (packed code
// words, side-band scale nibbles, per-channel super scales, per-channel
// cluster parameters). FORMAT.md documents every byte.

#ifndef CCQ_CONTAINER_HPP_
#define CCQ_CONTAINER_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ccq/packing.hpp"
#include "ccq/quantizer.hpp"

namespace ccq {

// The packed tensor held exactly as stored on disk, plus the decoded
// per-channel reals. This is what the kernels consume: code words stay
// packed and are taken apart by shift and mask on the fly.
struct PackedModel {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  Family family = Family::Bpw275;
  int group_size = 64;
  int rounds = 0;

  std::vector<std::uint8_t> code_payload;   // payload_bytes per group, group-major
  std::vector<std::uint8_t> scale_payload;  // side-band nibbles; empty when embedded
  std::vector<float> super_scales;          // per row
  std::vector<float> cluster_scales;        // per row, clustered family only
  std::vector<float> cluster_zero_points;   // per row, clustered family only

  std::int64_t groups_per_row() const { return group_size == 0 ? 0 : cols / group_size; }
  std::int64_t group_count() const { return rows * groups_per_row(); }
};

// Serializes a quantized tensor into its packed in-memory form (the exact
// section bytes a container would hold).
PackedModel pack_model(const QuantizedTensor& tensor);

// Inverse of pack_model.
QuantizedTensor unpack_model(const PackedModel& model);

struct SectionInfo {
  std::uint64_t offset = 0;  // relative to the aligned payload base
  std::uint64_t length = 0;
  std::uint32_t crc32 = 0;
};

struct ContainerInfo {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  Family family = Family::Bpw275;
  int group_size = 64;
  int rounds = 0;
  int scale_bits = 0;
  bool embedded_scale = false;
  std::uint64_t file_bytes = 0;
  std::uint64_t header_bytes = 0;   // magic block + length prefix + JSON
  std::uint64_t payload_base = 0;   // absolute offset of the first section
  std::map<std::string, SectionInfo> sections;
};

void write_container(const QuantizedTensor& tensor, const std::string& path);
QuantizedTensor read_container(const std::string& path);  // throws FormatError
PackedModel load_model(const std::string& path);
ContainerInfo inspect_container(const std::string& path);

// Logical payload accounting for a container (code bits plus 4 side-band
// scale bits per group; the odd trailing pad nibble is overhead, not
// payload).
PayloadBits container_payload_bits(const ContainerInfo& info);

// (code_bits + scale_bits) / weights; 0 for an empty tensor.
double measured_bpw(const ContainerInfo& info);

// Deep integrity checks: structure, section sizes against the geometry,
// per-section crc32, bits-per-weight against the family's closed form, and
// read-then-rewrite byte identity. Returns one line per violation, empty
// when the container is sound. Throws FormatError when the file cannot be
// parsed at all.
std::vector<std::string> verify_container(const std::string& path);

}  // namespace ccq

#endif  // CCQ_CONTAINER_HPP_
