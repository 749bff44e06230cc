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
// Group-wise quantization into convolutional code words.
//
// Per group: an absmax initial scale, an exhaustive per-subvector code
// search, then alternating closed-form scale refits and re-searches with the
// best (codes, scale) pair kept. Scales are then compressed per output
// channel to scale_bits and the stored group scale snaps to code * super, so
// the quantizer's own reconstruction matches what a decoder of the packed
// form computes, bit for bit. The clustered family finally compresses each
// channel's code values to 8 bits and re-picks every subvector's cluster
// index against the snapped scale.

#ifndef CCQ_QUANTIZER_HPP_
#define CCQ_QUANTIZER_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "ccq/coding.hpp"
#include "ccq/tensor.hpp"

namespace ccq {

struct QuantizerOptions {
  Family family = Family::Bpw275;
  int group_size = 64;
  int refinement_rounds = 2;
  int threads = 0;  // 0: one per hardware thread
};

struct GroupQuantParams {
  double scale = 0.0;
  int zero_point = 0;  // always 2^(state_bits - 1)
};

struct ClusterParams {
  float code_scale = 1.0f;
  float code_zero_point = 0.0f;
};

// max|group| / (2^(state_bits-1) - 1); 0 for an all-zero group.
double init_group_scale(std::span<const float> group, int state_bits);

// Exhaustive argmin over every code word of
//   sum_j (target[j] - (state_j - zero_point) * scale)^2,
// ties resolved to the smallest code. target may be shorter than
// states_per_code: trailing positions are padding and contribute no cost, and
// their fresh bits stay zero in the returned code.
std::uint32_t search_codes(std::span<const float> target, double scale, int zero_point,
                           const EncodingConfig& config);

// Closed-form least-squares scale for fixed centered states
// (sum w*q / sum q*q); returns prior_scale when the denominator is zero.
// The value is unclamped and may be negative; quantize_group clamps to zero
// when adopting it, since stored scales are unsigned.
double optimize_scale(std::span<const float> group, std::span<const int> centered_states,
                      double prior_scale);

struct GroupResult {
  std::vector<std::uint16_t> code_words;
  GroupQuantParams params;
  double error = 0.0;  // squared reconstruction error at params.scale
};

// group.size() must satisfy the family's group geometry.
GroupResult quantize_group(std::span<const float> group, const Scheme& scheme, int rounds);

// States of every real weight of a group, padding dropped.
std::vector<int> decode_group_states(std::span<const std::uint16_t> code_words,
                                     const Scheme& scheme, int group_size);

struct ClusterChannel {
  ClusterParams params;
  std::vector<std::uint8_t> codes;  // round((code - zero_point) / scale), clamped
};

// Per-channel 8-bit compression of full-width code values:
// code_zero_point = min, code_scale = (max - min) / 255 (1 when max == min).
ClusterChannel cluster_channel(std::span<const std::uint16_t> channel_codes, int code_bits);

// Best cluster index for one subvector at the given scale: argmin over
// q in [0, 256) of the reconstruction error of decode(round(q*a+b)), ties to
// the smallest q. target may be a valid prefix, as in search_codes.
std::uint8_t search_clustered(std::span<const float> target, double scale,
                              const ClusterParams& params, const Scheme& scheme);

struct QuantizedTensor {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  Family family = Family::Bpw275;
  int group_size = 64;
  int rounds = 0;

  // words_per_group entries per group, group-major (row, then group in row).
  // For the clustered family these are the reconstructed full-width codes;
  // clustered_codes holds what is actually stored.
  std::vector<std::uint16_t> code_words;
  std::vector<std::uint16_t> scale_codes;  // per group
  std::vector<float> group_scales;         // per group, = scale_code * super
  std::vector<float> super_scales;         // per row
  std::vector<float> cluster_scales;       // per row (clustered family only)
  std::vector<float> cluster_zero_points;  // per row (clustered family only)
  std::vector<std::uint8_t> clustered_codes;

  std::int64_t groups_per_row() const { return group_size == 0 ? 0 : cols / group_size; }
  std::int64_t group_count() const { return rows * groups_per_row(); }
  std::int64_t words_per_group() const {
    return group_count() == 0 ? 0 : std::int64_t(code_words.size()) / group_count();
  }
};

// Float fields compared bit for bit.
bool bitwise_equal(const QuantizedTensor& a, const QuantizedTensor& b);

struct QuantizeResult {
  QuantizedTensor tensor;
  // Final squared error per group, computed with the snapped f32 scales in
  // element order; matches the metrics module's per-group report exactly.
  std::vector<double> group_errors;
};

// cols must be a multiple of group_size (groups never straddle channels).
QuantizeResult quantize_tensor(const Matrix& weights, const QuantizerOptions& options);

// The quantizer-side reconstruction: float(state - zero_point) * group_scale.
// Decoders of the packed form must reproduce this bit for bit.
Matrix reconstruct(const QuantizedTensor& tensor);

// Round-to-nearest baseline on the symmetric min-max grid
// {-m + j * 2m/(2^bits - 1)}, m = group absmax. bits must be 2 or 4.
Matrix rtn_reconstruct(const Matrix& weights, int bits, int group_size);

}  // namespace ccq

#endif  // CCQ_QUANTIZER_HPP_
