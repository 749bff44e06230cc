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
// Convolutional code definitions and the bit-level view of code words.
//
// A code word of T bits stores N overlapping state windows of L bits each,
// consecutive windows shifted by S fresh bits (T = L + (N-1)*S). Windows are
// indexed from the most-significant end:
//
//   state[j] = (code >> (T - L - j*S)) & (2^L - 1)
//
// so adjacent states share their L-S boundary bits: the low L-S bits of
// state[j] equal the high L-S bits of state[j+1]. Decoding is pure shift and
// mask; no table is consulted. Codebook materialization below exists for
// tests and oracles only.

#ifndef CCQ_CODING_HPP_
#define CCQ_CODING_HPP_

#include <cmath>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ccq/error.hpp"

namespace ccq {

// One (L, N, S) triplet. Field names spell the roles; the triplet prints as
// (state_bits, states_per_code, transition_bits).
struct EncodingConfig {
  int state_bits = 0;       // L: bits per state window
  int states_per_code = 0;  // N: windows per code word
  int transition_bits = 0;  // S: fresh bits introduced per window

  int total_bits() const { return state_bits + (states_per_code - 1) * transition_bits; }
  int overlap_bits() const { return state_bits - transition_bits; }
  std::uint32_t state_mask() const { return (1u << state_bits) - 1u; }
  std::uint32_t code_count() const { return 1u << total_bits(); }

  // Throws ConfigError unless 1 <= S <= L <= 8, N >= 1 and T <= 16.
  void validate() const;

  std::string to_string() const;
  friend auto operator<=>(const EncodingConfig&, const EncodingConfig&) = default;
};

// Extracts the N states of `code`, most-significant window first.
// Throws DomainError when code >= 2^T.
std::vector<std::uint16_t> decode_states(std::uint32_t code, const EncodingConfig& config);

// Inverse of decode_states. Throws EncodingError when the states do not form
// a valid window sequence (boundary bits must agree) or exceed L bits.
std::uint32_t states_to_code(std::span<const std::uint16_t> states, const EncodingConfig& config);

// Fully materialized code table, 2^T rows of N states. Test/oracle support;
// production decode never touches one.
struct Codebook {
  EncodingConfig config;
  std::vector<std::uint16_t> states;  // row-major, rows() x states_per_code

  std::size_t rows() const { return states.size() / config.states_per_code; }
  std::span<const std::uint16_t> row(std::uint32_t code) const {
    return {states.data() + std::size_t(code) * config.states_per_code,
            std::size_t(config.states_per_code)};
  }
};

Codebook build_codebook(const EncodingConfig& config);

// Two codes sharing one machine word, states of the first part in the high
// bits. Both parts must use the same L so a single mask serves the word.
struct HybridSchedule {
  std::vector<EncodingConfig> parts;
  int word_bits = 0;

  int weights_per_word() const;
  void validate() const;  // throws ConfigError
};

// The shipped 16-bit hybrid: a 7-bit (3,3,2) code in the high bits followed
// by a 9-bit (3,4,2) code.
HybridSchedule canonical_hybrid();

// How packed words are taken apart: per-weight shifts plus masks. Everything
// a decoder needs, with no table in sight.
struct LayoutSpec {
  std::vector<int> weight_shifts;  // one per weight slot in a word, MSB first
  std::uint32_t weight_mask = 0;   // (1 << L) - 1
  std::uint32_t scale_mask = 0;    // low bits of the scale carrier word
  std::vector<int> scale_shifts;   // side-band nibble shifts (cluster family)
  bool uses_cluster = false;
  int word_bits = 0;  // width of the word the weight shifts apply to
};

LayoutSpec layout_for(const EncodingConfig& config);
LayoutSpec layout_for(const HybridSchedule& schedule);

// The three shipped encodings, named by their bits-per-weight figure at the
// default group size.
enum class Family { Bpw275, Bpw25, Bpw206 };

std::string family_name(Family family);            // "2.75", "2.5", "2.06"
Family family_from_name(const std::string& name);  // throws ConfigError

// Everything derived from a Family that the quantizer, packer and kernels
// share. Obtain via family_scheme(); instances are immutable singletons.
struct Scheme {
  Family family;
  std::vector<EncodingConfig> parts;  // one entry, or two for the hybrid
  LayoutSpec layout;
  int code_bits = 0;          // bits of one full code word: 8, 16, 15
  int stored_word_bytes = 0;  // bytes per packed word: 1, 2, 1 (clustered)
  int weights_per_word = 0;   // 3, 7, 4
  int state_bits = 0;         // L: 4, 3, 6
  int zero_point = 0;         // 2^(L-1): 8, 4, 32
  int scale_bits = 0;         // 4, 13, 4
  bool uses_cluster = false;
};

const Scheme& family_scheme(Family family);

// Widens a clustered 8-bit code back to its full-width code value:
// round(q * code_scale + code_zero_point), rounding half away from zero.
// Both the quantizer and the kernels reconstruct through this one function so
// the two sides agree bit for bit. Throws DomainError when the result falls
// outside [0, 2^code_bits), which valid cluster parameters cannot produce.
inline std::uint16_t clustered_code_value(std::uint8_t q, float code_scale,
                                          float code_zero_point, int code_bits) {
  const long v = std::lround(double(q) * double(code_scale) + double(code_zero_point));
  if (v < 0 || v >= (1l << code_bits)) {
    throw DomainError("clustered code reconstructs outside [0, 2^" + std::to_string(code_bits) +
                      "): q=" + std::to_string(int(q)));
  }
  return static_cast<std::uint16_t>(v);
}

}  // namespace ccq

#endif  // CCQ_CODING_HPP_
