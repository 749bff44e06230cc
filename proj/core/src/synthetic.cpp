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

#include "ccq/synthetic.hpp"

#include <random>

#include "ccq/error.hpp"
#include "ccq/packing.hpp"

namespace ccq {

QuantizedTensor random_quantized(std::int64_t rows, std::int64_t cols, Family family,
                                 int group_size, std::uint64_t seed) {
  if (rows < 0 || cols < 0) throw ShapeError("negative shape");
  if (group_size <= 0 || cols % group_size != 0) {
    throw ShapeError("columns must be a whole number of groups");
  }
  const Scheme& scheme = family_scheme(family);
  const GroupGeometry geo = group_geometry(scheme, group_size);

  QuantizedTensor t;
  t.rows = rows;
  t.cols = cols;
  t.family = family;
  t.group_size = group_size;
  t.rounds = 0;

  const std::int64_t groups = t.group_count();
  const std::size_t wpg = std::size_t(geo.words_per_group);
  t.code_words.resize(std::size_t(groups) * wpg);
  t.scale_codes.resize(std::size_t(groups));
  t.group_scales.resize(std::size_t(groups));
  t.super_scales.resize(std::size_t(rows));
  if (scheme.uses_cluster) {
    t.clustered_codes.resize(std::size_t(groups) * wpg);
    t.cluster_scales.resize(std::size_t(rows));
    t.cluster_zero_points.resize(std::size_t(rows));
  }

  std::mt19937_64 rng(seed);
  auto unit = [&rng] { return double(rng() >> 11) * 0x1.0p-53; };

  const int word_bits = scheme.layout.word_bits;
  const std::uint32_t full_mask = scheme.uses_cluster
                                      ? 0xFFu
                                      : (word_bits == 8 ? 0xFFu : 0xFFFFu);
  const std::uint32_t state_mask = (1u << scheme.state_bits) - 1u;
  const int tail_shift = word_bits - scheme.state_bits;
  const std::uint32_t scale_limit = 1u << scheme.scale_bits;

  for (std::int64_t r = 0; r < rows; ++r) {
    t.super_scales[std::size_t(r)] = float(0.001 + 0.05 * unit());
    if (scheme.uses_cluster) {
      // Any (alpha, beta) with beta + 255 alpha <= 2^code_bits - 1 keeps every
      // byte reconstructable.
      const double limit = double((1u << scheme.code_bits) - 1u);
      const double alpha = 1.0 + unit() * (limit / 512.0);
      const double beta = unit() * (limit - 255.0 * alpha);
      t.cluster_scales[std::size_t(r)] = float(alpha);
      t.cluster_zero_points[std::size_t(r)] = float(beta);
    }
  }

  const std::int64_t gpr = t.groups_per_row();
  for (std::int64_t gi = 0; gi < groups; ++gi) {
    const std::int64_t row = gi / gpr;
    std::uint16_t* words = t.code_words.data() + std::size_t(gi) * wpg;
    for (int w = 0; w < geo.full_words; ++w) {
      words[w] = std::uint16_t(rng() & full_mask);
    }
    if (geo.has_tail) {
      words[wpg - 1] = scheme.uses_cluster
                           ? std::uint16_t(rng() & 0xFF)
                           : std::uint16_t((rng() & state_mask) << tail_shift);
    }
    if (scheme.uses_cluster) {
      const float cs = t.cluster_scales[std::size_t(row)];
      const float czp = t.cluster_zero_points[std::size_t(row)];
      for (std::size_t w = 0; w < wpg; ++w) {
        const std::uint8_t q = std::uint8_t(words[w]);
        t.clustered_codes[std::size_t(gi) * wpg + w] = q;
        words[w] = clustered_code_value(q, cs, czp, scheme.code_bits);
      }
    }
    t.scale_codes[std::size_t(gi)] = std::uint16_t(rng() % scale_limit);
    t.group_scales[std::size_t(gi)] =
        float(t.scale_codes[std::size_t(gi)]) * t.super_scales[std::size_t(row)];
  }
  return t;
}

}  // namespace ccq
