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

#include "ccq/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "ccq/packing.hpp"
#include "ccq/parallel.hpp"

namespace ccq {

double init_group_scale(std::span<const float> group, int state_bits) {
  if (state_bits < 2 || state_bits > 8) throw ConfigError("state_bits out of range");
  double max_abs = 0.0;
  for (const float w : group) max_abs = std::max(max_abs, std::abs(double(w)));
  return max_abs / double((1 << (state_bits - 1)) - 1);
}

std::uint32_t search_codes(std::span<const float> target, double scale, int zero_point,
                           const EncodingConfig& config) {
  config.validate();
  const int valid = int(target.size());
  if (valid < 1 || valid > config.states_per_code) {
    throw ShapeError("search target must hold 1.." + std::to_string(config.states_per_code) +
                     " values, got " + std::to_string(valid));
  }
  const int state_bits = config.state_bits;
  const int fresh_bits = config.transition_bits;
  const int total = config.total_bits();
  const std::uint32_t state_count = 1u << state_bits;
  const std::uint32_t state_mask = config.state_mask();
  const std::uint32_t fresh_count = 1u << fresh_bits;

  // Per-position cost of every candidate state. The search and its oracle
  // must evaluate the identical expression so tied costs tie bitwise.
  double tables[16][256];
  for (int j = 0; j < valid; ++j) {
    for (std::uint32_t s = 0; s < state_count; ++s) {
      const double d = double(target[j]) - double(int(s) - zero_point) * scale;
      tables[j][s] = d * d;
    }
  }

  double best_cost = std::numeric_limits<double>::infinity();
  std::uint32_t best_code = 0;

  // Depth-first walk over the fresh bits of each consecutive window, in
  // ascending code order so a strict compare keeps the smallest tied code.
  // Positions past `valid` are padding: their fresh bits stay zero and they
  // add no cost.
  auto descend = [&](auto&& self, int j, std::uint32_t code, std::uint32_t prev,
                     double acc) -> void {
    const double* cost_j = tables[j];
    const int shift = total - state_bits - j * fresh_bits;
    if (j == valid - 1) {
      for (std::uint32_t f = 0; f < fresh_count; ++f) {
        const std::uint32_t s = ((prev << fresh_bits) | f) & state_mask;
        const double c = acc + cost_j[s];
        if (c < best_cost) {
          best_cost = c;
          best_code = code | (f << shift);
        }
      }
      return;
    }
    for (std::uint32_t f = 0; f < fresh_count; ++f) {
      const std::uint32_t s = ((prev << fresh_bits) | f) & state_mask;
      self(self, j + 1, code | (f << shift), s, acc + cost_j[s]);
    }
  };

  const int first_shift = total - state_bits;
  if (valid == 1) {
    for (std::uint32_t s = 0; s < state_count; ++s) {
      if (tables[0][s] < best_cost) {
        best_cost = tables[0][s];
        best_code = s << first_shift;
      }
    }
  } else {
    for (std::uint32_t s = 0; s < state_count; ++s) {
      descend(descend, 1, s << first_shift, s, tables[0][s]);
    }
  }
  return best_code;
}

double optimize_scale(std::span<const float> group, std::span<const int> centered_states,
                      double prior_scale) {
  if (group.size() != centered_states.size()) {
    throw ShapeError("group and centered states differ in length");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    const double q = centered_states[i];
    num += double(group[i]) * q;
    den += q * q;
  }
  return den == 0.0 ? prior_scale : num / den;
}

std::vector<int> decode_group_states(std::span<const std::uint16_t> code_words,
                                     const Scheme& scheme, int group_size) {
  const GroupGeometry geo = group_geometry(scheme, group_size);
  if (code_words.size() != std::size_t(geo.words_per_group)) {
    throw ShapeError("group expects " + std::to_string(geo.words_per_group) + " code words");
  }
  std::vector<int> states(static_cast<std::size_t>(group_size));
  const auto& layout = scheme.layout;
  for (int idx = 0; idx < group_size; ++idx) {
    const std::uint16_t word = code_words[idx / scheme.weights_per_word];
    const int shift = layout.weight_shifts[idx % scheme.weights_per_word];
    states[std::size_t(idx)] = int((word >> shift) & layout.weight_mask);
  }
  return states;
}

namespace {

// One code word covering targets[0 .. weights_per_word); a tail word gets a
// single-element target and only its first part participates.
std::uint16_t search_word(std::span<const float> targets, double scale, const Scheme& scheme) {
  std::uint32_t word = 0;
  int bits_left = scheme.code_bits;
  std::size_t offset = 0;
  for (const EncodingConfig& part : scheme.parts) {
    bits_left -= part.total_bits();
    const std::size_t take =
        std::min<std::size_t>(part.states_per_code, targets.size() - offset);
    const std::uint32_t code =
        search_codes(targets.subspan(offset, take), scale, scheme.zero_point, part);
    word |= code << bits_left;
    offset += take;
    if (offset == targets.size()) break;
  }
  return std::uint16_t(word);
}

std::vector<std::uint16_t> search_group(std::span<const float> group, double scale,
                                        const Scheme& scheme, const GroupGeometry& geo) {
  std::vector<std::uint16_t> words(std::size_t(geo.words_per_group));
  for (int w = 0; w < geo.full_words; ++w) {
    words[w] = search_word(group.subspan(std::size_t(w) * scheme.weights_per_word,
                                         std::size_t(scheme.weights_per_word)),
                           scale, scheme);
  }
  if (geo.has_tail) {
    words[geo.full_words] = search_word(group.last(1), scale, scheme);
  }
  return words;
}

double group_error(std::span<const float> group, std::span<const int> states, double scale,
                   int zero_point) {
  double err = 0.0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    const double d = double(group[i]) - double(states[i] - zero_point) * scale;
    err += d * d;
  }
  return err;
}

}  // namespace

GroupResult quantize_group(std::span<const float> group, const Scheme& scheme, int rounds) {
  const GroupGeometry geo = group_geometry(scheme, int(group.size()));
  if (rounds < 0) throw ConfigError("refinement rounds must be >= 0");

  double scale = init_group_scale(group, scheme.state_bits);
  std::vector<std::uint16_t> words = search_group(group, scale, scheme, geo);
  std::vector<int> states = decode_group_states(words, scheme, geo.group_size);
  double err = group_error(group, states, scale, scheme.zero_point);

  GroupResult best;
  best.code_words = words;
  best.params = {scale, scheme.zero_point};
  best.error = err;

  std::vector<int> centered(group.size());
  for (int round = 1; round <= rounds; ++round) {
    for (std::size_t i = 0; i < group.size(); ++i) centered[i] = states[i] - scheme.zero_point;
    // The least-squares refit can go negative when the codes fit poorly; the
    // packed scale is unsigned, and on scale >= 0 the error is monotone
    // toward the clamp, so zero is the constrained optimum.
    scale = std::max(0.0, optimize_scale(group, centered, scale));
    err = group_error(group, states, scale, scheme.zero_point);
    if (err < best.error) {
      best.code_words = words;
      best.params.scale = scale;
      best.error = err;
    }
    if (round < rounds) {
      words = search_group(group, scale, scheme, geo);
      states = decode_group_states(words, scheme, geo.group_size);
      err = group_error(group, states, scale, scheme.zero_point);
      if (err < best.error) {
        best.code_words = words;
        best.params.scale = scale;
        best.error = err;
      }
    }
  }
  return best;
}

ClusterChannel cluster_channel(std::span<const std::uint16_t> channel_codes, int code_bits) {
  if (code_bits < 1 || code_bits > 16) throw ConfigError("code_bits out of range");
  ClusterChannel out;
  if (channel_codes.empty()) return out;
  std::uint16_t lo = channel_codes[0];
  std::uint16_t hi = channel_codes[0];
  for (const std::uint16_t c : channel_codes) {
    if (c >= (1u << code_bits)) {
      throw DomainError("code " + std::to_string(c) + " exceeds " + std::to_string(code_bits) +
                        " bits");
    }
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  out.params.code_zero_point = float(lo);
  out.params.code_scale = hi == lo ? 1.0f : float((double(hi) - double(lo)) / 255.0);
  out.codes.reserve(channel_codes.size());
  for (const std::uint16_t c : channel_codes) {
    const long q = std::lround((double(c) - double(out.params.code_zero_point)) /
                               double(out.params.code_scale));
    out.codes.push_back(std::uint8_t(std::clamp<long>(q, 0, 255)));
  }
  return out;
}

namespace {

// Decoded states of all 256 reconstructable codes of one channel.
struct ClusterTable {
  std::uint16_t codes[256];
  std::uint8_t states[256][8];
};

ClusterTable build_cluster_table(const ClusterParams& params, const Scheme& scheme) {
  ClusterTable table;
  const auto& layout = scheme.layout;
  for (int q = 0; q < 256; ++q) {
    const std::uint16_t code = clustered_code_value(std::uint8_t(q), params.code_scale,
                                                    params.code_zero_point, scheme.code_bits);
    table.codes[q] = code;
    for (int j = 0; j < scheme.weights_per_word; ++j) {
      table.states[q][j] =
          std::uint8_t((code >> layout.weight_shifts[j]) & layout.weight_mask);
    }
  }
  return table;
}

std::uint8_t search_cluster_table(std::span<const float> target, double scale,
                                  const ClusterTable& table, const Scheme& scheme) {
  const int valid = int(target.size());
  double best_cost = std::numeric_limits<double>::infinity();
  int best_q = 0;
  for (int q = 0; q < 256; ++q) {
    double cost = 0.0;
    for (int j = 0; j < valid; ++j) {
      const double d =
          double(target[j]) - double(int(table.states[q][j]) - scheme.zero_point) * scale;
      cost += d * d;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best_q = q;
    }
  }
  return std::uint8_t(best_q);
}

}  // namespace

std::uint8_t search_clustered(std::span<const float> target, double scale,
                              const ClusterParams& params, const Scheme& scheme) {
  if (!scheme.uses_cluster) throw ConfigError("family does not cluster codes");
  if (target.empty() || target.size() > std::size_t(scheme.weights_per_word)) {
    throw ShapeError("cluster search target must hold 1.." +
                     std::to_string(scheme.weights_per_word) + " values");
  }
  const ClusterTable table = build_cluster_table(params, scheme);
  return search_cluster_table(target, scale, table, scheme);
}

bool bitwise_equal(const QuantizedTensor& a, const QuantizedTensor& b) {
  auto floats_equal = [](const std::vector<float>& x, const std::vector<float>& y) {
    if (x.size() != y.size()) return false;
    return std::memcmp(x.data(), y.data(), x.size() * sizeof(float)) == 0;
  };
  return a.rows == b.rows && a.cols == b.cols && a.family == b.family &&
         a.group_size == b.group_size && a.rounds == b.rounds && a.code_words == b.code_words &&
         a.scale_codes == b.scale_codes && floats_equal(a.group_scales, b.group_scales) &&
         floats_equal(a.super_scales, b.super_scales) &&
         floats_equal(a.cluster_scales, b.cluster_scales) &&
         floats_equal(a.cluster_zero_points, b.cluster_zero_points) &&
         a.clustered_codes == b.clustered_codes;
}

QuantizeResult quantize_tensor(const Matrix& weights, const QuantizerOptions& options) {
  const Scheme& scheme = family_scheme(options.family);
  const GroupGeometry geo = group_geometry(scheme, options.group_size);
  if (options.refinement_rounds < 0) throw ConfigError("refinement rounds must be >= 0");
  if (weights.cols % options.group_size != 0) {
    throw ShapeError("input dimension " + std::to_string(weights.cols) +
                     " is not a multiple of group size " + std::to_string(options.group_size) +
                     "; groups may not straddle output channels and padding across groups is "
                     "not performed");
  }

  const std::int64_t groups_per_row = weights.cols / options.group_size;
  const std::int64_t group_count = weights.rows * groups_per_row;
  const int words_per_group = geo.words_per_group;

  QuantizeResult result;
  QuantizedTensor& qt = result.tensor;
  qt.rows = weights.rows;
  qt.cols = weights.cols;
  qt.family = options.family;
  qt.group_size = options.group_size;
  qt.rounds = options.refinement_rounds;
  qt.code_words.resize(std::size_t(group_count) * words_per_group);
  qt.scale_codes.resize(std::size_t(group_count));
  qt.group_scales.resize(std::size_t(group_count));
  qt.super_scales.resize(std::size_t(weights.rows));
  if (scheme.uses_cluster) {
    qt.cluster_scales.resize(std::size_t(weights.rows));
    qt.cluster_zero_points.resize(std::size_t(weights.rows));
    qt.clustered_codes.resize(std::size_t(group_count) * words_per_group);
  }
  result.group_errors.resize(std::size_t(group_count));

  parallel_for(0, weights.rows, options.threads, [&](std::int64_t r) {
    const std::span<const float> row = weights.row(r);
    const std::size_t word_base = std::size_t(r) * groups_per_row * words_per_group;
    const std::size_t group_base = std::size_t(r) * groups_per_row;

    std::vector<float> raw_scales(static_cast<std::size_t>(groups_per_row));
    for (std::int64_t j = 0; j < groups_per_row; ++j) {
      const GroupResult gr = quantize_group(
          row.subspan(std::size_t(j) * options.group_size, std::size_t(options.group_size)),
          scheme, options.refinement_rounds);
      std::copy(gr.code_words.begin(), gr.code_words.end(),
                qt.code_words.begin() + word_base + std::size_t(j) * words_per_group);
      raw_scales[std::size_t(j)] = float(gr.params.scale);
    }

    // Snap the channel's scales to their stored form. Reconstruction below
    // uses the snapped values, so the packed file reproduces it exactly.
    const QuantizedScales qs = quantize_scales(raw_scales, scheme.scale_bits);
    qt.super_scales[std::size_t(r)] = qs.super_scale;
    for (std::int64_t j = 0; j < groups_per_row; ++j) {
      qt.scale_codes[group_base + j] = qs.codes[std::size_t(j)];
      qt.group_scales[group_base + j] = float(qs.codes[std::size_t(j)]) * qs.super_scale;
    }

    if (scheme.uses_cluster) {
      const std::span<const std::uint16_t> channel_words(qt.code_words.data() + word_base,
                                                         std::size_t(groups_per_row) *
                                                             words_per_group);
      const ClusterChannel cluster = cluster_channel(channel_words, scheme.code_bits);
      qt.cluster_scales[std::size_t(r)] = cluster.params.code_scale;
      qt.cluster_zero_points[std::size_t(r)] = cluster.params.code_zero_point;
      const ClusterTable table = build_cluster_table(cluster.params, scheme);

      // Re-pick each subvector's cluster index against the snapped scale;
      // the naive rounded mapping is one of the 256 candidates, so this
      // never loses to it.
      for (std::int64_t j = 0; j < groups_per_row; ++j) {
        const std::span<const float> group =
            row.subspan(std::size_t(j) * options.group_size, std::size_t(options.group_size));
        const double scale = double(qt.group_scales[group_base + j]);
        for (int w = 0; w < words_per_group; ++w) {
          const bool tail = geo.has_tail && w == geo.full_words;
          const std::span<const float> target =
              tail ? group.last(1)
                   : group.subspan(std::size_t(w) * scheme.weights_per_word,
                                   std::size_t(scheme.weights_per_word));
          const std::uint8_t q = search_cluster_table(target, scale, table, scheme);
          qt.clustered_codes[word_base + std::size_t(j) * words_per_group + w] = q;
          qt.code_words[word_base + std::size_t(j) * words_per_group + w] = table.codes[q];
        }
      }
    }

    // Final per-group error against the exact stored reconstruction.
    for (std::int64_t j = 0; j < groups_per_row; ++j) {
      const std::span<const float> group =
          row.subspan(std::size_t(j) * options.group_size, std::size_t(options.group_size));
      const std::span<const std::uint16_t> words(
          qt.code_words.data() + word_base + std::size_t(j) * words_per_group,
          std::size_t(words_per_group));
      const std::vector<int> states = decode_group_states(words, scheme, options.group_size);
      const float scale = qt.group_scales[group_base + j];
      double err = 0.0;
      for (std::size_t i = 0; i < group.size(); ++i) {
        const float recon = float(states[i] - scheme.zero_point) * scale;
        const double d = double(group[i]) - double(recon);
        err += d * d;
      }
      result.group_errors[group_base + j] = err;
    }
  });

  return result;
}

Matrix reconstruct(const QuantizedTensor& tensor) {
  const Scheme& scheme = family_scheme(tensor.family);
  const GroupGeometry geo = group_geometry(scheme, tensor.group_size);
  Matrix out(tensor.rows, tensor.cols);
  const std::int64_t groups_per_row = tensor.groups_per_row();
  for (std::int64_t r = 0; r < tensor.rows; ++r) {
    for (std::int64_t j = 0; j < groups_per_row; ++j) {
      const std::size_t gidx = std::size_t(r) * groups_per_row + j;
      const std::span<const std::uint16_t> words(
          tensor.code_words.data() + gidx * geo.words_per_group,
          std::size_t(geo.words_per_group));
      const float scale = tensor.group_scales[gidx];
      float* dst = out.row(r).data() + std::size_t(j) * tensor.group_size;
      const std::vector<int> states = decode_group_states(words, scheme, tensor.group_size);
      for (int i = 0; i < tensor.group_size; ++i) {
        dst[i] = float(states[std::size_t(i)] - scheme.zero_point) * scale;
      }
    }
  }
  return out;
}

Matrix rtn_reconstruct(const Matrix& weights, int bits, int group_size) {
  if (bits != 2 && bits != 4) throw ConfigError("rtn bits must be 2 or 4");
  if (group_size <= 0 || weights.cols % group_size != 0) {
    throw ShapeError("input dimension must be a multiple of the group size");
  }
  const int levels = (1 << bits) - 1;
  Matrix out(weights.rows, weights.cols);
  for (std::int64_t r = 0; r < weights.rows; ++r) {
    for (std::int64_t j = 0; j < weights.cols; j += group_size) {
      const float* src = weights.row(r).data() + j;
      float* dst = out.row(r).data() + j;
      double max_abs = 0.0;
      for (int i = 0; i < group_size; ++i) max_abs = std::max(max_abs, std::abs(double(src[i])));
      if (max_abs == 0.0) {
        std::fill(dst, dst + group_size, 0.0f);
        continue;
      }
      const double step = 2.0 * max_abs / double(levels);
      for (int i = 0; i < group_size; ++i) {
        const long q =
            std::clamp<long>(std::lround((double(src[i]) + max_abs) / step), 0, levels);
        dst[i] = float(double(q) * step - max_abs);
      }
    }
  }
  return out;
}

}  // namespace ccq
