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

#include <doctest.h>

#include <cstdint>
#include <vector>

#include "ccq/coding.hpp"
#include "ccq/error.hpp"

using namespace ccq;

namespace {

const std::vector<EncodingConfig> kAllConfigs = {
    {2, 3, 1}, {4, 3, 2}, {3, 3, 2}, {3, 4, 2}, {6, 4, 3}};

}  // namespace

TEST_CASE("total_bits") {
  CHECK(EncodingConfig{2, 3, 1}.total_bits() == 4);
  CHECK(EncodingConfig{4, 3, 2}.total_bits() == 8);
  CHECK(EncodingConfig{6, 1, 3}.total_bits() == 6);
  CHECK(EncodingConfig{3, 3, 2}.total_bits() == 7);
  CHECK(EncodingConfig{3, 4, 2}.total_bits() == 9);
  CHECK(EncodingConfig{6, 4, 3}.total_bits() == 15);
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(EncodingConfig{2, 3, 1}.validate());
  CHECK_NOTHROW(EncodingConfig{6, 1, 3}.validate());
  CHECK_THROWS_AS((EncodingConfig{2, 3, 3}.validate()), ConfigError);  // S > L
  CHECK_THROWS_AS((EncodingConfig{2, 3, 0}.validate()), ConfigError);  // S < 1
  CHECK_THROWS_AS((EncodingConfig{9, 1, 1}.validate()), ConfigError);  // L > 8
  CHECK_THROWS_AS((EncodingConfig{4, 0, 2}.validate()), ConfigError);  // N < 1
  CHECK_THROWS_AS((EncodingConfig{8, 3, 8}.validate()), ConfigError);  // T = 24
}

TEST_CASE("decode_states pinned values") {
  CHECK(decode_states(0xFF, {4, 3, 2}) == std::vector<std::uint16_t>{15, 15, 15});
  CHECK(decode_states(2, {2, 3, 1}) == std::vector<std::uint16_t>{0, 1, 2});
  CHECK(decode_states(0, {4, 3, 2}) == std::vector<std::uint16_t>{0, 0, 0});
  CHECK_THROWS_AS(decode_states(16, {2, 3, 1}), DomainError);  // 2^T = 16
}

TEST_CASE("codebook shape and pinned rows") {
  const Codebook book = build_codebook({2, 3, 1});
  CHECK(book.rows() == 16);
  CHECK(book.row(2)[0] == 0);
  CHECK(book.row(2)[1] == 1);
  CHECK(book.row(2)[2] == 2);

  const Codebook single = build_codebook({4, 1, 1});
  CHECK(single.rows() == 16);
  for (std::uint32_t k = 0; k < 16; ++k) {
    CHECK(single.row(k).size() == 1);
    CHECK(single.row(k)[0] == k);
  }
}

TEST_CASE("decode_states equals the materialized codebook, exhaustively") {
  for (const EncodingConfig& config : kAllConfigs) {
    const Codebook book = build_codebook(config);
    REQUIRE(book.rows() == config.code_count());
    for (std::uint32_t code = 0; code < config.code_count(); ++code) {
      const std::vector<std::uint16_t> states = decode_states(code, config);
      const auto row = book.row(code);
      REQUIRE(states.size() == row.size());
      for (std::size_t j = 0; j < states.size(); ++j) REQUIRE(states[j] == row[j]);
    }
  }
}

TEST_CASE("adjacent states share the overlap bits") {
  for (const EncodingConfig& config : kAllConfigs) {
    const std::uint32_t overlap_mask = (1u << config.overlap_bits()) - 1u;
    for (std::uint32_t code = 0; code < config.code_count(); ++code) {
      const std::vector<std::uint16_t> states = decode_states(code, config);
      for (std::size_t j = 0; j + 1 < states.size(); ++j) {
        REQUIRE((states[j] & overlap_mask) ==
                (states[j + 1] >> config.transition_bits));
      }
    }
  }
}

TEST_CASE("states_to_code inverts decode_states for every code") {
  for (const EncodingConfig& config : kAllConfigs) {
    for (std::uint32_t code = 0; code < config.code_count(); ++code) {
      REQUIRE(states_to_code(decode_states(code, config), config) == code);
    }
  }
}

TEST_CASE("states_to_code pinned values and rejections") {
  CHECK(states_to_code(std::vector<std::uint16_t>{0, 1, 2}, {2, 3, 1}) == 2);
  CHECK(states_to_code(std::vector<std::uint16_t>{11}, {4, 1, 2}) == 11);
  CHECK_THROWS_AS(states_to_code(std::vector<std::uint16_t>{0, 3, 0}, {2, 3, 1}),
                  EncodingError);
  CHECK_THROWS_AS(states_to_code(std::vector<std::uint16_t>{0, 1}, {2, 3, 1}),
                  EncodingError);  // wrong length
  CHECK_THROWS_AS(states_to_code(std::vector<std::uint16_t>{4, 0, 0}, {2, 3, 1}),
                  EncodingError);  // state out of range
}

TEST_CASE("packed layouts match the published table") {
  const LayoutSpec l275 = layout_for(EncodingConfig{4, 3, 2});
  CHECK(l275.weight_shifts == std::vector<int>{4, 2, 0});
  CHECK(l275.weight_mask == 0xF);
  CHECK(l275.scale_mask == 0xF);
  CHECK(l275.word_bits == 8);
  CHECK_FALSE(l275.uses_cluster);

  const LayoutSpec l25 = layout_for(canonical_hybrid());
  CHECK(l25.weight_shifts == std::vector<int>{13, 11, 9, 6, 4, 2, 0});
  CHECK(l25.weight_mask == 0x7);
  CHECK(l25.scale_mask == 0x1FFF);
  CHECK(l25.word_bits == 16);
  CHECK_FALSE(l25.uses_cluster);

  const LayoutSpec l206 = layout_for(EncodingConfig{6, 4, 3});
  CHECK(l206.weight_shifts == std::vector<int>{9, 6, 3, 0});
  CHECK(l206.weight_mask == 0x3F);
  CHECK(l206.scale_mask == 0xF);
  CHECK(l206.scale_shifts == std::vector<int>{0, 4});
  CHECK(l206.uses_cluster);

  CHECK_THROWS_AS(layout_for(EncodingConfig{2, 3, 1}), ConfigError);
}

TEST_CASE("weight windows tile the code bits exactly") {
  // The union of [shift, shift + L) over the shift list must be [0, T_word)
  // where T_word is the total code bits carried by the word.
  struct Case {
    LayoutSpec layout;
    int state_bits;
    int code_bits;
  };
  const std::vector<Case> cases = {
      {layout_for(EncodingConfig{4, 3, 2}), 4, 8},
      {layout_for(canonical_hybrid()), 3, 16},
      {layout_for(EncodingConfig{6, 4, 3}), 6, 15},
  };
  for (const Case& c : cases) {
    std::uint32_t covered = 0;
    for (int shift : c.layout.weight_shifts) {
      covered |= ((1u << c.state_bits) - 1u) << shift;
    }
    CHECK(covered == (1u << c.code_bits) - 1u);
  }
}

TEST_CASE("hybrid schedule invariants") {
  const HybridSchedule hybrid = canonical_hybrid();
  CHECK(hybrid.parts.size() == 2);
  CHECK(hybrid.parts[0].total_bits() == 7);
  CHECK(hybrid.parts[1].total_bits() == 9);
  CHECK(hybrid.word_bits == 16);
  CHECK(hybrid.weights_per_word() == 7);
  CHECK_NOTHROW(hybrid.validate());

  HybridSchedule bad_bits = hybrid;
  bad_bits.word_bits = 8;
  CHECK_THROWS_AS(bad_bits.validate(), ConfigError);

  HybridSchedule bad_l = hybrid;
  bad_l.parts[1].state_bits = 4;
  CHECK_THROWS_AS(bad_l.validate(), ConfigError);
}

TEST_CASE("family schemes") {
  const Scheme& s275 = family_scheme(Family::Bpw275);
  CHECK(s275.code_bits == 8);
  CHECK(s275.stored_word_bytes == 1);
  CHECK(s275.weights_per_word == 3);
  CHECK(s275.state_bits == 4);
  CHECK(s275.zero_point == 8);
  CHECK(s275.scale_bits == 4);
  CHECK_FALSE(s275.uses_cluster);

  const Scheme& s25 = family_scheme(Family::Bpw25);
  CHECK(s25.code_bits == 16);
  CHECK(s25.stored_word_bytes == 2);
  CHECK(s25.weights_per_word == 7);
  CHECK(s25.state_bits == 3);
  CHECK(s25.zero_point == 4);
  CHECK(s25.scale_bits == 13);
  CHECK_FALSE(s25.uses_cluster);

  const Scheme& s206 = family_scheme(Family::Bpw206);
  CHECK(s206.code_bits == 15);
  CHECK(s206.stored_word_bytes == 1);
  CHECK(s206.weights_per_word == 4);
  CHECK(s206.state_bits == 6);
  CHECK(s206.zero_point == 32);
  CHECK(s206.scale_bits == 4);
  CHECK(s206.uses_cluster);
}

TEST_CASE("family names") {
  CHECK(family_name(Family::Bpw275) == "2.75");
  CHECK(family_name(Family::Bpw25) == "2.5");
  CHECK(family_name(Family::Bpw206) == "2.06");
  CHECK(family_from_name("2.75") == Family::Bpw275);
  CHECK(family_from_name("2.5") == Family::Bpw25);
  CHECK(family_from_name("2.50") == Family::Bpw25);
  CHECK(family_from_name("2.06") == Family::Bpw206);
  CHECK_THROWS_AS(family_from_name("3.5"), ConfigError);
}

TEST_CASE("clustered code reconstruction") {
  CHECK(clustered_code_value(200, 1.0f, 0.0f, 15) == 200);
  CHECK(clustered_code_value(255, 32767.0f / 255.0f, 0.0f, 15) == 32767);
  CHECK(clustered_code_value(0, 32767.0f / 255.0f, 0.0f, 15) == 0);
  // Half-away-from-zero: 2.5 rounds to 3.
  CHECK(clustered_code_value(1, 2.5f, 0.0f, 15) == 3);
  CHECK_THROWS_AS(clustered_code_value(255, 200.0f, 0.0f, 15), DomainError);
  CHECK_THROWS_AS(clustered_code_value(0, 1.0f, -1.0f, 15), DomainError);
}
