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

#include "ccq/coding.hpp"

#include <algorithm>

namespace ccq {

namespace {

const EncodingConfig kConfig275{4, 3, 2};
const EncodingConfig kConfig206{6, 4, 3};
const EncodingConfig kHybridHigh{3, 3, 2};
const EncodingConfig kHybridLow{3, 4, 2};

}  // namespace

HybridSchedule canonical_hybrid() {
  HybridSchedule s;
  s.parts = {kHybridHigh, kHybridLow};
  s.word_bits = 16;
  return s;
}

void EncodingConfig::validate() const {
  if (states_per_code < 1) {
    throw ConfigError("states_per_code must be >= 1, got " + std::to_string(states_per_code));
  }
  if (transition_bits < 1 || transition_bits > state_bits) {
    throw ConfigError("need 1 <= transition_bits <= state_bits, got " + to_string());
  }
  if (state_bits > 8) {
    throw ConfigError("state_bits must be <= 8, got " + to_string());
  }
  if (total_bits() > 16) {
    throw ConfigError("code word exceeds 16 bits: " + to_string());
  }
}

std::string EncodingConfig::to_string() const {
  return "(" + std::to_string(state_bits) + "," + std::to_string(states_per_code) + "," +
         std::to_string(transition_bits) + ")";
}

std::vector<std::uint16_t> decode_states(std::uint32_t code, const EncodingConfig& config) {
  config.validate();
  if (code >= config.code_count()) {
    throw DomainError("code " + std::to_string(code) + " out of range for " + config.to_string());
  }
  const int t = config.total_bits();
  std::vector<std::uint16_t> states(config.states_per_code);
  for (int j = 0; j < config.states_per_code; ++j) {
    const int shift = t - config.state_bits - j * config.transition_bits;
    states[j] = static_cast<std::uint16_t>((code >> shift) & config.state_mask());
  }
  return states;
}

std::uint32_t states_to_code(std::span<const std::uint16_t> states, const EncodingConfig& config) {
  config.validate();
  if (states.size() != static_cast<std::size_t>(config.states_per_code)) {
    throw EncodingError("expected " + std::to_string(config.states_per_code) + " states, got " +
                        std::to_string(states.size()));
  }
  const int t = config.total_bits();
  const std::uint32_t overlap_mask = (1u << config.overlap_bits()) - 1u;
  std::uint32_t code = 0;
  for (int j = 0; j < config.states_per_code; ++j) {
    if (states[j] > config.state_mask()) {
      throw EncodingError("state " + std::to_string(states[j]) + " exceeds " +
                          std::to_string(config.state_bits) + " bits");
    }
    if (j > 0) {
      // The high L-S bits of this state must repeat the low L-S bits of the
      // previous one; otherwise no code word holds this sequence.
      const std::uint32_t expected = states[j - 1] & overlap_mask;
      const std::uint32_t got = states[j] >> config.transition_bits;
      if (expected != got) {
        throw EncodingError("invalid state transition at position " + std::to_string(j) +
                            ": window overlap mismatch");
      }
    }
    code |= std::uint32_t(states[j]) << (t - config.state_bits - j * config.transition_bits);
  }
  return code;
}

Codebook build_codebook(const EncodingConfig& config) {
  config.validate();
  Codebook book;
  book.config = config;
  book.states.reserve(std::size_t(config.code_count()) * config.states_per_code);
  for (std::uint32_t code = 0; code < config.code_count(); ++code) {
    const int t = config.total_bits();
    for (int j = 0; j < config.states_per_code; ++j) {
      const int shift = t - config.state_bits - j * config.transition_bits;
      book.states.push_back(static_cast<std::uint16_t>((code >> shift) & config.state_mask()));
    }
  }
  return book;
}

int HybridSchedule::weights_per_word() const {
  int n = 0;
  for (const auto& part : parts) n += part.states_per_code;
  return n;
}

void HybridSchedule::validate() const {
  if (parts.empty()) throw ConfigError("hybrid schedule has no parts");
  int bits = 0;
  for (const auto& part : parts) {
    part.validate();
    if (part.state_bits != parts.front().state_bits) {
      throw ConfigError("hybrid parts must share state_bits");
    }
    bits += part.total_bits();
  }
  if (bits != word_bits) {
    throw ConfigError("hybrid parts fill " + std::to_string(bits) + " bits, word has " +
                      std::to_string(word_bits));
  }
  if (word_bits != 8 && word_bits != 16) {
    throw ConfigError("hybrid word_bits must be 8 or 16");
  }
}

namespace {

// Shifts of every state window of every part, relative to the packed word.
// Parts fill the word from the most-significant end down.
std::vector<int> word_shifts(std::span<const EncodingConfig> parts, int word_bits) {
  std::vector<int> shifts;
  int base = word_bits;
  for (const auto& part : parts) {
    base -= part.total_bits();
    for (int j = 0; j < part.states_per_code; ++j) {
      shifts.push_back(base + part.total_bits() - part.state_bits - j * part.transition_bits);
    }
  }
  return shifts;
}

}  // namespace

LayoutSpec layout_for(const EncodingConfig& config) {
  config.validate();
  LayoutSpec layout;
  if (config == kConfig275) {
    layout.word_bits = 8;
    layout.scale_mask = 0xF;  // 4-bit scale in the tail word's redundant bits
    layout.uses_cluster = false;
  } else if (config == kConfig206) {
    layout.word_bits = 16;  // shifts apply to the widened clustered value
    layout.scale_mask = 0xF;
    layout.scale_shifts = {0, 4};  // side-band nibbles, two groups per byte
    layout.uses_cluster = true;
  } else {
    throw ConfigError("no packed layout defined for " + config.to_string());
  }
  const EncodingConfig parts[] = {config};
  layout.weight_shifts = word_shifts(parts, config.total_bits());
  layout.weight_mask = config.state_mask();
  return layout;
}

LayoutSpec layout_for(const HybridSchedule& schedule) {
  schedule.validate();
  const HybridSchedule canonical = canonical_hybrid();
  if (schedule.parts != canonical.parts || schedule.word_bits != canonical.word_bits) {
    throw ConfigError("no packed layout defined for this hybrid schedule");
  }
  LayoutSpec layout;
  layout.word_bits = schedule.word_bits;
  layout.weight_shifts = word_shifts(schedule.parts, schedule.word_bits);
  layout.weight_mask = schedule.parts.front().state_mask();
  layout.scale_mask = 0x1FFF;  // 13-bit scale in the tail word's redundant bits
  layout.uses_cluster = false;
  return layout;
}

std::string family_name(Family family) {
  switch (family) {
    case Family::Bpw275: return "2.75";
    case Family::Bpw25: return "2.5";
    case Family::Bpw206: return "2.06";
  }
  throw ConfigError("unknown family");
}

Family family_from_name(const std::string& name) {
  if (name == "2.75") return Family::Bpw275;
  if (name == "2.5" || name == "2.50") return Family::Bpw25;
  if (name == "2.06") return Family::Bpw206;
  throw ConfigError("unknown family '" + name + "' (expected 2.75, 2.5 or 2.06)");
}

namespace {

Scheme make_scheme(Family family) {
  Scheme s;
  s.family = family;
  switch (family) {
    case Family::Bpw275:
      s.parts = {kConfig275};
      s.layout = layout_for(kConfig275);
      s.code_bits = 8;
      s.stored_word_bytes = 1;
      s.scale_bits = 4;
      s.uses_cluster = false;
      break;
    case Family::Bpw25: {
      const HybridSchedule hybrid = canonical_hybrid();
      s.parts = hybrid.parts;
      s.layout = layout_for(hybrid);
      s.code_bits = 16;
      s.stored_word_bytes = 2;
      s.scale_bits = 13;
      s.uses_cluster = false;
      break;
    }
    case Family::Bpw206:
      s.parts = {kConfig206};
      s.layout = layout_for(kConfig206);
      s.code_bits = 15;
      s.stored_word_bytes = 1;  // codes are stored clustered to 8 bits
      s.scale_bits = 4;
      s.uses_cluster = true;
      break;
  }
  s.weights_per_word = 0;
  for (const auto& part : s.parts) s.weights_per_word += part.states_per_code;
  s.state_bits = s.parts.front().state_bits;
  s.zero_point = 1 << (s.state_bits - 1);
  return s;
}

}  // namespace

const Scheme& family_scheme(Family family) {
  static const Scheme s275 = make_scheme(Family::Bpw275);
  static const Scheme s25 = make_scheme(Family::Bpw25);
  static const Scheme s206 = make_scheme(Family::Bpw206);
  switch (family) {
    case Family::Bpw275: return s275;
    case Family::Bpw25: return s25;
    case Family::Bpw206: return s206;
  }
  throw ConfigError("unknown family");
}

}  // namespace ccq
