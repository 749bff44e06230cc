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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ccq/error.hpp"
#include "ccq/quantizer.hpp"
#include "oracles.hpp"

using namespace ccq;
using ccq_test::gaussian_vector;
using ccq_test::oracle_grid_scale;
using ccq_test::oracle_search;
using ccq_test::scale_objective;

TEST_CASE("init_group_scale") {
  CHECK(init_group_scale(std::vector<float>{0, 0, 0, 0}, 4) == 0.0);
  CHECK(init_group_scale(std::vector<float>{-7.0f, 7.0f}, 4) == 1.0);
  CHECK(init_group_scale(std::vector<float>{3.0f}, 3) == 1.0);
}

TEST_CASE("search recovers exactly representable subvectors") {
  const EncodingConfig config{4, 3, 2};
  const double scale = 0.37;
  for (std::uint32_t k = 0; k < config.code_count(); ++k) {
    const std::vector<std::uint16_t> states = decode_states(k, config);
    std::vector<float> v(states.size());
    for (std::size_t j = 0; j < states.size(); ++j) {
      v[j] = float(double(int(states[j]) - 8) * scale);
    }
    REQUIRE(search_codes(v, scale, 8, config) == k);
  }
}

TEST_CASE("search with zero scale returns code 0") {
  CHECK(search_codes(std::vector<float>{1.5f, -0.3f, 9.9f}, 0.0, 8, {4, 3, 2}) == 0);
}

TEST_CASE("search matches the materialized-codebook oracle, ties included") {
  std::mt19937_64 rng(404);
  const std::vector<EncodingConfig> configs = {{2, 3, 1}, {4, 3, 2}, {3, 3, 2}, {3, 4, 2}};
  for (const EncodingConfig& config : configs) {
    const int zp = 1 << (config.state_bits - 1);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<float> v = gaussian_vector(config.states_per_code, rng());
      const double scale = 0.05 + 0.4 * double(rng() >> 11) * 0x1.0p-53;
      REQUIRE(search_codes(v, scale, zp, config) == oracle_search(v, scale, zp, config));
      // Valid prefixes (padding positions carry no cost).
      const std::span<const float> prefix(v.data(), 1);
      REQUIRE(search_codes(prefix, scale, zp, config) ==
              oracle_search(prefix, scale, zp, config));
    }
  }
  // A few of the big 15-bit sweeps; the acceptance gate runs the full count.
  const EncodingConfig big{6, 4, 3};
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<float> v = gaussian_vector(4, rng());
    REQUIRE(search_codes(v, 0.03, 32, big) == oracle_search(v, 0.03, 32, big));
  }
}

TEST_CASE("optimize_scale closed form") {
  SUBCASE("exact linear relation") {
    const std::vector<int> centered = {3, -5, 7, 1};
    std::vector<float> group(centered.size());
    for (std::size_t i = 0; i < centered.size(); ++i) group[i] = float(2.5 * centered[i]);
    CHECK(optimize_scale(group, centered, 0.1) == doctest::Approx(2.5).epsilon(1e-12));
  }
  SUBCASE("zero denominator returns the prior") {
    const std::vector<int> centered = {0, 0, 0};
    const std::vector<float> group = {1.0f, 2.0f, 3.0f};
    CHECK(optimize_scale(group, centered, 0.625) == 0.625);
  }
  SUBCASE("matches a fine grid search") {
    std::mt19937_64 rng(808);
    for (int trial = 0; trial < 20; ++trial) {
      const std::vector<float> group = gaussian_vector(64, rng());
      std::vector<int> centered(64);
      for (auto& c : centered) c = int(rng() % 15) - 7;
      double sq = 0.0;
      for (int c : centered) sq += double(c) * c;
      if (sq == 0.0) continue;
      double sw = 0.0;
      for (float w : group) sw += double(w) * w;
      const double bound = std::sqrt(sw / sq);  // |S*| <= bound by Cauchy-Schwarz
      const double opt = optimize_scale(group, centered, 0.0);
      const double grid = oracle_grid_scale(group, centered, 2.0 * bound, 20001);
      if (opt >= 0.0) {
        const double e_opt = scale_objective(group, centered, opt);
        const double e_grid = scale_objective(group, centered, grid);
        CHECK(e_opt <= e_grid + 1e-12);
        CHECK(std::abs(e_opt - e_grid) <= 1e-6 * std::max(e_grid, 1e-9));
      }
    }
  }
}

TEST_CASE("quantize_group on an all-zero group") {
  const std::vector<float> zeros(64, 0.0f);
  for (Family family : {Family::Bpw275, Family::Bpw25, Family::Bpw206}) {
    const GroupResult r = quantize_group(zeros, family_scheme(family), 2);
    CHECK(r.params.scale == 0.0);
    CHECK(r.error == 0.0);
    for (std::uint16_t w : r.code_words) CHECK(w == 0);
  }
}

TEST_CASE("quantize_group recovers an exactly representable group") {
  // Build the group from valid code words at scale 0.5, including a state at
  // the grid edge (|state - zp| = 7) so the initial scale estimate is already
  // exact.
  const Scheme& scheme = family_scheme(Family::Bpw275);
  // Restrict the draw to words whose three states are all nonzero: state 0
  // decodes to centered -8, whose magnitude exceeds the +7 the initial
  // max/7 estimate divides by.
  std::vector<std::uint16_t> safe;
  for (std::uint32_t w = 0; w < 256; ++w) {
    const std::vector<std::uint16_t> s = decode_states(w, scheme.parts[0]);
    if (s[0] != 0 && s[1] != 0 && s[2] != 0) safe.push_back(std::uint16_t(w));
  }
  std::mt19937_64 rng(31337);
  std::vector<std::uint16_t> words(22);
  for (auto& w : words) w = safe[rng() % safe.size()];
  words[0] = 0xFF;                 // states [15,15,15]: centered 7 anchors the scale
  words[21] = std::uint16_t(0x3u << 4);  // valid tail: state only
  const std::vector<int> states = decode_group_states(words, scheme, 64);
  REQUIRE(states.size() == 64);
  std::vector<float> group(64);
  for (int i = 0; i < 64; ++i) group[std::size_t(i)] = float((states[std::size_t(i)] - 8) * 0.5);

  const GroupResult r = quantize_group(group, scheme, 0);
  CHECK(r.error == 0.0);
  CHECK(r.params.scale == 0.5);
  CHECK(r.code_words == words);
}

TEST_CASE("refinement error is non-increasing in rounds") {
  std::mt19937_64 rng(99);
  for (Family family : {Family::Bpw275, Family::Bpw25}) {
    const Scheme& scheme = family_scheme(family);
    for (int trial = 0; trial < 25; ++trial) {
      const std::vector<float> group = gaussian_vector(64, rng());
      double prev = -1.0;
      for (int rounds : {0, 1, 2, 3}) {
        const GroupResult r = quantize_group(group, scheme, rounds);
        if (prev >= 0.0) CHECK(r.error <= prev + 1e-12);
        prev = r.error;
      }
    }
  }
}

TEST_CASE("refined search beats round-to-nearest on gaussian groups") {
  std::mt19937_64 rng(2718);
  const Scheme& scheme = family_scheme(Family::Bpw275);
  int wins = 0;
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    const std::vector<float> group = gaussian_vector(64, rng());
    const GroupResult r = quantize_group(group, scheme, 2);

    Matrix m(1, 64);
    std::copy(group.begin(), group.end(), m.data.begin());
    const Matrix rtn = rtn_reconstruct(m, 2, 64);
    double rtn_err = 0.0;
    for (int i = 0; i < 64; ++i) {
      const double d = double(m.data[std::size_t(i)]) - double(rtn.data[std::size_t(i)]);
      rtn_err += d * d;
    }
    if (r.error < rtn_err) ++wins;
  }
  CHECK(wins == trials);
}

TEST_CASE("decode_group_states drops padding") {
  const Scheme& scheme = family_scheme(Family::Bpw275);
  std::vector<std::uint16_t> words(22, 0);
  words[0] = 0xFF;
  words[21] = std::uint16_t(0xBu << 4);
  const std::vector<int> states = decode_group_states(words, scheme, 64);
  REQUIRE(states.size() == 64);
  CHECK(states[0] == 15);
  CHECK(states[1] == 15);
  CHECK(states[2] == 15);
  CHECK(states[63] == 0xB);
}

TEST_CASE("cluster_channel parameters") {
  SUBCASE("identical codes") {
    const std::vector<std::uint16_t> codes(40, 777);
    const ClusterChannel c = cluster_channel(codes, 15);
    CHECK(c.params.code_scale == 1.0f);
    CHECK(c.params.code_zero_point == 777.0f);
    for (std::uint8_t q : c.codes) CHECK(q == 0);
  }
  SUBCASE("full span forces the endpoints") {
    std::vector<std::uint16_t> codes = {0, 12345, 32767};
    const ClusterChannel c = cluster_channel(codes, 15);
    CHECK(c.params.code_zero_point == 0.0f);
    CHECK(c.params.code_scale == doctest::Approx(32767.0 / 255.0).epsilon(1e-6));
    CHECK(c.codes[0] == 0);
    CHECK(c.codes[2] == 255);
  }
}

TEST_CASE("cluster-aware re-search dominates naive rounding") {
  std::mt19937_64 rng(555);
  const Scheme& scheme = family_scheme(Family::Bpw206);
  const EncodingConfig config = scheme.parts[0];
  for (int trial = 0; trial < 30; ++trial) {
    // A synthetic channel of raw codes and a target the codes were chosen for.
    std::vector<std::uint16_t> raw(16);
    for (auto& c : raw) c = std::uint16_t(rng() & 0x7FFF);
    const ClusterChannel cluster = cluster_channel(raw, 15);
    const std::vector<float> target = gaussian_vector(4, rng());
    const double scale = 0.2;

    // Naive: keep the rounded cluster index of the original best code.
    const std::uint32_t plain = search_codes(target, scale, 32, config);
    const double alpha = cluster.params.code_scale;
    const double beta = cluster.params.code_zero_point;
    const long naive_q = std::clamp(std::lround((double(plain) - beta) / alpha), 0l, 255l);
    const std::uint16_t naive_code =
        clustered_code_value(std::uint8_t(naive_q), cluster.params.code_scale,
                             cluster.params.code_zero_point, 15);
    double naive_err = 0.0;
    {
      const std::vector<std::uint16_t> states = decode_states(naive_code, config);
      for (std::size_t j = 0; j < target.size(); ++j) {
        const double d = double(target[j]) - double(int(states[j]) - 32) * scale;
        naive_err += d * d;
      }
    }

    const std::uint8_t best_q = search_clustered(target, scale, cluster.params, scheme);
    const std::uint16_t best_code = clustered_code_value(
        best_q, cluster.params.code_scale, cluster.params.code_zero_point, 15);
    double best_err = 0.0;
    {
      const std::vector<std::uint16_t> states = decode_states(best_code, config);
      for (std::size_t j = 0; j < target.size(); ++j) {
        const double d = double(target[j]) - double(int(states[j]) - 32) * scale;
        best_err += d * d;
      }
    }
    CHECK(best_err <= naive_err + 1e-12);
  }
}

TEST_CASE("search_clustered matches brute force over all 256 indices") {
  std::mt19937_64 rng(616);
  const Scheme& scheme = family_scheme(Family::Bpw206);
  const EncodingConfig config = scheme.parts[0];
  for (int trial = 0; trial < 50; ++trial) {
    ClusterParams params;
    params.code_scale = float(1.0 + double(rng() % 100));
    params.code_zero_point = float(double(rng() % 1000));
    if (double(params.code_zero_point) + 255.0 * double(params.code_scale) > 32766.0) continue;
    const std::vector<float> target = gaussian_vector(4, rng());
    const double scale = 0.15;

    std::uint8_t best_q = 0;
    double best_err = 0.0;
    bool first = true;
    for (int q = 0; q < 256; ++q) {
      const std::uint16_t code = clustered_code_value(std::uint8_t(q), params.code_scale,
                                                      params.code_zero_point, 15);
      const std::vector<std::uint16_t> states = decode_states(code, config);
      double err = 0.0;
      for (std::size_t j = 0; j < target.size(); ++j) {
        const double d = double(target[j]) - double(int(states[j]) - 32) * scale;
        err += d * d;
      }
      if (first || err < best_err) {
        first = false;
        best_err = err;
        best_q = std::uint8_t(q);
      }
    }
    CHECK(search_clustered(target, scale, params, scheme) == best_q);
  }
}

TEST_CASE("quantize_tensor validates its inputs") {
  const Matrix m = random_matrix(4, 50, Distribution::Gaussian, 1);
  QuantizerOptions options;
  options.family = Family::Bpw275;
  CHECK_THROWS_AS(quantize_tensor(m, options), ShapeError);

  const Matrix ok = random_matrix(4, 64, Distribution::Gaussian, 1);
  options.refinement_rounds = -1;
  CHECK_THROWS_AS(quantize_tensor(ok, options), ConfigError);

  options.refinement_rounds = 2;
  options.family = Family::Bpw25;
  options.group_size = 63;  // 63 % 7 == 0: side-band undefined for 13-bit scales
  CHECK_THROWS_AS(quantize_tensor(ok, options), ConfigError);
}

TEST_CASE("zero row quantizes to zero codes and scales") {
  Matrix m(1, 64);
  QuantizerOptions options;
  options.family = Family::Bpw275;
  const QuantizeResult r = quantize_tensor(m, options);
  CHECK(r.tensor.scale_codes[0] == 0);
  CHECK(r.tensor.group_scales[0] == 0.0f);
  for (std::uint16_t w : r.tensor.code_words) CHECK(w == 0);
  const Matrix back = reconstruct(r.tensor);
  for (float v : back.data) CHECK(v == 0.0f);
}

TEST_CASE("identity matrix per-row error bound") {
  // One spike per row. A zero run decodes to states within 2 of the zero
  // point under the window-overlap rule, so the worst-case deviation per
  // element is 2 * scale of that row.
  Matrix eye(64, 64);
  for (int i = 0; i < 64; ++i) eye.at(i, i) = 1.0f;
  QuantizerOptions options;
  options.family = Family::Bpw275;
  options.refinement_rounds = 0;
  const QuantizeResult r = quantize_tensor(eye, options);
  const Matrix back = reconstruct(r.tensor);
  for (int row = 0; row < 64; ++row) {
    const float scale = r.tensor.group_scales[std::size_t(row)];
    double max_err = 0.0;
    for (int col = 0; col < 64; ++col) {
      max_err = std::max(max_err, std::abs(double(eye.at(row, col)) - double(back.at(row, col))));
    }
    CHECK(max_err <= 2.0 * double(scale) + 1e-12);
  }
}

TEST_CASE("quantize_tensor is deterministic and thread-count invariant") {
  const Matrix m = random_matrix(16, 128, Distribution::Gaussian, 12);
  QuantizerOptions options;
  options.family = Family::Bpw206;
  options.threads = 1;
  const QuantizeResult a = quantize_tensor(m, options);
  options.threads = 4;
  const QuantizeResult b = quantize_tensor(m, options);
  CHECK(bitwise_equal(a.tensor, b.tensor));
  CHECK(a.group_errors == b.group_errors);
}

TEST_CASE("quantized scales round to the stored grid") {
  const Matrix m = random_matrix(8, 128, Distribution::Gaussian, 21);
  QuantizerOptions options;
  options.family = Family::Bpw275;
  const QuantizeResult r = quantize_tensor(m, options);
  for (std::int64_t row = 0; row < 8; ++row) {
    for (std::int64_t j = 0; j < r.tensor.groups_per_row(); ++j) {
      const std::size_t g = std::size_t(row * r.tensor.groups_per_row() + j);
      CHECK(r.tensor.group_scales[g] ==
            float(r.tensor.scale_codes[g]) * r.tensor.super_scales[std::size_t(row)]);
      CHECK(r.tensor.scale_codes[g] < 16);
    }
  }
}

TEST_CASE("rtn baseline") {
  SUBCASE("exactly representable at 2 bits") {
    Matrix m(1, 4);
    m.data = {-3.0f, -1.0f, 1.0f, 3.0f};
    const Matrix back = rtn_reconstruct(m, 2, 4);
    CHECK(back.data == m.data);
  }
  SUBCASE("zero group stays zero") {
    Matrix m(1, 8);
    const Matrix back = rtn_reconstruct(m, 2, 8);
    for (float v : back.data) CHECK(v == 0.0f);
  }
  SUBCASE("bits restricted to the published baselines") {
    const Matrix m = random_matrix(1, 64, Distribution::Gaussian, 3);
    CHECK_THROWS_AS(rtn_reconstruct(m, 3, 64), ConfigError);
    CHECK_NOTHROW(rtn_reconstruct(m, 4, 64));
  }
  SUBCASE("4-bit dominates 2-bit") {
    const Matrix m = random_matrix(4, 256, Distribution::Gaussian, 8);
    const Matrix r2 = rtn_reconstruct(m, 2, 64);
    const Matrix r4 = rtn_reconstruct(m, 4, 64);
    double e2 = 0.0, e4 = 0.0;
    for (std::size_t i = 0; i < m.data.size(); ++i) {
      const double d2 = double(m.data[i]) - double(r2.data[i]);
      const double d4 = double(m.data[i]) - double(r4.data[i]);
      e2 += d2 * d2;
      e4 += d4 * d4;
    }
    CHECK(e4 < e2);
  }
}

TEST_CASE("group errors match the reconstruction") {
  const Matrix m = random_matrix(8, 128, Distribution::Gaussian, 77);
  for (Family family : {Family::Bpw275, Family::Bpw25, Family::Bpw206}) {
    QuantizerOptions options;
    options.family = family;
    const QuantizeResult r = quantize_tensor(m, options);
    const Matrix back = reconstruct(r.tensor);
    REQUIRE(r.group_errors.size() == std::size_t(r.tensor.group_count()));
    for (std::int64_t g = 0; g < r.tensor.group_count(); ++g) {
      double err = 0.0;
      const std::int64_t row = g / r.tensor.groups_per_row();
      const std::int64_t col0 = (g % r.tensor.groups_per_row()) * 64;
      for (int i = 0; i < 64; ++i) {
        const double d = double(m.at(row, col0 + i)) - double(back.at(row, col0 + i));
        err += d * d;
      }
      REQUIRE(r.group_errors[std::size_t(g)] == doctest::Approx(err).epsilon(1e-12));
    }
  }
}
