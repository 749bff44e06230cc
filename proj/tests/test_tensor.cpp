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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "ccq/error.hpp"
#include "ccq/tensor.hpp"

using namespace ccq;

namespace {

std::string temp_path(const std::string& stem) {
  return (std::filesystem::temp_directory_path() / stem).string();
}

}  // namespace

TEST_CASE("random_matrix is deterministic in the seed") {
  const Matrix a = random_matrix(8, 16, Distribution::Gaussian, 42);
  const Matrix b = random_matrix(8, 16, Distribution::Gaussian, 42);
  const Matrix c = random_matrix(8, 16, Distribution::Gaussian, 43);
  CHECK(a.data == b.data);
  CHECK(a.data != c.data);
}

TEST_CASE("gaussian samples look standard normal") {
  const Matrix m = random_matrix(64, 256, Distribution::Gaussian, 7);
  double sum = 0.0, sq = 0.0;
  for (float v : m.data) {
    sum += v;
    sq += double(v) * v;
  }
  const double n = double(m.size());
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("uniform samples stay in [-1, 1)") {
  const Matrix m = random_matrix(16, 64, Distribution::Uniform, 9);
  float lo = 1.0f, hi = -1.0f;
  for (float v : m.data) {
    CHECK(v >= -1.0f);
    CHECK(v < 1.0f);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo < -0.8f);  // spread sanity
  CHECK(hi > 0.8f);
}

TEST_CASE("distribution_from_name") {
  CHECK(distribution_from_name("gaussian") == Distribution::Gaussian);
  CHECK(distribution_from_name("uniform") == Distribution::Uniform);
  CHECK_THROWS_AS(distribution_from_name("cauchy"), ConfigError);
}

TEST_CASE("tensor save/load round-trips bitwise") {
  const Matrix m = random_matrix(5, 12, Distribution::Gaussian, 3);
  const std::string path = temp_path("ccq_tensor_roundtrip.f32");
  save_tensor(m, path);
  const Matrix back = load_tensor(path);
  CHECK(back.rows == 5);
  CHECK(back.cols == 12);
  CHECK(back.data == m.data);
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".json");
}

TEST_CASE("tensor load rejects inconsistent files") {
  const Matrix m = random_matrix(4, 4, Distribution::Uniform, 1);
  const std::string path = temp_path("ccq_tensor_bad.f32");
  save_tensor(m, path);

  SUBCASE("raw payload truncated") {
    std::filesystem::resize_file(path, 4 * 4 * 4 - 4);
    CHECK_THROWS_AS(load_tensor(path), Error);
  }
  SUBCASE("sidecar missing") {
    std::filesystem::remove(path + ".json");
    CHECK_THROWS_AS(load_tensor(path), Error);
  }
  SUBCASE("sidecar shape larger than payload") {
    std::ofstream side(path + ".json", std::ios::trunc);
    side << R"({"shape": [4, 8], "dtype": "f32", "order": "row_major"})";
    side.close();
    CHECK_THROWS_AS(load_tensor(path), Error);
  }
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".json");
}
