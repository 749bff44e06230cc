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

#ifndef CCQ_TENSOR_HPP_
#define CCQ_TENSOR_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ccq/error.hpp"

namespace ccq {

// Dense row-major f32 matrix, rows = output channels, cols = input dim.
struct Matrix {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<float> data;

  Matrix() = default;
  Matrix(std::int64_t r, std::int64_t c) : rows(r), cols(c), data(std::size_t(r) * c, 0.0f) {
    if (r < 0 || c < 0) throw ShapeError("negative matrix dimension");
  }

  float& at(std::int64_t r, std::int64_t c) { return data[std::size_t(r) * cols + c]; }
  float at(std::int64_t r, std::int64_t c) const { return data[std::size_t(r) * cols + c]; }
  std::span<const float> row(std::int64_t r) const {
    return {data.data() + std::size_t(r) * cols, std::size_t(cols)};
  }
  std::span<float> row(std::int64_t r) {
    return {data.data() + std::size_t(r) * cols, std::size_t(cols)};
  }
  std::int64_t size() const { return rows * cols; }
};

enum class Distribution { Gaussian, Uniform };

Distribution distribution_from_name(const std::string& name);  // throws ConfigError

// Deterministic fill: mt19937_64 bits mapped through an explicit Box-Muller
// (Gaussian) or linear map to [-1, 1) (Uniform). Same seed, same bytes, on
// every platform.
Matrix random_matrix(std::int64_t rows, std::int64_t cols, Distribution dist, std::uint64_t seed);

// Raw little-endian f32 row-major payload at `path` plus a JSON sidecar at
// `path`.json recording {"shape": [rows, cols], "dtype": "f32",
// "order": "row_major"}.
void save_tensor(const Matrix& m, const std::string& path);
Matrix load_tensor(const std::string& path);  // throws FormatError / ShapeError

}  // namespace ccq

#endif  // CCQ_TENSOR_HPP_
