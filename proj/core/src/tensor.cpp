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

#include "ccq/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

static_assert(std::endian::native == std::endian::little,
              "tensor and container serialization assume a little-endian host");

namespace ccq {

Distribution distribution_from_name(const std::string& name) {
  if (name == "gaussian") return Distribution::Gaussian;
  if (name == "uniform") return Distribution::Uniform;
  throw ConfigError("unknown distribution '" + name + "' (expected gaussian or uniform)");
}

namespace {

// [0, 1) with 53 random bits; keeps the stream identical across libstdc++
// versions, unlike std::uniform_real_distribution.
inline double unit_double(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

Matrix random_matrix(std::int64_t rows, std::int64_t cols, Distribution dist,
                     std::uint64_t seed) {
  Matrix m(rows, cols);
  std::mt19937_64 rng(seed);
  if (dist == Distribution::Uniform) {
    for (auto& v : m.data) v = float(2.0 * unit_double(rng) - 1.0);
    return m;
  }
  // Box-Muller, explicit so the stream does not depend on the standard
  // library's normal_distribution implementation.
  std::size_t i = 0;
  while (i < m.data.size()) {
    double u1 = unit_double(rng);
    while (u1 <= 0.0) u1 = unit_double(rng);
    const double u2 = unit_double(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    m.data[i++] = float(r * std::cos(a));
    if (i < m.data.size()) m.data[i++] = float(r * std::sin(a));
  }
  return m;
}

void save_tensor(const Matrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(m.data.data()),
            std::streamsize(m.data.size() * sizeof(float)));
  if (!out) throw FormatError("short write to '" + path + "'");
  out.close();

  nlohmann::json sidecar;
  sidecar["shape"] = {m.rows, m.cols};
  sidecar["dtype"] = "f32";
  sidecar["order"] = "row_major";
  std::ofstream side(path + ".json", std::ios::trunc);
  if (!side) throw FormatError("cannot open '" + path + ".json' for writing");
  side << sidecar.dump(2) << "\n";
}

Matrix load_tensor(const std::string& path) {
  std::ifstream side(path + ".json");
  if (!side) throw FormatError("missing sidecar '" + path + ".json'");
  nlohmann::json sidecar;
  try {
    side >> sidecar;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad sidecar '" + path + ".json': " + e.what());
  }
  if (!sidecar.contains("shape") || !sidecar["shape"].is_array() || sidecar["shape"].size() != 2) {
    throw FormatError("sidecar '" + path + ".json' lacks a 2-element shape");
  }
  const std::int64_t rows = sidecar["shape"][0].get<std::int64_t>();
  const std::int64_t cols = sidecar["shape"][1].get<std::int64_t>();
  if (rows < 0 || cols < 0) throw ShapeError("negative shape in sidecar");
  if (sidecar.value("dtype", "f32") != std::string("f32")) {
    throw FormatError("unsupported dtype in sidecar '" + path + ".json'");
  }

  Matrix m(rows, cols);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::uint64_t>(in.tellg());
  const std::uint64_t expected = std::uint64_t(m.size()) * sizeof(float);
  if (bytes != expected) {
    throw FormatError("'" + path + "' holds " + std::to_string(bytes) + " bytes, shape needs " +
                      std::to_string(expected));
  }
  in.seekg(0);
  in.read(reinterpret_cast<char*>(m.data.data()), std::streamsize(expected));
  if (!in && expected != 0) throw FormatError("short read from '" + path + "'");
  return m;
}

}  // namespace ccq
