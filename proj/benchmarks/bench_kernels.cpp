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
// Microbenchmarks for the decode and GEMV paths. These complement the CLI's
// `bench` subcommand: that one reports end-to-end medians and byte traffic,
// these give per-op numbers under Google Benchmark's statistics.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "ccq/container.hpp"
#include "ccq/kernels.hpp"
#include "ccq/synthetic.hpp"
#include "ccq/tensor.hpp"

namespace {

using namespace ccq;

Family family_from_index(int idx) {
  switch (idx) {
    case 0: return Family::Bpw275;
    case 1: return Family::Bpw25;
    default: return Family::Bpw206;
  }
}

PackedModel make_model(std::int64_t rows, std::int64_t cols, Family family) {
  return pack_model(
      random_quantized(rows, cols, family, 64, std::uint64_t(rows * 31 + cols)));
}

void BM_dequantize(benchmark::State& state) {
  const auto rows = state.range(0);
  const auto cols = state.range(1);
  const PackedModel model = make_model(rows, cols, family_from_index(int(state.range(2))));
  for (auto _ : state) {
    Matrix m = dequantize(model);
    benchmark::DoNotOptimize(m.data.data());
  }
  state.SetBytesProcessed(std::int64_t(state.iterations()) * rows * cols * 4);
}

void BM_fused_gemv(benchmark::State& state) {
  const auto rows = state.range(0);
  const auto cols = state.range(1);
  const PackedModel model = make_model(rows, cols, family_from_index(int(state.range(2))));
  const Matrix x = random_matrix(1, cols, Distribution::Uniform, 7);
  std::vector<float> y(static_cast<std::size_t>(rows));
  for (auto _ : state) {
    gemv(model, x.row(0), y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetBytesProcessed(std::int64_t(state.iterations()) *
                          std::int64_t(model_payload_bytes(model)));
}

void BM_dense_gemv(benchmark::State& state) {
  const auto rows = state.range(0);
  const auto cols = state.range(1);
  const PackedModel model = make_model(rows, cols, family_from_index(int(state.range(2))));
  const Matrix dense = dequantize(model);
  const Matrix x = random_matrix(1, cols, Distribution::Uniform, 7);
  std::vector<float> y(static_cast<std::size_t>(rows));
  for (auto _ : state) {
    dense_gemv(dense, x.row(0), y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetBytesProcessed(std::int64_t(state.iterations()) * rows * cols * 4);
}

void shape_args(benchmark::internal::Benchmark* b) {
  for (int family = 0; family < 3; ++family) {
    b->Args({1024, 4096, family});
    b->Args({4096, 4096, family});
  }
}

BENCHMARK(BM_dequantize)->Apply(shape_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fused_gemv)->Apply(shape_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dense_gemv)->Apply(shape_args)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
