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
// Inference-side kernels. Decoding is lookup-free: every weight is a shift
// and a mask away from its packed word, so the fused matrix-vector product
// never materializes the dense tensor. Accumulation is in double, outputs
// are f32, and the arithmetic matches the quantizer's reconstruction
// expression bit for bit.

#ifndef CCQ_KERNELS_HPP_
#define CCQ_KERNELS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ccq/container.hpp"
#include "ccq/tensor.hpp"

namespace ccq {

// Expands the packed model to a dense row-major f32 matrix.
Matrix dequantize(const PackedModel& model);

// y = W x with W decoded on the fly. x has cols entries, y has rows.
void gemv(const PackedModel& model, std::span<const float> x, std::span<float> y);

// Y = X W^T for a batch of row vectors: x is batch x cols, y is batch x rows.
// Each weight is decoded once and applied to every batch row.
void gemv_batch(const PackedModel& model, const Matrix& x, Matrix& y);

// Reference dense product with the same accumulation order (double, left to
// right along the row).
void dense_gemv(const Matrix& weights, std::span<const float> x, std::span<float> y);

// Stored bytes of the packed weight stream: code payload, side-band scale
// nibbles, per-channel super scales, per-channel cluster parameters.
std::uint64_t model_payload_bytes(const PackedModel& model);

// One timing measurement. bytes_read counts the weight-stream traffic only
// (activations are identical across variants): the dense variants read
// rows x cols x 4 bytes, the fused variant reads model_payload_bytes, and
// dequantize-then-dense pays for both.
struct BenchRow {
  std::int64_t d_in = 0;   // cols
  std::int64_t d_out = 0;  // rows
  int batch = 1;
  std::string variant;  // dense_f32 | dequant_then_dense | ccq_fused
  double median_ms = 0.0;
  std::uint64_t bytes_read = 0;
};

// Times the three variants on one model for each batch size, iterations
// runs each, and reports medians.
std::vector<BenchRow> bench_model(const PackedModel& model, const std::vector<int>& batches,
                                  int iterations, std::uint64_t seed);

// CSV with header shape,M,variant,median_ms,bytes_read; shape prints as
// d_in x d_out.
std::string bench_csv(const std::vector<BenchRow>& rows);

// Inverse of bench_csv; throws FormatError on malformed input.
std::vector<BenchRow> parse_bench_csv(const std::string& csv);

}  // namespace ccq

#endif  // CCQ_KERNELS_HPP_
