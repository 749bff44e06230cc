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

#ifndef CCQ_METRICS_HPP_
#define CCQ_METRICS_HPP_

#include <cstdint>
#include <vector>

#include "ccq/container.hpp"
#include "ccq/tensor.hpp"

namespace ccq {

struct ErrorReport {
  double mse = 0.0;
  double max_abs = 0.0;
  double rel_frobenius = 0.0;          // ||a - b||_F / ||a||_F, 0 when a is all zero
  std::vector<double> per_group_sse;   // filled when group_size > 0
};

// Elementwise comparison of two equal-shape matrices, a being the reference.
// With group_size > 0 (must divide cols) per-group squared errors are
// reported in row-major group order.
ErrorReport error_report(const Matrix& a, const Matrix& b, int group_size = 0);

struct CompressionSummary {
  std::uint64_t weights = 0;
  double bits_per_weight = 0.0;       // logical payload bits / weights
  std::uint64_t code_bits = 0;        // logical code bits
  std::uint64_t scale_bits = 0;       // logical side-band scale bits
  std::uint64_t container_bytes = 0;  // whole file
  std::uint64_t original_bytes = 0;   // as passed in (dense f32: weights x 4)
  std::uint64_t code_section_bytes = 0;
  std::uint64_t scale_section_bytes = 0;
  std::uint64_t channel_real_bytes = 0;  // super scales + cluster parameters
  std::uint64_t overhead_bytes = 0;      // header, padding, pad nibble
  double payload_ratio = 0.0;  // (code + scale sections) / original, ~ bpw/32
  double file_ratio = 0.0;     // container_bytes / original
};

CompressionSummary compression_summary(const ContainerInfo& info,
                                       std::uint64_t original_bytes);

}  // namespace ccq

#endif  // CCQ_METRICS_HPP_
