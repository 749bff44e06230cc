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

#include "ccq/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ccq/error.hpp"

namespace ccq {

ErrorReport error_report(const Matrix& a, const Matrix& b, int group_size) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw ShapeError("error_report needs equal shapes");
  }
  if (group_size < 0 || (group_size > 0 && a.cols % group_size != 0)) {
    throw ShapeError("group size must divide the column count");
  }

  ErrorReport report;
  const std::int64_t n = a.size();
  if (group_size > 0) {
    report.per_group_sse.assign(std::size_t(n / group_size), 0.0);
  }

  double sse = 0.0;
  double ref = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double av = a.data[std::size_t(i)];
    const double d = av - double(b.data[std::size_t(i)]);
    sse += d * d;
    ref += av * av;
    report.max_abs = std::max(report.max_abs, std::abs(d));
    if (group_size > 0) report.per_group_sse[std::size_t(i / group_size)] += d * d;
  }
  report.mse = n == 0 ? 0.0 : sse / double(n);
  report.rel_frobenius = ref == 0.0 ? 0.0 : std::sqrt(sse) / std::sqrt(ref);
  return report;
}

CompressionSummary compression_summary(const ContainerInfo& info,
                                       std::uint64_t original_bytes) {
  CompressionSummary s;
  const PayloadBits bits = container_payload_bits(info);
  s.weights = bits.weights;
  s.bits_per_weight = bits.bits_per_weight();
  s.code_bits = bits.code_bits;
  s.scale_bits = bits.scale_bits;
  s.container_bytes = info.file_bytes;
  s.original_bytes = original_bytes;

  for (const auto& [name, sec] : info.sections) {
    if (name == "codes") {
      s.code_section_bytes = sec.length;
    } else if (name == "group_scales") {
      s.scale_section_bytes = sec.length;
    } else {
      s.channel_real_bytes += sec.length;
    }
  }
  const std::uint64_t sections =
      s.code_section_bytes + s.scale_section_bytes + s.channel_real_bytes;
  s.overhead_bytes = info.file_bytes - sections;

  const std::uint64_t payload = s.code_section_bytes + s.scale_section_bytes;
  s.payload_ratio =
      s.original_bytes == 0 ? 0.0 : double(payload) / double(s.original_bytes);
  s.file_ratio =
      s.original_bytes == 0 ? 0.0 : double(s.container_bytes) / double(s.original_bytes);
  return s;
}

}  // namespace ccq
