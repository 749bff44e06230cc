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

#ifndef CCQ_SYNTHETIC_HPP_
#define CCQ_SYNTHETIC_HPP_

#include <cstdint>

#include "ccq/quantizer.hpp"

namespace ccq {

// A uniformly random, structurally valid quantized tensor: every packed bit
// pattern decodes (the code is dense), so drawing words at random produces a
// legitimate model without running the quantizer. Used to exercise packing,
// containers, and kernels at shapes where real quantization would be slow.
// Deterministic in the seed.
QuantizedTensor random_quantized(std::int64_t rows, std::int64_t cols, Family family,
                                 int group_size, std::uint64_t seed);

}  // namespace ccq

#endif  // CCQ_SYNTHETIC_HPP_
