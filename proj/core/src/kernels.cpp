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

#include "ccq/kernels.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>

#include "ccq/error.hpp"

namespace ccq {
namespace {

// Everything a row decode needs, resolved once per model.
struct DecodePlan {
  const Scheme* scheme = nullptr;
  GroupGeometry geo;
  int wpw = 0;           // weights per full word
  int zero_point = 0;
  std::uint32_t weight_mask = 0;
  const int* shifts = nullptr;
  bool cluster = false;
  bool wide_words = false;  // stored words are two bytes
};

DecodePlan make_plan(const PackedModel& model) {
  DecodePlan plan;
  plan.scheme = &family_scheme(model.family);
  plan.geo = group_geometry(*plan.scheme, model.group_size);
  plan.wpw = plan.scheme->weights_per_word;
  plan.zero_point = plan.scheme->zero_point;
  plan.weight_mask = plan.scheme->layout.weight_mask;
  plan.shifts = plan.scheme->layout.weight_shifts.data();
  plan.cluster = plan.scheme->uses_cluster;
  plan.wide_words = plan.scheme->stored_word_bytes == 2;
  return plan;
}

inline std::uint32_t load_word(const std::uint8_t* p, bool wide) {
  return wide ? std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) : std::uint32_t(p[0]);
}

// Decodes one group into out[0..group_size). payload points at the group's
// stored bytes, sideband is its 4-bit scale code when the scale is not
// embedded. cs/czp are the row's cluster parameters (ignored otherwise).
inline void decode_group(const DecodePlan& plan, const std::uint8_t* payload,
                         std::uint16_t sideband, float super, float cs, float czp,
                         float* out) {
  const int bytes_per_word = plan.wide_words ? 2 : 1;

  // Scale first: embedded scales live in the tail word's spare bits.
  std::uint32_t scale_code = sideband;
  if (plan.geo.embedded_scale) {
    const std::uint8_t* tail = payload + plan.geo.full_words * bytes_per_word;
    scale_code = load_word(tail, plan.wide_words) & plan.scheme->layout.scale_mask;
  }
  const float scale = float(scale_code) * super;

  int idx = 0;
  const std::uint8_t* p = payload;
  for (int w = 0; w < plan.geo.full_words; ++w, p += bytes_per_word) {
    std::uint32_t code = load_word(p, plan.wide_words);
    if (plan.cluster) {
      code = clustered_code_value(std::uint8_t(code), cs, czp, plan.scheme->code_bits);
    }
    for (int k = 0; k < plan.wpw; ++k) {
      const int state = int((code >> plan.shifts[k]) & plan.weight_mask);
      out[idx++] = float(state - plan.zero_point) * scale;
    }
  }
  if (plan.geo.has_tail) {
    std::uint32_t code = load_word(p, plan.wide_words);
    if (plan.cluster) {
      code = clustered_code_value(std::uint8_t(code), cs, czp, plan.scheme->code_bits);
    }
    const int state = int((code >> plan.shifts[0]) & plan.weight_mask);
    out[idx] = float(state - plan.zero_point) * scale;
  }
}

std::vector<std::uint16_t> sideband_codes(const PackedModel& model,
                                          const DecodePlan& plan) {
  if (plan.geo.embedded_scale) return {};
  return unpack_cluster_scales(model.scale_payload, std::size_t(model.group_count()));
}

}  // namespace

Matrix dequantize(const PackedModel& model) {
  const DecodePlan plan = make_plan(model);
  const std::vector<std::uint16_t> sideband = sideband_codes(model, plan);

  Matrix out(model.rows, model.cols);
  const std::int64_t gpr = model.groups_per_row();
  for (std::int64_t r = 0; r < model.rows; ++r) {
    const float super = model.super_scales[std::size_t(r)];
    const float cs = plan.cluster ? model.cluster_scales[std::size_t(r)] : 0.0f;
    const float czp = plan.cluster ? model.cluster_zero_points[std::size_t(r)] : 0.0f;
    float* row = out.row(r).data();
    for (std::int64_t gj = 0; gj < gpr; ++gj) {
      const std::int64_t gi = r * gpr + gj;
      decode_group(plan, model.code_payload.data() + gi * plan.geo.payload_bytes,
                   plan.geo.embedded_scale ? 0 : sideband[std::size_t(gi)], super, cs, czp,
                   row + gj * model.group_size);
    }
  }
  return out;
}

void gemv(const PackedModel& model, std::span<const float> x, std::span<float> y) {
  if (std::int64_t(x.size()) != model.cols || std::int64_t(y.size()) != model.rows) {
    throw ShapeError("gemv operand sizes do not match the model shape");
  }
  const DecodePlan plan = make_plan(model);
  const std::vector<std::uint16_t> sideband = sideband_codes(model, plan);
  const std::int64_t gpr = model.groups_per_row();
  std::vector<float> decoded(std::size_t(model.group_size));

  for (std::int64_t r = 0; r < model.rows; ++r) {
    const float super = model.super_scales[std::size_t(r)];
    const float cs = plan.cluster ? model.cluster_scales[std::size_t(r)] : 0.0f;
    const float czp = plan.cluster ? model.cluster_zero_points[std::size_t(r)] : 0.0f;
    double acc = 0.0;
    for (std::int64_t gj = 0; gj < gpr; ++gj) {
      const std::int64_t gi = r * gpr + gj;
      decode_group(plan, model.code_payload.data() + gi * plan.geo.payload_bytes,
                   plan.geo.embedded_scale ? 0 : sideband[std::size_t(gi)], super, cs, czp,
                   decoded.data());
      const float* xg = x.data() + gj * model.group_size;
      for (int i = 0; i < model.group_size; ++i) {
        acc += double(decoded[std::size_t(i)]) * double(xg[i]);
      }
    }
    y[std::size_t(r)] = float(acc);
  }
}

void gemv_batch(const PackedModel& model, const Matrix& x, Matrix& y) {
  if (x.cols != model.cols || y.cols != model.rows || y.rows != x.rows) {
    throw ShapeError("gemv_batch operand shapes do not match the model shape");
  }
  const std::int64_t batch = x.rows;
  const DecodePlan plan = make_plan(model);
  const std::vector<std::uint16_t> sideband = sideband_codes(model, plan);
  const std::int64_t gpr = model.groups_per_row();
  std::vector<float> decoded(std::size_t(model.group_size));
  std::vector<double> acc(static_cast<std::size_t>(batch));

  for (std::int64_t r = 0; r < model.rows; ++r) {
    const float super = model.super_scales[std::size_t(r)];
    const float cs = plan.cluster ? model.cluster_scales[std::size_t(r)] : 0.0f;
    const float czp = plan.cluster ? model.cluster_zero_points[std::size_t(r)] : 0.0f;
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::int64_t gj = 0; gj < gpr; ++gj) {
      const std::int64_t gi = r * gpr + gj;
      decode_group(plan, model.code_payload.data() + gi * plan.geo.payload_bytes,
                   plan.geo.embedded_scale ? 0 : sideband[std::size_t(gi)], super, cs, czp,
                   decoded.data());
      const std::int64_t col0 = gj * model.group_size;
      for (std::int64_t m = 0; m < batch; ++m) {
        const float* xg = x.row(m).data() + col0;
        double a = acc[std::size_t(m)];
        for (int i = 0; i < model.group_size; ++i) {
          a += double(decoded[std::size_t(i)]) * double(xg[i]);
        }
        acc[std::size_t(m)] = a;
      }
    }
    for (std::int64_t m = 0; m < batch; ++m) {
      y.at(m, r) = float(acc[std::size_t(m)]);
    }
  }
}

void dense_gemv(const Matrix& weights, std::span<const float> x, std::span<float> y) {
  if (std::int64_t(x.size()) != weights.cols || std::int64_t(y.size()) != weights.rows) {
    throw ShapeError("dense_gemv operand sizes do not match the matrix shape");
  }
  for (std::int64_t r = 0; r < weights.rows; ++r) {
    const float* row = weights.row(r).data();
    double acc = 0.0;
    for (std::int64_t c = 0; c < weights.cols; ++c) {
      acc += double(row[c]) * double(x[std::size_t(c)]);
    }
    y[std::size_t(r)] = float(acc);
  }
}

std::uint64_t model_payload_bytes(const PackedModel& model) {
  return std::uint64_t(model.code_payload.size()) + model.scale_payload.size() +
         model.super_scales.size() * 4 + model.cluster_scales.size() * 4 +
         model.cluster_zero_points.size() * 4;
}

namespace {

double median_ms(std::vector<double>& samples) {
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

template <typename Fn>
double time_ms(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

}  // namespace

std::vector<BenchRow> bench_model(const PackedModel& model, const std::vector<int>& batches,
                                  int iterations, std::uint64_t seed) {
  if (iterations < 1) throw ConfigError("bench iterations must be at least 1");
  std::vector<BenchRow> rows;
  const Matrix dense = dequantize(model);
  const std::uint64_t payload = model_payload_bytes(model);
  const std::uint64_t dense_bytes = std::uint64_t(model.rows) * std::uint64_t(model.cols) * 4;

  for (int batch : batches) {
    if (batch < 1) throw ConfigError("bench batch size must be at least 1");
    const Matrix x = random_matrix(batch, model.cols, Distribution::Gaussian, seed + batch);
    Matrix y(batch, model.rows);

    auto run_dense = [&](const Matrix& w) {
      for (std::int64_t m = 0; m < batch; ++m) dense_gemv(w, x.row(m), y.row(m));
    };

    std::vector<double> t_dense, t_dequant, t_fused;
    for (int it = 0; it < iterations; ++it) {
      t_dense.push_back(time_ms([&] { run_dense(dense); }));
      t_dequant.push_back(time_ms([&] {
        const Matrix w = dequantize(model);
        run_dense(w);
      }));
      t_fused.push_back(time_ms([&] { gemv_batch(model, x, y); }));
    }

    BenchRow base;
    base.d_in = model.cols;
    base.d_out = model.rows;
    base.batch = batch;

    BenchRow r = base;
    r.variant = "dense_f32";
    r.median_ms = median_ms(t_dense);
    r.bytes_read = dense_bytes;
    rows.push_back(r);

    r = base;
    r.variant = "dequant_then_dense";
    r.median_ms = median_ms(t_dequant);
    r.bytes_read = payload + dense_bytes;
    rows.push_back(r);

    r = base;
    r.variant = "ccq_fused";
    r.median_ms = median_ms(t_fused);
    r.bytes_read = payload;
    rows.push_back(r);
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "shape,M,variant,median_ms,bytes_read\n";
  for (const BenchRow& r : rows) {
    out << r.d_in << "x" << r.d_out << "," << r.batch << "," << r.variant << ","
        << r.median_ms << "," << r.bytes_read << "\n";
  }
  return out.str();
}

std::vector<BenchRow> parse_bench_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "shape,M,variant,median_ms,bytes_read") {
    throw FormatError("bench csv header mismatch", 0);
  }
  std::vector<BenchRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string shape, batch, variant, ms, bytes;
    if (!std::getline(fields, shape, ',') || !std::getline(fields, batch, ',') ||
        !std::getline(fields, variant, ',') || !std::getline(fields, ms, ',') ||
        !std::getline(fields, bytes)) {
      throw FormatError("bench csv row with missing fields: " + line, 0);
    }
    const std::size_t x = shape.find('x');
    if (x == std::string::npos) throw FormatError("bench csv shape not AxB: " + shape, 0);
    BenchRow r;
    try {
      r.d_in = std::stoll(shape.substr(0, x));
      r.d_out = std::stoll(shape.substr(x + 1));
      r.batch = std::stoi(batch);
      r.median_ms = std::stod(ms);
      r.bytes_read = std::stoull(bytes);
    } catch (const std::exception&) {
      throw FormatError("bench csv row with non-numeric fields: " + line, 0);
    }
    r.variant = variant;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace ccq
