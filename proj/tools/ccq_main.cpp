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
// ccq: generate, quantize, dequantize, inspect, verify, bench.
// Exit codes: 0 success, 1 verification failure, 2 usage or format error.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ccq/container.hpp"
#include "ccq/error.hpp"
#include "ccq/kernels.hpp"
#include "ccq/metrics.hpp"
#include "ccq/quantizer.hpp"
#include "ccq/synthetic.hpp"
#include "ccq/tensor.hpp"

namespace {

using json = nlohmann::json;

struct Shape {
  std::int64_t a = 0;  // d_in (cols) for bench shapes, rows for gen
  std::int64_t b = 0;
};

Shape parse_shape(const std::string& text) {
  const std::size_t x = text.find('x');
  if (x == std::string::npos) throw ccq::ConfigError("shape must be AxB, got '" + text + "'");
  Shape s;
  try {
    s.a = std::stoll(text.substr(0, x));
    s.b = std::stoll(text.substr(x + 1));
  } catch (const std::exception&) {
    throw ccq::ConfigError("shape must be numeric AxB, got '" + text + "'");
  }
  if (s.a <= 0 || s.b <= 0) throw ccq::ConfigError("shape must be positive, got '" + text + "'");
  return s;
}

std::vector<Shape> parse_shapes(const std::string& list) {
  std::vector<Shape> shapes;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t comma = list.find(',', pos);
    const std::string item =
        list.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!item.empty()) shapes.push_back(parse_shape(item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (shapes.empty()) throw ccq::ConfigError("no shapes given");
  return shapes;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw ccq::Error("cannot open " + out_path + " for writing");
  out << text;
}

json summary_json(const ccq::CompressionSummary& s) {
  return json{{"weights", s.weights},
              {"bits_per_weight", s.bits_per_weight},
              {"code_bits", s.code_bits},
              {"scale_bits", s.scale_bits},
              {"container_bytes", s.container_bytes},
              {"original_bytes", s.original_bytes},
              {"code_section_bytes", s.code_section_bytes},
              {"scale_section_bytes", s.scale_section_bytes},
              {"channel_real_bytes", s.channel_real_bytes},
              {"overhead_bytes", s.overhead_bytes},
              {"payload_ratio", s.payload_ratio},
              {"file_ratio", s.file_ratio}};
}

int cmd_gen(const std::string& shape, const std::string& dist, std::uint64_t seed,
            const std::string& out) {
  const Shape s = parse_shape(shape);  // rejects zero or negative extents
  const ccq::Matrix m =
      ccq::random_matrix(s.a, s.b, ccq::distribution_from_name(dist), seed);
  ccq::save_tensor(m, out);
  std::cout << json{{"path", out}, {"shape", {m.rows, m.cols}}, {"distribution", dist},
                    {"seed", seed}}
                   .dump(2)
            << "\n";
  return 0;
}

int cmd_quantize(const std::string& in, const std::string& out, const std::string& bpw,
                 int group_size, int rounds, int threads, const std::string& report_path) {
  const ccq::Matrix w = ccq::load_tensor(in);
  ccq::QuantizerOptions options;
  options.family = ccq::family_from_name(bpw);
  options.group_size = group_size;
  options.refinement_rounds = rounds;
  options.threads = threads;

  const auto start = std::chrono::steady_clock::now();
  const ccq::QuantizeResult result = ccq::quantize_tensor(w, options);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ccq::write_container(result.tensor, out);

  const ccq::Matrix recon = ccq::reconstruct(result.tensor);
  const ccq::ErrorReport err = ccq::error_report(w, recon, group_size);
  const ccq::ContainerInfo info = ccq::inspect_container(out);
  const ccq::CompressionSummary summary =
      ccq::compression_summary(info, std::uint64_t(w.size()) * 4);

  const json report{{"input", in},
                    {"output", out},
                    {"shape", {w.rows, w.cols}},
                    {"family", ccq::family_name(options.family)},
                    {"group_size", group_size},
                    {"rounds", rounds},
                    {"seconds", seconds},
                    {"error",
                     {{"mse", err.mse},
                      {"max_abs", err.max_abs},
                      {"rel_frobenius", err.rel_frobenius}}},
                    {"compression", summary_json(summary)}};
  std::cout << report.dump(2) << "\n";
  if (!report_path.empty()) emit(report.dump(2) + "\n", report_path);
  return 0;
}

int cmd_dequantize(const std::string& in, const std::string& out) {
  const ccq::PackedModel model = ccq::load_model(in);
  ccq::save_tensor(ccq::dequantize(model), out);
  std::cout << json{{"path", out}, {"shape", {model.rows, model.cols}},
                    {"family", ccq::family_name(model.family)}}
                   .dump(2)
            << "\n";
  return 0;
}

int cmd_inspect(const std::string& in) {
  const ccq::ContainerInfo info = ccq::inspect_container(in);
  const ccq::Scheme& scheme = ccq::family_scheme(info.family);

  json parts = json::array();
  for (const ccq::EncodingConfig& part : scheme.parts) {
    parts.push_back({{"state_bits", part.state_bits},
                     {"states_per_code", part.states_per_code},
                     {"transition_bits", part.transition_bits},
                     {"total_bits", part.total_bits()}});
  }
  json sections = json::object();
  for (const auto& [name, s] : info.sections) {
    sections[name] = {{"offset", s.offset}, {"length", s.length}, {"crc32", s.crc32}};
  }
  const ccq::CompressionSummary summary = ccq::compression_summary(
      info, std::uint64_t(info.rows) * std::uint64_t(info.cols) * 4);

  std::cout << json{{"shape", {info.rows, info.cols}},
                    {"family", ccq::family_name(info.family)},
                    {"code_parts", parts},
                    {"group_size", info.group_size},
                    {"rounds", info.rounds},
                    {"scale_bits", info.scale_bits},
                    {"scale_storage", info.embedded_scale ? "embedded" : "sideband"},
                    {"measured_bpw", ccq::measured_bpw(info)},
                    {"file_bytes", info.file_bytes},
                    {"header_bytes", info.header_bytes},
                    {"sections", sections},
                    {"compression", summary_json(summary)}}
                   .dump(2)
            << "\n";
  return 0;
}

int cmd_verify(const std::string& in, const std::string& original, int threads) {
  std::vector<std::string> violations = ccq::verify_container(in);

  if (!original.empty()) {
    // Determinism and cross-module agreement against a fresh quantization of
    // the original tensor with the container's own parameters.
    const ccq::ContainerInfo info = ccq::inspect_container(in);
    const ccq::Matrix w = ccq::load_tensor(original);
    if (w.rows != info.rows || w.cols != info.cols) {
      violations.push_back("original tensor shape does not match the container");
    } else {
      ccq::QuantizerOptions options;
      options.family = info.family;
      options.group_size = info.group_size;
      options.refinement_rounds = info.rounds;
      options.threads = threads;
      const ccq::QuantizeResult fresh = ccq::quantize_tensor(w, options);
      const ccq::QuantizedTensor stored = ccq::read_container(in);
      if (!ccq::bitwise_equal(fresh.tensor, stored)) {
        violations.push_back("re-quantization of the original does not reproduce the container");
      }
      // Per-group squared error agreement: the quantizer's internal numbers
      // against an independent pass over the kernel-side reconstruction.
      const ccq::Matrix recon = ccq::dequantize(ccq::load_model(in));
      const ccq::ErrorReport err = ccq::error_report(w, recon, info.group_size);
      for (std::size_t g = 0; g < err.per_group_sse.size(); ++g) {
        if (err.per_group_sse[g] != fresh.group_errors[g]) {
          violations.push_back("group " + std::to_string(g) +
                               ": quantizer error " + std::to_string(fresh.group_errors[g]) +
                               " != reconstruction error " +
                               std::to_string(err.per_group_sse[g]));
          break;
        }
      }
    }
  }

  for (const std::string& v : violations) std::cerr << "violation: " << v << "\n";
  std::cout << (violations.empty()
                    ? std::string("verify: ok\n")
                    : "verify: FAIL (" + std::to_string(violations.size()) + " violations)\n");
  return violations.empty() ? 0 : 1;
}

int cmd_bench(const std::string& shapes_text, const std::string& batches_text,
              const std::string& bpw, int group_size, int iters, std::uint64_t seed,
              const std::string& out) {
  const std::vector<Shape> shapes = parse_shapes(shapes_text);
  std::vector<int> batches;
  {
    std::size_t pos = 0;
    while (pos <= batches_text.size()) {
      const std::size_t comma = batches_text.find(',', pos);
      const std::string item = batches_text.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (!item.empty()) {
        try {
          batches.push_back(std::stoi(item));
        } catch (const std::exception&) {
          throw ccq::ConfigError("batch list must be integers, got '" + item + "'");
        }
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (batches.empty()) throw ccq::ConfigError("no batch sizes given");
  }

  const ccq::Family family = ccq::family_from_name(bpw);
  std::vector<ccq::BenchRow> rows;
  for (const Shape& s : shapes) {
    // Shapes read d_in x d_out: the model has d_out rows of d_in weights.
    const ccq::QuantizedTensor t =
        ccq::random_quantized(s.b, s.a, family, group_size, seed + std::uint64_t(s.a * 31 + s.b));
    const ccq::PackedModel model = ccq::pack_model(t);
    const std::vector<ccq::BenchRow> shape_rows = ccq::bench_model(model, batches, iters, seed);
    rows.insert(rows.end(), shape_rows.begin(), shape_rows.end());
  }
  emit(ccq::bench_csv(rows), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CCQ: convolutional-code weight quantization codec"};
  app.require_subcommand(1);

  std::string shape = "64x64";
  std::string dist = "gaussian";
  std::string in, out, original, report_path;
  std::string bpw = "2.75";
  std::string shapes = "4096x4096,4096x1024,8192x8192,8192x1024";
  std::string batches = "1,4";
  std::uint64_t seed = 1;
  int group_size = 64;
  int rounds = 2;
  int threads = 0;
  int iters = 5;

  CLI::App* gen = app.add_subcommand("gen", "Generate a random test tensor");
  gen->add_option("--shape", shape, "Tensor shape, RxC")->capture_default_str();
  gen->add_option("--dist", dist, "gaussian or uniform")->capture_default_str();
  gen->add_option("--seed", seed, "RNG seed")->capture_default_str();
  gen->add_option("--out", out, "Output tensor path (raw f32 + JSON sidecar)")->required();

  CLI::App* quantize = app.add_subcommand("quantize", "Quantize a tensor into a container");
  quantize->add_option("--in", in, "Input tensor path")->required();
  quantize->add_option("--out", out, "Output container path")->required();
  quantize->add_option("--bpw", bpw, "Family: 2.75, 2.5, or 2.06")->capture_default_str();
  quantize->add_option("--group-size", group_size, "Weights per scale group")
      ->capture_default_str();
  quantize->add_option("--rounds", rounds, "Refinement rounds")->capture_default_str();
  quantize->add_option("--threads", threads, "Worker threads, 0 = hardware")
      ->capture_default_str();
  quantize->add_option("--report", report_path, "Also write the JSON report here");

  CLI::App* dequantize = app.add_subcommand("dequantize", "Expand a container to f32");
  dequantize->add_option("--in", in, "Input container path")->required();
  dequantize->add_option("--out", out, "Output tensor path")->required();

  CLI::App* inspect = app.add_subcommand("inspect", "Print container header and accounting");
  inspect->add_option("--in", in, "Container path")->required();

  CLI::App* verify = app.add_subcommand("verify", "Check container integrity");
  verify->add_option("--in", in, "Container path")->required();
  verify->add_option("--original", original, "Original tensor for agreement checks");
  verify->add_option("--threads", threads, "Worker threads, 0 = hardware")
      ->capture_default_str();

  CLI::App* bench = app.add_subcommand("bench", "Time GEMV variants on synthetic models");
  bench->add_option("--shapes", shapes, "Comma list of d_in x d_out")->capture_default_str();
  bench->add_option("--m", batches, "Comma list of batch sizes")->capture_default_str();
  bench->add_option("--bpw", bpw, "Family: 2.75, 2.5, or 2.06")->capture_default_str();
  bench->add_option("--group-size", group_size, "Weights per scale group")
      ->capture_default_str();
  bench->add_option("--iters", iters, "Timed repetitions per variant")->capture_default_str();
  bench->add_option("--seed", seed, "RNG seed")->capture_default_str();
  bench->add_option("--out", out, "CSV path; stdout when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(shape, dist, seed, out);
    if (quantize->parsed()) {
      return cmd_quantize(in, out, bpw, group_size, rounds, threads, report_path);
    }
    if (dequantize->parsed()) return cmd_dequantize(in, out);
    if (inspect->parsed()) return cmd_inspect(in);
    if (verify->parsed()) return cmd_verify(in, original, threads);
    if (bench->parsed()) {
      return cmd_bench(shapes, batches, bpw, group_size, iters, seed, out);
    }
  } catch (const ccq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
