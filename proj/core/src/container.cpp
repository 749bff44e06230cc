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

#include "ccq/container.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <utility>

#include "ccq/error.hpp"

namespace ccq {
namespace {

using json = nlohmann::json;

constexpr char kMagic[4] = {'C', 'C', 'Q', 'F'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint64_t kAlign = 8;

constexpr const char* kSectionCodes = "codes";
constexpr const char* kSectionGroupScales = "group_scales";
constexpr const char* kSectionSuperScales = "super_scales";
constexpr const char* kSectionClusterParams = "cluster_params";

std::uint64_t align_up(std::uint64_t n) { return (n + kAlign - 1) & ~(kAlign - 1); }

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(std::uint8_t(v & 0xFF));
  out.push_back(std::uint8_t(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t((v >> (8 * i)) & 0xFF));
}

std::uint16_t get_u16(std::span<const std::uint8_t> buf, std::uint64_t off) {
  return std::uint16_t(buf[off] | (std::uint16_t(buf[off + 1]) << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> buf, std::uint64_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(buf[off + i]) << (8 * i);
  return v;
}

std::uint32_t section_crc(std::span<const std::uint8_t> bytes) {
  return std::uint32_t(crc32_z(0, bytes.empty() ? Z_NULL : bytes.data(), bytes.size()));
}

std::vector<std::uint8_t> float_bytes(std::span<const float> values) {
  std::vector<std::uint8_t> out(values.size() * 4);
  if (!values.empty()) std::memcpy(out.data(), values.data(), out.size());
  return out;
}

std::vector<float> bytes_to_floats(std::span<const std::uint8_t> bytes) {
  std::vector<float> out(bytes.size() / 4);
  if (!out.empty()) std::memcpy(out.data(), bytes.data(), out.size() * 4);
  return out;
}

struct RawSection {
  std::string name;
  std::vector<std::uint8_t> bytes;
};

// The section bytes of a model in serialization order.
std::vector<RawSection> model_sections(const PackedModel& model) {
  const Scheme& scheme = family_scheme(model.family);
  std::vector<RawSection> sections;
  sections.push_back({kSectionCodes, model.code_payload});
  const GroupGeometry geo = group_geometry(scheme, model.group_size);
  if (!geo.embedded_scale) sections.push_back({kSectionGroupScales, model.scale_payload});
  sections.push_back({kSectionSuperScales, float_bytes(model.super_scales)});
  if (scheme.uses_cluster) {
    std::vector<float> interleaved(model.cluster_scales.size() * 2);
    for (std::size_t r = 0; r < model.cluster_scales.size(); ++r) {
      interleaved[2 * r] = model.cluster_scales[r];
      interleaved[2 * r + 1] = model.cluster_zero_points[r];
    }
    sections.push_back({kSectionClusterParams, float_bytes(interleaved)});
  }
  return sections;
}

json header_json(const PackedModel& model, const std::vector<RawSection>& sections) {
  const Scheme& scheme = family_scheme(model.family);
  const GroupGeometry geo = group_geometry(scheme, model.group_size);

  json parts = json::array();
  for (const EncodingConfig& part : scheme.parts) {
    parts.push_back({part.state_bits, part.states_per_code, part.transition_bits});
  }

  json sec = json::object();
  std::uint64_t offset = 0;
  for (const RawSection& s : sections) {
    sec[s.name] = {{"offset", offset},
                   {"length", std::uint64_t(s.bytes.size())},
                   {"crc32", section_crc(s.bytes)}};
    offset = align_up(offset + s.bytes.size());
  }

  return json{{"family", family_name(model.family)},
              {"shape", {model.rows, model.cols}},
              {"group_size", model.group_size},
              {"rounds", model.rounds},
              {"code", {{"parts", parts}, {"word_bits", scheme.layout.word_bits}}},
              {"scale_bits", scheme.scale_bits},
              {"scale_storage", geo.embedded_scale ? "embedded" : "sideband"},
              {"sections", sec}};
}

std::vector<std::uint8_t> serialize(const PackedModel& model) {
  const std::vector<RawSection> sections = model_sections(model);
  const std::string header = header_json(model, sections).dump();

  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u16(out, kVersion);
  put_u16(out, 0);  // reserved
  put_u32(out, std::uint32_t(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  out.resize(align_up(out.size()), 0);

  const std::uint64_t base = out.size();
  for (const RawSection& s : sections) {
    out.resize(align_up(out.size()), 0);
    out.insert(out.end(), s.bytes.begin(), s.bytes.end());
  }
  out.resize(std::max<std::uint64_t>(out.size(), base), 0);
  return out;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw Error("short read from " + path);
  return bytes;
}

std::uint64_t require_u64(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_unsigned()) {
    throw FormatError(std::string("header field '") + key + "' missing or not unsigned", 12);
  }
  return j[key].get<std::uint64_t>();
}

ContainerInfo parse_info(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw FormatError("file shorter than the fixed prologue", 0);
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic", 0);
  const std::uint16_t version = get_u16(bytes, 4);
  if (version != kVersion) {
    throw FormatError("unsupported version " + std::to_string(version), 4);
  }
  const std::uint32_t header_len = get_u32(bytes, 8);
  if (12 + std::uint64_t(header_len) > bytes.size()) {
    throw FormatError("header length exceeds file size", 8);
  }

  json j;
  try {
    j = json::parse(bytes.begin() + 12, bytes.begin() + 12 + header_len);
  } catch (const json::exception& e) {
    throw FormatError(std::string("header JSON: ") + e.what(), 12);
  }

  ContainerInfo info;
  if (!j.contains("family") || !j["family"].is_string()) {
    throw FormatError("header field 'family' missing or not a string", 12);
  }
  info.family = family_from_name(j["family"].get<std::string>());
  if (!j.contains("shape") || !j["shape"].is_array() || j["shape"].size() != 2) {
    throw FormatError("header field 'shape' must be [rows, cols]", 12);
  }
  info.rows = j["shape"][0].get<std::int64_t>();
  info.cols = j["shape"][1].get<std::int64_t>();
  if (info.rows < 0 || info.cols < 0) throw FormatError("negative shape", 12);
  info.group_size = int(require_u64(j, "group_size"));
  info.rounds = int(require_u64(j, "rounds"));
  info.scale_bits = int(require_u64(j, "scale_bits"));
  if (!j.contains("scale_storage") || !j["scale_storage"].is_string()) {
    throw FormatError("header field 'scale_storage' missing", 12);
  }
  info.embedded_scale = j["scale_storage"].get<std::string>() == "embedded";

  const Scheme& scheme = family_scheme(info.family);
  if (info.scale_bits != scheme.scale_bits) {
    throw FormatError("scale_bits does not match the family", 12);
  }
  if (!j.contains("code") || !j["code"].is_object() || !j["code"].contains("parts") ||
      !j["code"].contains("word_bits")) {
    throw FormatError("header field 'code' missing or incomplete", 12);
  }
  const json& code = j["code"];
  json parts = json::array();
  for (const EncodingConfig& part : scheme.parts) {
    parts.push_back({part.state_bits, part.states_per_code, part.transition_bits});
  }
  if (code["parts"] != parts || code["word_bits"].get<int>() != scheme.layout.word_bits) {
    throw FormatError("code parameters do not match the family", 12);
  }

  info.header_bytes = 12 + header_len;
  info.payload_base = align_up(info.header_bytes);
  info.file_bytes = bytes.size();

  if (!j.contains("sections") || !j["sections"].is_object()) {
    throw FormatError("header field 'sections' missing", 12);
  }
  for (const auto& [name, body] : j["sections"].items()) {
    SectionInfo s;
    s.offset = require_u64(body, "offset");
    s.length = require_u64(body, "length");
    s.crc32 = std::uint32_t(require_u64(body, "crc32"));
    if (s.offset % kAlign != 0) {
      throw FormatError("section '" + name + "' offset not 8-aligned",
                        info.payload_base + s.offset);
    }
    if (info.payload_base + s.offset + s.length > bytes.size()) {
      throw FormatError("section '" + name + "' extends past end of file",
                        info.payload_base + s.offset);
    }
    info.sections[name] = s;
  }
  return info;
}

std::span<const std::uint8_t> section_bytes(std::span<const std::uint8_t> bytes,
                                            const ContainerInfo& info,
                                            const std::string& name) {
  auto it = info.sections.find(name);
  if (it == info.sections.end()) {
    throw FormatError("missing section '" + name + "'", 12);
  }
  return bytes.subspan(info.payload_base + it->second.offset, it->second.length);
}

PackedModel model_from_bytes(std::span<const std::uint8_t> bytes, const ContainerInfo& info) {
  const Scheme& scheme = family_scheme(info.family);
  PackedModel model;
  model.rows = info.rows;
  model.cols = info.cols;
  model.family = info.family;
  model.group_size = info.group_size;
  model.rounds = info.rounds;

  if (info.group_size <= 0 || info.cols % info.group_size != 0) {
    throw FormatError("shape is not a whole number of groups", 12);
  }
  GroupGeometry geo;
  try {
    geo = group_geometry(scheme, info.group_size);
  } catch (const ConfigError& e) {
    throw FormatError(e.what(), 12);
  }

  const std::uint64_t groups = std::uint64_t(model.group_count());
  auto codes = section_bytes(bytes, info, kSectionCodes);
  if (codes.size() != groups * std::uint64_t(geo.payload_bytes)) {
    throw FormatError("codes section length does not match the geometry",
                      info.payload_base + info.sections.at(kSectionCodes).offset);
  }
  model.code_payload.assign(codes.begin(), codes.end());

  if (!geo.embedded_scale) {
    auto nibbles = section_bytes(bytes, info, kSectionGroupScales);
    if (nibbles.size() != (groups + 1) / 2) {
      throw FormatError("group_scales section length does not match the group count",
                        info.payload_base + info.sections.at(kSectionGroupScales).offset);
    }
    model.scale_payload.assign(nibbles.begin(), nibbles.end());
  }

  auto supers = section_bytes(bytes, info, kSectionSuperScales);
  if (supers.size() != std::uint64_t(model.rows) * 4) {
    throw FormatError("super_scales section length does not match the row count",
                      info.payload_base + info.sections.at(kSectionSuperScales).offset);
  }
  model.super_scales = bytes_to_floats(supers);

  if (scheme.uses_cluster) {
    auto params = section_bytes(bytes, info, kSectionClusterParams);
    if (params.size() != std::uint64_t(model.rows) * 8) {
      throw FormatError("cluster_params section length does not match the row count",
                        info.payload_base + info.sections.at(kSectionClusterParams).offset);
    }
    const std::vector<float> interleaved = bytes_to_floats(params);
    model.cluster_scales.resize(std::size_t(model.rows));
    model.cluster_zero_points.resize(std::size_t(model.rows));
    for (std::int64_t r = 0; r < model.rows; ++r) {
      model.cluster_scales[std::size_t(r)] = interleaved[std::size_t(2 * r)];
      model.cluster_zero_points[std::size_t(r)] = interleaved[std::size_t(2 * r + 1)];
    }
  }
  return model;
}

}  // namespace

PackedModel pack_model(const QuantizedTensor& tensor) {
  const Scheme& scheme = family_scheme(tensor.family);
  const GroupGeometry geo = group_geometry(scheme, tensor.group_size);

  PackedModel model;
  model.rows = tensor.rows;
  model.cols = tensor.cols;
  model.family = tensor.family;
  model.group_size = tensor.group_size;
  model.rounds = tensor.rounds;
  model.super_scales = tensor.super_scales;
  model.cluster_scales = tensor.cluster_scales;
  model.cluster_zero_points = tensor.cluster_zero_points;

  const std::int64_t groups = tensor.group_count();
  const std::size_t wpg = std::size_t(geo.words_per_group);
  model.code_payload.reserve(std::size_t(groups) * std::size_t(geo.payload_bytes));

  std::vector<std::uint16_t> stored(wpg);
  for (std::int64_t gi = 0; gi < groups; ++gi) {
    if (scheme.uses_cluster) {
      for (std::size_t w = 0; w < wpg; ++w) {
        stored[w] = tensor.clustered_codes[std::size_t(gi) * wpg + w];
      }
    } else {
      const std::uint16_t* src = tensor.code_words.data() + std::size_t(gi) * wpg;
      stored.assign(src, src + wpg);
    }
    PackedGroup packed =
        pack_group(stored, tensor.scale_codes[std::size_t(gi)], scheme, tensor.group_size);
    model.code_payload.insert(model.code_payload.end(), packed.payload.begin(),
                              packed.payload.end());
  }
  if (!geo.embedded_scale) model.scale_payload = pack_cluster_scales(tensor.scale_codes);
  return model;
}

QuantizedTensor unpack_model(const PackedModel& model) {
  const Scheme& scheme = family_scheme(model.family);
  const GroupGeometry geo = group_geometry(scheme, model.group_size);

  QuantizedTensor tensor;
  tensor.rows = model.rows;
  tensor.cols = model.cols;
  tensor.family = model.family;
  tensor.group_size = model.group_size;
  tensor.rounds = model.rounds;
  tensor.super_scales = model.super_scales;
  tensor.cluster_scales = model.cluster_scales;
  tensor.cluster_zero_points = model.cluster_zero_points;

  const std::int64_t groups = tensor.group_count();
  const std::size_t wpg = std::size_t(geo.words_per_group);
  tensor.code_words.resize(std::size_t(groups) * wpg);
  tensor.scale_codes.resize(std::size_t(groups));
  tensor.group_scales.resize(std::size_t(groups));
  if (scheme.uses_cluster) tensor.clustered_codes.resize(std::size_t(groups) * wpg);

  std::vector<std::uint16_t> sideband;
  if (!geo.embedded_scale) {
    sideband = unpack_cluster_scales(model.scale_payload, std::size_t(groups));
  }

  const std::int64_t gpr = tensor.groups_per_row();
  PackedGroup packed;
  packed.family = model.family;
  for (std::int64_t gi = 0; gi < groups; ++gi) {
    const std::uint8_t* base = model.code_payload.data() + gi * geo.payload_bytes;
    packed.payload.assign(base, base + geo.payload_bytes);
    packed.sideband_scale = geo.embedded_scale ? 0 : sideband[std::size_t(gi)];
    UnpackedGroup group = unpack_group(packed, scheme, model.group_size);

    tensor.scale_codes[std::size_t(gi)] = group.scale_code;
    const std::int64_t row = gi / gpr;
    tensor.group_scales[std::size_t(gi)] =
        float(group.scale_code) * model.super_scales[std::size_t(row)];

    std::uint16_t* words = tensor.code_words.data() + std::size_t(gi) * wpg;
    if (scheme.uses_cluster) {
      const float cs = model.cluster_scales[std::size_t(row)];
      const float czp = model.cluster_zero_points[std::size_t(row)];
      for (std::size_t w = 0; w < wpg; ++w) {
        const std::uint8_t q = std::uint8_t(group.codes[w]);
        tensor.clustered_codes[std::size_t(gi) * wpg + w] = q;
        words[w] = clustered_code_value(q, cs, czp, scheme.code_bits);
      }
    } else {
      std::copy(group.codes.begin(), group.codes.end(), words);
    }
  }
  return tensor;
}

void write_container(const QuantizedTensor& tensor, const std::string& path) {
  const std::vector<std::uint8_t> bytes = serialize(pack_model(tensor));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw Error("short write to " + path);
}

QuantizedTensor read_container(const std::string& path) {
  return unpack_model(load_model(path));
}

PackedModel load_model(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  const ContainerInfo info = parse_info(bytes);
  return model_from_bytes(bytes, info);
}

ContainerInfo inspect_container(const std::string& path) {
  return parse_info(read_file(path));
}

PayloadBits container_payload_bits(const ContainerInfo& info) {
  const Scheme& scheme = family_scheme(info.family);
  const std::int64_t groups =
      info.group_size == 0 ? 0 : info.rows * (info.cols / info.group_size);
  return payload_bits(scheme, info.group_size, groups);
}

double measured_bpw(const ContainerInfo& info) {
  return container_payload_bits(info).bits_per_weight();
}

std::vector<std::string> verify_container(const std::string& path) {
  std::vector<std::string> violations;
  const std::vector<std::uint8_t> bytes = read_file(path);
  const std::span<const std::uint8_t> view(bytes);
  const ContainerInfo info = parse_info(view);

  // Section crcs. Every payload bit pattern decodes to some state sequence,
  // so corruption is only detectable here.
  for (const auto& [name, s] : info.sections) {
    const auto body = view.subspan(info.payload_base + s.offset, s.length);
    const std::uint32_t actual = section_crc(body);
    if (actual != s.crc32) {
      violations.push_back("section '" + name + "': crc32 mismatch (header " +
                           std::to_string(s.crc32) + ", payload " + std::to_string(actual) +
                           ")");
    }
  }

  // Geometry: section lengths against the declared shape. model_from_bytes
  // performs the checks; surface its complaint instead of throwing.
  PackedModel model;
  bool structural = true;
  try {
    model = model_from_bytes(bytes, info);
  } catch (const FormatError& e) {
    violations.push_back(e.what());
    structural = false;
  }

  if (structural) {
    // At the standard group size the stored payload must land exactly on the
    // family's advertised ratio. Both are exact in binary, so compare with ==.
    if (info.group_size == 64 && info.rows > 0 && info.cols > 0) {
      const double bpw = measured_bpw(info);
      double advertised = 0.0;
      switch (info.family) {
        case Family::Bpw275: advertised = 2.75; break;
        case Family::Bpw25: advertised = 2.5; break;
        case Family::Bpw206: advertised = 2.0625; break;
      }
      if (bpw != advertised) {
        violations.push_back("bits per weight " + std::to_string(bpw) + ", advertised " +
                             std::to_string(advertised));
      }
    }

    // A sound container survives a parse and re-serialization byte for byte.
    const std::vector<std::uint8_t> rewritten = serialize(model);
    if (rewritten != bytes) {
      violations.push_back("re-serialization does not reproduce the file");
    }
  }
  return violations;
}

}  // namespace ccq
