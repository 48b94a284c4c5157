// Copyright 2026 The dtrsum Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dtrsum/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <map>
#include <sstream>

#include "dtrsum/io.hpp"
#include "json.hpp"

namespace dtrsum {

using json = nlohmann::json;

ModelBundle ModelBundle::Create(const ModelConfig& config, std::uint64_t seed,
                                InitScheme init) {
  config.Validate();
  ModelBundle b;
  b.config = config;
  Rng rng = Rng(seed).Fork(RngStream::kInit);
  b.generator = Generator(config, rng);
  b.discriminator = Discriminator(config, rng);
  if (init == InitScheme::kZero) {
    for (Parameter* p : b.generator.Params()) p->value.Fill(0.0);
    for (Parameter* p : b.discriminator.Params()) p->value.Fill(0.0);
  }
  return b;
}

ParamRefs ModelBundle::Tensors() {
  ParamRefs out = generator.Params();
  for (Parameter* p : discriminator.Params()) out.push_back(p);
  for (Parameter* p : generator.Buffers()) out.push_back(p);
  return out;
}

namespace {

constexpr char kMagic[4] = {'D', 'T', 'R', 'C'};
constexpr std::size_t kPreambleBytes = 16;

json Hyperparameters(const ModelConfig& c, double tau) {
  return {{"feature_dim", c.feature_dim}, {"hidden", c.hidden},
          {"encoded_dim", c.encoded_dim}, {"disc_hidden", c.disc_hidden},
          {"holes", c.holes},             {"head_widths", c.head_widths},
          {"dropout", c.dropout},         {"tau", tau}};
}

void AppendLe(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t ReadLe(const std::uint8_t* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

[[noreturn]] void Fail(FormatErrorKind kind, const std::string& source,
                       const std::string& what) {
  throw FormatError(kind, source + ": " + what);
}

void CheckField(const std::string& source, const char* field, bool same,
                const std::string& stored, const std::string& expected) {
  if (!same) {
    Fail(FormatErrorKind::kHyperparameterMismatch, source,
         std::string("hyperparameter mismatch for ") + field + ": checkpoint has " +
             stored + ", expected " + expected);
  }
}

template <typename T>
std::string Show(const T& v) {
  return json(v).dump();
}

}  // namespace

std::vector<std::uint8_t> EncodeCheckpoint(ModelBundle& bundle) {
  const ParamRefs tensors = bundle.Tensors();
  const std::size_t n_params =
      bundle.generator.Params().size() + bundle.discriminator.Params().size();
  json manifest;
  manifest["format"] = "dtrsum-checkpoint";
  manifest["version"] = kCheckpointVersion;
  manifest["hyperparameters"] = Hyperparameters(bundle.config, bundle.tau);
  manifest["tensors"] = json::array();
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const Parameter* p = tensors[i];
    manifest["tensors"].push_back({{"name", p->name},
                                   {"shape", p->value.shape()},
                                   {"kind", i < n_params ? "param" : "buffer"},
                                   {"offset", offset}});
    offset += 8 * p->value.size();
  }
  manifest["payload_bytes"] = offset;
  const std::string text = manifest.dump();

  std::vector<std::uint8_t> out;
  out.reserve(kPreambleBytes + text.size() + offset);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  AppendLe(out, kCheckpointVersion, 4);
  AppendLe(out, text.size(), 8);
  out.insert(out.end(), text.begin(), text.end());
  for (const Parameter* p : tensors) {
    for (double v : p->value.values()) AppendLe(out, std::bit_cast<std::uint64_t>(v), 8);
  }
  return out;
}

ModelBundle DecodeCheckpoint(std::span<const std::uint8_t> bytes,
                             const ModelConfig* expected, const std::string& source) {
  if (bytes.size() < kPreambleBytes) {
    Fail(FormatErrorKind::kTruncated, source, "truncated checkpoint header");
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    Fail(FormatErrorKind::kBadMagic, source, "bad magic, not a checkpoint");
  }
  const auto version = static_cast<std::uint32_t>(ReadLe(bytes.data() + 4, 4));
  if (version != kCheckpointVersion) {
    Fail(FormatErrorKind::kVersionMismatch, source,
         "unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint64_t manifest_len = ReadLe(bytes.data() + 8, 8);
  if (manifest_len > bytes.size() - kPreambleBytes) {
    Fail(FormatErrorKind::kTruncated, source, "truncated checkpoint manifest");
  }
  json manifest;
  try {
    manifest = json::parse(bytes.begin() + kPreambleBytes,
                           bytes.begin() + kPreambleBytes + static_cast<std::ptrdiff_t>(manifest_len));
  } catch (const json::exception& e) {
    Fail(FormatErrorKind::kMalformed, source, std::string("bad manifest: ") + e.what());
  }

  ModelConfig config;
  double tau = 0.5;
  std::vector<json> entries;
  try {
    const json& hp = manifest.at("hyperparameters");
    config.feature_dim = hp.at("feature_dim").get<std::size_t>();
    config.hidden = hp.at("hidden").get<std::size_t>();
    config.encoded_dim = hp.at("encoded_dim").get<std::size_t>();
    config.disc_hidden = hp.at("disc_hidden").get<std::size_t>();
    config.holes = hp.at("holes").get<HoleSet>();
    config.head_widths = hp.at("head_widths").get<std::vector<std::size_t>>();
    config.dropout = hp.at("dropout").get<double>();
    tau = hp.at("tau").get<double>();
    entries = manifest.at("tensors").get<std::vector<json>>();
  } catch (const json::exception& e) {
    Fail(FormatErrorKind::kMalformed, source, std::string("bad manifest: ") + e.what());
  }

  if (expected != nullptr) {
    const ModelConfig& e = *expected;
    CheckField(source, "feature_dim", config.feature_dim == e.feature_dim,
               Show(config.feature_dim), Show(e.feature_dim));
    CheckField(source, "hidden", config.hidden == e.hidden, Show(config.hidden), Show(e.hidden));
    CheckField(source, "encoded_dim", config.encoded_dim == e.encoded_dim,
               Show(config.encoded_dim), Show(e.encoded_dim));
    CheckField(source, "disc_hidden", config.disc_hidden == e.disc_hidden,
               Show(config.disc_hidden), Show(e.disc_hidden));
    CheckField(source, "holes", config.holes == e.holes, Show(config.holes), Show(e.holes));
    CheckField(source, "head_widths", config.head_widths == e.head_widths,
               Show(config.head_widths), Show(e.head_widths));
  }

  ModelBundle bundle;
  try {
    bundle = ModelBundle::Create(config, 0, InitScheme::kZero);
  } catch (const ValidationError& e) {
    Fail(FormatErrorKind::kMalformed, source, std::string("bad hyperparameters: ") + e.what());
  }
  bundle.tau = tau;

  const ParamRefs tensors = bundle.Tensors();
  if (entries.size() != tensors.size()) {
    Fail(FormatErrorKind::kManifestMismatch, source,
         "manifest lists " + std::to_string(entries.size()) + " tensors, model has " +
             std::to_string(tensors.size()));
  }
  std::map<std::string, const json*> by_name;
  for (const json& e : entries) by_name[e.value("name", "")] = &e;

  const std::size_t payload_start = kPreambleBytes + static_cast<std::size_t>(manifest_len);
  const std::size_t payload_bytes = bytes.size() - payload_start;
  for (Parameter* p : tensors) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) {
      Fail(FormatErrorKind::kManifestMismatch, source, "missing tensor " + p->name);
    }
    const json& e = *it->second;
    Shape shape;
    std::uint64_t offset = 0;
    try {
      shape = e.at("shape").get<Shape>();
      offset = e.at("offset").get<std::uint64_t>();
    } catch (const json::exception& ex) {
      Fail(FormatErrorKind::kMalformed, source, std::string("bad tensor entry: ") + ex.what());
    }
    if (shape != p->value.shape()) {
      Fail(FormatErrorKind::kManifestMismatch, source,
           "tensor " + p->name + " has shape " + ShapeString(shape) + ", model expects " +
               ShapeString(p->value.shape()));
    }
    const std::uint64_t need = 8 * static_cast<std::uint64_t>(p->value.size());
    if (offset > payload_bytes || need > payload_bytes - offset) {
      Fail(FormatErrorKind::kTruncated, source, "payload too short for tensor " + p->name);
    }
    const std::uint8_t* src = bytes.data() + payload_start + offset;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      p->value[i] = std::bit_cast<double>(ReadLe(src + 8 * i, 8));
    }
    if (!p->value.AllFinite()) {
      Fail(FormatErrorKind::kMalformed, source, "non-finite values in tensor " + p->name);
    }
  }
  for (Parameter* p : tensors) p->grad = Tensor(p->value.shape(), 0.0);
  return bundle;
}

void SaveCheckpoint(const std::filesystem::path& path, ModelBundle& bundle) {
  WriteFileBytes(path, EncodeCheckpoint(bundle));
}

ModelBundle LoadCheckpoint(const std::filesystem::path& path, const ModelConfig* expected) {
  return DecodeCheckpoint(ReadFileBytes(path), expected, path.string());
}

}  // namespace dtrsum
