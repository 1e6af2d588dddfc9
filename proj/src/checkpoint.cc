// Copyright 2026 The semmix Authors.
//
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


#include "semmix/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cmath>
#include <cstring>
#include <fstream>

#include "semmix/error.h"

namespace semmix {
namespace {

constexpr char kMagic[8] = {'S', 'M', 'X', 'C', 'K', 'P', 'T', '1'};

void put_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(const unsigned char* b) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const HighlightModel& model,
                     const nlohmann::json& extra) {
  nlohmann::json header = {{"format_version", kCheckpointVersion},
                           {"config", to_json(model.config())},
                           {"param_count", model.param_count()},
                           {"seed", model.config().seed},
                           {"init", "uniform_fan_in"},
                           {"dtype", "float32_le"}};
  if (extra.is_object()) {
    for (const auto& [k, v] : extra.items()) header[k] = v;
  }
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof kMagic);
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double p : model.params()) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(p));
    const unsigned char b[4] = {static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                                static_cast<unsigned char>(bits >> 16),
                                static_cast<unsigned char>(bits >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  }
  if (!out) throw DataError("write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint " + path.string());
  char magic[8];
  unsigned char len_bytes[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw DataError(path.string() + " is not a semmix checkpoint");
  }
  if (!in.read(reinterpret_cast<char*>(len_bytes), 8)) {
    throw DataError(path.string() + ": truncated header");
  }
  const std::uint64_t len = get_u64(len_bytes);
  if (len > (1u << 24)) throw DataError(path.string() + ": header length out of range");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw DataError(path.string() + ": truncated header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": bad header: " + e.what());
  }
  if (header.value("format_version", 0) != kCheckpointVersion) {
    throw DataError(path.string() + ": unsupported checkpoint version");
  }
  HighlightModel model(model_config_from_json(header.at("config")));
  if (header.value("param_count", std::size_t{0}) != model.param_count()) {
    throw DataError(path.string() + ": param_count does not match config");
  }
  std::vector<unsigned char> raw(model.param_count() * 4);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw DataError(path.string() + ": truncated parameters");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError(path.string() + ": trailing bytes after parameters");
  }
  for (std::size_t i = 0; i < model.param_count(); ++i) {
    const unsigned char* b = &raw[4 * i];
    const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                               static_cast<std::uint32_t>(b[1]) << 8 |
                               static_cast<std::uint32_t>(b[2]) << 16 |
                               static_cast<std::uint32_t>(b[3]) << 24;
    const float v = std::bit_cast<float>(bits);
    if (!std::isfinite(v)) throw DataError(path.string() + ": non-finite parameter");
    model.params()[i] = v;
  }
  return Checkpoint{std::move(model), std::move(header)};
}

}  // namespace semmix
