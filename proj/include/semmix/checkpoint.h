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


#ifndef SEMMIX_CHECKPOINT_H_
#define SEMMIX_CHECKPOINT_H_

#include <filesystem>

#include "json.hpp"
#include "semmix/model.h"

namespace semmix {

// File layout: the 8 bytes "SMXCKPT1", a little-endian uint64 header length,
// a UTF-8 JSON header {format_version, config, param_count, seed, init, ...}
// and param_count little-endian float32 values in parameter-group order.
inline constexpr int kCheckpointVersion = 1;

// `extra` keys (such as the training recipe) are merged into the header.
void save_checkpoint(const std::filesystem::path& path, const HighlightModel& model,
                     const nlohmann::json& extra = nlohmann::json::object());

struct Checkpoint {
  HighlightModel model;
  nlohmann::json header;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace semmix

#endif  // SEMMIX_CHECKPOINT_H_
