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


#ifndef SEMMIX_TOOLS_COMMANDS_H_
#define SEMMIX_TOOLS_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "semmix/manifest.h"
#include "semmix/metrics.h"
#include "semmix/model.h"
#include "semmix/train.h"

namespace semmix::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

// Maps the active exception to an exit code and logs it. Call from a catch block.
int exit_code_for_current_exception();

// Reads SEMMIX_LOG (trace, debug, info, warn, error, off; default info).
void init_logging();

struct SynthArgs {
  std::filesystem::path manifest;  // ignored when toy_clips > 0
  std::filesystem::path out;
  std::uint64_t seed = 0;
  int workers = 1;
  std::filesystem::path prior;  // optional LoudnessPrior JSON
  double breakpoint_probability = 0.5;
  int toy_clips = 0;  // generate a synthetic dataset instead of reading stems
};

struct PromptsArgs {
  std::filesystem::path out;
  std::vector<std::string> aspects;   // empty: all six
  std::vector<std::string> families;  // empty: both
  std::filesystem::path captions;     // optional raw caption JSONL to validate
  std::size_t max_words = 64;
};

struct EvaluateArgs {
  std::filesystem::path manifest;
  std::filesystem::path out;
  std::string format = "csv";
  int workers = 1;
  std::string source = "pred";  // pred, poor or reference
  int window_len = 2048;
  int hop = 512;
  int fft_len = 2048;
};

struct ModelArgs {
  std::string preset = "toy";  // toy or full
  std::optional<int> c_text;
  std::optional<int> epochs;
  std::optional<double> learning_rate;
  std::optional<int> batch_size;
};

struct TrainArgs {
  std::filesystem::path manifest;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  int depth = 3;
  ModelArgs model;
};

struct SweepArgs {
  std::filesystem::path manifest;
  std::filesystem::path eval_manifest;  // defaults to `manifest`
  std::filesystem::path out;
  std::uint64_t seed = 0;
  std::vector<int> depths = {0, 1, 2, 3, 4, 5, 6};
  int workers = 1;
  ModelArgs model;
};

struct ReportArgs {
  // (label, metrics file) pairs; the first is the baseline row.
  std::vector<std::pair<std::string, std::filesystem::path>> inputs;
  std::filesystem::path out;
  std::string format = "csv";
};

// Each returns an exit code; configuration, data and numeric failures are
// thrown as the matching semmix exceptions.
int run_synth(const SynthArgs& args);
int run_prompts(const PromptsArgs& args);
int run_evaluate(const EvaluateArgs& args);
int run_train(const TrainArgs& args);
int run_sweep(const SweepArgs& args);
int run_report(const ReportArgs& args);

// Model and training recipe selected by a preset plus overrides.
ModelConfig model_config_for(const ModelArgs& args, int depth, std::uint64_t seed);
TrainConfig train_config_for(const ModelArgs& args, std::uint64_t seed);

// Clips with poor mix as input and reference mix as target. Stems, the
// schedule and a text embedding are attached when listed. All missing files
// are reported in one DataError.
std::vector<EvalClip> load_training_clips(const Manifest& manifest);

// File-name-safe form of a clip id.
std::string safe_name(const std::string& clip_id);

}  // namespace semmix::cli

#endif  // SEMMIX_TOOLS_COMMANDS_H_
