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


// Command-line entry point. Each subcommand fills an args struct and hands it
// to the matching run_* function in commands.cc.

#include <iostream>

#include "CLI11.hpp"
#include "commands.h"
#include "semmix/error.h"

namespace {

using namespace semmix::cli;

void add_model_flags(CLI::App* cmd, ModelArgs& m) {
  cmd->add_option("--preset", m.preset, "Model and training preset")
      ->check(CLI::IsMember({"toy", "full"}))
      ->capture_default_str();
  cmd->add_option("--c-text", m.c_text, "Text embedding width");
  cmd->add_option("--epochs", m.epochs, "Override the preset epoch count");
  cmd->add_option("--learning-rate,--lr", m.learning_rate, "Override the preset learning rate");
  cmd->add_option("--batch-size", m.batch_size, "Override the preset batch size");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semmix: semantic remixing of poorly balanced audio mixes"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Render degraded mixes from clean stems");
  c_synth->add_option("--manifest", synth.manifest, "Input manifest with stems");
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--seed", synth.seed, "Root seed")->capture_default_str();
  c_synth->add_option("--workers", synth.workers, "Parallel clips")->capture_default_str();
  c_synth->add_option("--prior", synth.prior, "Loudness prior JSON");
  c_synth->add_option("--breakpoint-probability", synth.breakpoint_probability,
                      "Chance of a mid-clip gain change per stem")
      ->capture_default_str();
  c_synth->add_option("--toy", synth.toy_clips, "Generate N synthetic clips instead");

  PromptsArgs prompts;
  auto* c_prompts = app.add_subcommand("prompts", "Write caption prompts, optionally validate captions");
  c_prompts->add_option("--out", prompts.out, "Output directory")->required();
  c_prompts->add_option("--aspect", prompts.aspects, "Aspect(s) to render")->delimiter(',');
  c_prompts->add_option("--family", prompts.families, "focused and/or minimal")->delimiter(',');
  c_prompts->add_option("--captions", prompts.captions, "Raw caption JSONL to validate");
  c_prompts->add_option("--max-words", prompts.max_words, "Caption word cap")->capture_default_str();

  EvaluateArgs eval;
  auto* c_eval = app.add_subcommand("evaluate", "Score predictions listed in a manifest");
  c_eval->add_option("--manifest", eval.manifest, "Manifest")->required();
  c_eval->add_option("--out", eval.out, "Output directory")->required();
  c_eval->add_option("--format", eval.format, "csv or json")->capture_default_str();
  c_eval->add_option("--workers", eval.workers, "Parallel clips")->capture_default_str();
  c_eval->add_option("--source", eval.source, "pred, poor or reference")->capture_default_str();
  c_eval->add_option("--window-len", eval.window_len)->capture_default_str();
  c_eval->add_option("--hop", eval.hop)->capture_default_str();
  c_eval->add_option("--fft-len", eval.fft_len)->capture_default_str();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a remixing model");
  c_train->add_option("--manifest", train.manifest, "Training manifest")->required();
  c_train->add_option("--out", train.out, "Output directory")->required();
  c_train->add_option("--seed", train.seed, "Root seed")->capture_default_str();
  c_train->add_option("--depth", train.depth, "Transformer blocks")->capture_default_str();
  add_model_flags(c_train, train.model);

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Train and score one model per depth");
  c_sweep->add_option("--manifest", sweep.manifest, "Training manifest")->required();
  c_sweep->add_option("--eval-manifest", sweep.eval_manifest, "Evaluation manifest");
  c_sweep->add_option("--out", sweep.out, "Output directory")->required();
  c_sweep->add_option("--seed", sweep.seed, "Root seed")->capture_default_str();
  c_sweep->add_option("--depth", sweep.depths, "Depths, comma separated")->delimiter(',');
  c_sweep->add_option("--workers", sweep.workers, "Parallel depths")->capture_default_str();
  add_model_flags(c_sweep, sweep.model);

  ReportArgs report;
  std::vector<std::string> report_inputs;
  auto* c_report = app.add_subcommand("report", "Tabulate metric files against a baseline");
  c_report->add_option("--metrics", report_inputs, "label=path, first is the baseline")->required();
  c_report->add_option("--out", report.out, "Output directory")->required();
  c_report->add_option("--format", report.format, "csv or json")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  init_logging();
  try {
    if (*c_synth) return run_synth(synth);
    if (*c_prompts) return run_prompts(prompts);
    if (*c_eval) return run_evaluate(eval);
    if (*c_train) return run_train(train);
    if (*c_sweep) return run_sweep(sweep);
    if (*c_report) {
      for (const auto& s : report_inputs) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
          throw semmix::ConfigError("--metrics expects label=path, got '" + s + "'");
        }
        report.inputs.emplace_back(s.substr(0, eq), s.substr(eq + 1));
      }
      return run_report(report);
    }
  } catch (...) {
    return exit_code_for_current_exception();
  }
  return kExitConfig;
}
