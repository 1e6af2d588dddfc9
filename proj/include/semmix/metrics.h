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

#ifndef SEMMIX_METRICS_H_
#define SEMMIX_METRICS_H_

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "semmix/audio.h"
#include "semmix/dsp.h"
#include "semmix/manifest.h"
#include "semmix/mix.h"

namespace semmix {

// Categorical distribution over a named label space ("mel-32", "passt-527").
struct EventDistribution {
  std::vector<double> probs;
  std::string label_space;

  // Entries >= 0 summing to 1 within 1e-9.
  void validate() const;
};

enum class Modality { kVideo, kAudio, kText };
std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);

struct EmbeddingVector {
  std::vector<double> values;
  std::string space;
  Modality modality = Modality::kAudio;

  // Finite entries and nonzero norm.
  void validate() const;
};

// File format shared with the exporter: {"space", "dim", "values"} plus
// "modality" for embeddings. Distributions within 1e-6 of unit mass are
// renormalized on load; anything further off is a DataError.
nlohmann::json to_json(const EventDistribution& d);
nlohmann::json to_json(const EmbeddingVector& e);
EventDistribution event_distribution_from_json(const nlohmann::json& j);
EmbeddingVector embedding_from_json(const nlohmann::json& j);
EventDistribution load_event_distribution(const std::filesystem::path& path);
EmbeddingVector load_embedding(const std::filesystem::path& path);

inline constexpr double kKldEpsilon = 1e-10;

// 100 x mean over TF cells of | |STFT(pred)| - |STFT(ref)| |.
double mag(const AudioClip& pred, const AudioClip& ref, const StftConfig& cfg = {});

// 100 x mean | env(pred) - env(ref) | with analytic-signal envelopes.
double env(const AudioClip& pred, const AudioClip& ref);

// 100 x sum_i ref_i ln((ref_i + eps) / (pred_i + eps)), natural log.
double kld(const EventDistribution& pred, const EventDistribution& ref);

// 100 x (cos(v, a_ref) - cos(v, a_pred)).
double delta_ib(const EmbeddingVector& video, const EmbeddingVector& audio_ref,
                const EmbeddingVector& audio_pred);

// W1 between two non-negative mass vectors over frame positions i / n, both
// normalized to unit mass first. NumericError on zero total mass.
double wasserstein1_frames(std::span<const double> p, std::span<const double> q);

using StemTrajectories = std::array<LoudnessTrajectory, 3>;  // speech, music, effects

// Mean over the three stems of W1 between loudness-mass profiles; each
// trajectory becomes masses (L - floor_db) over frame index.
double w_dis(const StemTrajectories& pred, const StemTrajectories& ref);

struct EvalOptions {
  StftConfig stft;
  int mel_bands = 32;
  double floor_db = kDefaultFloorDb;
  // Cap of the ratio mask used to project a predicted mix onto stems.
  double projection_cap = 100.0;
};

// Time-averaged, L1-normalized mel energies ("mel-<bands>" label space).
EventDistribution mel_event_distribution(const AudioClip& clip, const StftConfig& cfg,
                                         int bands = 32);

StemTrajectories stem_trajectories(const std::array<AudioClip, 3>& stems,
                                   const StftConfig& cfg, double floor_db);

// Per-stem estimate of a predicted mix when only the mix is available: the
// TF ratio (|pred| + e) / (|ref| + e) is applied to each reference stem.
std::array<AudioClip, 3> project_stems(const AudioClip& pred, const AudioClip& ref,
                                       const StemSet& stems, const EvalOptions& opts);

struct MetricsReport {
  std::string clip_id;
  double mag = 0.0;
  double env = 0.0;
  double kld = 0.0;
  std::optional<double> delta_ib;  // absent when embeddings are missing
  double w_dis = 0.0;
  std::string kld_space;
  std::string errors;  // set when the clip failed; metrics are then meaningless

  static constexpr const char* kScaleNote =
      "mag/env/kld/delta_ib x100; w_dis unscaled; kld natural log, ref||pred";

  bool ok() const { return errors.empty(); }
  bool operator==(const MetricsReport&) const = default;
};

// Everything evaluate_clip needs for one clip, already loaded.
struct ClipInputs {
  std::string clip_id;
  AudioClip pred;
  AudioClip ref;
  std::optional<StemSet> stems;
  std::optional<std::array<AudioClip, 3>> pred_stems;
  std::optional<EventDistribution> pred_dist;
  std::optional<EventDistribution> ref_dist;
  std::optional<EmbeddingVector> video;
  std::optional<EmbeddingVector> audio_ref;
  std::optional<EmbeddingVector> audio_pred;
};

MetricsReport evaluate_clip(const ClipInputs& in, const EvalOptions& opts = {});

enum class PredSource { kPred, kPoorMix, kReference };

// Loads a manifest entry. All missing files are listed in one DataError.
// kPoorMix evaluates the entry's poor mix (stems come from its schedule).
ClipInputs load_clip_inputs(const Manifest& manifest, const ManifestEntry& entry,
                            PredSource source = PredSource::kPred);

MetricsReport evaluate_entry(const Manifest& manifest, const ManifestEntry& entry,
                             PredSource source, const EvalOptions& opts = {});

// ---------------------------------------------------------------------------
// Reports

// Sorted by clip_id; failed clips are skipped; delta_ib averaged over the
// clips that have it.
MetricsReport aggregate(std::vector<MetricsReport> reports, const std::string& label = "mean");

void sort_reports(std::vector<MetricsReport>& reports);

// CSV columns: clip_id,mag,env,kld,delta_ib,w_dis,kld_space,errors
// delta_ib is "n/a" when absent.
std::string reports_to_csv(std::vector<MetricsReport> reports);
std::vector<MetricsReport> reports_from_csv(const std::string& text);
nlohmann::json reports_to_json(std::vector<MetricsReport> reports);
std::vector<MetricsReport> reports_from_json(const nlohmann::json& j);

// Relative improvement over a baseline for lower-is-better metrics, in percent.
double percent_improvement(double baseline, double value);

// "+56%", "-16%", "0%"; decimals > 0 gives "+0.2%".
std::string format_percent(double baseline, double value, int decimals = 0);

struct TableRow {
  std::string method;
  MetricsReport metrics;
};

// Plain-text table with one row per method; every non-baseline cell carries
// the percent change versus rows[baseline].
std::string render_table(const std::vector<TableRow>& rows, std::size_t baseline = 0);

}  // namespace semmix

#endif  // SEMMIX_METRICS_H_
