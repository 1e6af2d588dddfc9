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

#include "semmix/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semmix/error.h"

namespace semmix {

// ---------------------------------------------------------------------------
// Types and file formats

void EventDistribution::validate() const {
  if (probs.empty()) throw DataError("EventDistribution: empty");
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) throw DataError("EventDistribution: negative or non-finite entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw DataError("EventDistribution: probabilities sum to " + std::to_string(sum));
  }
}

std::string to_string(Modality m) {
  switch (m) {
    case Modality::kVideo: return "video";
    case Modality::kAudio: return "audio";
    case Modality::kText: return "text";
  }
  return "unknown";
}

Modality modality_from_string(const std::string& s) {
  if (s == "video") return Modality::kVideo;
  if (s == "audio") return Modality::kAudio;
  if (s == "text") return Modality::kText;
  throw DataError("unknown modality '" + s + "'");
}

void EmbeddingVector::validate() const {
  if (values.empty()) throw DataError("EmbeddingVector: empty");
  double norm2 = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("EmbeddingVector: non-finite entry");
    norm2 += v * v;
  }
  if (norm2 == 0.0) throw NumericError("EmbeddingVector '" + space + "': zero norm");
}

nlohmann::json to_json(const EventDistribution& d) {
  return {{"space", d.label_space}, {"dim", d.probs.size()}, {"values", d.probs}};
}

nlohmann::json to_json(const EmbeddingVector& e) {
  return {{"space", e.space},
          {"dim", e.values.size()},
          {"modality", to_string(e.modality)},
          {"values", e.values}};
}

namespace {

std::vector<double> read_values(const nlohmann::json& j) {
  auto values = j.at("values").get<std::vector<double>>();
  const auto dim = j.at("dim").get<std::size_t>();
  if (dim != values.size()) {
    throw DataError("dim " + std::to_string(dim) + " does not match " +
                    std::to_string(values.size()) + " values");
  }
  return values;
}

}  // namespace

EventDistribution event_distribution_from_json(const nlohmann::json& j) {
  EventDistribution d;
  try {
    d.label_space = j.at("space").get<std::string>();
    d.probs = read_values(j);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("event distribution JSON: ") + e.what());
  }
  double sum = 0.0;
  for (double p : d.probs) {
    if (!std::isfinite(p) || p < 0.0) throw DataError("event distribution: negative or non-finite entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw DataError("event distribution: probabilities sum to " + std::to_string(sum));
  }
  for (double& p : d.probs) p /= sum;
  return d;
}

EmbeddingVector embedding_from_json(const nlohmann::json& j) {
  EmbeddingVector e;
  try {
    e.space = j.at("space").get<std::string>();
    e.values = read_values(j);
    e.modality = modality_from_string(j.at("modality").get<std::string>());
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("embedding JSON: ") + ex.what());
  }
  e.validate();
  return e;
}

EventDistribution load_event_distribution(const std::filesystem::path& path) {
  try {
    return event_distribution_from_json(read_json_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

EmbeddingVector load_embedding(const std::filesystem::path& path) {
  try {
    return embedding_from_json(read_json_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Metrics

double mag(const AudioClip& pred, const AudioClip& ref, const StftConfig& cfg) {
  require_same_shape(pred, ref, "mag");
  const RealMatrix p = stft(pred, cfg).magnitude();
  const RealMatrix r = stft(ref, cfg).magnitude();
  return 100.0 * (p - r).cwiseAbs().mean();
}

double env(const AudioClip& pred, const AudioClip& ref) {
  require_same_shape(pred, ref, "env");
  const auto p = analytic_envelope(pred);
  const auto r = analytic_envelope(ref);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - r[i]);
  return 100.0 * acc / static_cast<double>(p.size());
}

double kld(const EventDistribution& pred, const EventDistribution& ref) {
  if (pred.label_space != ref.label_space) {
    throw DomainError("kld: label space mismatch ('" + pred.label_space + "' vs '" +
                      ref.label_space + "')");
  }
  if (pred.probs.size() != ref.probs.size()) {
    throw DomainError("kld: dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < ref.probs.size(); ++i) {
    const double r = ref.probs[i];
    acc += r * std::log((r + kKldEpsilon) / (pred.probs[i] + kKldEpsilon));
  }
  return 100.0 * acc;
}

namespace {

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) throw NumericError("delta_ib: zero-norm embedding");
  return dot / std::sqrt(na * nb);
}

}  // namespace

double delta_ib(const EmbeddingVector& video, const EmbeddingVector& audio_ref,
                const EmbeddingVector& audio_pred) {
  if (video.modality != Modality::kVideo || audio_ref.modality != Modality::kAudio ||
      audio_pred.modality != Modality::kAudio) {
    throw DomainError("delta_ib: expected (video, audio, audio) embeddings");
  }
  if (video.space != audio_ref.space || video.space != audio_pred.space) {
    throw DomainError("delta_ib: embeddings come from different spaces");
  }
  if (video.values.size() != audio_ref.values.size() ||
      video.values.size() != audio_pred.values.size()) {
    throw DomainError("delta_ib: embedding dimensions differ");
  }
  return 100.0 * (cosine(video, audio_ref) - cosine(video, audio_pred));
}

double wasserstein1_frames(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size() || p.empty()) {
    throw ShapeError("wasserstein1_frames: mass vectors must have equal nonzero length");
  }
  double sp = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0) || !(q[i] >= 0.0)) {
      throw NumericError("wasserstein1_frames: negative or non-finite mass");
    }
    sp += p[i];
    sq += q[i];
  }
  if (sp <= 0.0 || sq <= 0.0) {
    throw NumericError("wasserstein1_frames: degenerate (zero) total mass");
  }
  // Unit spacing 1/n between frame positions; the last CDF difference is 0.
  double cp = 0.0, cq = 0.0, acc = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    cp += p[i] / sp;
    cq += q[i] / sq;
    acc += std::abs(cp - cq);
  }
  return acc / static_cast<double>(p.size());
}

double w_dis(const StemTrajectories& pred, const StemTrajectories& ref) {
  double total = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const LoudnessTrajectory& a = pred[k];
    const LoudnessTrajectory& b = ref[k];
    if (a.frames.size() != b.frames.size()) {
      throw ShapeError("w_dis: " + to_string(a.stem_class) + " trajectories differ in frame count");
    }
    const auto masses = [](const LoudnessTrajectory& t) {
      std::vector<double> m(t.frames.size());
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::max(0.0, t.frames[i] - t.floor_db);
      return m;
    };
    const std::vector<double> ma = masses(a), mb = masses(b);
    const auto all_floor = [](const std::vector<double>& m) {
      return std::all_of(m.begin(), m.end(), [](double v) { return v == 0.0; });
    };
    if (all_floor(ma) || all_floor(mb)) {
      throw NumericError("w_dis: " + to_string(b.stem_class) + " trajectory is entirely at the " +
                         "loudness floor (degenerate mass); the stem is silent");
    }
    total += wasserstein1_frames(ma, mb);
  }
  return total / 3.0;
}

// ---------------------------------------------------------------------------
// Providers

EventDistribution mel_event_distribution(const AudioClip& clip, const StftConfig& cfg,
                                         int bands) {
  const Spectrogram spec = stft(clip, cfg);
  const RealMatrix energies =
      mel_band_energies(spec, bands, 0.0, clip.sample_rate() / 2.0);
  EventDistribution d;
  d.label_space = "mel-" + std::to_string(bands);
  d.probs.resize(bands);
  // Tiny floor keeps silent clips well defined (uniform).
  double sum = 0.0;
  for (int b = 0; b < bands; ++b) {
    d.probs[b] = energies.col(b).mean() + 1e-12;
    sum += d.probs[b];
  }
  for (double& p : d.probs) p /= sum;
  return d;
}

StemTrajectories stem_trajectories(const std::array<AudioClip, 3>& stems,
                                   const StftConfig& cfg, double floor_db) {
  StemTrajectories out;
  for (std::size_t k = 0; k < 3; ++k) {
    out[k] = loudness_trajectory(stems[k], cfg.window_len(), cfg.hop(), floor_db,
                                 kStemClasses[k]);
  }
  return out;
}

std::array<AudioClip, 3> project_stems(const AudioClip& pred, const AudioClip& ref,
                                       const StemSet& stems, const EvalOptions& opts) {
  require_same_shape(pred, ref, "project_stems");
  const std::array<AudioClip, 3> ref_stems = {stems.reference_stem(StemClass::kSpeech),
                                              stems.reference_stem(StemClass::kMusic),
                                              stems.reference_stem(StemClass::kEffects)};
  const RealMatrix p = stft(pred, opts.stft).magnitude();
  const RealMatrix r = stft(ref, opts.stft).magnitude();
  constexpr double kEps = 1e-8;
  const RealMatrix ratio =
      ((p.array() + kEps) / (r.array() + kEps)).min(opts.projection_cap).matrix();
  if ((ratio.array() == 1.0).all()) return ref_stems;

  std::array<AudioClip, 3> out = ref_stems;
  for (std::size_t k = 0; k < 3; ++k) {
    Spectrogram s = stft(ref_stems[k], opts.stft);
    s.bins.array() *= ratio.array().cast<Complex>();
    out[k] = istft(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-clip evaluation

MetricsReport evaluate_clip(const ClipInputs& in, const EvalOptions& opts) {
  MetricsReport r;
  r.clip_id = in.clip_id;
  r.mag = mag(in.pred, in.ref, opts.stft);
  r.env = env(in.pred, in.ref);

  EventDistribution pd, rd;
  if (in.pred_dist && in.ref_dist) {
    pd = *in.pred_dist;
    rd = *in.ref_dist;
  } else {
    pd = mel_event_distribution(in.pred, opts.stft, opts.mel_bands);
    rd = mel_event_distribution(in.ref, opts.stft, opts.mel_bands);
  }
  r.kld = kld(pd, rd);
  r.kld_space = rd.label_space;

  if (in.video && in.audio_ref && in.audio_pred) {
    r.delta_ib = delta_ib(*in.video, *in.audio_ref, *in.audio_pred);
  }

  if (!in.stems) throw DataError("clip '" + in.clip_id + "': w_dis needs the three stems");
  const std::array<AudioClip, 3> ref_stems = {in.stems->reference_stem(StemClass::kSpeech),
                                              in.stems->reference_stem(StemClass::kMusic),
                                              in.stems->reference_stem(StemClass::kEffects)};
  const std::array<AudioClip, 3> pred_stems =
      in.pred_stems ? *in.pred_stems : project_stems(in.pred, in.ref, *in.stems, opts);
  r.w_dis = w_dis(stem_trajectories(pred_stems, opts.stft, opts.floor_db),
                  stem_trajectories(ref_stems, opts.stft, opts.floor_db));
  return r;
}

ClipInputs load_clip_inputs(const Manifest& manifest, const ManifestEntry& entry,
                            PredSource source) {
  std::vector<std::string> missing;
  const auto exists = [&](const std::string& p) {
    return !p.empty() && std::filesystem::exists(manifest.resolve(p));
  };
  const auto need = [&](const std::string& p, const std::string& what) {
    if (p.empty()) {
      missing.push_back(what + " (not listed)");
    } else if (!exists(p)) {
      missing.push_back(what + ": " + manifest.resolve(p).string());
    }
  };

  for (const char* s : {"speech", "music", "effects"}) {
    auto it = entry.stems.find(s);
    need(it == entry.stems.end() ? "" : it->second, std::string("stem ") + s);
  }
  std::string pred_path;
  switch (source) {
    case PredSource::kPred: pred_path = entry.pred; break;
    case PredSource::kPoorMix:
      pred_path = entry.poor_mix;
      need(entry.schedule, "schedule");
      break;
    case PredSource::kReference: break;
  }
  if (source != PredSource::kReference) need(pred_path, "prediction");
  if (!entry.reference_mix.empty()) need(entry.reference_mix, "reference mix");
  if (source == PredSource::kPred && !entry.pred_stems.empty()) {
    for (const char* s : {"speech", "music", "effects"}) {
      auto it = entry.pred_stems.find(s);
      need(it == entry.pred_stems.end() ? "" : it->second, std::string("predicted stem ") + s);
    }
  }
  if (!missing.empty()) {
    std::string msg = "clip '" + entry.clip_id + "': missing inputs:";
    for (const auto& m : missing) msg += "\n  - " + m;
    throw DataError(msg);
  }

  const int rate = manifest.sample_rate;
  const auto wav = [&](const std::string& p) { return read_wav(manifest.resolve(p), rate); };
  std::optional<AudioClip> ref_mix;
  if (!entry.reference_mix.empty()) ref_mix = wav(entry.reference_mix);
  StemSet stems(wav(entry.stems.at("speech")), wav(entry.stems.at("music")),
                wav(entry.stems.at("effects")), ref_mix, entry.reference_gains);

  ClipInputs in{.clip_id = entry.clip_id,
                .pred = source == PredSource::kReference ? stems.reference_mix() : wav(pred_path),
                .ref = stems.reference_mix()};
  require_same_shape(in.pred, in.ref, ("clip '" + entry.clip_id + "'").c_str());

  if (source == PredSource::kPoorMix) {
    const GainSchedule schedule = schedule_from_json(read_json_file(manifest.resolve(entry.schedule)));
    in.pred_stems = std::array<AudioClip, 3>{
        apply_gain_schedule(stems.speech(), schedule.curve(StemClass::kSpeech)),
        apply_gain_schedule(stems.music(), schedule.curve(StemClass::kMusic)),
        apply_gain_schedule(stems.effects(), schedule.curve(StemClass::kEffects))};
  } else if (source == PredSource::kReference) {
    in.pred_stems = std::array<AudioClip, 3>{stems.reference_stem(StemClass::kSpeech),
                                             stems.reference_stem(StemClass::kMusic),
                                             stems.reference_stem(StemClass::kEffects)};
  } else if (!entry.pred_stems.empty()) {
    in.pred_stems = std::array<AudioClip, 3>{wav(entry.pred_stems.at("speech")),
                                             wav(entry.pred_stems.at("music")),
                                             wav(entry.pred_stems.at("effects"))};
  }
  in.stems = std::move(stems);

  const char* pred_key = source == PredSource::kPred      ? "pred"
                         : source == PredSource::kPoorMix ? "poor"
                                                          : "ref";
  const auto lookup = [](const std::map<std::string, std::string>& m, const std::string& k) {
    auto it = m.find(k);
    return it == m.end() ? std::string() : it->second;
  };
  const std::string rd = lookup(entry.event_dists, "ref");
  const std::string pd = lookup(entry.event_dists, pred_key);
  if (exists(rd) && exists(pd)) {
    in.ref_dist = load_event_distribution(manifest.resolve(rd));
    in.pred_dist = load_event_distribution(manifest.resolve(pd));
  }
  const std::string audio_pred_key = source == PredSource::kPred      ? "audio_pred"
                                     : source == PredSource::kPoorMix ? "audio_poor"
                                                                      : "audio_ref";
  const std::string v = lookup(entry.embeddings, "video");
  const std::string ar = lookup(entry.embeddings, "audio_ref");
  const std::string ap = lookup(entry.embeddings, audio_pred_key);
  if (exists(v) && exists(ar) && exists(ap)) {
    in.video = load_embedding(manifest.resolve(v));
    in.audio_ref = load_embedding(manifest.resolve(ar));
    in.audio_pred = load_embedding(manifest.resolve(ap));
  }
  return in;
}

MetricsReport evaluate_entry(const Manifest& manifest, const ManifestEntry& entry,
                             PredSource source, const EvalOptions& opts) {
  return evaluate_clip(load_clip_inputs(manifest, entry, source), opts);
}

}  // namespace semmix
