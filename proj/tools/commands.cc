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


#include "commands.h"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "semmix/audio.h"
#include "semmix/checkpoint.h"
#include "semmix/error.h"
#include "semmix/mix.h"
#include "semmix/parallel.h"
#include "semmix/prompt_kit.h"
#include "semmix/random.h"
#include "semmix/toy_data.h"

namespace semmix::cli {
namespace fs = std::filesystem;

namespace {

constexpr std::array<const char*, 3> kStemKeys = {"speech", "music", "effects"};

void prepare_out_dir(const fs::path& out) {
  if (out.empty()) throw ConfigError("--out is required");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw ConfigError("cannot create output directory " + out.string());
  const fs::path probe = out / ".semmix_write_probe";
  if (!std::ofstream(probe)) throw ConfigError("output directory is not writable: " + out.string());
  fs::remove(probe, ec);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw DataError("cannot write " + path.string());
}

// Every run leaves <command>.config.json next to its outputs.
void write_stamp(const fs::path& out, const std::string& command, nlohmann::json body) {
  body["command"] = command;
  body["version"] = kVersion;
  write_json_file(out / (command + ".config.json"), body);
}

std::string relative_to(const fs::path& target, const fs::path& dir) {
  return fs::absolute(target).lexically_normal().lexically_proximate(fs::absolute(dir).lexically_normal())
      .generic_string();
}

Manifest load_nonempty(const fs::path& path) {
  if (path.empty()) throw ConfigError("--manifest is required");
  Manifest m = Manifest::load(path);
  if (m.clips.empty()) throw DataError("manifest " + path.string() + " lists no clips");
  return m;
}

// Collects missing files so they can be reported together.
class MissingFiles {
 public:
  bool check(const Manifest& m, const std::string& clip, const std::string& what,
             const std::string& rel) {
    if (rel.empty()) {
      missing_.push_back(clip + ": no " + what + " listed");
      return false;
    }
    const fs::path p = m.resolve(rel);
    if (!fs::exists(p)) {
      missing_.push_back(clip + ": " + what + " " + p.string());
      return false;
    }
    return true;
  }
  void throw_if_any(const std::string& context) const {
    if (missing_.empty()) return;
    std::string msg = context + ": " + std::to_string(missing_.size()) + " missing input(s)";
    for (const auto& s : missing_) msg += "\n  " + s;
    throw DataError(msg);
  }

 private:
  std::vector<std::string> missing_;
};

StemSet load_stems(const Manifest& m, const ManifestEntry& e) {
  auto stem = [&](std::size_t k) {
    return read_wav(m.resolve(e.stems.at(kStemKeys[k])), m.sample_rate);
  };
  std::optional<AudioClip> ref;
  if (!e.reference_mix.empty()) ref = read_wav(m.resolve(e.reference_mix), m.sample_rate);
  return StemSet(stem(0), stem(1), stem(2), ref, e.reference_gains);
}

PredSource pred_source_from(const std::string& s) {
  if (s == "pred") return PredSource::kPred;
  if (s == "poor") return PredSource::kPoorMix;
  if (s == "reference") return PredSource::kReference;
  throw ConfigError("--source must be pred, poor or reference");
}

void check_format(const std::string& f) {
  if (f != "csv" && f != "json") throw ConfigError("--format must be csv or json");
}

void write_reports(const fs::path& base, const std::string& format,
                   const std::vector<MetricsReport>& reports) {
  if (format == "json") {
    write_json_file(base.string() + ".json", reports_to_json(reports));
  } else {
    write_text(base.string() + ".csv", reports_to_csv(reports));
  }
}

std::vector<MetricsReport> read_reports(const fs::path& path) {
  if (path.extension() == ".json") return reports_from_json(read_json_file(path));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return reports_from_csv(ss.str());
}

int run_toy_synth(const SynthArgs& args) {
  const auto clips = make_toy_dataset(ToyDataOptions{.clips = args.toy_clips}, args.seed);
  for (const char* sub : {"stems", "ref", "poor", "schedules", "text"}) {
    fs::create_directories(args.out / sub);
  }
  Manifest m;
  m.sample_rate = clips.front().stems.sample_rate();
  for (const ToyClip& c : clips) {
    ManifestEntry e;
    e.clip_id = c.id;
    const std::string name = safe_name(c.id);
    for (std::size_t k = 0; k < 3; ++k) {
      const std::string rel = "stems/" + name + "." + kStemKeys[k] + ".wav";
      write_wav(args.out / rel, c.stems.stem(kStemClasses[k]));
      e.stems[kStemKeys[k]] = rel;
    }
    e.reference_mix = "ref/" + name + ".wav";
    write_wav(args.out / e.reference_mix, c.stems.reference_mix());
    e.poor_mix = "poor/" + name + ".wav";
    write_wav(args.out / e.poor_mix, c.poor.mix);
    e.schedule = "schedules/" + name + ".json";
    write_json_file(args.out / e.schedule, to_json(c.poor.schedule));
    e.embeddings["text"] = "text/" + name + ".json";
    write_json_file(args.out / e.embeddings["text"], to_json(c.text));
    m.clips.push_back(std::move(e));
  }
  m.save(args.out / "manifest.json");
  write_stamp(args.out, "synth",
              {{"seed", args.seed}, {"toy_clips", args.toy_clips}});
  spdlog::info("synth: wrote {} toy clips to {}", clips.size(), args.out.string());
  return kExitOk;
}

}  // namespace

std::string safe_name(const std::string& clip_id) {
  std::string out;
  for (char c : clip_id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "clip" + out;
  return out;
}

void init_logging() {
  auto logger = spdlog::stderr_color_mt("semmix");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("SEMMIX_LOG");
  const std::string level = env && *env ? env : "info";
  const auto parsed = spdlog::level::from_str(level);
  if (parsed == spdlog::level::off && level != "off") {
    spdlog::set_level(spdlog::level::info);
    spdlog::warn("unknown SEMMIX_LOG value '{}', using info", level);
  } else {
    spdlog::set_level(parsed);
  }
}

int exit_code_for_current_exception() {
  try {
    throw;
  } catch (const ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    return kExitConfig;
  } catch (const DataError& e) {
    spdlog::error("data error: {}", e.what());
    return kExitData;
  } catch (const NumericError& e) {
    spdlog::error("numeric error: {}", e.what());
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    spdlog::error("data error: {}", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    spdlog::error("error: {}", e.what());
    return kExitConfig;
  }
}

int run_synth(const SynthArgs& args) {
  if (args.toy_clips < 0) throw ConfigError("--toy must be >= 0");
  if (!(args.breakpoint_probability >= 0.0 && args.breakpoint_probability <= 1.0)) {
    throw ConfigError("--breakpoint-probability must lie in [0, 1]");
  }
  const LoudnessPrior prior =
      args.prior.empty() ? LoudnessPrior{} : prior_from_json(read_json_file(args.prior));
  prior.validate();
  prepare_out_dir(args.out);
  if (args.toy_clips > 0) return run_toy_synth(args);

  Manifest m = load_nonempty(args.manifest);
  MissingFiles missing;
  for (const auto& e : m.clips) {
    for (const char* k : kStemKeys) {
      missing.check(m, e.clip_id, std::string("stem ") + k,
                    e.stems.count(k) ? e.stems.at(k) : std::string());
    }
    if (!e.reference_mix.empty()) missing.check(m, e.clip_id, "reference mix", e.reference_mix);
  }
  missing.throw_if_any("synth");

  fs::create_directories(args.out / "poor");
  fs::create_directories(args.out / "schedules");
  Manifest result = m;
  result.base_dir = args.out;
  const SynthOptions opts{.breakpoint_probability = args.breakpoint_probability};
  parallel_for(m.clips.size(), args.workers, [&](std::size_t i) {
    const ManifestEntry& e = m.clips[i];
    const StemSet stems = load_stems(m, e);
    const PoorMix poor = synthesize_poor_mix(stems, prior, derive_seed(args.seed, e.clip_id), opts);
    ManifestEntry& r = result.clips[i];
    for (auto& [k, v] : r.stems) v = relative_to(m.resolve(v), args.out);
    if (!r.reference_mix.empty()) r.reference_mix = relative_to(m.resolve(r.reference_mix), args.out);
    for (auto& [k, v] : r.embeddings) v = relative_to(m.resolve(v), args.out);
    for (auto& [k, v] : r.event_dists) v = relative_to(m.resolve(v), args.out);
    for (auto& [k, v] : r.pred_stems) v = relative_to(m.resolve(v), args.out);
    if (!r.pred.empty()) r.pred = relative_to(m.resolve(r.pred), args.out);
    const std::string name = safe_name(e.clip_id);
    r.poor_mix = "poor/" + name + ".wav";
    r.schedule = "schedules/" + name + ".json";
    write_wav(args.out / r.poor_mix, poor.mix);
    write_json_file(args.out / r.schedule, to_json(poor.schedule));
  });
  result.save(args.out / "manifest.json");
  write_stamp(args.out, "synth",
              {{"seed", args.seed},
               {"manifest", args.manifest.string()},
               {"prior", to_json(prior)},
               {"breakpoint_probability", args.breakpoint_probability},
               {"workers", args.workers}});
  spdlog::info("synth: {} poor mixes written to {}", m.clips.size(), args.out.string());
  return kExitOk;
}

int run_prompts(const PromptsArgs& args) {
  std::vector<Aspect> aspects;
  for (const auto& a : args.aspects) aspects.push_back(aspect_from_string(a));
  if (aspects.empty()) aspects.assign(kAspects.begin(), kAspects.end());
  std::vector<PromptFamily> families;
  for (const auto& f : args.families) families.push_back(family_from_string(f));
  if (families.empty()) families.assign(kPromptFamilies.begin(), kPromptFamilies.end());
  if (args.max_words == 0) throw ConfigError("--max-words must be positive");
  prepare_out_dir(args.out);

  const TemplateStore& store = TemplateStore::default_store();
  fs::create_directories(args.out / "templates");
  std::size_t written = 0;
  for (Aspect a : aspects) {
    for (PromptFamily f : families) {
      write_text(args.out / "templates" / template_file_name(a, f), render_prompt(store, a, f) + "\n");
      ++written;
    }
  }
  nlohmann::json stamp = {{"templates", written}, {"template_dir", store.dir().string()}};

  if (!args.captions.empty()) {
    std::ifstream in(args.captions, std::ios::binary);
    if (!in) throw DataError("cannot read " + args.captions.string());
    std::vector<Caption> validated;
    std::size_t truncated = 0, stray = 0;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
      if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        const auto v = validate_caption(j.at("text").get<std::string>(),
                                        aspect_from_string(j.at("aspect").get<std::string>()),
                                        family_from_string(j.at("family").get<std::string>()),
                                        CaptionLimits{args.max_words},
                                        j.at("clip_id").get<std::string>());
        truncated += v.truncated;
        stray += v.stray_abstention;
        validated.push_back(v.caption);
      } catch (const nlohmann::json::exception& e) {
        throw DataError(args.captions.string() + ":" + std::to_string(lineno) + ": " + e.what());
      } catch (const Error& e) {
        throw DataError(args.captions.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    write_captions_jsonl(args.out / "captions.validated.jsonl", validated);
    write_text(args.out / "prompt_stats.txt", render_prompt_stats(prompt_stats(validated)));
    stamp["captions"] = args.captions.string();
    stamp["validated"] = validated.size();
    stamp["truncated"] = truncated;
    stamp["stray_abstentions"] = stray;
    if (stray) spdlog::warn("prompts: {} caption(s) answered 'none' without an abstention rule", stray);
  }
  stamp["max_words"] = args.max_words;
  write_stamp(args.out, "prompts", stamp);
  spdlog::info("prompts: {} template(s) written", written);
  return kExitOk;
}

int run_evaluate(const EvaluateArgs& args) {
  check_format(args.format);
  const PredSource source = pred_source_from(args.source);
  const EvalOptions opts{.stft = StftConfig(args.window_len, args.hop, args.fft_len)};
  const Manifest m = load_nonempty(args.manifest);
  prepare_out_dir(args.out);

  auto evaluate_all = [&](PredSource src) {
    std::vector<MetricsReport> reports(m.clips.size());
    parallel_for(m.clips.size(), args.workers, [&](std::size_t i) {
      try {
        reports[i] = evaluate_entry(m, m.clips[i], src, opts);
      } catch (const Error& e) {
        reports[i].clip_id = m.clips[i].clip_id;
        reports[i].errors = e.what();
        spdlog::warn("evaluate: {} failed: {}", m.clips[i].clip_id, e.what());
      }
    });
    return reports;
  };

  std::vector<MetricsReport> reports = evaluate_all(source);
  const MetricsReport mean = aggregate(reports);
  std::vector<MetricsReport> with_mean = reports;
  sort_reports(with_mean);
  with_mean.push_back(mean);
  write_reports(args.out / "metrics", args.format, with_mean);

  std::vector<TableRow> rows;
  const bool has_baseline =
      source == PredSource::kPred &&
      std::all_of(m.clips.begin(), m.clips.end(), [](const auto& e) { return !e.poor_mix.empty(); });
  if (has_baseline) {
    rows.push_back({"Poorly mixed input", aggregate(evaluate_all(PredSource::kPoorMix))});
  }
  rows.push_back({args.source == "pred" ? "Prediction" : args.source, mean});
  write_text(args.out / "table.txt", render_table(rows));

  write_stamp(args.out, "evaluate",
              {{"manifest", args.manifest.string()},
               {"source", args.source},
               {"format", args.format},
               {"workers", args.workers},
               {"stft", {args.window_len, args.hop, args.fft_len}},
               {"scale_note", MetricsReport::kScaleNote}});
  const auto failed = std::count_if(reports.begin(), reports.end(), [](const auto& r) { return !r.ok(); });
  spdlog::info("evaluate: {} clip(s), {} failed", reports.size(), failed);
  return failed == static_cast<long>(reports.size()) ? kExitData : kExitOk;
}

ModelConfig model_config_for(const ModelArgs& args, int depth, std::uint64_t seed) {
  ModelConfig cfg;
  if (args.preset == "toy") {
    cfg = toy_model_config(depth, seed);
  } else if (args.preset == "full") {
    cfg.depth = depth;
    cfg.seed = seed;
  } else {
    throw ConfigError("--preset must be toy or full");
  }
  if (args.c_text) cfg.c_text = *args.c_text;
  cfg.validate();
  return cfg;
}

TrainConfig train_config_for(const ModelArgs& args, std::uint64_t seed) {
  TrainConfig cfg = args.preset == "toy" ? toy_train_config(seed) : TrainConfig{};
  cfg.seed = seed;
  if (args.epochs) cfg.epochs = *args.epochs;
  if (args.learning_rate) cfg.learning_rate = *args.learning_rate;
  if (args.batch_size) cfg.batch_size = *args.batch_size;
  cfg.validate();
  return cfg;
}

std::vector<EvalClip> load_training_clips(const Manifest& m) {
  MissingFiles missing;
  for (const auto& e : m.clips) {
    missing.check(m, e.clip_id, "poor mix", e.poor_mix);
    const bool has_stems = e.stems.size() == 3;
    if (e.reference_mix.empty() && !has_stems) {
      missing.check(m, e.clip_id, "reference mix", "");
    }
    if (!e.reference_mix.empty()) missing.check(m, e.clip_id, "reference mix", e.reference_mix);
    for (const auto& [k, v] : e.stems) missing.check(m, e.clip_id, "stem " + k, v);
    if (!e.schedule.empty()) missing.check(m, e.clip_id, "schedule", e.schedule);
    if (e.embeddings.count("text")) missing.check(m, e.clip_id, "text embedding", e.embeddings.at("text"));
  }
  missing.throw_if_any("training data");

  std::vector<EvalClip> out;
  for (const auto& e : m.clips) {
    std::optional<StemSet> stems;
    if (e.stems.size() == 3) stems = load_stems(m, e);
    AudioClip input = read_wav(m.resolve(e.poor_mix), m.sample_rate).with_id(e.clip_id);
    AudioClip target = e.reference_mix.empty() ? stems->reference_mix()
                                               : read_wav(m.resolve(e.reference_mix), m.sample_rate);
    EvalClip c{TrainSample{e.clip_id, std::move(input), std::move(target), std::nullopt},
               std::move(stems), std::nullopt};
    require_same_shape(c.sample.input, c.sample.target, ("clip " + e.clip_id).c_str());
    if (c.stems && !e.schedule.empty()) {
      const GainSchedule s = schedule_from_json(read_json_file(m.resolve(e.schedule)));
      c.input_stems = std::array<AudioClip, 3>{
          apply_gain_schedule(c.stems->speech(), s.curve(StemClass::kSpeech)),
          apply_gain_schedule(c.stems->music(), s.curve(StemClass::kMusic)),
          apply_gain_schedule(c.stems->effects(), s.curve(StemClass::kEffects))};
    }
    if (e.embeddings.count("text")) c.sample.text = load_embedding(m.resolve(e.embeddings.at("text")));
    out.push_back(std::move(c));
  }
  return out;
}

int run_train(const TrainArgs& args) {
  const ModelConfig mcfg = model_config_for(args.model, args.depth, args.seed);
  const TrainConfig tcfg = train_config_for(args.model, args.seed);
  const Manifest m = load_nonempty(args.manifest);
  prepare_out_dir(args.out);
  const auto clips = load_training_clips(m);
  std::vector<TrainSample> data;
  for (const auto& c : clips) data.push_back(c.sample);

  HighlightModel model(mcfg);
  spdlog::info("train: {} clip(s), depth {}, {} parameters", data.size(), mcfg.depth,
               model.param_count());
  const TrainTrace trace = train_toy(model, data, tcfg, [](int epoch, double loss) {
    spdlog::debug("epoch {} loss {:.6f}", epoch, loss);
  });
  const nlohmann::json stamp = {{"manifest", args.manifest.string()},
                                {"seed", args.seed},
                                {"model", to_json(mcfg)},
                                {"train", to_json(tcfg)},
                                {"param_count", model.param_count()},
                                {"initial_loss", trace.initial_loss},
                                {"final_loss", trace.final_loss}};
  save_checkpoint(args.out / "model.ckpt", model, {{"train", to_json(tcfg)}});
  write_text(args.out / "trace.csv", trace_to_csv(trace));
  write_stamp(args.out, "train", stamp);
  spdlog::info("train: loss {:.6f} -> {:.6f}", trace.initial_loss, trace.final_loss);
  return kExitOk;
}

int run_sweep(const SweepArgs& args) {
  if (args.depths.empty()) throw ConfigError("--depth needs at least one value");
  const ModelConfig base = model_config_for(args.model, args.depths.front(), args.seed);
  for (int d : args.depths) model_config_for(args.model, d, args.seed);
  const TrainConfig tcfg = train_config_for(args.model, args.seed);
  const Manifest train_m = load_nonempty(args.manifest);
  const Manifest eval_m =
      args.eval_manifest.empty() ? train_m : load_nonempty(args.eval_manifest);
  prepare_out_dir(args.out);
  const auto train = load_training_clips(train_m);
  const auto eval = args.eval_manifest.empty() ? train : load_training_clips(eval_m);
  for (const auto& c : eval) {
    if (!c.stems) throw DataError("sweep: clip " + c.sample.id + " lists no stems; w_dis needs them");
  }

  const EvalOptions opts{.stft = base.stft};
  const auto rows = depth_sweep(train, eval, args.depths, base, tcfg, opts, args.workers);
  write_text(args.out / "sweep.csv", sweep_to_csv(rows));
  nlohmann::json stamp = {{"manifest", args.manifest.string()},
                          {"eval_manifest", (args.eval_manifest.empty() ? args.manifest : args.eval_manifest).string()},
                          {"seed", args.seed},
                          {"depths", args.depths},
                          {"model", to_json(base)},
                          {"train", to_json(tcfg)},
                          {"workers", args.workers}};
  write_stamp(args.out, "sweep", stamp);
  spdlog::info("sweep: {} depth(s) written to {}", rows.size(), (args.out / "sweep.csv").string());
  return kExitOk;
}

int run_report(const ReportArgs& args) {
  check_format(args.format);
  if (args.inputs.empty()) throw ConfigError("report needs at least one --metrics label=path");
  prepare_out_dir(args.out);
  std::vector<TableRow> rows;
  std::vector<MetricsReport> means;
  for (const auto& [label, path] : args.inputs) {
    std::vector<MetricsReport> clips;
    for (auto& r : read_reports(path)) {
      if (r.clip_id != "mean") clips.push_back(std::move(r));
    }
    if (clips.empty()) throw DataError(path.string() + " holds no per-clip rows");
    MetricsReport mean = aggregate(clips, label);
    means.push_back(mean);
    rows.push_back({label, std::move(mean)});
  }
  write_text(args.out / "report.txt", render_table(rows));
  write_reports(args.out / "report", args.format, means);
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& [label, path] : args.inputs) inputs.push_back({label, path.string()});
  write_stamp(args.out, "report", {{"inputs", inputs}, {"format", args.format}});
  return kExitOk;
}

}  // namespace semmix::cli
