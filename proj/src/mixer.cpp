/**
 * Copyright 2026 The SonicForge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "sonicforge/mixer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "sonicforge/audio_io.hpp"
#include "sonicforge/errors.hpp"
#include "sonicforge/rng.hpp"
#include "sonicforge/synthesis.hpp"

namespace sonicforge {

namespace {

constexpr int kMaxPlacementTries = 1000;
constexpr double kSpeechGapMax = 8.0;  // seconds, U(0, 8) before each clip
constexpr double kNoiseGapMax = 4.0;   // seconds, U(0, 4)

nlohmann::ordered_json vec_json(const Vec3& v) {
  return nlohmann::ordered_json{{"x", v.x}, {"y", v.y}, {"z", v.z}};
}

std::string basename_of(const std::string& path) {
  return std::filesystem::path(path).filename().string();
}

/// Uniform draw over free walkable cells with in-cell jitter.
Vec3 sample_walkable(const OccupancyGrid& grid, Rng& rng) {
  const auto& cells = grid.free_cells();
  const auto& [ix, iz] = cells[rng.uniform_int(cells.size())];
  const Vec3 center = grid.cell_center(ix, iz);
  const double half = OccupancyGrid::kCellSize / 2.0 * 0.8;
  return center + Vec3{rng.uniform(-half, half), 0.0, rng.uniform(-half, half)};
}

bool in_annulus(const Vec3& a, const Vec3& b) {
  const double d = distance(a, b);
  return d >= 1.0 && d <= 8.0;
}

std::vector<PlannedClip> draw_clips(const std::vector<Utterance>& pool, std::size_t count,
                                    double gap_max, Rng& rng, const std::string& what) {
  if (pool.size() < count)
    throw DataError("plan_group: " + what + " pool underflow (need " + std::to_string(count) +
                    ", have " + std::to_string(pool.size()) + ")");
  std::vector<std::size_t> indices(pool.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  std::vector<PlannedClip> clips;
  clips.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t pick = k + rng.uniform_int(indices.size() - k);
    std::swap(indices[k], indices[pick]);
    const Utterance& u = pool[indices[k]];
    clips.push_back({u.path, u.transcript, rng.uniform(0.0, gap_max)});
  }
  return clips;
}

AudioBuffer load_clip_mono16k(const std::string& path, int sample_rate) {
  AudioBuffer buf = read_wav(path);
  if (buf.num_channels() > 1) {  // downmix by averaging
    AudioBuffer mono(1, buf.num_frames(), buf.sample_rate);
    for (std::size_t t = 0; t < buf.num_frames(); ++t) {
      double acc = 0.0;
      for (const auto& ch : buf.channels) acc += ch[t];
      mono.channels[0][t] = static_cast<float>(acc / static_cast<double>(buf.num_channels()));
    }
    buf = std::move(mono);
  }
  return resample(buf, sample_rate);
}

AudioBuffer normalize_or_passthrough(const AudioBuffer& stem, double target_lufs) {
  if (stem.is_silent()) return stem;  // silent stems pass through unscaled
  return normalize_to(stem, target_lufs).audio;
}

nlohmann::ordered_json clips_json(const std::vector<PlannedClip>& clips) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& c : clips)
    arr.push_back({{"path", c.path}, {"gap_seconds", c.gap_seconds}});
  return arr;
}

Vec3 vec_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("x") || !j.contains("y") || !j.contains("z"))
    throw FormatError("config: " + where + " must be an object with x/y/z");
  return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("z").get<double>()};
}

}  // namespace

UtterancePool UtterancePool::load_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open pool manifest: " + manifest_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("pool manifest: ") + e.what());
  }
  if (!j.is_array()) throw FormatError("pool manifest: top level must be an array");

  const auto base_dir = std::filesystem::path(manifest_path).parent_path();
  UtterancePool pool;
  for (const auto& row : j) {
    if (!row.is_object() || !row.contains("path"))
      throw FormatError("pool manifest: every entry needs a \"path\"");
    Utterance u;
    u.speaker_id = row.value("speaker_id", std::string{});
    u.transcript = row.value("transcript", std::string{});
    u.duration = row.value("duration", 0.0);
    std::filesystem::path p = row.at("path").get<std::string>();
    u.path = p.is_absolute() ? p.string() : (base_dir / p).string();

    const std::string kind = row.value("kind", std::string{"speech"});
    if (kind == "speech") {
      if (u.speaker_id.empty())
        throw FormatError("pool manifest: speech entries need a speaker_id");
      pool.speakers[u.speaker_id].push_back(std::move(u));
    } else if (kind == "environmental") {
      pool.environmental.push_back(std::move(u));
    } else if (kind == "music") {
      pool.music.push_back(std::move(u));
    } else {
      throw FormatError("pool manifest: unknown kind \"" + kind + "\"");
    }
  }
  return pool;
}

MixPlan plan_group(const Scene& scene, const UtterancePool& pools, std::uint64_t seed) {
  if (pools.speakers.size() < 3)
    throw DataError("plan_group: need at least 3 distinct speakers, have " +
                    std::to_string(pools.speakers.size()));
  const auto grid = OccupancyGrid::for_scene(scene);
  if (grid->free_cells().empty()) throw PlacementError("plan_group: scene has no walkable area");

  Rng rng(seed);
  MixPlan plan;
  plan.seed = seed;

  // Microphone: uniform over walkable cells.
  plan.mic = sample_walkable(*grid, rng);

  // Three distinct speakers (speaker map iterates in sorted order).
  std::vector<std::string> speaker_ids;
  speaker_ids.reserve(pools.speakers.size());
  for (const auto& [id, clips] : pools.speakers) speaker_ids.push_back(id);
  for (int k = 0; k < 3; ++k) {
    const std::size_t pick =
        static_cast<std::size_t>(k) + rng.uniform_int(speaker_ids.size() - static_cast<std::size_t>(k));
    std::swap(speaker_ids[static_cast<std::size_t>(k)], speaker_ids[pick]);
  }

  for (int k = 0; k < 3; ++k) {
    SourcePlan& sp = plan.sources[static_cast<std::size_t>(k)];
    sp.speaker_id = speaker_ids[static_cast<std::size_t>(k)];

    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementTries && !placed; ++attempt) {
      const Vec3 candidate = sample_walkable(*grid, rng);
      if (in_annulus(plan.mic, candidate)) {
        sp.start = candidate;
        placed = true;
      }
    }
    if (!placed)
      throw PlacementError(
          "plan_group: could not place source start within 1-8 m of the microphone");

    placed = false;
    for (int attempt = 0; attempt < kMaxPlacementTries && !placed; ++attempt) {
      const Vec3 candidate = sample_walkable(*grid, rng);
      if (!in_annulus(plan.mic, candidate) || !in_annulus(sp.start, candidate)) continue;
      try {
        sp.trajectory = with_duration(plan_path(scene, sp.start, candidate), plan.clip_duration);
      } catch (const UnreachableError&) {
        continue;  // resample the endpoint
      }
      sp.end = candidate;
      placed = true;
    }
    if (!placed)
      throw PlacementError(
          "plan_group: could not place a reachable endpoint within 1-8 m of both the microphone "
          "and the start");

    const std::size_t n_utterances = 3 + rng.uniform_int(3);  // {3,4,5}
    sp.clips = draw_clips(pools.speakers.at(sp.speaker_id), n_utterances, kSpeechGapMax, rng,
                          "speaker " + sp.speaker_id);
  }

  for (StaticPlan* stat : {&plan.env_noise, &plan.music}) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementTries && !placed; ++attempt) {
      const Vec3 candidate = sample_walkable(*grid, rng);
      if (in_annulus(plan.mic, candidate)) {
        stat->position = candidate;
        placed = true;
      }
    }
    if (!placed)
      throw PlacementError(
          "plan_group: could not place noise within 1-8 m of the microphone");
  }
  plan.env_noise.clips =
      draw_clips(pools.environmental, 6 + rng.uniform_int(3), kNoiseGapMax, rng, "environmental");
  plan.music.clips = draw_clips(pools.music, 6 + rng.uniform_int(3), kNoiseGapMax, rng, "music");

  // Every plan must satisfy the published placement constraints.
  for (const auto& sp : plan.sources) {
    const auto report = validate_placement(plan.mic, sp.start, sp.end,
                                           {plan.env_noise.position, plan.music.position});
    if (!report.ok()) {
      std::string msg = "plan_group: constraint violation:";
      for (const auto& v : report.violations) msg += " " + v.describe() + ";";
      throw PlacementError(msg);
    }
  }
  return plan;
}

nlohmann::ordered_json MixPlan::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["clip_duration"] = clip_duration;
  j["sample_rate"] = sample_rate;
  j["microphone"] = vec_json(mic);
  nlohmann::ordered_json sources_json = nlohmann::ordered_json::array();
  for (const auto& sp : sources) {
    nlohmann::ordered_json s;
    s["speaker_id"] = sp.speaker_id;
    s["start_point"] = vec_json(sp.start);
    s["end_point"] = vec_json(sp.end);
    s["trajectory_length"] = sp.trajectory.total_length;
    nlohmann::ordered_json waypoints = nlohmann::ordered_json::array();
    for (const auto& w : sp.trajectory.waypoints) waypoints.push_back(vec_json(w));
    s["waypoints"] = waypoints;
    s["clips"] = clips_json(sp.clips);
    sources_json.push_back(std::move(s));
  }
  j["sources"] = sources_json;
  j["noise"] = {{"position", vec_json(env_noise.position)}, {"clips", clips_json(env_noise.clips)}};
  j["music"] = {{"position", vec_json(music.position)}, {"clips", clips_json(music.clips)}};
  return j;
}

ArrangeResult arrange_stem(const std::vector<AudioBuffer>& clips,
                           const std::vector<double>& gaps_seconds, double clip_duration,
                           int sample_rate) {
  if (clips.size() != gaps_seconds.size())
    throw ValidationError("arrange_stem: one gap per clip required");
  const long total = std::lround(clip_duration * sample_rate);

  ArrangeResult result;
  result.stem = AudioBuffer(1, static_cast<std::size_t>(total), sample_rate);
  long cursor = 0;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const auto& clip = clips[i];
    if (clip.num_channels() != 1 || clip.sample_rate != sample_rate)
      throw ValidationError("arrange_stem: clips must be mono at the stem rate");
    const long start = cursor + std::lround(gaps_seconds[i] * sample_rate);
    const long end = start + static_cast<long>(clip.num_frames());
    if (end >= total) {
      result.dropped.push_back(i);
      continue;
    }
    for (std::size_t t = 0; t < clip.num_frames(); ++t)
      result.stem.channels[0][static_cast<std::size_t>(start) + t] = clip.channels[0][t];
    result.start_end_points.emplace_back(start, end);
    result.kept.push_back(i);
    cursor = end;
  }
  return result;
}

GroupStems build_group(const Scene& scene, const MixPlan& plan, const BuildOptions& options) {
  GroupStems out;
  const long total = std::lround(plan.clip_duration * plan.sample_rate);

  ReceiverConfig receiver = options.receiver;
  receiver.center = plan.mic;

  nlohmann::ordered_json metadata;

  for (int k = 0; k < 3; ++k) {
    const SourcePlan& sp = plan.sources[static_cast<std::size_t>(k)];
    std::vector<AudioBuffer> clips;
    clips.reserve(sp.clips.size());
    std::vector<double> gaps;
    for (const auto& pc : sp.clips) {
      clips.push_back(load_clip_mono16k(pc.path, plan.sample_rate));
      gaps.push_back(pc.gap_seconds);
    }
    ArrangeResult arranged = arrange_stem(clips, gaps, plan.clip_duration, plan.sample_rate);
    AudioBuffer dry = options.normalize_post
                          ? arranged.stem
                          : normalize_or_passthrough(arranged.stem, options.targets.speech);

    // RIRs along the trajectory, then the crossfaded moving render.
    MovingRender mr;
    mr.trajectory = sp.trajectory;
    mr.positions = sample_rir_positions(sp.trajectory, options.rir_spacing);
    mr.rirs.reserve(mr.positions.size());
    for (std::size_t p = 0; p < mr.positions.size(); ++p) {
      RIRRequest req;
      req.source = mr.positions[p].position;
      req.receiver = receiver;
      req.n_rays = options.n_rays;
      req.max_ir_seconds = options.max_ir_seconds;
      req.sample_rate = plan.sample_rate;
      req.seed = derive_seed(plan.seed, 0x100u + static_cast<std::uint64_t>(k), p);
      req.n_threads = options.n_threads;
      mr.rirs.push_back(trace_rir(scene, req));
    }
    AudioBuffer rendered = render_moving(dry, mr);
    rendered.resize_frames(static_cast<std::size_t>(total));
    if (options.normalize_post)
      rendered = normalize_or_passthrough(rendered, options.targets.speech);
    out.speech[static_cast<std::size_t>(k)] = std::move(rendered);

    nlohmann::ordered_json src;
    nlohmann::ordered_json audio = nlohmann::ordered_json::array();
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    nlohmann::ordered_json words = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < arranged.kept.size(); ++i) {
      const auto& pc = sp.clips[arranged.kept[i]];
      audio.push_back(basename_of(pc.path));
      pairs.push_back({arranged.start_end_points[i].first, arranged.start_end_points[i].second});
      words.push_back(pc.transcript);
    }
    src["audio"] = audio;
    src["start_end_points"] = pairs;
    src["words"] = words;
    metadata["source" + std::to_string(k + 1)] = src;
  }

  const auto render_noise = [&](const StaticPlan& stat, double target,
                                std::uint64_t stream) -> std::pair<AudioBuffer,
                                                                   nlohmann::ordered_json> {
    std::vector<AudioBuffer> clips;
    clips.reserve(stat.clips.size());
    std::vector<double> gaps;
    for (const auto& pc : stat.clips) {
      clips.push_back(load_clip_mono16k(pc.path, plan.sample_rate));
      gaps.push_back(pc.gap_seconds);
    }
    ArrangeResult arranged = arrange_stem(clips, gaps, plan.clip_duration, plan.sample_rate);
    AudioBuffer dry = options.normalize_post ? arranged.stem
                                             : normalize_or_passthrough(arranged.stem, target);
    RIRRequest req;
    req.source = stat.position;
    req.receiver = receiver;
    req.n_rays = options.n_rays;
    req.max_ir_seconds = options.max_ir_seconds;
    req.sample_rate = plan.sample_rate;
    req.seed = derive_seed(plan.seed, 0x200u, stream);
    req.n_threads = options.n_threads;
    AudioBuffer rendered = render_static(dry, scene, req);
    rendered.resize_frames(static_cast<std::size_t>(total));
    if (options.normalize_post) rendered = normalize_or_passthrough(rendered, target);

    nlohmann::ordered_json block;
    nlohmann::ordered_json audio = nlohmann::ordered_json::array();
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < arranged.kept.size(); ++i) {
      audio.push_back(basename_of(stat.clips[arranged.kept[i]].path));
      pairs.push_back({arranged.start_end_points[i].first, arranged.start_end_points[i].second});
    }
    block["audio"] = audio;
    block["start_end_points"] = pairs;
    return {std::move(rendered), std::move(block)};
  };

  auto [noise_stem, noise_meta] = render_noise(plan.env_noise, options.targets.environmental, 0);
  out.noise = std::move(noise_stem);
  metadata["noise"] = noise_meta;
  auto [music_stem, music_meta] = render_noise(plan.music, options.targets.music, 1);
  out.music = std::move(music_stem);
  metadata["music"] = music_meta;

  out.metadata = std::move(metadata);
  validate_metadata(out.metadata, total);
  return out;
}

Mixture compose_mixture(const GroupStems& stems, MixTask task, NoiseKind noise_kind,
                        std::uint64_t seed) {
  Rng rng(seed);
  Mixture result;
  if (task == MixTask::sep2) {
    const int first = static_cast<int>(rng.uniform_int(3));
    const int second = (first + 1 + static_cast<int>(rng.uniform_int(2))) % 3;
    result.chosen_sources = {first, second};
  } else {
    result.chosen_sources = {static_cast<int>(rng.uniform_int(3))};
  }

  const AudioBuffer& noise =
      noise_kind == NoiseKind::environmental ? stems.noise : stems.music;
  AudioBuffer mix = stems.speech[static_cast<std::size_t>(result.chosen_sources[0])];
  for (std::size_t i = 1; i < result.chosen_sources.size(); ++i) {
    const auto& s = stems.speech[static_cast<std::size_t>(result.chosen_sources[i])];
    for (std::size_t c = 0; c < mix.num_channels(); ++c)
      for (std::size_t t = 0; t < mix.num_frames(); ++t) mix.channels[c][t] += s.channels[c][t];
  }
  for (std::size_t c = 0; c < mix.num_channels(); ++c)
    for (std::size_t t = 0; t < mix.num_frames(); ++t) mix.channels[c][t] += noise.channels[c][t];

  for (int idx : result.chosen_sources)
    result.references.push_back(stems.speech[static_cast<std::size_t>(idx)]);
  result.mixture = std::move(mix);
  return result;
}

void validate_metadata(const nlohmann::json& metadata, long total_samples) {
  const auto check_pairs = [&](const nlohmann::json& block, const std::string& who,
                               bool with_words) {
    if (!block.is_object() || !block.contains("audio") || !block.contains("start_end_points"))
      throw ValidationError("metadata: " + who + " must contain audio and start_end_points");
    const auto& audio = block.at("audio");
    const auto& pairs = block.at("start_end_points");
    if (!audio.is_array() || !pairs.is_array())
      throw ValidationError("metadata: " + who + " audio/start_end_points must be arrays");
    if (audio.size() != pairs.size())
      throw ValidationError("metadata: " + who + " audio count differs from pair count");
    if (with_words) {
      if (!block.contains("words") || !block.at("words").is_array() ||
          block.at("words").size() != pairs.size())
        throw ValidationError("metadata: " + who + " words count differs from pair count");
    }
    for (const auto& pair : pairs) {
      if (!pair.is_array() || pair.size() != 2)
        throw ValidationError("metadata: " + who + " pairs must be [start, end]");
      const long s = pair[0].get<long>();
      const long e = pair[1].get<long>();
      if (s < 0 || s >= e || e >= total_samples)
        throw ValidationError("metadata: " + who + " pair [" + std::to_string(s) + ", " +
                              std::to_string(e) + "] out of bounds");
    }
  };
  for (int k = 1; k <= 3; ++k) {
    const std::string key = "source" + std::to_string(k);
    if (!metadata.contains(key)) throw ValidationError("metadata: missing " + key);
    check_pairs(metadata.at(key), key, true);
  }
  if (!metadata.contains("noise") || !metadata.contains("music"))
    throw ValidationError("metadata: missing noise/music blocks");
  check_pairs(metadata.at("noise"), "noise", false);
  check_pairs(metadata.at("music"), "music", false);
}

GenerationConfig GenerationConfig::from_json(const nlohmann::json& j) {
  GenerationConfig cfg;
  if (!j.contains("microphone"))
    throw FormatError("config: missing \"microphone\" block");
  const auto& mic = j.at("microphone");
  std::string type = mic.value("type", std::string{"monaural"});
  std::transform(type.begin(), type.end(), type.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (type == "monaural" || type == "mono") {
    cfg.mic_kind = ReceiverKind::mono;
  } else if (type == "ambisonics") {
    cfg.mic_kind = ReceiverKind::ambisonics_fo;
  } else if (type == "custom array" || type == "array") {
    cfg.mic_kind = ReceiverKind::array;
    if (!mic.contains("elements") || !mic.at("elements").is_array())
      throw FormatError("config: custom array needs microphone.elements ([[dx,dy,dz], ...])");
    for (const auto& e : mic.at("elements")) {
      if (!e.is_array() || e.size() != 3)
        throw FormatError("config: microphone.elements entries must be [dx, dy, dz]");
      cfg.mic_elements.push_back({e[0].get<double>(), e[1].get<double>(), e[2].get<double>()});
    }
  } else if (type == "binaural") {
    throw UnsupportedError("config: binaural rendering is not supported (requires HRTF data)");
  } else {
    throw FormatError("config: unknown microphone type \"" + type + "\"");
  }
  cfg.mic_position = vec_from_json(mic.at("position"), "microphone.position");

  if (j.contains("sound_source")) {
    const auto& src = j.at("sound_source");
    if (src.contains("start_point"))
      cfg.source_start = vec_from_json(src.at("start_point"), "sound_source.start_point");
    if (src.contains("end_point"))
      cfg.source_end = vec_from_json(src.at("end_point"), "sound_source.end_point");
    cfg.moving = src.value("movement_type", std::string{"static"}) == "dynamic";
  }
  if (j.contains("noise_source") && j.at("noise_source").contains("position"))
    cfg.noise_position = vec_from_json(j.at("noise_source").at("position"),
                                       "noise_source.position");

  // audio_settings may live at top level or inside sound_source.
  const nlohmann::json* settings = nullptr;
  if (j.contains("audio_settings")) settings = &j.at("audio_settings");
  else if (j.contains("sound_source") && j.at("sound_source").contains("audio_settings"))
    settings = &j.at("sound_source").at("audio_settings");
  if (settings) {
    cfg.duration_seconds = settings->value("duration", 10.0);
    cfg.sampling_rate = settings->value("sampling_rate", 16000);
  }
  if (j.contains("environment"))
    cfg.scene_name = j.at("environment").value("scene", std::string{});
  return cfg;
}

GenerationConfig GenerationConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return from_json(j);
}

ReceiverConfig GenerationConfig::receiver() const {
  ReceiverConfig rc;
  rc.kind = mic_kind;
  rc.center = mic_position;
  rc.element_offsets = mic_elements;
  return rc;
}

}  // namespace sonicforge
