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
#ifndef SONICFORGE_MIXER_HPP
#define SONICFORGE_MIXER_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sonicforge/audio_buffer.hpp"
#include "sonicforge/loudness.hpp"
#include "sonicforge/rir.hpp"
#include "sonicforge/scene.hpp"
#include "sonicforge/trajectory.hpp"

namespace sonicforge {

struct Utterance {
  std::string speaker_id;  // empty for noise/music clips
  std::string path;        // resolved absolute/relative WAV path
  std::string transcript;
  double duration = 0.0;   // seconds, informational
};

/// Clip inventory for group planning. Speech is grouped by speaker;
/// environmental and music clips feed the two static noise stems.
struct UtterancePool {
  std::map<std::string, std::vector<Utterance>> speakers;
  std::vector<Utterance> environmental;
  std::vector<Utterance> music;

  /// Manifest: JSON array of {speaker_id, path, transcript, duration}
  /// with an optional "kind" of "speech" (default), "environmental" or
  /// "music". Relative paths resolve against the manifest directory.
  static UtterancePool load_manifest(const std::string& manifest_path);
};

struct PlannedClip {
  std::string path;
  std::string transcript;
  double gap_seconds = 0.0;  // silence inserted before this clip
};

struct SourcePlan {
  std::string speaker_id;
  std::vector<PlannedClip> clips;
  Vec3 start, end;
  Trajectory trajectory;  // duration set to the clip duration
};

struct StaticPlan {
  std::vector<PlannedClip> clips;
  Vec3 position;
};

/// Randomized layout of one 60-second group; a pure function of
/// (scene, pools, seed).
struct MixPlan {
  std::uint64_t seed = 0;
  Vec3 mic;
  std::array<SourcePlan, 3> sources;
  StaticPlan env_noise;
  StaticPlan music;
  double clip_duration = 60.0;
  int sample_rate = 16000;

  nlohmann::ordered_json to_json() const;
};

MixPlan plan_group(const Scene& scene, const UtterancePool& pools, std::uint64_t seed);

struct ArrangeResult {
  AudioBuffer stem;  // dry timeline, exactly clip_duration long
  std::vector<std::pair<long, long>> start_end_points;  // sample indices
  std::vector<std::size_t> kept;     // indices of clips that fit
  std::vector<std::size_t> dropped;  // clips that would overrun
};

/// Lays clips on a fixed-length timeline: clip i starts at the end of the
/// previous placed clip plus gaps[i]. Overrunning clips are dropped whole.
ArrangeResult arrange_stem(const std::vector<AudioBuffer>& clips,
                           const std::vector<double>& gaps_seconds, double clip_duration,
                           int sample_rate);

struct BuildOptions {
  int n_rays = 20000;
  double max_ir_seconds = 2.0;
  double rir_spacing = 0.5;  // meters between RIR positions on a trajectory
  LoudnessTargets targets;
  bool normalize_post = false;  // false: normalize the dry stem (default)
  ReceiverConfig receiver;      // center is overwritten with the plan's mic
  int n_threads = 1;
};

struct GroupStems {
  std::array<AudioBuffer, 3> speech;
  AudioBuffer noise;
  AudioBuffer music;
  nlohmann::ordered_json metadata;
};

/// Renders a planned group: speech stems move along their trajectories,
/// noise stems are static; all stems are exactly clip_duration long.
GroupStems build_group(const Scene& scene, const MixPlan& plan, const BuildOptions& options);

enum class MixTask { sep2, enh };
enum class NoiseKind { environmental, musical };

struct Mixture {
  AudioBuffer mixture;
  std::vector<AudioBuffer> references;
  std::vector<int> chosen_sources;  // indices into the speech stems
};

/// sep2: two seed-chosen speech stems + the chosen noise stem.
/// enh: one speech stem + noise. No re-normalization after summing.
Mixture compose_mixture(const GroupStems& stems, MixTask task, NoiseKind noise_kind,
                        std::uint64_t seed);

/// Validates a metadata document against the bundled shape: per-source
/// audio/start_end_points/words arrays with matching counts, ordered
/// in-bounds pairs, plus noise/music blocks. Throws ValidationError.
void validate_metadata(const nlohmann::json& metadata, long total_samples);

/// Generation config in the published JSON shape (microphone.type/position,
/// sound_source.start_point/end_point/movement_type, noise_source.position,
/// audio_settings.duration/sampling_rate, environment.scene).
struct GenerationConfig {
  ReceiverKind mic_kind = ReceiverKind::mono;
  Vec3 mic_position;
  std::vector<Vec3> mic_elements;  // custom arrays: microphone.elements
  std::optional<Vec3> source_start;
  std::optional<Vec3> source_end;
  bool moving = false;
  std::optional<Vec3> noise_position;
  double duration_seconds = 10.0;
  int sampling_rate = 16000;
  std::string scene_name;

  static GenerationConfig from_json(const nlohmann::json& j);
  static GenerationConfig from_file(const std::string& path);

  ReceiverConfig receiver() const;
};

}  // namespace sonicforge

#endif  // SONICFORGE_MIXER_HPP
