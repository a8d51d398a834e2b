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
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "sonicforge/audio_io.hpp"
#include "sonicforge/errors.hpp"
#include "sonicforge/metrics.hpp"
#include "sonicforge/mixer.hpp"
#include "sonicforge/rir.hpp"
#include "sonicforge/rng.hpp"
#include "sonicforge/scene.hpp"

namespace {

using namespace sonicforge;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitUnsupported = 2;

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, quiet = 4 };

LogLevel g_log_level = LogLevel::info;
std::mutex g_log_mutex;

void init_log_level() {
  const char* env = std::getenv("SONICFORGE_LOG");
  if (!env) return;
  const std::string v = env;
  if (v == "debug") g_log_level = LogLevel::debug;
  else if (v == "info") g_log_level = LogLevel::info;
  else if (v == "warn") g_log_level = LogLevel::warn;
  else if (v == "error") g_log_level = LogLevel::error;
  else if (v == "quiet") g_log_level = LogLevel::quiet;
}

void log_line(LogLevel level, const std::string& msg) {
  if (level < g_log_level) return;
  static const char* names[] = {"debug", "info", "warn", "error"};
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

nlohmann::ordered_json vec_json(const Vec3& v) {
  return nlohmann::ordered_json{{"x", v.x}, {"y", v.y}, {"z", v.z}};
}

struct RirArgs {
  std::string scene, materials, config, out;
  std::uint64_t seed = 0;
  int rays = 0;       // 0: keep default
  int jobs = 1;
  int sample_rate = 0;  // 0: honor config
  double walkable_height = 1.5;
};

int run_rir(const RirArgs& args) {
  const Scene scene = load_scene(args.scene, args.materials, args.walkable_height);
  const GenerationConfig cfg = GenerationConfig::from_file(args.config);

  RIRRequest req;
  req.receiver = cfg.receiver();
  if (!cfg.source_start)
    throw FormatError("config: sound_source.start_point is required for rir");
  req.source = *cfg.source_start;
  req.sample_rate = args.sample_rate > 0 ? args.sample_rate : cfg.sampling_rate;
  req.max_ir_seconds = std::min(cfg.duration_seconds, 10.0);
  if (args.rays > 0) req.n_rays = args.rays;
  req.seed = args.seed;
  req.n_threads = std::max(1, args.jobs);

  log_line(LogLevel::info, "tracing RIR with " + std::to_string(req.n_rays) + " rays at " +
                               std::to_string(req.sample_rate) + " Hz");
  const TraceResult result = trace_rir_detailed(scene, req);
  write_wav(args.out, result.ir.to_audio(), WavFormat::f32);

  nlohmann::ordered_json sidecar;
  sidecar["sample_rate"] = result.ir.sample_rate;
  sidecar["channels"] = result.ir.num_channels();
  sidecar["frames"] = result.ir.num_frames();
  sidecar["source"] = vec_json(req.source);
  sidecar["receiver"] = vec_json(req.receiver.center);
  sidecar["direct_distance_m"] = distance(req.source, req.receiver.center);

  const auto edc = energy_decay_curve(result.ir);
  nlohmann::ordered_json rt60s = nlohmann::ordered_json::array();
  for (const auto& curve : edc) {
    try {
      rt60s.push_back(rt60_estimate(curve, result.ir.sample_rate));
    } catch (const Error&) {
      rt60s.push_back(nullptr);  // decay too short/shallow to fit
    }
  }
  sidecar["rt60_estimate_seconds"] = rt60s;

  nlohmann::ordered_json band_energy = nlohmann::ordered_json::array();
  for (int b = 0; b < kNumBands; ++b)
    band_energy.push_back(result.histogram.channel_band_total(0, b));
  sidecar["received_energy_by_band"] = band_energy;
  sidecar["band_centers_hz"] = band_centers();

  const std::string sidecar_path = args.out + ".json";
  std::ofstream sf(sidecar_path);
  if (!sf) throw IoError("cannot write sidecar: " + sidecar_path);
  sf << sidecar.dump(2) << "\n";
  log_line(LogLevel::info, "wrote " + args.out + " and " + sidecar_path);
  return kExitOk;
}

struct GenerateArgs {
  std::string scene, materials, pools, out;
  int n_groups = 1;
  std::uint64_t seed = 0;
  int jobs = 1;
  int rays = 20000;
  double spacing = 0.5;
  double max_ir_seconds = 2.0;
  double walkable_height = 1.5;
};

int run_generate(const GenerateArgs& args) {
  const Scene scene = load_scene(args.scene, args.materials, args.walkable_height);
  const UtterancePool pools = UtterancePool::load_manifest(args.pools);
  std::filesystem::create_directories(args.out);

  BuildOptions options;
  options.n_rays = args.rays;
  options.rir_spacing = args.spacing;
  options.max_ir_seconds = args.max_ir_seconds;
  options.n_threads = 1;  // determinism needs no help, but keep groups the unit of parallelism

  std::atomic<int> next_group{0};
  std::atomic<int> failures{0};
  std::mutex failure_mutex;
  std::vector<std::string> failure_messages;

  const auto worker = [&] {
    int g;
    while ((g = next_group.fetch_add(1)) < args.n_groups) {
      const std::uint64_t group_seed =
          derive_seed(args.seed, 0x67726F75u, static_cast<std::uint64_t>(g));
      char dir_name[32];
      std::snprintf(dir_name, sizeof(dir_name), "group_%04d", g);
      const std::filesystem::path group_dir = std::filesystem::path(args.out) / dir_name;
      try {
        std::filesystem::create_directories(group_dir);
        log_line(LogLevel::info, std::string("planning ") + dir_name);
        const MixPlan plan = plan_group(scene, pools, group_seed);
        {
          std::ofstream pf(group_dir / "plan.json");
          pf << plan.to_json().dump(2) << "\n";
        }
        log_line(LogLevel::info, std::string("rendering ") + dir_name);
        const GroupStems stems = build_group(scene, plan, options);
        for (int k = 0; k < 3; ++k)
          write_wav((group_dir / ("source" + std::to_string(k + 1) + ".wav")).string(),
                    stems.speech[static_cast<std::size_t>(k)], WavFormat::f32);
        write_wav((group_dir / "noise.wav").string(), stems.noise, WavFormat::f32);
        write_wav((group_dir / "music.wav").string(), stems.music, WavFormat::f32);
        {
          std::ofstream mf(group_dir / "metadata.json");
          mf << stems.metadata.dump(2) << "\n";
        }
        log_line(LogLevel::info, std::string("finished ") + dir_name);
      } catch (const std::exception& e) {
        failures.fetch_add(1);
        std::lock_guard<std::mutex> lock(failure_mutex);
        failure_messages.push_back(std::string(dir_name) + ": " + e.what());
      }
    }
  };

  const int n_workers = std::max(1, std::min(args.jobs, args.n_groups));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& msg : failure_messages) log_line(LogLevel::error, msg);
  return failures.load() == 0 ? kExitOk : kExitInputError;
}

struct EvaluateArgs {
  std::string pairs, out;
  std::vector<std::string> metrics{"si_snr"};
  bool pit = false;
  bool keep_going = false;
};

double metric_value(const std::string& name, const AudioBuffer& ref, const AudioBuffer& est) {
  if (name == "si_snr") return si_snr(ref, est);
  if (name == "snr") return -snr_loss(ref, est);  // report positive SNR
  if (name == "snr_loss") return snr_loss(ref, est);
  throw ConfigError("evaluate: unknown metric \"" + name + "\" (use snr, snr_loss, si_snr)");
}

std::vector<std::string> path_list(const nlohmann::json& field) {
  std::vector<std::string> out;
  if (field.is_string()) {
    out.push_back(field.get<std::string>());
  } else if (field.is_array()) {
    for (const auto& p : field) out.push_back(p.get<std::string>());
  } else {
    throw FormatError("evaluate: ref/est must be a path or an array of paths");
  }
  return out;
}

int run_evaluate(const EvaluateArgs& args) {
  std::ifstream in(args.pairs);
  if (!in) throw IoError("cannot open pairs manifest: " + args.pairs);
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("pairs manifest: ") + e.what());
  }
  if (!manifest.is_array()) throw FormatError("pairs manifest: top level must be an array");

  std::ofstream out(args.out);
  if (!out) throw IoError("cannot open output: " + args.out);

  const auto base_dir = std::filesystem::path(args.pairs).parent_path();
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path path = p;
    return path.is_absolute() ? path.string() : (base_dir / path).string();
  };

  bool any_row_failed = false;
  std::size_t row_index = 0;
  for (const auto& row : manifest) {
    const std::string row_tag = "row_" + std::to_string(row_index++);
    try {
      if (!row.is_object() || !row.contains("ref") || !row.contains("est"))
        throw FormatError("evaluate: rows need \"ref\" and \"est\"");
      const auto ref_paths = path_list(row.at("ref"));
      const auto est_paths = path_list(row.at("est"));
      if (ref_paths.empty() || ref_paths.size() != est_paths.size())
        throw ValidationError("evaluate: ref/est lists must be equal-length and non-empty");

      std::vector<AudioBuffer> refs, ests;
      for (const auto& p : ref_paths) refs.push_back(read_wav(resolve(p)));
      for (const auto& p : est_paths) ests.push_back(read_wav(resolve(p)));

      std::vector<int> assignment(ests.size());
      for (std::size_t i = 0; i < assignment.size(); ++i) assignment[i] = static_cast<int>(i);
      if (args.pit && refs.size() > 1) {
        const auto result = pit_select(
            refs, ests, [](const AudioBuffer& r, const AudioBuffer& e) { return snr_loss(r, e); });
        assignment = result.assignment;
        nlohmann::ordered_json rec;
        rec["file"] = row_tag;
        rec["metric"] = "pit_assignment";
        rec["value"] = assignment;
        out << rec.dump() << "\n";
      }

      for (std::size_t i = 0; i < refs.size(); ++i) {
        const auto& est = ests[static_cast<std::size_t>(assignment[i])];
        for (const auto& metric : args.metrics) {
          nlohmann::ordered_json rec;
          rec["file"] = est_paths[static_cast<std::size_t>(assignment[i])];
          rec["metric"] = metric;
          rec["value"] = metric_value(metric, refs[i], est);
          out << rec.dump() << "\n";
        }
      }
    } catch (const std::exception& e) {
      any_row_failed = true;
      nlohmann::ordered_json rec;
      rec["file"] = row_tag;
      rec["metric"] = "error";
      rec["value"] = e.what();
      out << rec.dump() << "\n";
      log_line(LogLevel::warn, row_tag + ": " + e.what());
      if (!args.keep_going) return kExitInputError;
    }
  }
  return any_row_failed && !args.keep_going ? kExitInputError : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  init_log_level();

  CLI::App app{
      "sonicforge: geometric-acoustics scene synthesis.\n"
      "Option precedence: CLI flags > config file > built-in defaults."};
  app.require_subcommand(1);

  RirArgs rir_args;
  auto* rir_cmd = app.add_subcommand("rir", "Trace a single room impulse response");
  rir_cmd->add_option("--scene", rir_args.scene, "OBJ mesh path")->required();
  rir_cmd->add_option("--materials", rir_args.materials, "materials JSON path")->required();
  rir_cmd->add_option("--config", rir_args.config, "generation config JSON")->required();
  rir_cmd->add_option("--out", rir_args.out, "output IR WAV path")->required();
  rir_cmd->add_option("--seed", rir_args.seed, "random seed (default 0)");
  rir_cmd->add_option("--rays", rir_args.rays, "ray count override");
  rir_cmd->add_option("--jobs", rir_args.jobs, "tracing threads");
  rir_cmd->add_option("--sample-rate", rir_args.sample_rate, "sample rate override (Hz)");
  rir_cmd->add_option("--walkable-height", rir_args.walkable_height,
                      "walkable height in meters (default 1.5)");

  GenerateArgs gen_args;
  auto* gen_cmd = app.add_subcommand("generate", "Batch-generate 60-second mixture groups");
  gen_cmd->add_option("--scene", gen_args.scene, "OBJ mesh path")->required();
  gen_cmd->add_option("--materials", gen_args.materials, "materials JSON path")->required();
  gen_cmd->add_option("--pools", gen_args.pools, "pool manifest JSON")->required();
  gen_cmd->add_option("--out", gen_args.out, "output directory")->required();
  gen_cmd->add_option("--n-groups", gen_args.n_groups, "number of groups (default 1)");
  gen_cmd->add_option("--seed", gen_args.seed, "random seed (default 0)");
  gen_cmd->add_option("--jobs", gen_args.jobs, "parallel groups (outputs unaffected)");
  gen_cmd->add_option("--rays", gen_args.rays, "rays per RIR (default 20000)");
  gen_cmd->add_option("--spacing", gen_args.spacing, "trajectory RIR spacing in m (default 0.5)");
  gen_cmd->add_option("--max-ir", gen_args.max_ir_seconds, "IR length in s (default 2.0)");
  gen_cmd->add_option("--walkable-height", gen_args.walkable_height,
                      "walkable height in meters (default 1.5)");

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Batch signal metrics over ref/est pairs");
  eval_cmd->add_option("--pairs", eval_args.pairs, "pairs manifest JSON")->required();
  eval_cmd->add_option("--out", eval_args.out, "output JSONL path")->required();
  eval_cmd->add_option("--metrics", eval_args.metrics,
                       "metrics to compute: snr, snr_loss, si_snr")
      ->delimiter(',');
  eval_cmd->add_flag("--pit", eval_args.pit, "permutation-invariant matching (negative-SNR cost)");
  eval_cmd->add_flag("--keep-going", eval_args.keep_going,
                     "record row errors and continue with exit 0");

  CLI11_PARSE(app, argc, argv);

  try {
    if (rir_cmd->parsed()) return run_rir(rir_args);
    if (gen_cmd->parsed()) return run_generate(gen_args);
    if (eval_cmd->parsed()) return run_evaluate(eval_args);
  } catch (const UnsupportedError& e) {
    log_line(LogLevel::error, e.what());
    return kExitUnsupported;
  } catch (const std::exception& e) {
    log_line(LogLevel::error, e.what());
    return kExitInputError;
  }
  return kExitOk;
}
