#pragma once
// Batch generation: every scenario x every run index -> one run directory.
//
// Config file (JSON, every field optional except scenarios):
//   {"scenarios": ["a.scn"], "world": "w.json", "duration": 10, "runsPerScenario": 1,
//    "baseSeed": 0, "out": "dataset", "captureEveryNSteps": 1, "maxRejections": 2000,
//    "sensors": {"cameras": [{...}], "lidars": [{...}]}}
// Scenario and world paths are relative to the config file, "out" to the
// working directory. Without a "sensors" entry the rig is one default camera
// and one default lidar.

#include <atomic>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "scenegen/dataset.hpp"
#include "scenegen/dsl/compile.hpp"
#include "scenegen/protocol/session.hpp"
#include "scenegen/sampler.hpp"
#include "scenegen/simulation.hpp"

namespace scenegen {

class ConfigFileError : public Error {
 public:
  using Error::Error;
};

struct BatchConfig {
  std::vector<fs::path> scenarios;
  fs::path world;  // overrides the scenarios' own world declarations
  double duration = 10.0;
  int runsPerScenario = 1;
  std::uint64_t baseSeed = 0;
  SensorRig rig{{CameraConfig{}}, {LidarConfig{}}};
  fs::path out = "dataset";
  int captureEveryNSteps = 1;
  int maxRejections = kDefaultMaxRejections;

  double dt() const { return rig.cameras.empty() ? 1.0 / 15.0 : 1.0 / rig.cameras.front().fps; }

  void validate() const {
    if (scenarios.empty()) throw ConfigFileError("no scenarios configured");
    if (runsPerScenario < 1) throw ConfigFileError("runsPerScenario must be at least 1");
    if (!(duration >= dt())) throw ConfigFileError("duration must be at least one time step");
    if (rig.cameras.empty() && rig.lidars.empty()) throw ConfigFileError("at least one sensor is required");
    if (captureEveryNSteps < 1) throw ConfigFileError("captureEveryNSteps must be at least 1");
    if (maxRejections < 1) throw ConfigFileError("maxRejections must be at least 1");
    for (const auto& c : rig.cameras) c.validate();
    for (const auto& l : rig.lidars) l.validate();
  }

  /// Shrinks every camera to 160x90.
  void apply_test_profile() {
    for (auto& c : rig.cameras) c.width = 160, c.height = 90;
  }
};

inline BatchConfig batch_config_from_json(const json& j, const fs::path& baseDir = {}) {
  BatchConfig c;
  auto rel = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : baseDir / p; };
  try {
    for (const auto& s : j.at("scenarios")) c.scenarios.push_back(rel(s.get<std::string>()));
    if (j.contains("world")) c.world = rel(j.at("world").get<std::string>());
    c.duration = j.value("duration", c.duration);
    c.runsPerScenario = j.value("runsPerScenario", c.runsPerScenario);
    c.baseSeed = j.value("baseSeed", c.baseSeed);
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    c.captureEveryNSteps = j.value("captureEveryNSteps", c.captureEveryNSteps);
    c.maxRejections = j.value("maxRejections", c.maxRejections);
    if (j.contains("sensors")) {
      const json& s = j.at("sensors");
      c.rig = {};
      for (const auto& cam : s.value("cameras", json::array())) c.rig.cameras.push_back(camera_from_json(cam));
      for (const auto& l : s.value("lidars", json::array())) c.rig.lidars.push_back(lidar_from_json(l));
    }
  } catch (const json::exception& e) {
    throw ConfigFileError(std::string("bad config: ") + e.what());
  }
  return c;
}

inline BatchConfig load_batch_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFileError("cannot open config " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigFileError("config is not valid JSON: " + path.string());
  return batch_config_from_json(j, path.parent_path());
}

struct RunSpec {
  fs::path scenario;
  int runIndex = 0;
  std::uint64_t seed = 0;
  fs::path dir;
};

struct RunOutcome {
  RunSpec spec;
  bool ok = false;
  bool skipped = false;
  std::string error;
  int frames = 0;
};

struct BatchResult {
  std::vector<RunOutcome> runs;
  int ok() const {
    int n = 0;
    for (const auto& r : runs) n += r.ok;
    return n;
  }
  int failed() const { return static_cast<int>(runs.size()) - ok(); }
  std::string summary() const {
    return "runs=" + std::to_string(runs.size()) + " ok=" + std::to_string(ok()) + " failed=" + std::to_string(failed());
  }
};

struct RunOptions {
  std::optional<protocol::Endpoint> actionSource;  // remote behaviors instead of in-process
  int timeoutMs = protocol::kDefaultTimeoutMs;
};

inline std::string run_dir_name(const fs::path& scenario, std::uint64_t seed) {
  return scenario.stem().string() + "_" + std::to_string(seed);
}

/// Samples, simulates and writes one run into `dir`. A failure after the
/// directory was created removes it again.
inline int generate_run(const dsl::CheckedProgram& prog, const WorldModel& world, const BatchConfig& cfg,
                        const RunSpec& spec, const RunOptions& opts = {}) {
  Rng rng(spec.seed);
  const Scene scene = sample_scene(prog, world, rng, cfg.maxRejections);

  std::unique_ptr<ActionSource> source;
  if (opts.actionSource) {
    std::vector<int> agents;
    for (const auto& o : scene.objects)
      if (o.behavior) agents.push_back(o.id);
    auto remote = std::make_unique<protocol::RemoteActionSource>(protocol::RemoteActionSource::connect(*opts.actionSource, opts.timeoutMs));
    remote->hello(prog.sourceHash, spec.seed, cfg.dt(), agents);
    source = std::move(remote);
  } else {
    source = std::make_unique<BehaviorRuntime>(prog, scene, rng);
  }

  RunManifest m;
  m.scenarioPath = spec.scenario.filename().string();
  m.programHash = prog.sourceHash;
  m.seed = spec.seed;
  m.dt = cfg.dt();
  m.duration = cfg.duration;
  m.stepCount = step_count(cfg.duration, m.dt);
  m.captureEveryNSteps = cfg.captureEveryNSteps;
  m.rig = cfg.rig;

  RunWriter writer(spec.dir, m);
  try {
    writer.write_scene(scene);
    int frame = 0;
    const Trajectory traj = run_simulation(scene, cfg.duration, m.dt, *source, [&](const StepRecord& rec) {
      if (rec.step % cfg.captureEveryNSteps == 0) writer.write_frame(capture_frame(scene, rec, cfg.rig, frame++));
    });
    writer.finish(traj.collisionSteps);
    return frame;
  } catch (...) {
    std::error_code ec;
    fs::remove_all(spec.dir, ec);
    throw;
  }
}

/// The world a scenario runs in: `override` if given, else the program's own
/// `world` declaration (relative to the scenario file), else an empty world.
inline WorldModel world_for(const dsl::CheckedProgram& prog, const fs::path& scenario, const fs::path& override = {}) {
  if (!override.empty()) return load_world(override);
  if (prog.program.worldRef) return load_world(scenario.parent_path() / *prog.program.worldRef);
  return {};
}

using BatchLog = std::function<void(const std::string&)>;

struct BatchOptions {
  RunOptions run;
  int jobs = 1;
  bool skipExisting = false;
  BatchLog log;
};

/// Compiles every scenario; returns diagnostics text, empty when all are clean.
inline std::string check_scenarios(const BatchConfig& cfg, std::vector<dsl::CheckedProgram>& progs) {
  std::string diags;
  progs.clear();
  for (const auto& p : cfg.scenarios) {
    try {
      progs.push_back(dsl::compile(dsl::read_text_file(p)));
    } catch (const std::exception& e) {
      diags += dsl::format_diagnostics(p.string(), e);
    }
  }
  return diags;
}

inline std::vector<RunSpec> plan_runs(const BatchConfig& cfg, const std::vector<dsl::CheckedProgram>& progs) {
  std::vector<RunSpec> out;
  for (std::size_t i = 0; i < cfg.scenarios.size(); ++i)
    for (int j = 0; j < cfg.runsPerScenario; ++j) {
      RunSpec s;
      s.scenario = cfg.scenarios[i];
      s.runIndex = j;
      s.seed = run_seed(cfg.baseSeed, static_cast<std::uint64_t>(j), progs[i].sourceHash);
      s.dir = cfg.out / run_dir_name(s.scenario, s.seed);
      out.push_back(s);
    }
  return out;
}

/// Runs a checked batch. Failures are recorded per run; the rest continue.
inline BatchResult run_batch(const BatchConfig& cfg, const std::vector<dsl::CheckedProgram>& progs,
                             const BatchOptions& opts = {}) {
  std::map<fs::path, const dsl::CheckedProgram*> byPath;
  std::map<fs::path, WorldModel> worlds;
  for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
    byPath[cfg.scenarios[i]] = &progs[i];
    worlds[cfg.scenarios[i]] = world_for(progs[i], cfg.scenarios[i], cfg.world);
  }

  BatchResult result;
  for (auto& s : plan_runs(cfg, progs)) result.runs.push_back({s, false, false, {}, 0});

  std::mutex logMutex;
  auto log = [&](const std::string& msg) {
    if (!opts.log) return;
    std::lock_guard lock(logMutex);
    opts.log(msg);
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < result.runs.size();) {
      RunOutcome& r = result.runs[i];
      const std::string name = r.spec.dir.filename().string();
      if (opts.skipExisting && fs::exists(r.spec.dir / "manifest.json")) {
        r.ok = r.skipped = true;
        log(name + ": exists, skipped");
        continue;
      }
      try {
        r.frames = generate_run(*byPath.at(r.spec.scenario), worlds.at(r.spec.scenario), cfg, r.spec, opts.run);
        r.ok = true;
        log(name + ": " + std::to_string(r.frames) + " frames");
      } catch (const std::exception& e) {
        r.error = e.what();
        log(name + ": failed: " + r.error);
      }
    }
  };

  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return result;
}

}  // namespace scenegen
