#include <gtest/gtest.h>

#include <cmath>

#include "scenegen/batch.hpp"
#include "scenegen/dataset.hpp"
#include "test_support.hpp"

using namespace scenegen;

namespace {

BatchConfig small_config() {
  BatchConfig c;
  c.apply_test_profile();
  c.duration = 2.0;
  return c;
}

struct Captured {
  dsl::CheckedProgram prog;
  Scene scene;
  std::vector<FrameData> frames;
  Trajectory traj;
};

/// Simulates a corpus scenario in memory, capturing every step.
Captured capture(const std::string& file, std::uint64_t seed, const SensorRig& rig, double duration) {
  Captured c{test::compile_file(test::data_dir() / file), {}, {}, {}};
  Rng rng(seed);
  c.scene = sample_scene(c.prog, test::two_lane_world(), rng);
  BehaviorRuntime rt(c.prog, c.scene, rng);
  c.traj = run_simulation(c.scene, duration, 1.0 / 15.0, rt, [&](const StepRecord& rec) {
    c.frames.push_back(capture_frame(c.scene, rec, rig, static_cast<int>(c.frames.size())));
  });
  return c;
}

RunManifest manifest_for(const Captured& c, const SensorRig& rig, double duration) {
  RunManifest m;
  m.scenarioPath = "x.scn";
  m.programHash = c.prog.sourceHash;
  m.seed = c.scene.seed;
  m.dt = 1.0 / 15.0;
  m.duration = duration;
  m.stepCount = static_cast<int>(c.frames.size());
  m.rig = rig;
  m.collisionSteps = c.traj.collisionSteps;
  return m;
}

SensorRig small_rig() {
  SensorRig r{{CameraConfig{}}, {LidarConfig{}}};
  r.cameras[0].width = 160, r.cameras[0].height = 90;
  return r;
}

RunSpec spec_in(const fs::path& dir, const std::string& file, std::uint64_t seed) {
  return {test::data_dir() / file, 0, seed, dir / run_dir_name(file, seed)};
}

int generate(const fs::path& dir, const BatchConfig& cfg, const std::string& file, std::uint64_t seed) {
  const auto prog = test::compile_file(test::data_dir() / file);
  return generate_run(prog, test::two_lane_world(), cfg, spec_in(dir, file, seed));
}

}  // namespace

TEST(Write, TenSecondsGiveOneHundredFiftyFrameDirs) {
  const auto root = test::scratch_dir("ds_cadence");
  BatchConfig cfg = small_config();
  cfg.duration = 10.0;
  EXPECT_EQ(generate(root, cfg, "badly_parked_car.scn", 4), 150);
  const fs::path run = root / run_dir_name("badly_parked_car.scn", 4);
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(run / "frames")) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  ASSERT_EQ(names.size(), 150u);
  EXPECT_EQ(names.front(), "000000");
  EXPECT_EQ(names.back(), "000149");
  const RunReader r(run);
  EXPECT_EQ(r.frame_count(), 150);
  for (const char* f : {"rgb.ppm", "depth.f32", "semseg.pgm", "lidar.bin", "boxes3d.json", "boxes2d.json", "states.json"})
    EXPECT_TRUE(fs::exists(run / "frames" / "000073" / f)) << f;
  EXPECT_TRUE(fs::exists(run / "scene.json"));
}

TEST(Write, ZeroFrameRun) {
  const auto root = test::scratch_dir("ds_zero");
  BatchConfig cfg = small_config();
  cfg.duration = 0.05;
  EXPECT_EQ(generate(root, cfg, "badly_parked_car.scn", 1), 0);
  const fs::path run = root / run_dir_name("badly_parked_car.scn", 1);
  EXPECT_EQ(RunReader(run).frame_count(), 0);
  EXPECT_TRUE(fs::is_empty(run / "frames"));
}

TEST(Write, NonEmptyDirectoryIsRefused) {
  const auto root = test::scratch_dir("ds_nonempty");
  io::write_file(root / "junk", "x");
  EXPECT_THROW(RunWriter(root, RunManifest{}), NonEmptyDir);
  EXPECT_NO_THROW(RunWriter(root / "fresh", RunManifest{}));
}

TEST(Write, CaptureEveryNSteps) {
  const auto root = test::scratch_dir("ds_every");
  BatchConfig cfg = small_config();
  cfg.captureEveryNSteps = 4;  // 30 steps
  EXPECT_EQ(generate(root, cfg, "lead_vehicle_braking.scn", 2), 8);
  const RunReader r(root / run_dir_name("lead_vehicle_braking.scn", 2));
  EXPECT_EQ(r.load(1).step, 4);
  EXPECT_EQ(r.load(7).step, 28);
}

TEST(Write, MultipleSensorsGetPrefixedFiles) {
  const auto root = test::scratch_dir("ds_multi");
  BatchConfig cfg = small_config();
  cfg.duration = 0.2;
  CameraConfig rear = cfg.rig.cameras[0];
  rear.mount.yawDeg = 180;
  cfg.rig.cameras.push_back(rear);
  LidarConfig low;
  low.channels = 4;
  low.azimuthSteps = 90;
  low.mount.z = 0.5;
  cfg.rig.lidars.push_back(low);
  generate(root, cfg, "pedestrian_crossing.scn", 9);
  const fs::path run = root / run_dir_name("pedestrian_crossing.scn", 9);
  for (const char* f : {"cam1_rgb.ppm", "cam1_depth.f32", "cam1_semseg.pgm", "cam1_boxes2d.json", "lidar1.bin"})
    EXPECT_TRUE(fs::exists(run / "frames" / "000001" / f)) << f;
  const RunReader r(run);
  EXPECT_EQ(r.manifest().rig, cfg.rig);
  const FrameData f = r.load(2);
  ASSERT_EQ(f.cameras.size(), 2u);
  ASSERT_EQ(f.lidars.size(), 2u);
  EXPECT_LE(f.lidars[1].points.size(), 4u * 90u);
}

TEST(Write, ByteDeterminism) {
  const auto a = test::scratch_dir("ds_det_a"), b = test::scratch_dir("ds_det_b");
  const BatchConfig cfg = small_config();
  for (const auto& f : test::corpus_files()) {
    generate(a, cfg, f.filename().string(), 11);
    generate(b, cfg, f.filename().string(), 11);
  }
  const auto ha = test::tree_hashes(a), hb = test::tree_hashes(b);
  EXPECT_GT(ha.size(), 3u * 30u * 7u);
  EXPECT_EQ(ha, hb);
}

TEST(Read, RoundTripEqualsStoredPrecision) {
  const SensorRig rig = small_rig();
  const Captured c = capture("pedestrian_crossing.scn", 5, rig, 1.0);
  const auto root = test::scratch_dir("ds_roundtrip");
  write_run(root / "run", manifest_for(c, rig, 1.0), c.scene, c.frames);
  const RunReader r(root / "run");
  EXPECT_EQ(r.manifest(), [&] {
    RunManifest m = manifest_for(c, rig, 1.0);
    m.frameCount = 15;
    return m;
  }());
  ASSERT_EQ(r.frame_count(), 15);
  for (int i = 0; i < r.frame_count(); ++i) {
    const FrameData got = r.load(i), want = as_stored(c.frames[static_cast<std::size_t>(i)]);
    EXPECT_EQ(got.step, want.step);
    EXPECT_EQ(got.time, want.time);
    EXPECT_TRUE(got.cameras == want.cameras) << i;
    EXPECT_TRUE(got.lidars == want.lidars) << i;
    EXPECT_EQ(got.boxes3d, want.boxes3d);
    EXPECT_EQ(got.boxes2d, want.boxes2d);
    EXPECT_EQ(got.agents, want.agents);
    EXPECT_EQ(got.actions, want.actions);
    EXPECT_TRUE(got == want) << i;
  }
}

TEST(Read, RoundTripKeepsInfinityAndMetadata) {
  const SensorRig rig = small_rig();
  const Captured c = capture("badly_parked_car.scn", 3, rig, 0.2);
  const auto root = test::scratch_dir("ds_inf");
  write_run(root / "run", manifest_for(c, rig, 0.2), c.scene, c.frames);
  const FrameData f = RunReader(root / "run").load(0);
  EXPECT_TRUE(std::isinf(f.cameras[0].depth[0]));  // top-left pixel sees sky
  EXPECT_EQ(f.agents, c.frames[0].agents);
  EXPECT_EQ(f.actions, c.frames[0].actions);
  EXPECT_EQ(f.boxes3d, c.frames[0].boxes3d);
}

TEST(Read, ListsRunsLexicographically) {
  const auto root = test::scratch_dir("ds_list");
  for (const char* id : {"b_2", "a_10", "a_9"}) write_run(root / id, RunManifest{}, Scene{}, {});
  fs::create_directories(root / "incomplete" / "frames");
  const Dataset d = open_dataset(root);
  EXPECT_EQ(d.runs(), (std::vector<std::string>{"a_10", "a_9", "b_2"}));
  EXPECT_EQ(d.run("a_9").frame_count(), 0);
  EXPECT_TRUE(open_dataset(test::scratch_dir("ds_empty")).runs().empty());
}

TEST(Read, CorruptArtifactsAreNamed) {
  const SensorRig rig = small_rig();
  const Captured c = capture("badly_parked_car.scn", 3, rig, 0.2);
  const auto root = test::scratch_dir("ds_corrupt");
  write_run(root / "run", manifest_for(c, rig, 0.2), c.scene, c.frames);
  const RunReader r(root / "run");
  const FrameRecord f0 = r.record(0), f1 = r.record(1), f2 = r.record(2);

  const std::string lidar = test::slurp(f0.lidar[0]);
  io::write_file(f0.lidar[0], lidar.substr(0, lidar.size() - 5));
  try {
    r.load(f0);
    FAIL() << "truncated lidar accepted";
  } catch (const CorruptRun& e) {
    EXPECT_EQ(e.artifact(), f0.lidar[0]);
  }

  fs::remove(f1.states);
  try {
    r.load(f1);
    FAIL() << "missing states accepted";
  } catch (const CorruptRun& e) {
    EXPECT_EQ(e.artifact(), f1.states);
    EXPECT_NE(std::string(e.what()).find("states.json"), std::string::npos);
  }

  io::write_file(f2.depth[0], "SGDEPTH1");
  EXPECT_THROW(r.load(f2), CorruptRun);
}

TEST(Read, UnknownVersionIsRejected) {
  const auto root = test::scratch_dir("ds_version");
  write_run(root / "run", RunManifest{}, Scene{}, {});
  json m = json::parse(test::slurp(root / "run" / "manifest.json"));
  m["formatVersion"] = 2;
  io::write_file(root / "run" / "manifest.json", m.dump());
  EXPECT_THROW(open_dataset(root).run("run"), VersionError);
}

TEST(Read, ManifestAloneDecodesBinaries) {
  const SensorRig rig = small_rig();
  const Captured c = capture("pedestrian_crossing.scn", 8, rig, 0.2);
  const auto root = test::scratch_dir("ds_selfdesc");
  write_run(root / "run", manifest_for(c, rig, 0.2), c.scene, c.frames);
  const json m = json::parse(test::slurp(root / "run" / "manifest.json"));
  const json& enc = m.at("encodings");
  const fs::path frame = root / "run" / "frames" / "000001";

  auto u32 = [](const std::string& b, std::size_t o) {
    std::uint32_t v;
    std::memcpy(&v, b.data() + o, 4);
    return v;
  };
  auto f32 = [](const std::string& b, std::size_t o) {
    float v;
    std::memcpy(&v, b.data() + o, 4);
    return v;
  };
  auto field = [](const json& list, const std::string& name) {
    for (const auto& f : list)
      if (f.at("name") == name) return f.at("offset").get<std::size_t>();
    throw std::runtime_error("no field " + name);
  };

  const json& le = enc.at("lidar");
  const std::string lb = test::slurp(frame / m.at("sensorRig").at("lidars").at(0).at("file").get<std::string>());
  ASSERT_EQ(lb.substr(0, 8), le.at("magic").get<std::string>());
  const std::size_t hdr = le.at("headerBytes"), rec = le.at("recordBytes");
  const std::uint32_t count = u32(lb, field(le.at("header"), "count"));
  const auto& pts = c.frames[1].lidars[0].points;
  ASSERT_EQ(count, pts.size());
  for (std::size_t i = 0; i < count; i += 97) {
    const std::size_t o = hdr + i * rec;
    EXPECT_EQ(f32(lb, o + field(le.at("record"), "x")), static_cast<float>(pts[i].x));
    EXPECT_EQ(f32(lb, o + field(le.at("record"), "z")), static_cast<float>(pts[i].z));
    EXPECT_EQ(static_cast<std::uint8_t>(lb[o + field(le.at("record"), "classId")]), pts[i].classId);
    EXPECT_EQ(static_cast<std::uint8_t>(lb[o + field(le.at("record"), "ring")]), pts[i].ring);
  }

  const json& de = enc.at("depth");
  const json& cam = m.at("sensorRig").at("cameras").at(0);
  const std::string db = test::slurp(frame / cam.at("files").at("depth").get<std::string>());
  const std::uint32_t w = u32(db, field(de.at("header"), "width"));
  EXPECT_EQ(w, cam.at("width").get<std::uint32_t>());
  const auto& depth = c.frames[1].cameras[0].depth;
  for (std::size_t i = 0; i < depth.size(); i += 131)
    EXPECT_EQ(f32(db, de.at("headerBytes").get<std::size_t>() + 4 * i), static_cast<float>(depth[i]));

  const json& k = cam.at("intrinsics");
  EXPECT_EQ(k.at(0).get<double>(), 80.0);
  EXPECT_EQ(m.at("classes").at(1).at("color"), json::array({80, 120, 80}));
}

TEST(Reproject, RecordingCameraMatchesStoredBoxes) {
  const auto root = test::scratch_dir("ds_reproj");
  BatchConfig cfg = small_config();
  CameraConfig tilted = cfg.rig.cameras[0];
  tilted.mount = {0.5, -0.3, 1.8, 0, 4, 10};
  cfg.rig.cameras.push_back(tilted);
  for (const auto& f : test::corpus_files()) generate(root, cfg, f.filename().string(), 21);
  const Dataset d = open_dataset(root);
  int nonEmpty = 0;
  for (const auto& id : d.runs()) {
    const RunReader r = d.run(id);
    for (const auto& f : r.frames())
      for (std::size_t c = 0; c < r.manifest().rig.cameras.size(); ++c) {
        const auto stored = r.load_boxes2d(f, c);
        nonEmpty += !stored.empty();
        EXPECT_EQ(reproject_boxes(r, f, r.manifest().rig.cameras[c]), stored) << id << " " << f.index;
      }
  }
  EXPECT_GT(nonEmpty, 0);
}

TEST(Reproject, NarrowerFovWidensOrDrops) {
  const SensorRig rig = small_rig();
  int compared = 0;
  for (const auto& file : test::corpus_files()) {
    const Captured c = capture(file.filename().string(), 13, rig, 3.0);
    CameraConfig narrow = rig.cameras[0];
    narrow.hfovDeg = 45;
    EXPECT_GT(intrinsics(narrow).fx, intrinsics(rig.cameras[0]).fx);
    for (const auto& f : c.frames) {
      const auto wide = reproject_boxes(f.boxes3d, rig.cameras[0], rig.box_mount());
      const auto tight = reproject_boxes(f.boxes3d, narrow, rig.box_mount());
      EXPECT_LE(tight.size(), wide.size());
      for (const auto& t : tight) {
        const auto it = std::find_if(wide.begin(), wide.end(), [&](const Box2D& b) { return b.objId == t.objId; });
        ASSERT_NE(it, wide.end());
        const bool clipped = t.xmin <= 0 || t.xmax >= narrow.width - 1 || t.ymin <= 0 || t.ymax >= narrow.height - 1;
        if (clipped) continue;
        EXPECT_GT(t.xmax - t.xmin, it->xmax - it->xmin);
        ++compared;
      }
    }
  }
  EXPECT_GT(compared, 0);
}

TEST(Reproject, NoBoxesGiveNoBoxes) { EXPECT_TRUE(reproject_boxes({}, CameraConfig{}).empty()); }

TEST(Ply, VertexCountAndColors) {
  const auto root = test::scratch_dir("ds_ply");
  LidarSweep s;
  s.points = {{1, 2, 3, 4, 0}, {-0.5, 0.25, -2.4, 1, 3}};
  export_pointcloud_ply(s, root / "a.ply");
  const std::string text = test::slurp(root / "a.ply");
  EXPECT_NE(text.find("element vertex 2\n"), std::string::npos);
  EXPECT_NE(text.find("end_header\n1 2 3 0 0 200\n-0.5 0.25 -2.4 80 120 80\n"), std::string::npos);

  export_pointcloud_ply(LidarSweep{}, root / "empty.ply");
  const std::string empty = test::slurp(root / "empty.ply");
  EXPECT_NE(empty.find("element vertex 0\n"), std::string::npos);
  EXPECT_EQ(empty.substr(empty.size() - 11), "end_header\n");
}

TEST(Ply, GroundOnlySweepIsUniformlyGreen) {
  const auto prog = dsl::compile("ego = new Car at (0, 0)");
  const Scene scene = sample_scene(prog, WorldModel{}, 1);
  const LidarSweep s = sweep_lidar(scene, {0, 0, 0, 0}, LidarConfig{});
  ASSERT_FALSE(s.points.empty());
  const auto root = test::scratch_dir("ds_ply_ground");
  export_pointcloud_ply(s, root / "g.ply");
  std::istringstream in(test::slurp(root / "g.ply"));
  std::string line;
  while (std::getline(in, line) && line != "end_header") {
  }
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    EXPECT_EQ(line.substr(line.size() - 10), " 80 120 80") << line;
  }
  EXPECT_EQ(n, s.points.size());
}

TEST(Ply, FromStoredFrame) {
  const SensorRig rig = small_rig();
  const Captured c = capture("lead_vehicle_braking.scn", 2, rig, 0.2);
  const auto root = test::scratch_dir("ds_ply_frame");
  write_run(root / "run", manifest_for(c, rig, 0.2), c.scene, c.frames);
  const RunReader r(root / "run");
  export_pointcloud_ply(r.record(0), root / "f.ply");
  const std::string text = test::slurp(root / "f.ply");
  EXPECT_NE(text.find("element vertex " + std::to_string(c.frames[0].lidars[0].points.size()) + "\n"),
            std::string::npos);
  EXPECT_THROW(export_pointcloud_ply(r.record(0), root / "g.ply", 1), IoError);
}
