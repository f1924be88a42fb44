#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "oracles.hpp"
#include "scenegen/sampler.hpp"
#include "scenegen/sensors.hpp"
#include "scenegen/simulation.hpp"
#include "test_support.hpp"

using namespace scenegen;

namespace {

SceneObject box_object(int id, const std::string& cls, double x, double y, double headingDeg, double l, double w,
                       double h) {
  SceneObject o;
  o.id = id;
  o.className = cls;
  o.semantic = object_class(cls)->semantic;
  o.kind = object_class(cls)->kind;
  o.x = x, o.y = y, o.heading = normalize_angle(deg_to_rad(headingDeg));
  o.length = l, o.width = w, o.height = h;
  return o;
}

Scene ego_only() {
  Scene s;
  SceneObject ego = box_object(1, "Car", 0, 0, 0, 4.5, 2, 1.5);
  ego.name = "ego";
  ego.isEgo = true;
  s.objects.push_back(ego);
  return s;
}

/// Ego at the origin inside four tall walls 5 m away.
Scene sealed_room() {
  Scene s = ego_only();
  s.world.staticProps = {
      box_object(1001, "Building", 0, 5.25, 0, 0.5, 11, 20),
      box_object(1002, "Building", 0, -5.25, 0, 0.5, 11, 20),
      box_object(1003, "Building", 5.25, 0, 0, 11, 0.5, 20),
      box_object(1004, "Building", -5.25, 0, 0, 11, 0.5, 20),
  };
  return s;
}

const AgentState kOrigin{0, 0, 0, 0};

Scene corpus_scene(const std::string& name, std::uint64_t seed) {
  static const WorldModel w = test::two_lane_world();
  const auto prog = test::compile_file(test::data_dir() / name);
  Scene s = sample_scene(prog, w, seed);
  for (auto& o : s.objects) o.behavior.reset();
  return s;
}

}  // namespace

// --- raycast --------------------------------------------------------------------

TEST(RayCast, DownwardHitsGround) {
  Scene s = ego_only();
  auto h = RayCaster(s, 1).cast({0, 0, 2.4}, {0, 0, -1});
  ASSERT_TRUE(h);
  EXPECT_DOUBLE_EQ(h->t, 2.4);
  EXPECT_EQ(h->cls, SemanticClass::Ground);
  EXPECT_EQ(h->objId, 0);
}

TEST(RayCast, UpwardMisses) {
  EXPECT_FALSE(RayCaster(ego_only(), 1).cast({0, 0, 2.4}, {0, 0, 1}));
}

TEST(RayCast, GroundInsideLaneIsRoad) {
  Scene s = ego_only();
  s.world = test::two_lane_world();
  s.world.staticProps.clear();
  const Vec3 d = Vec3{0, 1, -1}.normalized();
  auto h = RayCaster(s, 1).cast({0, 0, 2.4}, d);
  ASSERT_TRUE(h);
  EXPECT_EQ(h->cls, SemanticClass::Road);
  h = RayCaster(s, 1).cast({20, 0, 2.4}, d);
  EXPECT_EQ(h->cls, SemanticClass::Ground);
}

TEST(RayCast, AxisAlignedVehicleFace) {
  Scene s = ego_only();
  // 4 m along +y: near face at y = 8
  s.objects.push_back(box_object(2, "Car", 0, 10, 0, 4, 2, 1.5));
  auto h = RayCaster(s, 1).cast({0, 0, 1}, {0, 1, 0});
  ASSERT_TRUE(h);
  EXPECT_DOUBLE_EQ(h->t, 8.0);
  EXPECT_EQ(h->objId, 2);
  EXPECT_EQ(h->cls, SemanticClass::Vehicle);
  EXPECT_NEAR(h->normal.y, -1.0, 1e-12);

  // turned sideways the 2 m width faces the ray: near face at y = 9
  s.objects[1].heading = kPi / 2;
  h = RayCaster(s, 1).cast({0, 0, 1}, {0, 1, 0});
  ASSERT_TRUE(h);
  EXPECT_NEAR(h->t, 9.0, 1e-12);

  const auto m = oracle::march({0, 0, 1}, {0, 1, 0}, {0, 10, kPi / 2, 4, 2, 1.5}, false, 20, 100000);
  ASSERT_TRUE(m.t);
  EXPECT_NEAR(*m.t, h->t, 1e-3);
}

TEST(RayCast, EgoIsExcluded) {
  Scene s = ego_only();
  auto h = RayCaster(s, 1).cast({0, 0, 1}, {0, 0, -1});
  ASSERT_TRUE(h);
  EXPECT_EQ(h->objId, 0);
  h = RayCaster(s).cast({0, 0, 3}, {0, 0, -1});
  ASSERT_TRUE(h);
  EXPECT_EQ(h->objId, 1);
  EXPECT_DOUBLE_EQ(h->t, 1.5);
}

TEST(RayCast, AgreesWithMarchOracle) {
  Rng rng(5150);
  auto r = [&](double lo, double hi) { return lo + rng.next_double() * (hi - lo); };
  int hits = 0, compared = 0;
  for (int i = 0; i < 300; ++i) {
    const oracle::GroundBox gb{r(-6, 6), r(-6, 6), r(-kPi, kPi), r(0.5, 6), r(0.5, 3), r(0.5, 4)};
    Scene s;
    s.objects.push_back(box_object(7, "Car", gb.cx, gb.cy, 0, gb.length, gb.width, gb.height));
    s.objects[0].heading = gb.heading;
    const Vec3 o{r(-15, 15), r(-15, 15), r(0.2, 5)};
    if (gb.distance({o.x, o.y, o.z}) < 0.05) continue;
    const Vec3 target{gb.cx + r(-3, 3), gb.cy + r(-3, 3), r(-1, 5)};
    const Vec3 d = (target - o).normalized();
    const auto h = RayCaster(s).cast(o, d);
    const auto m = oracle::march({o.x, o.y, o.z}, {d.x, d.y, d.z}, gb, true, 60, 100000);
    if (!m.t && m.closest < 1e-3) continue;  // grazing
    ++compared;
    const bool hit = h && h->t <= 60;  // the oracle's horizon
    ASSERT_EQ(hit, m.t.has_value()) << i;
    if (!hit) continue;
    ++hits;
    EXPECT_NEAR(h->t, *m.t, 1e-3) << i;
    EXPECT_EQ(h->objId == 0, m.ground) << i;
  }
  EXPECT_GT(compared, 250);
  EXPECT_GT(hits, 100);
}

// --- camera -------------------------------------------------------------------------

TEST(Camera, EmptyWorldSkyAboveHorizon) {
  CameraConfig cfg;
  cfg.width = 64, cfg.height = 36;
  const CameraFrame f = render_camera(ego_only(), kOrigin, cfg);
  const Rgb sky = class_color(SemanticClass::None);
  for (int v = 0; v < cfg.height / 2; ++v)
    for (int u = 0; u < cfg.width; ++u) {
      const auto i = f.index(u, v);
      EXPECT_EQ(f.semseg[i], 0);
      EXPECT_TRUE(std::isinf(f.depth[i]));
      EXPECT_EQ(f.rgb[i * 3], sky.r);
      EXPECT_EQ(f.rgb[i * 3 + 2], sky.b);
    }
  for (int v = cfg.height / 2; v < cfg.height; ++v)
    EXPECT_EQ(f.semseg[f.index(0, v)], static_cast<int>(SemanticClass::Ground));
}

TEST(Camera, PrincipalPixelRayIsHorizontal) {
  CameraConfig cfg;
  cfg.width = 3, cfg.height = 3;
  const CameraFrame f = render_camera(ego_only(), kOrigin, cfg);
  EXPECT_TRUE(std::isinf(f.depth[f.index(1, 1)]));
  EXPECT_EQ(f.semseg[f.index(1, 1)], 0);
  EXPECT_FALSE(std::isinf(f.depth[f.index(1, 2)]));
}

TEST(Camera, FacePerpendicularToAxisGivesExactDepth) {
  Scene s = ego_only();
  s.objects.push_back(box_object(2, "Building", 0, 15, 0, 10, 10, 8));  // near face at y = 10
  CameraConfig cfg;
  cfg.width = 33, cfg.height = 17;
  const CameraFrame f = render_camera(s, kOrigin, cfg);
  const auto c = f.index(16, 8);
  EXPECT_DOUBLE_EQ(f.depth[c], 10.0);
  EXPECT_EQ(f.semseg[c], static_cast<int>(SemanticClass::Building));
  // off-axis pixels on the same face report the same planar depth
  EXPECT_NEAR(f.depth[f.index(20, 5)], 10.0, 1e-9);
  EXPECT_NEAR(f.depth[f.index(10, 5)], 10.0, 1e-9);
}

TEST(Camera, LambertShading) {
  const Rgb g = shade(SemanticClass::Ground, {0, 0, 1});
  const double k = 2 / std::sqrt(6.0);
  EXPECT_EQ(g.r, std::lround(80 * k));
  EXPECT_EQ(g.g, std::lround(120 * k));
  const Rgb dark = shade(SemanticClass::Vehicle, {-1, 0, 0});
  EXPECT_EQ(dark.b, std::lround(200 * 0.2));
}

TEST(Camera, MountTranslationAndPitch) {
  Scene s = ego_only();
  CameraConfig cfg;
  cfg.width = 3, cfg.height = 3;
  cfg.mount.pitchDeg = 90;  // straight down
  cfg.mount.z = 5;
  const CameraFrame f = render_camera(s, {3, 4, 0.3, 0}, cfg);
  EXPECT_NEAR(f.depth[f.index(1, 1)], 5.0, 1e-12);
}

TEST(Camera, DepthSemsegConsistencyAndReconstruction) {
  const Scene s = corpus_scene("badly_parked_car.scn", 4);
  const SceneObject& ego = s.ego();
  const AgentState es{ego.x, ego.y, ego.heading, 0};
  CameraConfig cfg;
  cfg.width = 320, cfg.height = 180;
  const CameraFrame f = render_camera(s, es, cfg);
  const CalibrationMatrix k = intrinsics(cfg);
  const RigidTransform toWorld = sensor_to_world(es, cfg.mount);
  const Mat3 camToWorld = toWorld.rotation * kSensorToCamera.transposed();
  const RayCaster caster(s, ego.id);

  int withHits = 0;
  for (int v = 0; v < cfg.height; ++v)
    for (int u = 0; u < cfg.width; ++u)
      ASSERT_EQ(f.semseg[f.index(u, v)] == 0, std::isinf(f.depth[f.index(u, v)]));

  Rng rng(8);
  while (withHits < 1000) {
    const int u = static_cast<int>(rng.next_double() * cfg.width);
    const int v = static_cast<int>(rng.next_double() * cfg.height);
    const double depth = f.depth[f.index(u, v)];
    if (std::isinf(depth)) continue;
    ++withHits;
    const Vec3 pCam = pixel_ray(k, u, v) * depth;
    const Vec3 pWorld = toWorld.translation + camToWorld * pCam;
    const Vec3 dir = (pWorld - toWorld.translation).normalized();
    const auto h = caster.cast(toWorld.translation, dir);
    ASSERT_TRUE(h);
    const Vec3 q = toWorld.translation + dir * h->t;
    ASSERT_LE((q - pWorld).norm(), 1e-6);
    ASSERT_EQ(static_cast<int>(h->cls), f.semseg[f.index(u, v)]);
  }
}

TEST(Camera, ResolutionScalingPreservesClasses) {
  Scene s = ego_only();
  s.world = test::two_lane_world();
  s.world.staticProps.clear();
  CameraConfig full, half;
  full.width = 320, full.height = 180;
  half.width = 160, half.height = 90;
  const CameraFrame a = render_camera(s, kOrigin, full);
  const CameraFrame b = render_camera(s, kOrigin, half);
  int agree = 0;
  for (int v = 0; v < half.height; ++v)
    for (int u = 0; u < half.width; ++u) agree += b.semseg[b.index(u, v)] == a.semseg[a.index(2 * u, 2 * v)];
  EXPECT_GE(agree, half.width * half.height * 97 / 100);
}

TEST(Camera, ConfigValidation) {
  CameraConfig c;
  c.hfovDeg = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.hfovDeg = 180;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.width = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

// --- lidar ----------------------------------------------------------------------------

TEST(Lidar, SealedRoomHitsEveryRay) {
  const LidarConfig cfg;
  const LidarSweep sw = sweep_lidar(sealed_room(), kOrigin, cfg);
  EXPECT_EQ(sw.points.size(), 22016u);
}

TEST(Lidar, PointBoundsAndElevation) {
  const LidarConfig cfg;
  const LidarSweep sw = sweep_lidar(corpus_scene("pedestrian_crossing.scn", 2), kOrigin, cfg);
  ASSERT_FALSE(sw.points.empty());
  for (const auto& p : sw.points) {
    const double r = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
    ASSERT_LE(r, cfg.rangeM + 1e-6);
    ASSERT_LT(p.ring, cfg.channels);
    const double el = rad_to_deg(std::asin(p.z / r));
    ASSERT_GE(el, cfg.vfovLoDeg - 1e-9);
    ASSERT_LE(el, cfg.vfovHiDeg + 1e-9);
    ASSERT_NEAR(el, cfg.elevation_deg(p.ring), 1e-9);
  }
}

TEST(Lidar, EmptyWorldUpperChannelsAreSilent) {
  const LidarConfig cfg;
  const LidarSweep sw = sweep_lidar(ego_only(), kOrigin, cfg);
  std::vector<int> perRing(static_cast<std::size_t>(cfg.channels));
  for (const auto& p : sw.points) {
    ++perRing[p.ring];
    EXPECT_EQ(p.classId, static_cast<int>(SemanticClass::Ground));
  }
  for (int c = 0; c < cfg.channels; ++c) {
    if (cfg.elevation_deg(c) < 0) continue;
    EXPECT_EQ(perRing[static_cast<std::size_t>(c)], 0) << c;
  }
  // ground returns need range 2.4 / sin(-el) <= 40, i.e. el <= -3.44 deg
  for (int c = 0; c < cfg.channels; ++c) {
    const double el = cfg.elevation_deg(c);
    const bool reaches = el < 0 && 2.4 / std::sin(deg_to_rad(-el)) <= 40.0;
    EXPECT_EQ(perRing[static_cast<std::size_t>(c)], reaches ? cfg.azimuthSteps : 0) << c;
  }
}

TEST(Lidar, LowestChannelGroundRange) {
  const LidarSweep sw = sweep_lidar(ego_only(), kOrigin, LidarConfig{});
  ASSERT_FALSE(sw.points.empty());
  const auto& p = sw.points.front();
  EXPECT_EQ(p.ring, 0);
  const double r = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
  EXPECT_NEAR(r, 2.4 / std::sin(deg_to_rad(25.0)), 1e-9);
  EXPECT_NEAR(r, 5.679, 5e-4);
  EXPECT_NEAR(p.z, -2.4, 1e-12);
  EXPECT_NEAR(p.y, 0.0, 1e-12);  // azimuth 0 is forward
  EXPECT_GT(p.x, 0.0);
}

TEST(Lidar, AzimuthIsCounterClockwiseFromForward) {
  LidarConfig cfg;
  cfg.channels = 1;
  cfg.azimuthSteps = 4;
  const LidarSweep sw = sweep_lidar(ego_only(), kOrigin, cfg);
  ASSERT_EQ(sw.points.size(), 4u);
  EXPECT_GT(sw.points[1].y, 5.0);  // step 1 = 90 deg = left
  EXPECT_NEAR(sw.points[1].x, 0.0, 1e-9);
  EXPECT_LT(sw.points[2].x, -5.0);
}

TEST(Lidar, RangeCutoffDropsFarReturns) {
  LidarConfig cfg;
  cfg.rangeM = 5.0;
  const LidarSweep sw = sweep_lidar(ego_only(), kOrigin, cfg);
  EXPECT_TRUE(sw.points.empty());
}

TEST(Sensors, FullFrameWithinBudget) {
  const Scene s = corpus_scene("lead_vehicle_braking.scn", 1);
  const SceneObject& ego = s.ego();
  const AgentState es{ego.x, ego.y, ego.heading, 0};
  const auto t0 = std::chrono::steady_clock::now();
  const CameraFrame f = render_camera(s, es, CameraConfig{});
  const LidarSweep sw = sweep_lidar(s, es, LidarConfig{});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(f.depth.size(), 1280u * 720u);
  EXPECT_FALSE(sw.points.empty());
  EXPECT_LT(secs, 2.0);
}
