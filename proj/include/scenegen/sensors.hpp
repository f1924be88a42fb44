#pragma once
// Camera and lidar synthesis by raycasting against the ground plane and the
// scene's oriented boxes.
//
// Frames: the ego frame has +x forward, +y left, +z up, origin on the ground
// at the ego's reference point. A sensor frame is the ego frame moved by its
// mount. The camera looks along its sensor +x; camera-frame coordinates use
// +z forward, +x right, +y down.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "scenegen/dynamics.hpp"
#include "scenegen/errors.hpp"
#include "scenegen/geometry.hpp"
#include "scenegen/scene.hpp"

namespace scenegen {

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Sensor pose relative to the ego frame. Angles in degrees; positive pitch
/// tilts the sensor down, positive yaw turns it left.
struct SensorMount {
  double x = 0.0, y = 0.0, z = 2.4;
  double rollDeg = 0.0, pitchDeg = 0.0, yawDeg = 0.0;

  RigidTransform to_ego() const {
    const Mat3 r = Mat3::rot_z(deg_to_rad(yawDeg)) * Mat3::rot_y(deg_to_rad(pitchDeg)) *
                   Mat3::rot_x(deg_to_rad(rollDeg));
    return {r, {x, y, z}};
  }
  friend bool operator==(const SensorMount&, const SensorMount&) = default;
};

struct CameraConfig {
  int width = 1280;
  int height = 720;
  double hfovDeg = 90.0;
  double fps = 15.0;
  SensorMount mount;

  void validate() const {
    if (width < 1 || height < 1) throw ConfigError("camera width and height must be at least 1");
    if (!(hfovDeg > 0.0 && hfovDeg < 180.0)) throw ConfigError("camera hfov must lie in (0, 180) degrees");
    if (!(fps > 0.0)) throw ConfigError("camera fps must be positive");
  }
  friend bool operator==(const CameraConfig&, const CameraConfig&) = default;
};

struct LidarConfig {
  int channels = 32;
  int azimuthSteps = 688;
  double vfovLoDeg = -25.0;
  double vfovHiDeg = 15.0;
  double rangeM = 40.0;
  double rateHz = 15.0;
  SensorMount mount;

  void validate() const {
    if (channels < 1 || channels > 256) throw ConfigError("lidar channels must lie in [1, 256]");
    if (azimuthSteps < 1) throw ConfigError("lidar azimuthSteps must be at least 1");
    if (!(vfovLoDeg < vfovHiDeg)) throw ConfigError("lidar vfovLo must be below vfovHi");
    if (!(vfovLoDeg >= -90.0 && vfovHiDeg <= 90.0)) throw ConfigError("lidar vfov must lie in [-90, 90]");
    if (!(rangeM > 0.0)) throw ConfigError("lidar range must be positive");
    if (mount.rollDeg != 0.0 || mount.pitchDeg != 0.0)
      throw ConfigError("lidar mounts support translation and yaw only");
  }
  double elevation_deg(int channel) const {
    if (channels == 1) return vfovLoDeg;
    return vfovLoDeg + channel * (vfovHiDeg - vfovLoDeg) / (channels - 1);
  }
  friend bool operator==(const LidarConfig&, const LidarConfig&) = default;
};

/// Maps sensor-frame coordinates (+x forward, +y left, +z up) to camera-frame
/// coordinates (+z forward, +x right, +y down).
inline const Mat3 kSensorToCamera{{0, -1, 0, 0, 0, -1, 1, 0, 0}};

inline RigidTransform sensor_to_world(const AgentState& ego, const SensorMount& mount) {
  return ego_to_world(ego.x, ego.y, ego.heading).compose(mount.to_ego());
}

struct Hit {
  double t = 0.0;
  SemanticClass cls = SemanticClass::None;
  int objId = 0;  // 0 for the ground
  Vec3 normal;    // unit, facing the ray origin
};

inline constexpr double kMinHitDistance = 1e-6;

/// Scene geometry prepared for repeated ray queries.
class RayCaster {
 public:
  /// Boxes of all scene objects and world props except `excludeId`.
  explicit RayCaster(const Scene& scene, int excludeId = 0) : world_(&scene.world) {
    auto add = [&](const SceneObject& o) {
      if (o.id == excludeId) return;
      const Vec2 f = heading_vector(o.heading);
      boxes_.push_back({{o.x, o.y, o.height / 2.0},
                        {f.x, f.y, 0.0},
                        {-f.y, f.x, 0.0},
                        {o.length / 2.0, o.width / 2.0, o.height / 2.0},
                        o.semantic,
                        o.id});
    };
    for (const auto& o : scene.objects) add(o);
    for (const auto& o : scene.world.staticProps) add(o);
  }

  std::optional<Hit> cast(const Vec3& origin, const Vec3& dir) const {
    std::optional<Hit> best;
    if (dir.z < 0.0 && origin.z > 0.0) {
      const double t = -origin.z / dir.z;
      if (t > kMinHitDistance) {
        const Vec3 p = origin + dir * t;
        best = Hit{t, world_->surface_class({p.x, p.y}), 0, {0, 0, 1}};
      }
    }
    for (const auto& b : boxes_) {
      auto h = b.intersect(origin, dir);
      if (h && (!best || h->t < best->t)) best = h;
    }
    return best;
  }

 private:
  struct Box {
    Vec3 center, fwd, left, half;
    SemanticClass cls;
    int id;

    std::optional<Hit> intersect(const Vec3& origin, const Vec3& dir) const {
      const Vec3 rel = origin - center;
      const Vec3 up{0, 0, 1};
      const std::array<Vec3, 3> axes{fwd, left, up};
      double tNear = -std::numeric_limits<double>::infinity();
      double tFar = std::numeric_limits<double>::infinity();
      int nearAxis = -1, farAxis = -1;
      double nearSign = 0.0, farSign = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double o = rel.dot(axes[static_cast<std::size_t>(i)]);
        const double d = dir.dot(axes[static_cast<std::size_t>(i)]);
        const double h = half[i];
        if (d == 0.0) {
          if (o < -h || o > h) return std::nullopt;
          continue;
        }
        double t0 = (-h - o) / d, t1 = (h - o) / d;
        double s0 = -1.0, s1 = 1.0;
        if (t0 > t1) {
          std::swap(t0, t1);
          std::swap(s0, s1);
        }
        if (t0 > tNear) tNear = t0, nearAxis = i, nearSign = s0;
        if (t1 < tFar) tFar = t1, farAxis = i, farSign = s1;
        if (tNear > tFar) return std::nullopt;
      }
      if (tNear > kMinHitDistance && nearAxis >= 0)
        return Hit{tNear, cls, id, axes[static_cast<std::size_t>(nearAxis)] * nearSign};
      // origin inside the box: report the exit face
      if (tFar > kMinHitDistance && farAxis >= 0)
        return Hit{tFar, cls, id, axes[static_cast<std::size_t>(farAxis)] * -farSign};
      return std::nullopt;
    }
  };

  const WorldModel* world_;
  std::vector<Box> boxes_;
};

inline std::optional<Hit> ray_cast(const Vec3& origin, const Vec3& dir, const Scene& scene) {
  return RayCaster(scene).cast(origin, dir);
}

// --- camera ---------------------------------------------------------------------

/// Pinhole intrinsics with square pixels.
struct CalibrationMatrix {
  double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;

  std::array<double, 9> rows() const { return {fx, 0, cx, 0, fy, cy, 0, 0, 1}; }
  friend bool operator==(const CalibrationMatrix&, const CalibrationMatrix&) = default;
};

inline CalibrationMatrix intrinsics(const CameraConfig& cfg) {
  cfg.validate();
  const double fx = (cfg.width / 2.0) / tan_deg(cfg.hfovDeg / 2.0);
  return {fx, fx, cfg.width / 2.0, cfg.height / 2.0};
}

/// Unnormalized camera-frame ray through the center of pixel (u, v); z = 1.
inline Vec3 pixel_ray(const CalibrationMatrix& k, int u, int v) {
  return {(u + 0.5 - k.cx) / k.fx, (v + 0.5 - k.cy) / k.fy, 1.0};
}

/// Depth is kept in double precision in memory; files store float32.
struct CameraFrame {
  int width = 0, height = 0;
  std::vector<std::uint8_t> rgb;     // row-major RGB triples
  std::vector<double> depth;         // planar z-depth, +inf where nothing was hit
  std::vector<std::uint8_t> semseg;  // class ids

  std::size_t index(int u, int v) const { return static_cast<std::size_t>(v) * width + u; }
  friend bool operator==(const CameraFrame&, const CameraFrame&) = default;
};

inline const Vec3 kLightDirection = Vec3{1, 1, 2}.normalized();

inline Rgb shade(SemanticClass cls, const Vec3& normal) {
  const Rgb c = class_color(cls);
  const double f = std::max(0.2, normal.dot(kLightDirection));
  auto ch = [f](std::uint8_t x) { return static_cast<std::uint8_t>(std::lround(x * f)); };
  return {ch(c.r), ch(c.g), ch(c.b)};
}

/// Renders from `ego` through a camera; `scene` holds every object at its
/// current pose. The ego's own box is not rendered.
inline CameraFrame render_camera(const Scene& scene, const AgentState& ego, const CameraConfig& cfg,
                                 int egoId = -1) {
  const CalibrationMatrix k = intrinsics(cfg);
  if (egoId < 0) egoId = scene.ego().id;
  const RayCaster caster(scene, egoId);
  const RigidTransform toWorld = sensor_to_world(ego, cfg.mount);
  const Mat3 camToWorld = toWorld.rotation * kSensorToCamera.transposed();

  CameraFrame f;
  f.width = cfg.width;
  f.height = cfg.height;
  const std::size_t n = static_cast<std::size_t>(cfg.width) * cfg.height;
  f.rgb.assign(n * 3, 0);
  f.depth.assign(n, std::numeric_limits<double>::infinity());
  f.semseg.assign(n, 0);
  const Rgb sky = class_color(SemanticClass::None);

  for (int v = 0; v < cfg.height; ++v) {
    for (int u = 0; u < cfg.width; ++u) {
      const Vec3 ray = pixel_ray(k, u, v);
      const double len = ray.norm();
      const Vec3 dir = camToWorld * (ray * (1.0 / len));
      const std::size_t i = f.index(u, v);
      Rgb c = sky;
      if (auto hit = caster.cast(toWorld.translation, dir)) {
        f.depth[i] = hit->t / len;
        f.semseg[i] = static_cast<std::uint8_t>(hit->cls);
        c = shade(hit->cls, hit->normal);
      }
      f.rgb[i * 3] = c.r;
      f.rgb[i * 3 + 1] = c.g;
      f.rgb[i * 3 + 2] = c.b;
    }
  }
  return f;
}

// --- lidar ----------------------------------------------------------------------

/// Coordinates are in the lidar frame, double precision in memory.
struct LidarPoint {
  double x = 0.0, y = 0.0, z = 0.0;
  std::uint8_t classId = 0;
  std::uint8_t ring = 0;
  friend bool operator==(const LidarPoint&, const LidarPoint&) = default;
};

struct LidarSweep {
  std::vector<LidarPoint> points;  // channel-major, then azimuth
  friend bool operator==(const LidarSweep&, const LidarSweep&) = default;
};

/// Sensor-frame unit direction for (channel, azimuth step).
inline Vec3 lidar_direction(const LidarConfig& cfg, int channel, int step) {
  const double el = deg_to_rad(cfg.elevation_deg(channel));
  const double az = 2.0 * kPi * step / cfg.azimuthSteps;
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

inline LidarSweep sweep_lidar(const Scene& scene, const AgentState& ego, const LidarConfig& cfg,
                              int egoId = -1) {
  cfg.validate();
  if (egoId < 0) egoId = scene.ego().id;
  const RayCaster caster(scene, egoId);
  const RigidTransform toWorld = sensor_to_world(ego, cfg.mount);

  LidarSweep s;
  for (int c = 0; c < cfg.channels; ++c) {
    for (int a = 0; a < cfg.azimuthSteps; ++a) {
      const Vec3 d = lidar_direction(cfg, c, a);
      auto hit = caster.cast(toWorld.translation, toWorld.apply_direction(d));
      if (!hit || hit->t > cfg.rangeM) continue;
      const Vec3 p = d * hit->t;
      s.points.push_back({p.x, p.y, p.z, static_cast<std::uint8_t>(hit->cls), static_cast<std::uint8_t>(c)});
    }
  }
  return s;
}

}  // namespace scenegen
