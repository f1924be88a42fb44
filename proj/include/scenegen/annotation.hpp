#pragma once
// Ground-truth boxes: 3D boxes in the lidar frame and their 2D projections.
//
// 2D boxes come from the 8 box corners: corners closer than kNearPlane in
// front of the camera are dropped, at least two must survive, and the min/max
// of the survivors is clipped to the image. Boxes that straddle the camera
// plane are therefore loose.

#include <algorithm>
#include <array>
#include <optional>
#include <vector>

#include "scenegen/sensors.hpp"

namespace scenegen {

struct Obb3D {
  Vec3 center;  // lidar frame
  double length = 0.0, width = 0.0, height = 0.0;
  double yaw = 0.0;  // about lidar +z, from lidar +x
  SemanticClass cls = SemanticClass::None;
  int objId = 0;

  std::array<Vec3, 8> corners() const {
    const Mat3 r = Mat3::rot_z(yaw);
    std::array<Vec3, 8> out;
    std::size_t i = 0;
    for (double sx : {-0.5, 0.5})
      for (double sy : {-0.5, 0.5})
        for (double sz : {-0.5, 0.5}) out[i++] = center + r * Vec3{sx * length, sy * width, sz * height};
    return out;
  }
  friend bool operator==(const Obb3D&, const Obb3D&) = default;
};

struct Box2D {
  double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;
  SemanticClass cls = SemanticClass::None;
  int objId = 0;
  friend bool operator==(const Box2D&, const Box2D&) = default;
};

inline constexpr double kNearPlane = 0.1;

/// Boxes of every non-ego scene object (world props excluded), in the frame
/// of a lidar mounted by `mount` on `ego`.
inline std::vector<Obb3D> boxes_3d(const Scene& scene, const AgentState& ego, const SensorMount& mount = {},
                                   int egoId = -1) {
  if (egoId < 0) egoId = scene.ego().id;
  const RigidTransform toLidar = sensor_to_world(ego, mount).inverse();
  std::vector<Obb3D> out;
  for (const auto& o : scene.objects) {
    if (o.id == egoId) continue;
    Obb3D b;
    b.center = toLidar.apply(o.center());
    b.length = o.length;
    b.width = o.width;
    b.height = o.height;
    b.yaw = normalize_angle(o.heading - ego.heading - deg_to_rad(mount.yawDeg));
    b.cls = o.semantic;
    b.objId = o.id;
    out.push_back(b);
  }
  return out;
}

/// Lidar-frame to camera-frame transform for the given mounts.
inline RigidTransform lidar_to_camera(const SensorMount& lidar, const SensorMount& camera) {
  const RigidTransform lidarToCamSensor = camera.to_ego().inverse().compose(lidar.to_ego());
  return RigidTransform{kSensorToCamera, {}}.compose(lidarToCamSensor);
}

inline std::optional<Box2D> project_box(const Obb3D& box, const CalibrationMatrix& k,
                                        const RigidTransform& lidarToCam, int width, int height) {
  double xmin = INFINITY, ymin = INFINITY, xmax = -INFINITY, ymax = -INFINITY;
  int kept = 0;
  for (const Vec3& c : box.corners()) {
    const Vec3 p = lidarToCam.apply(c);
    if (!(p.z > kNearPlane)) continue;
    ++kept;
    const double u = k.fx * p.x / p.z + k.cx;
    const double v = k.fy * p.y / p.z + k.cy;
    xmin = std::min(xmin, u), xmax = std::max(xmax, u);
    ymin = std::min(ymin, v), ymax = std::max(ymax, v);
  }
  if (kept < 2) return std::nullopt;
  const double w = width - 1.0, h = height - 1.0;
  xmin = std::clamp(xmin, 0.0, w), xmax = std::clamp(xmax, 0.0, w);
  ymin = std::clamp(ymin, 0.0, h), ymax = std::clamp(ymax, 0.0, h);
  if (!(xmax > xmin) || !(ymax > ymin)) return std::nullopt;
  return Box2D{xmin, ymin, xmax, ymax, box.cls, box.objId};
}

/// Projects every box for one camera; boxes that do not survive are skipped.
inline std::vector<Box2D> project_boxes(const std::vector<Obb3D>& boxes, const CameraConfig& cam,
                                        const SensorMount& lidarMount) {
  const CalibrationMatrix k = intrinsics(cam);
  const RigidTransform t = lidar_to_camera(lidarMount, cam.mount);
  std::vector<Box2D> out;
  for (const auto& b : boxes)
    if (auto p = project_box(b, k, t, cam.width, cam.height)) out.push_back(*p);
  return out;
}

}  // namespace scenegen
