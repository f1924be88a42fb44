#pragma once
// Visualization of stored frames, and dataset summaries.
//
// Layers: the image layers (depth, semseg, lidar-bev) pick the canvas, the
// camera RGB otherwise; boxes2d and boxes3d are drawn on top. On the
// lidar-bev canvas boxes3d are drawn as footprints.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "scenegen/dataset.hpp"

namespace scenegen {

class UnknownLayer : public Error {
 public:
  explicit UnknownLayer(const std::string& name) : Error("unknown layer '" + name + "'") {}
};

class UnknownFrame : public Error {
 public:
  UnknownFrame(const std::string& run, int index)
      : Error("run " + run + " has no frame " + std::to_string(index)) {}
};

enum class Layer { Boxes2d, Boxes3d, Depth, Semseg, LidarBev };

inline Layer parse_layer(const std::string& s) {
  if (s == "boxes2d") return Layer::Boxes2d;
  if (s == "boxes3d") return Layer::Boxes3d;
  if (s == "depth") return Layer::Depth;
  if (s == "semseg") return Layer::Semseg;
  if (s == "lidar-bev") return Layer::LidarBev;
  throw UnknownLayer(s);
}

struct Image {
  int width = 0, height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h, Rgb fill = {}) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3) {
    for (std::size_t i = 0; i < rgb.size(); i += 3) rgb[i] = fill.r, rgb[i + 1] = fill.g, rgb[i + 2] = fill.b;
  }

  bool inside(int u, int v) const { return u >= 0 && v >= 0 && u < width && v < height; }
  Rgb at(int u, int v) const {
    const std::size_t i = (static_cast<std::size_t>(v) * width + u) * 3;
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
  }
  void set(int u, int v, Rgb c) {
    if (!inside(u, v)) return;
    const std::size_t i = (static_cast<std::size_t>(v) * width + u) * 3;
    rgb[i] = c.r, rgb[i + 1] = c.g, rgb[i + 2] = c.b;
  }
  std::string ppm() const {
    CameraFrame f;
    f.width = width, f.height = height, f.rgb = rgb;
    return io::encode_ppm(f);
  }
};

inline constexpr double kDepthVizMaxM = 60.0;
inline constexpr int kBevSize = 800;
inline constexpr double kBevPxPerM = 10.0;

inline std::uint8_t depth_gray(double d) {
  if (!std::isfinite(d)) return 0;
  return static_cast<std::uint8_t>(std::lround(std::clamp(255.0 * (1.0 - d / kDepthVizMaxM), 0.0, 255.0)));
}

inline Image depth_image(const CameraFrame& f) {
  Image img(f.width, f.height);
  for (int v = 0; v < f.height; ++v)
    for (int u = 0; u < f.width; ++u) {
      const std::uint8_t g = depth_gray(f.depth[f.index(u, v)]);
      img.set(u, v, {g, g, g});
    }
  return img;
}

inline Image semseg_image(const CameraFrame& f) {
  Image img(f.width, f.height);
  for (int v = 0; v < f.height; ++v)
    for (int u = 0; u < f.width; ++u) {
      const auto cls = class_from_id(f.semseg[f.index(u, v)]);
      img.set(u, v, class_color(cls.value_or(SemanticClass::None)));
    }
  return img;
}

inline Image rgb_image(const CameraFrame& f) {
  Image img;
  img.width = f.width, img.height = f.height, img.rgb = f.rgb;
  return img;
}

/// Lidar frame seen from above: +x up the image, +y to the left, sensor at the center.
inline std::pair<int, int> bev_pixel(double x, double y) {
  return {static_cast<int>(std::floor(kBevSize / 2.0 - y * kBevPxPerM)),
          static_cast<int>(std::floor(kBevSize / 2.0 - x * kBevPxPerM))};
}

inline Image lidar_bev_image(const LidarSweep& s) {
  Image img(kBevSize, kBevSize);
  for (const auto& p : s.points) {
    const auto [u, v] = bev_pixel(p.x, p.y);
    img.set(u, v, class_color(class_from_id(p.classId).value_or(SemanticClass::None)));
  }
  return img;
}

inline void draw_line(Image& img, double u0, double v0, double u1, double v1, Rgb c) {
  const int steps = static_cast<int>(std::ceil(std::max(std::abs(u1 - u0), std::abs(v1 - v0)))) + 1;
  if (steps > 20000) {
    // clip very long lines to a generous box around the image first
    const double lim = 4.0 * std::max(img.width, img.height);
    auto clampv = [&](double& a) { a = std::clamp(a, -lim, lim); };
    clampv(u0), clampv(v0), clampv(u1), clampv(v1);
    return draw_line(img, u0, v0, u1, v1, c);
  }
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    img.set(static_cast<int>(std::lround(u0 + (u1 - u0) * t)), static_cast<int>(std::lround(v0 + (v1 - v0) * t)), c);
  }
}

/// Rectangle outline `thickness` pixels wide, drawn inward from the rounded box edges.
inline void draw_rect(Image& img, const Box2D& b, Rgb c, int thickness = 2) {
  const int x0 = static_cast<int>(std::lround(b.xmin)), x1 = static_cast<int>(std::lround(b.xmax));
  const int y0 = static_cast<int>(std::lround(b.ymin)), y1 = static_cast<int>(std::lround(b.ymax));
  for (int v = y0; v <= y1; ++v)
    for (int u = x0; u <= x1; ++u)
      if (u - x0 < thickness || x1 - u < thickness || v - y0 < thickness || y1 - v < thickness) img.set(u, v, c);
}

inline void draw_boxes2d(Image& img, const std::vector<Box2D>& boxes) {
  for (const auto& b : boxes) draw_rect(img, b, class_color(b.cls));
}

inline constexpr std::array<std::pair<int, int>, 12> kBoxEdges{
    {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {0, 2}, {1, 3}, {4, 6}, {5, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7}}};

/// 12-edge wireframes; corners within kNearPlane of the camera are culled
/// along with their edges, and boxes with fewer than two corners left are skipped.
inline void draw_boxes3d(Image& img, const std::vector<Obb3D>& boxes, const CameraConfig& cam,
                         const SensorMount& boxesMount) {
  const CalibrationMatrix k = intrinsics(cam);
  const RigidTransform t = lidar_to_camera(boxesMount, cam.mount);
  for (const auto& b : boxes) {
    std::array<Vec3, 8> p;
    std::array<bool, 8> ok{};
    int kept = 0;
    const auto corners = b.corners();
    for (std::size_t i = 0; i < 8; ++i) {
      p[i] = t.apply(corners[i]);
      ok[i] = p[i].z > kNearPlane;
      kept += ok[i];
    }
    if (kept < 2) continue;
    const Rgb c = class_color(b.cls);
    for (const auto& [i, j] : kBoxEdges) {
      if (!ok[static_cast<std::size_t>(i)] || !ok[static_cast<std::size_t>(j)]) continue;
      const Vec3 a = p[static_cast<std::size_t>(i)], e = p[static_cast<std::size_t>(j)];
      draw_line(img, k.fx * a.x / a.z + k.cx, k.fy * a.y / a.z + k.cy, k.fx * e.x / e.z + k.cx,
                k.fy * e.y / e.z + k.cy, c);
    }
  }
}

inline void draw_bev_footprints(Image& img, const std::vector<Obb3D>& boxes) {
  for (const auto& b : boxes) {
    const auto c = b.corners();
    const Rgb col = class_color(b.cls);
    // bottom face corners in order around the rectangle: 0, 2, 6, 4
    const std::array<int, 5> ring{0, 2, 6, 4, 0};
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      const Vec3 a = c[static_cast<std::size_t>(ring[i])], e = c[static_cast<std::size_t>(ring[i + 1])];
      draw_line(img, kBevSize / 2.0 - a.y * kBevPxPerM, kBevSize / 2.0 - a.x * kBevPxPerM,
                kBevSize / 2.0 - e.y * kBevPxPerM, kBevSize / 2.0 - e.x * kBevPxPerM, col);
    }
  }
}

/// Renders `layers` of one stored frame.
inline Image render_frame(const RunReader& run, int frameIndex, const std::set<Layer>& layers, std::size_t camera = 0) {
  if (frameIndex < 0 || frameIndex >= run.frame_count()) throw UnknownFrame(run.dir().filename().string(), frameIndex);
  const FrameRecord rec = run.record(frameIndex);
  const FrameData f = run.load(rec);
  const RunManifest& m = run.manifest();
  const bool wantsCamera = !layers.count(Layer::LidarBev);
  if (wantsCamera && camera >= f.cameras.size()) throw IoError("run has no camera " + std::to_string(camera));
  if (!wantsCamera && f.lidars.empty()) throw IoError("run has no lidar");

  Image img;
  if (layers.count(Layer::LidarBev)) img = lidar_bev_image(f.lidars.front());
  else if (layers.count(Layer::Depth)) img = depth_image(f.cameras[camera]);
  else if (layers.count(Layer::Semseg)) img = semseg_image(f.cameras[camera]);
  else img = rgb_image(f.cameras[camera]);

  if (!wantsCamera) {
    if (layers.count(Layer::Boxes3d)) draw_bev_footprints(img, f.boxes3d);
    return img;
  }
  if (layers.count(Layer::Boxes3d)) draw_boxes3d(img, f.boxes3d, m.rig.cameras[camera], m.rig.box_mount());
  if (layers.count(Layer::Boxes2d)) draw_boxes2d(img, f.boxes2d[camera]);
  return img;
}

// --- info -------------------------------------------------------------------------

struct DatasetStats {
  int runs = 0;
  long frames = 0;
  std::map<SemanticClass, long> points, boxes3d, boxes2d;
};

inline DatasetStats dataset_stats(const Dataset& d) {
  DatasetStats s;
  for (const auto& c : kSemanticClasses) s.points[c.id] = s.boxes3d[c.id] = s.boxes2d[c.id] = 0;
  for (const auto& id : d.runs()) {
    const RunReader r = d.run(id);
    ++s.runs;
    s.frames += r.frame_count();
    for (const auto& rec : r.frames()) {
      for (const auto& l : rec.lidar)
        for (const auto& p : read_lidar(l).points) ++s.points[class_from_id(p.classId).value_or(SemanticClass::None)];
      for (const auto& b : r.load_boxes3d(rec)) ++s.boxes3d[b.cls];
      for (std::size_t c = 0; c < rec.boxes2d.size(); ++c)
        for (const auto& b : r.load_boxes2d(rec, c)) ++s.boxes2d[b.cls];
    }
  }
  return s;
}

inline std::string format_stats(const DatasetStats& s) {
  auto line = [](const char* what, const std::map<SemanticClass, long>& m) {
    std::string out = what;
    for (const auto& [cls, n] : m) out += " " + std::string(class_name(cls)) + "=" + std::to_string(n);
    return out + "\n";
  };
  std::string out = "runs=" + std::to_string(s.runs) + " frames=" + std::to_string(s.frames) + "\n";
  if (s.runs == 0) return out;
  return out + line("points", s.points) + line("boxes3d", s.boxes3d) + line("boxes2d", s.boxes2d);
}

}  // namespace scenegen
