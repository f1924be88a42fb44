#pragma once
// On-disk run layout and the browse API.
//
//   <run>/manifest.json                 written last; its presence marks a complete run
//   <run>/scene.json
//   <run>/frames/NNNNNN/rgb.ppm         P6
//                       depth.f32       "SGDEPTH1", u32 width, u32 height, f32[h][w]
//                       semseg.pgm      P5, class ids
//                       lidar.bin       "SGLIDAR1", u32 count, u32 0, count x {f32 x,y,z; u8 class; u8 ring; u16 0}
//                       boxes3d.json
//                       boxes2d.json
//                       states.json
//
// Camera i > 0 writes cam<i>_rgb.ppm, cam<i>_depth.f32, cam<i>_semseg.pgm and
// cam<i>_boxes2d.json; lidar i > 0 writes lidar<i>.bin. All binary values are
// little-endian. JSON has sorted keys and shortest round-trip numbers.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scenegen/annotation.hpp"
#include "scenegen/scene.hpp"
#include "scenegen/sensors.hpp"
#include "scenegen/simulation.hpp"

namespace scenegen {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr int kFormatVersion = 1;
inline constexpr char kDepthMagic[] = "SGDEPTH1";
inline constexpr char kLidarMagic[] = "SGLIDAR1";

class IoError : public Error {
 public:
  using Error::Error;
};

class NonEmptyDir : public IoError {
 public:
  explicit NonEmptyDir(const fs::path& p) : IoError("output directory is not empty: " + p.string()) {}
};

class VersionError : public IoError {
 public:
  VersionError(const fs::path& p, int v)
      : IoError(p.string() + ": unsupported format version " + std::to_string(v)) {}
};

class CorruptRun : public IoError {
 public:
  CorruptRun(const fs::path& artifact, const std::string& why)
      : IoError("corrupt run: " + artifact.string() + ": " + why), artifact_(artifact) {}
  const fs::path& artifact() const { return artifact_; }

 private:
  fs::path artifact_;
};

struct SensorRig {
  std::vector<CameraConfig> cameras;
  std::vector<LidarConfig> lidars;

  /// Frame the 3D boxes are expressed in: the first lidar, else a default mount.
  SensorMount box_mount() const { return lidars.empty() ? SensorMount{} : lidars.front().mount; }
  friend bool operator==(const SensorRig&, const SensorRig&) = default;
};

struct RunManifest {
  int formatVersion = kFormatVersion;
  std::string scenarioPath;
  std::uint64_t programHash = 0;
  std::uint64_t seed = 0;
  double dt = 0.0;
  double duration = 0.0;
  int stepCount = 0;
  int captureEveryNSteps = 1;
  int frameCount = 0;
  SensorRig rig;
  std::vector<int> collisionSteps;
  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

/// One captured frame in memory.
struct FrameData {
  int index = 0;
  int step = 0;
  double time = 0.0;
  std::vector<CameraFrame> cameras;
  std::vector<LidarSweep> lidars;
  std::vector<Obb3D> boxes3d;
  std::vector<std::vector<Box2D>> boxes2d;  // per camera
  std::vector<AgentSnapshot> agents;
  std::map<int, Action> actions;
  friend bool operator==(const FrameData&, const FrameData&) = default;
};

/// The frame as it reads back from disk: depth and lidar coordinates pass
/// through float32.
// kept out of line: GCC 11 -O3 vectorizer bug
[[gnu::noinline]] inline double round_to_f32(double v) { return static_cast<float>(v); }

inline FrameData as_stored(FrameData f) {
  const auto f32 = round_to_f32;
  for (auto& c : f.cameras) std::transform(c.depth.begin(), c.depth.end(), c.depth.begin(), f32);
  for (auto& l : f.lidars)
    for (auto& p : l.points) p = {f32(p.x), f32(p.y), f32(p.z), p.classId, p.ring};
  return f;
}

inline std::string frame_dir_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d", index);
  return buf;
}

inline std::string camera_prefix(std::size_t i) { return i == 0 ? "" : "cam" + std::to_string(i) + "_"; }
inline std::string lidar_file(std::size_t i) { return i == 0 ? "lidar.bin" : "lidar" + std::to_string(i) + ".bin"; }

// --- byte encodings ---------------------------------------------------------------

namespace io {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}
inline void put_f32(std::string& out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

inline std::uint32_t get_u32(const std::string& in, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
  return v;
}
inline float get_f32(const std::string& in, std::size_t off) { return std::bit_cast<float>(get_u32(in, off)); }

inline std::string encode_ppm(const CameraFrame& f) {
  std::string out = "P6\n" + std::to_string(f.width) + " " + std::to_string(f.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(f.rgb.data()), f.rgb.size());
  return out;
}

inline std::string encode_pgm(int w, int h, const std::vector<std::uint8_t>& px) {
  std::string out = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.append(reinterpret_cast<const char*>(px.data()), px.size());
  return out;
}

inline std::string encode_depth(const CameraFrame& f) {
  std::string out(kDepthMagic, 8);
  put_u32(out, static_cast<std::uint32_t>(f.width));
  put_u32(out, static_cast<std::uint32_t>(f.height));
  out.reserve(out.size() + f.depth.size() * 4);
  for (double d : f.depth) put_f32(out, d);
  return out;
}

inline std::string encode_lidar(const LidarSweep& s) {
  std::string out(kLidarMagic, 8);
  put_u32(out, static_cast<std::uint32_t>(s.points.size()));
  put_u32(out, 0);
  out.reserve(out.size() + s.points.size() * 16);
  for (const auto& p : s.points) {
    put_f32(out, p.x);
    put_f32(out, p.y);
    put_f32(out, p.z);
    out.push_back(static_cast<char>(p.classId));
    out.push_back(static_cast<char>(p.ring));
    put_u16(out, 0);
  }
  return out;
}

/// Parses a binary PNM header ("P6"/"P5", width, height, 255) and returns the
/// payload offset.
inline std::size_t parse_pnm(const std::string& in, const char* magic, int& w, int& h) {
  std::istringstream ss(in);
  std::string m;
  int maxval = 0;
  if (!(ss >> m >> w >> h >> maxval) || m != magic || maxval != 255 || w < 1 || h < 1)
    throw std::runtime_error(std::string("bad ") + magic + " header");
  const auto off = static_cast<std::size_t>(ss.tellg()) + 1;
  return off;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CorruptRun(p, "missing");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + p.string());
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace io

// --- JSON conversions -------------------------------------------------------------

inline json mount_json(const SensorMount& m) {
  return {{"x", m.x}, {"y", m.y}, {"z", m.z}, {"rollDeg", m.rollDeg}, {"pitchDeg", m.pitchDeg}, {"yawDeg", m.yawDeg}};
}
inline SensorMount mount_from_json(const json& j) {
  SensorMount m;
  m.x = j.value("x", m.x);
  m.y = j.value("y", m.y);
  m.z = j.value("z", m.z);
  m.rollDeg = j.value("rollDeg", m.rollDeg);
  m.pitchDeg = j.value("pitchDeg", m.pitchDeg);
  m.yawDeg = j.value("yawDeg", m.yawDeg);
  return m;
}

inline json camera_json(const CameraConfig& c) {
  return {{"width", c.width}, {"height", c.height}, {"hfovDeg", c.hfovDeg}, {"fps", c.fps},
          {"mount", mount_json(c.mount)}};
}
inline CameraConfig camera_from_json(const json& j) {
  CameraConfig c;
  c.width = j.value("width", c.width);
  c.height = j.value("height", c.height);
  c.hfovDeg = j.value("hfovDeg", c.hfovDeg);
  c.fps = j.value("fps", c.fps);
  if (j.contains("mount")) c.mount = mount_from_json(j.at("mount"));
  c.validate();
  return c;
}

inline json lidar_json(const LidarConfig& l) {
  return {{"channels", l.channels},   {"azimuthSteps", l.azimuthSteps}, {"vfovLoDeg", l.vfovLoDeg},
          {"vfovHiDeg", l.vfovHiDeg}, {"rangeM", l.rangeM},             {"rateHz", l.rateHz},
          {"mount", mount_json(l.mount)}};
}
inline LidarConfig lidar_from_json(const json& j) {
  LidarConfig l;
  l.channels = j.value("channels", l.channels);
  l.azimuthSteps = j.value("azimuthSteps", l.azimuthSteps);
  l.vfovLoDeg = j.value("vfovLoDeg", l.vfovLoDeg);
  l.vfovHiDeg = j.value("vfovHiDeg", l.vfovHiDeg);
  l.rangeM = j.value("rangeM", l.rangeM);
  l.rateHz = j.value("rateHz", l.rateHz);
  if (j.contains("mount")) l.mount = mount_from_json(j.at("mount"));
  l.validate();
  return l;
}

inline json value_json(const Value& v) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Vec2>) return json::array({x.x, x.y});
        else if constexpr (std::is_same_v<T, ObjectRef>) return {{"object", x.id}};
        else return x;
      },
      v);
}

inline json object_json(const SceneObject& o) {
  json j = {{"id", o.id},
            {"name", o.name},
            {"class", o.className},
            {"semanticClass", std::string(class_name(o.semantic))},
            {"x", o.x},
            {"y", o.y},
            {"z", 0.0},
            {"heading", o.heading},
            {"length", o.length},
            {"width", o.width},
            {"height", o.height},
            {"isEgo", o.isEgo},
            {"allowCollisions", o.allowCollisions},
            {"behavior", nullptr}};
  if (o.behavior) {
    json args = json::array();
    for (const auto& a : o.behavior->args) args.push_back(value_json(a));
    j["behavior"] = {{"name", o.behavior->name}, {"args", args}};
  }
  return j;
}

inline json scene_json(const Scene& s) {
  json objs = json::array(), props = json::array(), lanes = json::array(), params = json::object();
  for (const auto& o : s.objects) objs.push_back(object_json(o));
  for (const auto& o : s.world.staticProps) props.push_back(object_json(o));
  for (const auto& l : s.world.lanes) {
    json pts = json::array();
    for (const auto& p : l.centerline) pts.push_back({p.x, p.y});
    lanes.push_back({{"name", l.name}, {"centerline", pts}, {"width", l.width}});
  }
  for (const auto& [k, v] : s.params) params[k] = value_json(v);
  return {{"seed", s.seed},
          {"programHash", s.programHash},
          {"rejections", s.rejections},
          {"objects", objs},
          {"params", params},
          {"world", {{"ground", std::string(class_name(s.world.groundClass))}, {"lanes", lanes}, {"props", props}}}};
}

inline json boxes3d_json(const std::vector<Obb3D>& boxes) {
  json arr = json::array();
  for (const auto& b : boxes)
    arr.push_back({{"objId", b.objId},
                   {"classId", static_cast<int>(b.cls)},
                   {"center", {b.center.x, b.center.y, b.center.z}},
                   {"dims", {b.length, b.width, b.height}},
                   {"yaw", b.yaw}});
  return arr;
}
inline std::vector<Obb3D> boxes3d_from_json(const json& arr) {
  std::vector<Obb3D> out;
  for (const auto& j : arr) {
    Obb3D b;
    b.objId = j.at("objId").get<int>();
    b.cls = class_from_id(j.at("classId").get<int>()).value();
    const auto& c = j.at("center");
    b.center = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
    const auto& d = j.at("dims");
    b.length = d.at(0).get<double>(), b.width = d.at(1).get<double>(), b.height = d.at(2).get<double>();
    b.yaw = j.at("yaw").get<double>();
    out.push_back(b);
  }
  return out;
}

inline json boxes2d_json(const std::vector<Box2D>& boxes) {
  json arr = json::array();
  for (const auto& b : boxes)
    arr.push_back({{"objId", b.objId},
                   {"classId", static_cast<int>(b.cls)},
                   {"xmin", b.xmin},
                   {"ymin", b.ymin},
                   {"xmax", b.xmax},
                   {"ymax", b.ymax}});
  return arr;
}
inline std::vector<Box2D> boxes2d_from_json(const json& arr) {
  std::vector<Box2D> out;
  for (const auto& j : arr)
    out.push_back({j.at("xmin").get<double>(), j.at("ymin").get<double>(), j.at("xmax").get<double>(),
                   j.at("ymax").get<double>(), class_from_id(j.at("classId").get<int>()).value(),
                   j.at("objId").get<int>()});
  return out;
}

inline json states_json(const FrameData& f) {
  json agents = json::array();
  for (const auto& a : f.agents) {
    json j = {{"id", a.id},          {"class", a.className},    {"x", a.state.x},
              {"y", a.state.y},      {"heading", a.state.heading}, {"speed", a.state.speed},
              {"action", nullptr}};
    if (auto it = f.actions.find(a.id); it != f.actions.end())
      j["action"] = {{"throttle", it->second.throttle()}, {"steer", it->second.steer()}, {"brake", it->second.brake()}};
    agents.push_back(j);
  }
  return {{"frame", f.index}, {"step", f.step}, {"time", f.time}, {"agents", agents}};
}

inline json class_table_json() {
  json arr = json::array();
  for (const auto& c : kSemanticClasses)
    arr.push_back({{"id", static_cast<int>(c.id)}, {"name", std::string(c.name)}, {"color", {c.color.r, c.color.g, c.color.b}}});
  return arr;
}

inline json encodings_json() {
  return {
      {"rgb", {{"format", "binary PPM (P6)"}, {"maxval", 255}}},
      {"semseg", {{"format", "binary PGM (P5)"}, {"maxval", 255}, {"values", "semantic class ids"}}},
      {"depth",
       {{"magic", kDepthMagic},
        {"headerBytes", 16},
        {"header", json::array({{{"name", "width"}, {"type", "u32"}, {"offset", 8}},
                                {{"name", "height"}, {"type", "u32"}, {"offset", 12}}})},
        {"sample", "f32"},
        {"order", "row-major"},
        {"endianness", "little"},
        {"units", "meters, planar z-depth"},
        {"noHit", "+inf"}}},
      {"lidar",
       {{"magic", kLidarMagic},
        {"headerBytes", 16},
        {"header", json::array({{{"name", "count"}, {"type", "u32"}, {"offset", 8}},
                                {{"name", "reserved"}, {"type", "u32"}, {"offset", 12}}})},
        {"recordBytes", 16},
        {"record", json::array({{{"name", "x"}, {"type", "f32"}, {"offset", 0}},
                                {{"name", "y"}, {"type", "f32"}, {"offset", 4}},
                                {{"name", "z"}, {"type", "f32"}, {"offset", 8}},
                                {{"name", "classId"}, {"type", "u8"}, {"offset", 12}},
                                {{"name", "ring"}, {"type", "u8"}, {"offset", 13}},
                                {{"name", "pad"}, {"type", "u16"}, {"offset", 14}}})},
        {"endianness", "little"},
        {"frame", "lidar: +x forward, +y left, +z up, meters"}}},
      {"boxes3d", {{"frame", "first lidar"}, {"fields", "center [x,y,z], dims [length,width,height], yaw radians"}}},
      {"boxes2d", {{"units", "pixels"}, {"fields", "xmin, ymin, xmax, ymax"}}},
  };
}

inline json manifest_json(const RunManifest& m) {
  json cams = json::array(), lidars = json::array();
  for (std::size_t i = 0; i < m.rig.cameras.size(); ++i) {
    const auto& c = m.rig.cameras[i];
    const std::string p = camera_prefix(i);
    json j = camera_json(c);
    j["intrinsics"] = intrinsics(c).rows();
    j["files"] = {{"rgb", p + "rgb.ppm"}, {"depth", p + "depth.f32"}, {"semseg", p + "semseg.pgm"},
                  {"boxes2d", p + "boxes2d.json"}};
    cams.push_back(j);
  }
  for (std::size_t i = 0; i < m.rig.lidars.size(); ++i) {
    json j = lidar_json(m.rig.lidars[i]);
    j["file"] = lidar_file(i);
    lidars.push_back(j);
  }
  return {{"formatVersion", m.formatVersion},
          {"scenarioPath", m.scenarioPath},
          {"programHash", m.programHash},
          {"seed", m.seed},
          {"dt", m.dt},
          {"duration", m.duration},
          {"stepCount", m.stepCount},
          {"captureEveryNSteps", m.captureEveryNSteps},
          {"frameCount", m.frameCount},
          {"collisionSteps", m.collisionSteps},
          {"sensorRig", {{"cameras", cams}, {"lidars", lidars}, {"boxesMount", mount_json(m.rig.box_mount())}}},
          {"classes", class_table_json()},
          {"encodings", encodings_json()}};
}

inline RunManifest manifest_from_json(const json& j, const fs::path& where) {
  RunManifest m;
  m.formatVersion = j.at("formatVersion").get<int>();
  if (m.formatVersion != kFormatVersion) throw VersionError(where, m.formatVersion);
  m.scenarioPath = j.at("scenarioPath").get<std::string>();
  m.programHash = j.at("programHash").get<std::uint64_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.dt = j.at("dt").get<double>();
  m.duration = j.at("duration").get<double>();
  m.stepCount = j.at("stepCount").get<int>();
  m.captureEveryNSteps = j.at("captureEveryNSteps").get<int>();
  m.frameCount = j.at("frameCount").get<int>();
  m.collisionSteps = j.at("collisionSteps").get<std::vector<int>>();
  for (const auto& c : j.at("sensorRig").at("cameras")) m.rig.cameras.push_back(camera_from_json(c));
  for (const auto& l : j.at("sensorRig").at("lidars")) m.rig.lidars.push_back(lidar_from_json(l));
  return m;
}

// --- writing ----------------------------------------------------------------------

/// Streams one run to disk. The manifest is written by finish().
class RunWriter {
 public:
  RunWriter(fs::path dir, RunManifest manifest) : dir_(std::move(dir)), manifest_(std::move(manifest)) {
    std::error_code ec;
    if (fs::exists(dir_, ec)) {
      if (!fs::is_directory(dir_)) throw IoError("not a directory: " + dir_.string());
      if (!fs::is_empty(dir_)) throw NonEmptyDir(dir_);
    }
    fs::create_directories(dir_ / "frames", ec);
    if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
  }

  const fs::path& dir() const { return dir_; }

  void write_scene(const Scene& s) { io::write_file(dir_ / "scene.json", io::dump(scene_json(s))); }

  void write_frame(const FrameData& f) {
    if (f.index != frames_) throw IoError("frames must be written in order");
    const fs::path d = dir_ / "frames" / frame_dir_name(f.index);
    fs::create_directories(d);
    for (std::size_t i = 0; i < f.cameras.size(); ++i) {
      const std::string p = camera_prefix(i);
      const CameraFrame& c = f.cameras[i];
      io::write_file(d / (p + "rgb.ppm"), io::encode_ppm(c));
      io::write_file(d / (p + "depth.f32"), io::encode_depth(c));
      io::write_file(d / (p + "semseg.pgm"), io::encode_pgm(c.width, c.height, c.semseg));
      io::write_file(d / (p + "boxes2d.json"), io::dump(boxes2d_json(f.boxes2d.at(i))));
    }
    for (std::size_t i = 0; i < f.lidars.size(); ++i) io::write_file(d / lidar_file(i), io::encode_lidar(f.lidars[i]));
    io::write_file(d / "boxes3d.json", io::dump(boxes3d_json(f.boxes3d)));
    io::write_file(d / "states.json", io::dump(states_json(f)));
    ++frames_;
  }

  /// Writes the manifest; the run is complete afterwards.
  void finish(const std::vector<int>& collisionSteps) {
    manifest_.frameCount = frames_;
    manifest_.collisionSteps = collisionSteps;
    io::write_file(dir_ / "manifest.json", io::dump(manifest_json(manifest_)));
  }

  const RunManifest& manifest() const { return manifest_; }

 private:
  fs::path dir_;
  RunManifest manifest_;
  int frames_ = 0;
};

inline void write_run(const fs::path& dir, const RunManifest& manifest, const Scene& scene,
                      const std::vector<FrameData>& frames) {
  RunWriter w(dir, manifest);
  w.write_scene(scene);
  for (const auto& f : frames) w.write_frame(f);
  w.finish(manifest.collisionSteps);
}

// --- capture ----------------------------------------------------------------------

/// Renders every sensor of `rig` for the ego at the given step.
inline FrameData capture_frame(const Scene& scene, const StepRecord& rec, const SensorRig& rig, int index) {
  const Scene now = scene_at(scene, rec.states);
  const SceneObject& egoObj = now.ego();
  const AgentState ego = rec.states.at(egoObj.id);
  FrameData f;
  f.index = index;
  f.step = rec.step;
  f.time = rec.time;
  for (const auto& c : rig.cameras) f.cameras.push_back(render_camera(now, ego, c, egoObj.id));
  for (const auto& l : rig.lidars) f.lidars.push_back(sweep_lidar(now, ego, l, egoObj.id));
  f.boxes3d = boxes_3d(now, ego, rig.box_mount(), egoObj.id);
  for (const auto& c : rig.cameras) f.boxes2d.push_back(project_boxes(f.boxes3d, c, rig.box_mount()));
  f.agents = make_step_state(scene, rec.step, rec.time, rec.states).agents;
  f.actions = rec.actions;
  return f;
}

// --- reading ----------------------------------------------------------------------

struct FrameRecord {
  int index = 0;
  fs::path dir;
  std::vector<fs::path> rgb, depth, semseg, boxes2d;  // per camera
  std::vector<fs::path> lidar;                       // per lidar
  fs::path boxes3d, states;
};

inline CameraFrame read_camera(const fs::path& rgb, const fs::path& depth, const fs::path& semseg) {
  CameraFrame f;
  const std::string rb = io::read_file(rgb), db = io::read_file(depth), sb = io::read_file(semseg);
  int w = 0, h = 0, w2 = 0, h2 = 0;
  std::size_t off = 0;
  try {
    off = io::parse_pnm(rb, "P6", w, h);
  } catch (const std::exception& e) {
    throw CorruptRun(rgb, e.what());
  }
  if (rb.size() != off + static_cast<std::size_t>(w) * h * 3) throw CorruptRun(rgb, "payload size mismatch");
  f.width = w, f.height = h;
  f.rgb.assign(rb.begin() + static_cast<std::ptrdiff_t>(off), rb.end());

  if (db.size() < 16 || db.compare(0, 8, kDepthMagic) != 0) throw CorruptRun(depth, "bad header");
  if (static_cast<int>(io::get_u32(db, 8)) != w || static_cast<int>(io::get_u32(db, 12)) != h)
    throw CorruptRun(depth, "dimensions differ from the rgb image");
  if (db.size() != 16 + static_cast<std::size_t>(w) * h * 4) throw CorruptRun(depth, "payload size mismatch");
  f.depth.resize(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < f.depth.size(); ++i) f.depth[i] = io::get_f32(db, 16 + i * 4);

  try {
    off = io::parse_pnm(sb, "P5", w2, h2);
  } catch (const std::exception& e) {
    throw CorruptRun(semseg, e.what());
  }
  if (w2 != w || h2 != h || sb.size() != off + static_cast<std::size_t>(w) * h)
    throw CorruptRun(semseg, "payload size mismatch");
  f.semseg.assign(sb.begin() + static_cast<std::ptrdiff_t>(off), sb.end());
  return f;
}

inline LidarSweep read_lidar(const fs::path& p) {
  const std::string b = io::read_file(p);
  if (b.size() < 16 || b.compare(0, 8, kLidarMagic) != 0) throw CorruptRun(p, "bad header");
  const std::size_t count = io::get_u32(b, 8);
  if (b.size() - 16 != count * 16) throw CorruptRun(p, "point count does not match payload length");
  LidarSweep s;
  s.points.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t o = 16 + i * 16;
    auto& pt = s.points[i];
    pt.x = io::get_f32(b, o), pt.y = io::get_f32(b, o + 4), pt.z = io::get_f32(b, o + 8);
    pt.classId = static_cast<std::uint8_t>(b[o + 12]);
    pt.ring = static_cast<std::uint8_t>(b[o + 13]);
  }
  return s;
}

inline json read_json(const fs::path& p) {
  const std::string text = io::read_file(p);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw CorruptRun(p, "malformed JSON");
  return j;
}

class RunReader {
 public:
  explicit RunReader(fs::path dir) : dir_(std::move(dir)) {
    const fs::path mp = dir_ / "manifest.json";
    if (!fs::exists(mp)) throw CorruptRun(mp, "missing");
    try {
      manifest_ = manifest_from_json(read_json(mp), mp);
    } catch (const json::exception& e) {
      throw CorruptRun(mp, e.what());
    }
  }

  const fs::path& dir() const { return dir_; }
  const RunManifest& manifest() const { return manifest_; }
  int frame_count() const { return manifest_.frameCount; }

  FrameRecord record(int i) const {
    if (i < 0 || i >= manifest_.frameCount) throw IoError("no frame " + std::to_string(i) + " in " + dir_.string());
    FrameRecord r;
    r.index = i;
    r.dir = dir_ / "frames" / frame_dir_name(i);
    for (std::size_t c = 0; c < manifest_.rig.cameras.size(); ++c) {
      const std::string p = camera_prefix(c);
      r.rgb.push_back(r.dir / (p + "rgb.ppm"));
      r.depth.push_back(r.dir / (p + "depth.f32"));
      r.semseg.push_back(r.dir / (p + "semseg.pgm"));
      r.boxes2d.push_back(r.dir / (p + "boxes2d.json"));
    }
    for (std::size_t l = 0; l < manifest_.rig.lidars.size(); ++l) r.lidar.push_back(r.dir / lidar_file(l));
    r.boxes3d = r.dir / "boxes3d.json";
    r.states = r.dir / "states.json";
    return r;
  }

  std::vector<FrameRecord> frames() const {
    std::vector<FrameRecord> out;
    for (int i = 0; i < frame_count(); ++i) out.push_back(record(i));
    return out;
  }

  std::vector<Obb3D> load_boxes3d(const FrameRecord& r) const {
    try {
      return boxes3d_from_json(read_json(r.boxes3d));
    } catch (const json::exception& e) {
      throw CorruptRun(r.boxes3d, e.what());
    } catch (const std::bad_optional_access&) {
      throw CorruptRun(r.boxes3d, "unknown class id");
    }
  }

  std::vector<Box2D> load_boxes2d(const FrameRecord& r, std::size_t camera = 0) const {
    try {
      return boxes2d_from_json(read_json(r.boxes2d.at(camera)));
    } catch (const json::exception& e) {
      throw CorruptRun(r.boxes2d.at(camera), e.what());
    } catch (const std::bad_optional_access&) {
      throw CorruptRun(r.boxes2d.at(camera), "unknown class id");
    }
  }

  FrameData load(const FrameRecord& r) const {
    FrameData f;
    f.index = r.index;
    for (std::size_t c = 0; c < r.rgb.size(); ++c) {
      f.cameras.push_back(read_camera(r.rgb[c], r.depth[c], r.semseg[c]));
      f.boxes2d.push_back(load_boxes2d(r, c));
    }
    for (const auto& l : r.lidar) f.lidars.push_back(read_lidar(l));
    f.boxes3d = load_boxes3d(r);
    try {
      const json s = read_json(r.states);
      f.step = s.at("step").get<int>();
      f.time = s.at("time").get<double>();
      for (const auto& a : s.at("agents")) {
        AgentSnapshot snap{a.at("id").get<int>(), a.at("class").get<std::string>(),
                           {a.at("x").get<double>(), a.at("y").get<double>(), a.at("heading").get<double>(),
                            a.at("speed").get<double>()}};
        if (const auto& act = a.at("action"); !act.is_null())
          f.actions[snap.id] = Action(act.at("throttle").get<double>(), act.at("steer").get<double>(),
                                      act.at("brake").get<double>());
        f.agents.push_back(std::move(snap));
      }
    } catch (const json::exception& e) {
      throw CorruptRun(r.states, e.what());
    }
    return f;
  }

  FrameData load(int i) const { return load(record(i)); }

 private:
  fs::path dir_;
  RunManifest manifest_;
};

/// A directory of runs, one subdirectory each.
class Dataset {
 public:
  explicit Dataset(fs::path root) : root_(std::move(root)) {
    if (!fs::is_directory(root_)) throw IoError("not a dataset directory: " + root_.string());
    for (const auto& e : fs::directory_iterator(root_))
      if (e.is_directory() && fs::exists(e.path() / "manifest.json")) runs_.push_back(e.path().filename().string());
    std::sort(runs_.begin(), runs_.end());
  }

  const std::vector<std::string>& runs() const { return runs_; }
  RunReader run(const std::string& id) const { return RunReader(root_ / id); }

 private:
  fs::path root_;
  std::vector<std::string> runs_;
};

inline Dataset open_dataset(const fs::path& root) { return Dataset(root); }

/// 2D boxes of a frame's 3D boxes seen through `camera`.
inline std::vector<Box2D> reproject_boxes(const std::vector<Obb3D>& boxes3d, const CameraConfig& camera,
                                          const SensorMount& boxesMount = {}) {
  return project_boxes(boxes3d, camera, boxesMount);
}

inline std::vector<Box2D> reproject_boxes(const RunReader& run, const FrameRecord& frame, const CameraConfig& camera) {
  return reproject_boxes(run.load_boxes3d(frame), camera, run.manifest().rig.box_mount());
}

/// ASCII PLY of one lidar sweep with class colors.
inline void export_pointcloud_ply(const LidarSweep& sweep, const fs::path& out) {
  std::string s = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(sweep.points.size()) +
                  "\nproperty float x\nproperty float y\nproperty float z\n"
                  "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  char buf[32];
  auto num = [&](double v) {
    auto r = std::to_chars(buf, buf + sizeof buf, static_cast<float>(v));
    s.append(buf, r.ptr);
  };
  for (const auto& p : sweep.points) {
    const auto cls = class_from_id(p.classId);
    const Rgb c = class_color(cls.value_or(SemanticClass::None));
    num(p.x), s += ' ', num(p.y), s += ' ', num(p.z);
    s += ' ' + std::to_string(c.r) + ' ' + std::to_string(c.g) + ' ' + std::to_string(c.b) + '\n';
  }
  io::write_file(out, s);
}

inline void export_pointcloud_ply(const FrameRecord& frame, const fs::path& out, std::size_t lidar = 0) {
  if (lidar >= frame.lidar.size()) throw IoError("frame has no lidar " + std::to_string(lidar));
  export_pointcloud_ply(read_lidar(frame.lidar[lidar]), out);
}

}  // namespace scenegen
