#pragma once
// Small fixed-size vector/matrix types and the world-frame conventions.
//
// World frame: x east, y north, z up. Heading 0 points along +y and grows
// counter-clockwise, so heading pi/2 points along -x. Headings are stored in
// radians and kept in (-pi, pi].

#include <array>
#include <cmath>
#include <numbers>

namespace scenegen {

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline constexpr double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

/// Tangent of an angle in degrees, exact at odd multiples of 45.
inline double tan_deg(double deg) {
  const double r = std::fmod(deg, 180.0);
  if (r == 45.0 || r == -135.0) return 1.0;
  if (r == -45.0 || r == 135.0) return -1.0;
  return std::tan(deg_to_rad(deg));
}

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  if (r > kPi) r -= 2.0 * kPi;
  return r;
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const {
    const double n = norm();
    return {x / n, y / n, z / n};
  }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// Unit vector in the ground plane for a heading.
inline Vec2 heading_vector(double heading) { return {-std::sin(heading), std::cos(heading)}; }

/// Heading of the direction vector d (inverse of heading_vector).
inline double heading_of(Vec2 d) { return std::atan2(-d.x, d.y); }

/// Row-major 3x3.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return {}; }
  static Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
    return {{c0.x, c1.x, c2.x, c0.y, c1.y, c2.y, c0.z, c1.z, c2.z}};
  }
  static Mat3 rot_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {{c, -s, 0, s, c, 0, 0, 0, 1}};
  }
  static Mat3 rot_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {{c, 0, s, 0, 1, 0, -s, 0, c}};
  }
  static Mat3 rot_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {{1, 0, 0, 0, c, -s, 0, s, c}};
  }

  double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r.m[static_cast<std::size_t>(i * 3 + j)] = s;
      }
    return r;
  }
  Mat3 transposed() const { return {{m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}}; }
  friend bool operator==(const Mat3&, const Mat3&) = default;
};

/// p_target = rotation * p_source + translation.
struct RigidTransform {
  Mat3 rotation;
  Vec3 translation;

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_direction(const Vec3& d) const { return rotation * d; }
  RigidTransform inverse() const {
    const Mat3 rt = rotation.transposed();
    return {rt, -(rt * translation)};
  }
  /// (*this) after `inner`: maps inner's source frame into this target frame.
  RigidTransform compose(const RigidTransform& inner) const {
    return {rotation * inner.rotation, rotation * inner.translation + translation};
  }
  friend bool operator==(const RigidTransform&, const RigidTransform&) = default;
};

/// Ego body frame (+x forward, +y left, +z up, origin on the ground at the
/// reference point) into the world frame.
inline RigidTransform ego_to_world(double x, double y, double heading) {
  const Vec2 f = heading_vector(heading);
  const Vec3 fwd{f.x, f.y, 0.0};
  const Vec3 left{-f.y, f.x, 0.0};
  return {Mat3::from_columns(fwd, left, {0, 0, 1}), {x, y, 0.0}};
}

/// Ground-plane oriented rectangle.
struct Footprint {
  Vec2 center;
  double heading = 0.0;
  double length = 0.0;  // along the heading
  double width = 0.0;

  std::array<Vec2, 4> corners() const {
    const Vec2 f = heading_vector(heading);
    const Vec2 l{-f.y, f.x};
    const Vec2 a = f * (length / 2.0), b = l * (width / 2.0);
    return {center + a + b, center + a - b, center - a - b, center - a + b};
  }
};

/// Separating-axis test over the two edge normals of each rectangle.
/// Touching rectangles count as overlapping.
inline bool rectangles_overlap(const Footprint& a, const Footprint& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const Vec2 fa = heading_vector(a.heading), fb = heading_vector(b.heading);
  const std::array<Vec2, 4> axes{fa, Vec2{-fa.y, fa.x}, fb, Vec2{-fb.y, fb.x}};
  for (const Vec2& axis : axes) {
    double amin = INFINITY, amax = -INFINITY, bmin = INFINITY, bmax = -INFINITY;
    for (const Vec2& p : ca) {
      const double d = p.dot(axis);
      amin = std::fmin(amin, d);
      amax = std::fmax(amax, d);
    }
    for (const Vec2& p : cb) {
      const double d = p.dot(axis);
      bmin = std::fmin(bmin, d);
      bmax = std::fmax(bmax, d);
    }
    if (amax < bmin || bmax < amin) return false;
  }
  return true;
}

/// Distance from p to a polyline (>= 2 points).
template <class Points>
double distance_to_polyline(Vec2 p, const Points& pts) {
  double best = INFINITY;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 a = pts[i], b = pts[i + 1];
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
    best = std::fmin(best, (p - (a + ab * t)).norm());
  }
  return best;
}

}  // namespace scenegen
