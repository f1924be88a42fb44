#pragma once
// Kinematic bicycle integrator.

#include <algorithm>
#include <cmath>

#include "scenegen/geometry.hpp"
#include "scenegen/object_classes.hpp"

namespace scenegen {

struct AgentState {
  double x = 0.0, y = 0.0;
  double heading = 0.0;  // radians, (-pi, pi]
  double speed = 0.0;    // m/s, never negative
  friend bool operator==(const AgentState&, const AgentState&) = default;
};

/// Control command; components are clamped on construction (NaN becomes 0).
class Action {
 public:
  Action() = default;
  Action(double throttle, double steer, double brake)
      : throttle_(clamp(throttle, 0.0, 1.0)), steer_(clamp(steer, -1.0, 1.0)), brake_(clamp(brake, 0.0, 1.0)) {}

  double throttle() const { return throttle_; }
  double steer() const { return steer_; }
  double brake() const { return brake_; }

  friend bool operator==(const Action&, const Action&) = default;

 private:
  static double clamp(double v, double lo, double hi) { return std::isnan(v) ? 0.0 : std::clamp(v, lo, hi); }
  double throttle_ = 0.0;
  double steer_ = 0.0;
  double brake_ = 0.0;
};

struct VehicleParams {
  double accelMax = 4.0;     // m/s^2 at full throttle
  double brakeMax = 8.0;     // m/s^2 at full brake
  double drag = 0.05;        // 1/s
  double wheelbase = 2.7;    // m
  double maxSteerDeg = 35.0;
  bool directYaw = false;    // pedestrians: yaw rate = steer * pi rad/s

  static VehicleParams for_kind(AgentKind kind) {
    VehicleParams p;
    if (kind == AgentKind::Pedestrian) {
      p.accelMax = 1.5;
      p.maxSteerDeg = 180.0;
      p.directYaw = true;
    }
    return p;
  }
};

/// accel = Amax*throttle - Bmax*brake - drag*speed; speed' = max(0, speed + accel*dt);
/// heading' = heading + (speed'/L) tan(steer*maxSteer) dt; position moves speed'*dt along heading'.
inline AgentState step_dynamics(const AgentState& s, const Action& a, double dt,
                                const VehicleParams& p = {}) {
  AgentState n = s;
  const double accel = p.accelMax * a.throttle() - p.brakeMax * a.brake() - p.drag * s.speed;
  n.speed = std::max(0.0, s.speed + accel * dt);
  if (n.speed > 0.0 && a.steer() != 0.0) {
    const double rate = p.directYaw ? a.steer() * kPi
                                    : (n.speed / p.wheelbase) * std::tan(a.steer() * deg_to_rad(p.maxSteerDeg));
    n.heading = normalize_angle(s.heading + rate * dt);
  } else {
    n.heading = normalize_angle(s.heading);
  }
  const Vec2 f = heading_vector(n.heading);
  n.x = s.x + f.x * n.speed * dt;
  n.y = s.y + f.y * n.speed * dt;
  return n;
}

}  // namespace scenegen
