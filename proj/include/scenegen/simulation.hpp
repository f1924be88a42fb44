#pragma once
// Fixed-step lockstep simulation loop.

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "scenegen/behavior.hpp"
#include "scenegen/dynamics.hpp"
#include "scenegen/scene.hpp"

namespace scenegen {

struct AgentSnapshot {
  int id = 0;
  std::string className;
  AgentState state;
  friend bool operator==(const AgentSnapshot&, const AgentSnapshot&) = default;
};

/// Ground truth for one step, agents sorted by id.
struct StepState {
  int step = 0;
  double time = 0.0;
  std::vector<AgentSnapshot> agents;
  friend bool operator==(const StepState&, const StepState&) = default;
};

struct StepRecord {
  int step = 0;
  double time = 0.0;
  std::map<int, AgentState> states;  // at `time`, before this step's actions
  std::map<int, Action> actions;     // chosen at `time`
  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<StepRecord> steps;
  std::vector<int> collisionSteps;  // steps where non-exempt footprints overlap
  std::map<int, AgentState> finalStates;  // after the last step
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Supplies one action per behavior-bearing agent for each step.
class ActionSource {
 public:
  virtual ~ActionSource() = default;
  virtual std::map<int, Action> actions(const StepState& state) = 0;
  virtual void finish(const std::string& /*reason*/) {}
};

/// Runs behaviors in-process. Agents whose behavior has completed take the
/// idle action.
class BehaviorRuntime : public ActionSource {
 public:
  /// `rng` must be positioned right after static sampling of `scene`.
  BehaviorRuntime(const dsl::CheckedProgram& prog, const Scene& scene, Rng rng)
      : scene_(&scene), rng_(rng) {
    for (const auto& o : scene.objects)
      if (o.behavior) instances_.emplace_back(prog, o.id, *o.behavior);
  }

  std::vector<int> agent_ids() const {
    std::vector<int> ids;
    for (const auto& b : instances_) ids.push_back(b.agent_id());
    return ids;
  }

  std::map<int, Action> actions(const StepState& state) override {
    WorldView view;
    view.scene = scene_;
    for (const auto& a : state.agents) view.states[a.id] = a.state;
    std::map<int, Action> out;
    for (auto& b : instances_) out[b.agent_id()] = b.next_action(view, rng_).value_or(Action());
    return out;
  }

  const Rng& rng() const { return rng_; }

 private:
  const Scene* scene_;
  Rng rng_;
  std::vector<BehaviorInstance> instances_;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

inline int step_count(double duration, double dt) {
  if (!(dt > 0.0)) throw SimulationError("dt must be positive");
  if (duration < dt) return 0;
  return static_cast<int>(std::llround(duration / dt));
}

inline std::map<int, AgentState> initial_states(const Scene& scene) {
  std::map<int, AgentState> s;
  for (const auto& o : scene.objects) s[o.id] = AgentState{o.x, o.y, o.heading, 0.0};
  return s;
}

inline StepState make_step_state(const Scene& scene, int step, double time,
                                 const std::map<int, AgentState>& states) {
  StepState st{step, time, {}};
  for (const auto& o : scene.objects) st.agents.push_back({o.id, o.className, states.at(o.id)});
  return st;
}

/// Copy of the scene with objects moved to `states`.
inline Scene scene_at(const Scene& scene, const std::map<int, AgentState>& states) {
  Scene s = scene;
  for (auto& o : s.objects) {
    if (auto it = states.find(o.id); it != states.end()) {
      o.x = it->second.x;
      o.y = it->second.y;
      o.heading = it->second.heading;
    }
  }
  return s;
}

using StepRecorder = std::function<void(const StepRecord&)>;

/// Per step: send all states, collect one action per behavior-bearing agent,
/// integrate those agents, then hand the step to the recorder. Agents without
/// behaviors never move.
inline Trajectory run_simulation(const Scene& scene, double duration, double dt, ActionSource& source,
                                 const StepRecorder& recorder = {}) {
  const int steps = step_count(duration, dt);
  Trajectory traj;
  traj.dt = dt;
  traj.steps.reserve(static_cast<std::size_t>(steps));

  std::map<int, bool> moving;
  for (const auto& o : scene.objects) moving[o.id] = o.behavior.has_value();

  std::map<int, AgentState> states = initial_states(scene);
  for (int k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    StepRecord rec{k, t, states, {}};
    rec.actions = source.actions(make_step_state(scene, k, t, states));
    for (const auto& [id, isAgent] : moving) {
      if (isAgent != (rec.actions.count(id) == 1))
        throw SimulationError("step " + std::to_string(k) + ": action set does not match agent " +
                              std::to_string(id));
    }

    const Scene now = scene_at(scene, states);
    bool collided = false;
    for (std::size_t i = 0; i < now.objects.size() && !collided; ++i)
      for (std::size_t j = i + 1; j < now.objects.size() && !collided; ++j) {
        const auto& a = now.objects[i];
        const auto& b = now.objects[j];
        if (!a.allowCollisions && !b.allowCollisions && footprints_overlap(a, b)) collided = true;
      }
    if (collided) traj.collisionSteps.push_back(k);

    for (const auto& o : scene.objects) {
      auto it = rec.actions.find(o.id);
      if (it == rec.actions.end()) continue;
      states[o.id] = step_dynamics(states[o.id], it->second, dt, VehicleParams::for_kind(o.kind));
    }
    if (recorder) recorder(rec);
    traj.steps.push_back(std::move(rec));
  }
  traj.finalStates = std::move(states);
  source.finish("done");
  return traj;
}

}  // namespace scenegen
