#pragma once
// Step-protocol messages, one JSON object per line.
//
//   {"type":"hello","version":1,"scenarioHash":..,"seed":..,"dt":..,"agentIds":[..]}
//   {"type":"hello_ack","version":1,"agentIds":[..]}
//   {"type":"state","step":k,"time":t,"agents":[{"id","class","x","y","heading","speed"},..]}
//   {"type":"action","step":k,"actions":[{"id","throttle","steer","brake"},..]}
//   {"type":"bye","reason":".."}

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "scenegen/errors.hpp"
#include "scenegen/simulation.hpp"

namespace scenegen::protocol {

inline constexpr int kProtocolVersion = 1;

class DecodeError : public Error {
 public:
  DecodeError(const std::string& line, const std::string& why)
      : Error("cannot decode message (" + why + "): " + line.substr(0, 200)), line_(line) {}
  const std::string& line() const { return line_; }

 private:
  std::string line_;
};

struct HelloMsg {
  int version = kProtocolVersion;
  std::uint64_t scenarioHash = 0;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::vector<int> agentIds;
  friend bool operator==(const HelloMsg&, const HelloMsg&) = default;
};

struct HelloAckMsg {
  int version = kProtocolVersion;
  std::vector<int> agentIds;
  friend bool operator==(const HelloAckMsg&, const HelloAckMsg&) = default;
};

struct StateMsg {
  int step = 0;
  double time = 0.0;
  std::vector<AgentSnapshot> agents;  // ascending id
  friend bool operator==(const StateMsg&, const StateMsg&) = default;
};

struct ActionMsg {
  int step = 0;
  std::map<int, Action> actions;
  friend bool operator==(const ActionMsg&, const ActionMsg&) = default;
};

struct ByeMsg {
  std::string reason;
  friend bool operator==(const ByeMsg&, const ByeMsg&) = default;
};

using Message = std::variant<HelloMsg, HelloAckMsg, StateMsg, ActionMsg, ByeMsg>;

inline StateMsg to_message(const StepState& s) { return {s.step, s.time, s.agents}; }
inline StepState to_step_state(const StateMsg& m) { return {m.step, m.time, m.agents}; }

namespace detail {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

// Keys keep their listed order so every line starts with "type".
inline ordered to_json(const Message& m) {
  return std::visit(
      [](const auto& v) -> ordered {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, HelloMsg>) {
          return {{"type", "hello"}, {"version", v.version}, {"scenarioHash", v.scenarioHash},
                  {"seed", v.seed},  {"dt", v.dt},           {"agentIds", v.agentIds}};
        } else if constexpr (std::is_same_v<T, HelloAckMsg>) {
          return {{"type", "hello_ack"}, {"version", v.version}, {"agentIds", v.agentIds}};
        } else if constexpr (std::is_same_v<T, StateMsg>) {
          ordered agents = ordered::array();
          for (const auto& a : v.agents)
            agents.push_back({{"id", a.id},
                              {"class", a.className},
                              {"x", a.state.x},
                              {"y", a.state.y},
                              {"heading", a.state.heading},
                              {"speed", a.state.speed}});
          return {{"type", "state"}, {"step", v.step}, {"time", v.time}, {"agents", agents}};
        } else if constexpr (std::is_same_v<T, ActionMsg>) {
          ordered actions = ordered::array();
          for (const auto& [id, a] : v.actions)
            actions.push_back({{"id", id}, {"throttle", a.throttle()}, {"steer", a.steer()}, {"brake", a.brake()}});
          return {{"type", "action"}, {"step", v.step}, {"actions", actions}};
        } else {
          return {{"type", "bye"}, {"reason", v.reason}};
        }
      },
      m);
}

inline Message from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "hello") {
    HelloMsg m;
    m.version = j.at("version").get<int>();
    m.scenarioHash = j.at("scenarioHash").get<std::uint64_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.dt = j.at("dt").get<double>();
    m.agentIds = j.at("agentIds").get<std::vector<int>>();
    return m;
  }
  if (type == "hello_ack") {
    HelloAckMsg m;
    m.version = j.at("version").get<int>();
    m.agentIds = j.at("agentIds").get<std::vector<int>>();
    return m;
  }
  if (type == "state") {
    StateMsg m;
    m.step = j.at("step").get<int>();
    m.time = j.at("time").get<double>();
    for (const auto& a : j.at("agents")) {
      AgentSnapshot s;
      s.id = a.at("id").get<int>();
      s.className = a.at("class").get<std::string>();
      s.state = {a.at("x").get<double>(), a.at("y").get<double>(), a.at("heading").get<double>(),
                 a.at("speed").get<double>()};
      m.agents.push_back(std::move(s));
    }
    return m;
  }
  if (type == "action") {
    ActionMsg m;
    m.step = j.at("step").get<int>();
    for (const auto& a : j.at("actions")) {
      const int id = a.at("id").get<int>();
      if (!m.actions.emplace(id, Action(a.at("throttle").get<double>(), a.at("steer").get<double>(),
                                        a.at("brake").get<double>()))
               .second)
        throw std::invalid_argument("duplicate action for agent " + std::to_string(id));
    }
    return m;
  }
  if (type == "bye") return ByeMsg{j.at("reason").get<std::string>()};
  throw std::invalid_argument("unknown message type '" + type + "'");
}

}  // namespace detail

/// One line of JSON, newline-terminated.
inline std::string encode(const Message& m) { return detail::to_json(m).dump() + "\n"; }

/// Parses one line (a trailing newline is allowed).
inline Message decode(std::string_view line) {
  std::string text(line);
  if (!text.empty() && text.back() == '\n') text.pop_back();
  if (!text.empty() && text.back() == '\r') text.pop_back();
  if (text.find('\n') != std::string::npos) throw DecodeError(text, "embedded newline");
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DecodeError(text, "malformed JSON");
  if (!j.is_object()) throw DecodeError(text, "not an object");
  try {
    return detail::from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(text, e.what());
  } catch (const std::invalid_argument& e) {
    throw DecodeError(text, e.what());
  }
}

inline const char* message_type(const Message& m) {
  static constexpr const char* names[] = {"hello", "hello_ack", "state", "action", "bye"};
  return names[m.index()];
}

}  // namespace scenegen::protocol
