#pragma once
// Lockstep sessions: the simulator (client) sends one state per step and the
// behavior server answers each with exactly one action message.
//
// The server rebuilds the scene from the hello seed, so it needs the same
// program and world as the client. It keeps no physics of its own: behaviors
// read the ground truth carried by each state message.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scenegen/protocol/messages.hpp"
#include "scenegen/protocol/transport.hpp"
#include "scenegen/sampler.hpp"
#include "scenegen/simulation.hpp"

namespace scenegen::protocol {

class ProtocolError : public Error {
 public:
  enum class Kind { OutOfOrder, StepMismatch, VersionMismatch, HashMismatch, AgentMismatch, Busy, Closed };
  ProtocolError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

using LogFn = std::function<void(const std::string&)>;

struct ServerOptions {
  int timeoutMs = kDefaultTimeoutMs;   // per message once a session is open
  int acceptTimeoutMs = -1;            // waiting for the first client; negative = forever
  int maxRejections = kDefaultMaxRejections;
  LogFn log;
};

struct SessionSummary {
  std::string byeReason;  // "done", "eof", ...
  int steps = 0;
  int busyRejected = 0;
};

class StepServer {
 public:
  StepServer(const dsl::CheckedProgram& prog, const WorldModel& world, Listener& listener, ServerOptions opts = {})
      : prog_(prog), world_(world), listener_(listener), opts_(std::move(opts)) {}

  /// Serves a single session to completion.
  SessionSummary serve() {
    auto s = listener_.accept(opts_.acceptTimeoutMs);
    if (!s) throw TimeoutError("no client connected");
    session_ = std::move(*s);
    log("client connected");
    try {
      return run_session();
    } catch (const ProtocolError& e) {
      send_bye(std::string("protocol error: ") + e.what());
      throw;
    } catch (const TimeoutError&) {
      send_bye("timeout");
      throw;
    } catch (const Error& e) {
      send_bye(std::string("error: ") + e.what());
      throw;
    }
  }

 private:
  SessionSummary run_session() {
    SessionSummary sum;
    std::optional<Scene> scene;
    std::unique_ptr<BehaviorRuntime> runtime;
    for (;;) {
      std::optional<std::string> line = next_line(sum);
      if (!line) {
        log("bye (eof)");
        sum.byeReason = "eof";
        return sum;
      }
      const Message m = decode(*line);
      if (const auto* hello = std::get_if<HelloMsg>(&m)) {
        if (runtime) throw ProtocolError(ProtocolError::Kind::OutOfOrder, "second hello in one session");
        if (hello->version != kProtocolVersion)
          throw ProtocolError(ProtocolError::Kind::VersionMismatch,
                              "protocol version " + std::to_string(hello->version) + " is not supported");
        if (hello->scenarioHash != prog_.sourceHash)
          throw ProtocolError(ProtocolError::Kind::HashMismatch, "scenario hash does not match the served program");
        Rng rng(hello->seed);
        scene = sample_scene(prog_, world_, rng, opts_.maxRejections);
        runtime = std::make_unique<BehaviorRuntime>(prog_, *scene, rng);
        if (runtime->agent_ids() != hello->agentIds)
          throw ProtocolError(ProtocolError::Kind::AgentMismatch, "client and server disagree on agent ids");
        session_.write_line(encode(HelloAckMsg{kProtocolVersion, runtime->agent_ids()}));
        log("hello seed=" + std::to_string(hello->seed));
      } else if (const auto* st = std::get_if<StateMsg>(&m)) {
        if (!runtime) throw ProtocolError(ProtocolError::Kind::OutOfOrder, "state message before hello");
        if (st->step != sum.steps)
          throw ProtocolError(ProtocolError::Kind::StepMismatch, "expected state for step " +
                                                                     std::to_string(sum.steps) + ", got " +
                                                                     std::to_string(st->step));
        ActionMsg reply{st->step, runtime->actions(to_step_state(*st))};
        session_.write_line(encode(reply));
        ++sum.steps;
      } else if (const auto* bye = std::get_if<ByeMsg>(&m)) {
        log("bye (" + bye->reason + ")");
        sum.byeReason = bye->reason;
        return sum;
      } else {
        throw ProtocolError(ProtocolError::Kind::OutOfOrder,
                            std::string("unexpected '") + message_type(m) + "' message from client");
      }
    }
  }

  // Next line from the session; turns away other clients while waiting.
  std::optional<std::string> next_line(SessionSummary& sum) {
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + std::chrono::milliseconds(opts_.timeoutMs);
    for (;;) {
      if (session_.has_buffered_line()) return session_.read_line(0);
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
      if (left <= 0) throw TimeoutError("client sent nothing for " + std::to_string(opts_.timeoutMs) + " ms");
      pollfd fds[2] = {{session_.fd(), POLLIN, 0}, {listener_.fd(), POLLIN, 0}};
      const int r = ::poll(fds, 2, static_cast<int>(left));
      if (r < 0 && errno != EINTR) throw TransportError(std::string("poll: ") + std::strerror(errno));
      if (r <= 0) continue;
      if (fds[1].revents & POLLIN) {
        if (auto extra = listener_.accept(0)) {
          extra->write_line(encode(ByeMsg{"busy"}));
          ++sum.busyRejected;
          log("turned away a second client (busy)");
        }
      }
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        const auto left2 = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
        return session_.read_line(static_cast<int>(std::max<long long>(left2, 1)));
      }
    }
  }

  void send_bye(const std::string& reason) {
    try {
      if (session_.is_open()) session_.write_line(encode(ByeMsg{reason}));
    } catch (const TransportError&) {
    }
  }

  void log(const std::string& msg) const {
    if (opts_.log) opts_.log(msg);
  }

  const dsl::CheckedProgram& prog_;
  const WorldModel& world_;
  Listener& listener_;
  ServerOptions opts_;
  LineStream session_;
};

/// Simulator-side action source backed by a remote behavior server.
class RemoteActionSource : public ActionSource {
 public:
  explicit RemoteActionSource(LineStream stream, int timeoutMs = kDefaultTimeoutMs)
      : stream_(std::move(stream)), timeoutMs_(timeoutMs) {}

  static RemoteActionSource connect(const Endpoint& e, int timeoutMs = kDefaultTimeoutMs) {
    return RemoteActionSource(connect_tcp(e, timeoutMs), timeoutMs);
  }

  void hello(std::uint64_t scenarioHash, std::uint64_t seed, double dt, const std::vector<int>& agentIds) {
    stream_.write_line(encode(HelloMsg{kProtocolVersion, scenarioHash, seed, dt, agentIds}));
    const Message m = receive(-1);
    if (const auto* bye = std::get_if<ByeMsg>(&m)) {
      const auto kind = bye->reason == "busy" ? ProtocolError::Kind::Busy : ProtocolError::Kind::Closed;
      throw ProtocolError(kind, "server refused the session: " + bye->reason);
    }
    const auto* ack = std::get_if<HelloAckMsg>(&m);
    if (!ack) throw ProtocolError(ProtocolError::Kind::OutOfOrder, "expected hello_ack");
    if (ack->version != kProtocolVersion)
      throw ProtocolError(ProtocolError::Kind::VersionMismatch, "server speaks protocol version " +
                                                                    std::to_string(ack->version));
    if (ack->agentIds != agentIds)
      throw ProtocolError(ProtocolError::Kind::AgentMismatch, "server and client disagree on agent ids");
    greeted_ = true;
  }

  std::map<int, Action> actions(const StepState& state) override {
    if (!greeted_) throw ProtocolError(ProtocolError::Kind::OutOfOrder, "hello has not been exchanged");
    try {
      stream_.write_line(encode(to_message(state)));
    } catch (const TransportError&) {
      throw TimeoutError("server connection lost", state.step);
    }
    const Message m = receive(state.step);
    if (const auto* bye = std::get_if<ByeMsg>(&m))
      throw ProtocolError(ProtocolError::Kind::Closed, "server closed the session at step " +
                                                           std::to_string(state.step) + ": " + bye->reason);
    const auto* act = std::get_if<ActionMsg>(&m);
    if (!act) throw ProtocolError(ProtocolError::Kind::OutOfOrder, "expected an action message");
    if (act->step != state.step)
      throw ProtocolError(ProtocolError::Kind::StepMismatch, "action answers step " + std::to_string(act->step) +
                                                                 ", expected " + std::to_string(state.step));
    return act->actions;
  }

  void finish(const std::string& reason) override {
    if (!stream_.is_open()) return;
    try {
      stream_.write_line(encode(ByeMsg{reason}));
    } catch (const TransportError&) {
    }
    stream_.close();
  }

 private:
  Message receive(int step) {
    std::optional<std::string> line;
    try {
      line = stream_.read_line(timeoutMs_);
    } catch (const TimeoutError& e) {
      throw TimeoutError("no reply from server", step);
    }
    if (!line) throw TimeoutError("server closed the connection", step);
    return decode(*line);
  }

  LineStream stream_;
  int timeoutMs_;
  bool greeted_ = false;
};

}  // namespace scenegen::protocol
