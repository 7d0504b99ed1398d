#pragma once

#include <atomic>
#include <compare>
#include <cstdint>
#include <functional>
#include <queue>
#include <variant>
#include <vector>

namespace peerfl {

using NodeId = std::uint32_t;

/// Simulated wall-clock seconds. Finite and non-negative.
struct SimTime {
  double seconds = 0.0;

  constexpr SimTime() = default;
  constexpr explicit SimTime(double s) : seconds(s) {}

  friend constexpr auto operator<=>(SimTime, SimTime) = default;
  friend constexpr SimTime operator+(SimTime t, double dt) { return SimTime(t.seconds + dt); }
  friend constexpr double operator-(SimTime a, SimTime b) { return a.seconds - b.seconds; }
};

enum class EventKind { TrainDone, HopArrive, MobilityTick, RoundStart, StopCheck };

struct TrainDone {
  int round = 0;
};
struct HopArrive {
  std::uint64_t message = 0;
  std::size_t hop = 0;  // index into the route of the node just reached
};
struct MobilityTick {};
struct RoundStart {
  int round = 0;
};
struct StopCheck {
  int round = 0;
};

// Alternative order mirrors EventKind so the kind is derived from the payload.
using EventPayload = std::variant<TrainDone, HopArrive, MobilityTick, RoundStart, StopCheck>;

struct SimEvent {
  SimTime time;
  std::uint64_t seq = 0;
  NodeId target = 0;
  EventPayload payload;

  EventKind kind() const { return static_cast<EventKind>(payload.index()); }
};

using StopSignal = std::atomic<bool>;

/// Single-threaded discrete-event scheduler. Events run in (time, seq) order;
/// seq is assigned at scheduling, so equal-time events are FIFO.
class Kernel {
 public:
  using Handler = std::function<void(const SimEvent&)>;

  explicit Kernel(Handler handler = {}) : handler_(std::move(handler)) {}

  void set_handler(Handler handler) { handler_ = std::move(handler); }

  /// Throws SimulationError when `time` lies before now() or is not finite.
  std::uint64_t schedule(SimTime time, NodeId target, EventPayload payload);

  /// Processes events with time <= horizon until the queue drains or `stop`
  /// is set (checked between events). When events remain beyond the horizon
  /// the clock advances to the horizon.
  SimTime run_until(SimTime horizon, const StopSignal& stop);
  SimTime run_until(SimTime horizon);

  SimTime now() const { return now_; }
  std::size_t pending() const { return queue_.size(); }
  std::uint64_t processed() const { return processed_; }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  Handler handler_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
  SimTime now_{};
  std::uint64_t next_seq_ = 0;
  std::uint64_t processed_ = 0;
};

}  // namespace peerfl
