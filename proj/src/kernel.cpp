#include "kernel.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace peerfl {

std::uint64_t Kernel::schedule(SimTime time, NodeId target, EventPayload payload) {
  if (!std::isfinite(time.seconds) || time < now_) {
    throw SimulationError("cannot schedule event at t=" + std::to_string(time.seconds) +
                          " before current time t=" + std::to_string(now_.seconds));
  }
  const std::uint64_t seq = next_seq_++;
  queue_.push(SimEvent{time, seq, target, std::move(payload)});
  return seq;
}

SimTime Kernel::run_until(SimTime horizon, const StopSignal& stop) {
  while (!queue_.empty() && !stop.load(std::memory_order_relaxed)) {
    if (queue_.top().time > horizon) {
      if (horizon > now_) now_ = horizon;
      return now_;
    }
    SimEvent ev = queue_.top();
    queue_.pop();
    now_ = ev.time;
    ++processed_;
    if (handler_) handler_(ev);
  }
  return now_;
}

SimTime Kernel::run_until(SimTime horizon) {
  StopSignal never{false};
  return run_until(horizon, never);
}

}  // namespace peerfl
