#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "error.hpp"
#include "kernel.hpp"

using namespace peerfl;

namespace {

struct Trace {
  std::vector<std::pair<double, int>> seen;  // (time, round tag)
};

Kernel recording_kernel(Trace& trace) {
  return Kernel([&trace](const SimEvent& ev) {
    trace.seen.emplace_back(ev.time.seconds, std::get<RoundStart>(ev.payload).round);
  });
}

}  // namespace

TEST(Kernel, EarlierEventRunsFirstRegardlessOfScheduleOrder) {
  Trace t;
  Kernel k = recording_kernel(t);
  k.schedule(SimTime(5.0), 0, RoundStart{5});
  k.schedule(SimTime(3.0), 0, RoundStart{3});
  k.run_until(SimTime(100.0));
  ASSERT_EQ(t.seen.size(), 2u);
  EXPECT_EQ(t.seen[0].second, 3);
  EXPECT_EQ(t.seen[1].second, 5);
}

TEST(Kernel, EqualTimesAreFifo) {
  Trace t;
  Kernel k = recording_kernel(t);
  k.schedule(SimTime(7.0), 0, RoundStart{1});
  k.schedule(SimTime(7.0), 0, RoundStart{2});
  k.schedule(SimTime(7.0), 0, RoundStart{3});
  k.run_until(SimTime(10.0));
  ASSERT_EQ(t.seen.size(), 3u);
  EXPECT_EQ(t.seen[0].second, 1);
  EXPECT_EQ(t.seen[1].second, 2);
  EXPECT_EQ(t.seen[2].second, 3);
}

TEST(Kernel, SchedulingIntoThePastThrows) {
  Kernel k([&](const SimEvent&) {});
  k.schedule(SimTime(2.0), 0, RoundStart{});
  k.run_until(SimTime(2.0));
  EXPECT_EQ(k.now(), SimTime(2.0));
  EXPECT_THROW(k.schedule(SimTime(1.0), 0, RoundStart{}), SimulationError);
  EXPECT_NO_THROW(k.schedule(SimTime(2.0), 0, RoundStart{}));
}

TEST(Kernel, NonFiniteTimeThrows) {
  Kernel k;
  EXPECT_THROW(k.schedule(SimTime(std::numeric_limits<double>::infinity()), 0, RoundStart{}), SimulationError);
  EXPECT_THROW(k.schedule(SimTime(std::nan("")), 0, RoundStart{}), SimulationError);
}

TEST(Kernel, EmptyQueueLeavesTimeUnchanged) {
  Kernel k;
  EXPECT_EQ(k.run_until(SimTime(100.0)), SimTime(0.0));
  EXPECT_EQ(k.now(), SimTime(0.0));
}

TEST(Kernel, HorizonCutsAndAdvancesClock) {
  Trace t;
  Kernel k = recording_kernel(t);
  for (int i = 1; i <= 3; ++i) k.schedule(SimTime(i), 0, RoundStart{i});
  EXPECT_EQ(k.run_until(SimTime(2.5)), SimTime(2.5));
  EXPECT_EQ(t.seen.size(), 2u);
  EXPECT_EQ(k.pending(), 1u);
  k.run_until(SimTime(10.0));
  EXPECT_EQ(t.seen.size(), 3u);
  EXPECT_EQ(k.now(), SimTime(3.0));
}

TEST(Kernel, StopSignalCheckedBetweenEvents) {
  StopSignal stop{false};
  int handled = 0;
  Kernel k([&](const SimEvent&) {
    ++handled;
    stop = true;
  });
  for (int i = 0; i < 5; ++i) k.schedule(SimTime(i), 0, RoundStart{i});
  k.run_until(SimTime(100.0), stop);
  EXPECT_EQ(handled, 1);
  EXPECT_EQ(k.pending(), 4u);
}

TEST(Kernel, HandlersMayScheduleFollowUps) {
  std::vector<double> times;
  Kernel k;
  k.set_handler([&](const SimEvent& ev) {
    times.push_back(ev.time.seconds);
    if (times.size() < 4) k.schedule(ev.time + 0.5, ev.target, TrainDone{});
  });
  k.schedule(SimTime(0.0), 0, TrainDone{});
  k.run_until(SimTime(100.0));
  EXPECT_EQ(times, (std::vector<double>{0.0, 0.5, 1.0, 1.5}));
  EXPECT_EQ(k.processed(), 4u);
}

TEST(Kernel, KindFollowsPayload) {
  SimEvent ev{SimTime(0), 0, 0, HopArrive{3, 1}};
  EXPECT_EQ(ev.kind(), EventKind::HopArrive);
  ev.payload = StopCheck{2};
  EXPECT_EQ(ev.kind(), EventKind::StopCheck);
  ev.payload = MobilityTick{};
  EXPECT_EQ(ev.kind(), EventKind::MobilityTick);
}

// Property: random schedules are processed in nondecreasing (time, seq) order
// and nothing within the horizon is lost.
TEST(Kernel, RandomSchedulesProcessInTotalOrder) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<double, std::uint64_t>> order;
    Kernel k;
    int spawned = 0;
    k.set_handler([&](const SimEvent& ev) {
      order.emplace_back(ev.time.seconds, ev.seq);
      if (spawned < 200) {
        ++spawned;
        std::uniform_int_distribution<int> dt(0, 3);
        k.schedule(ev.time + dt(rng), 0, RoundStart{});
      }
    });
    std::uniform_int_distribution<int> t0(0, 10);
    for (int i = 0; i < 50; ++i) k.schedule(SimTime(t0(rng)), 0, RoundStart{});
    k.run_until(SimTime(1e9));
    EXPECT_EQ(order.size(), 250u);
    EXPECT_TRUE(std::is_sorted(order.begin(), order.end()));
  }
}
