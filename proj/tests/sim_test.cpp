// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <map>
#include <vector>

#include "evaba/sim.hpp"

namespace evaba {
namespace {

const Quorum kFour{4, 1};

ProtocolMessage skip_msg(int view) { return SkipMsg{view, ThresholdSig{}}; }

/// Records every delivery; optionally answers each message with `fanout`
/// fresh multicasts until `budget` runs out.
struct Recorder : Node {
  std::vector<std::pair<PartyId, int>> seen;  // sender, view
  int fanout = 0;
  int* budget = nullptr;

  void on_message(PartyId from, const ProtocolMessage& m, Context& ctx) override {
    seen.emplace_back(from, view_of(m));
    for (int i = 0; i < fanout && budget && *budget > 0; ++i) {
      --*budget;
      ctx.multicast(skip_msg(view_of(m) + 1));
    }
  }
};

struct Net {
  Simulator sim;
  std::vector<Recorder*> nodes{nullptr};

  explicit Net(SchedulerPolicy p = {}, std::uint64_t seed = 1, EventLog* log = nullptr, Quorum q = kFour)
      : sim(q, std::move(p), seed, 48, log) {
    for (int k = 1; k <= q.n; ++k) {
      auto r = std::make_unique<Recorder>();
      nodes.push_back(r.get());
      sim.install(PartyId{k}, std::move(r));
    }
  }
  void drain() {
    while (std::holds_alternative<DeliveryEvent>(sim.step())) {
    }
  }
};

TEST(Simulator, DeliversEachInjectedEnvelopeOnce) {
  Net net;
  net.sim.inject(PartyId{1}, PartyId{2}, skip_msg(1));
  net.drain();
  ASSERT_EQ(net.nodes[2]->seen.size(), 1u);
  EXPECT_EQ(net.nodes[2]->seen[0].first, PartyId{1});
  EXPECT_TRUE(std::holds_alternative<Quiescent>(net.sim.step()));
}

TEST(Simulator, NetworkDoesNotDeduplicate) {
  Net net;
  net.sim.inject(PartyId{1}, PartyId{2}, skip_msg(1));
  net.sim.inject(PartyId{1}, PartyId{2}, skip_msg(1));
  net.drain();
  EXPECT_EQ(net.nodes[2]->seen.size(), 2u);
}

TEST(Simulator, EmptyQueueIsQuiescent) {
  Net net;
  EXPECT_TRUE(std::holds_alternative<Quiescent>(net.sim.step()));
}

TEST(Simulator, RejectsInjectionFromCrashedPartyOrAfterHalt) {
  Net net;
  net.sim.crash_at(PartyId{3}, 0);
  EXPECT_THROW(net.sim.inject(PartyId{3}, PartyId{1}, skip_msg(1)), HaltError);
  net.sim.halt();
  EXPECT_THROW(net.sim.inject(PartyId{1}, PartyId{2}, skip_msg(1)), HaltError);
}

TEST(Simulator, CrashedSendersInFlightEnvelopesStillArrive) {
  Net net;
  net.sim.inject(PartyId{3}, PartyId{1}, skip_msg(1));
  net.sim.crash_at(PartyId{3}, 0);
  net.sim.inject(PartyId{1}, PartyId{3}, skip_msg(1));
  net.drain();
  EXPECT_EQ(net.nodes[1]->seen.size(), 1u);
  EXPECT_TRUE(net.nodes[3]->seen.empty());
}

TEST(Simulator, FifoDeliversLowestSequenceFirst) {
  Net net;
  for (int v = 5; v <= 6; ++v) net.sim.inject(PartyId{1}, PartyId{2}, skip_msg(v));
  net.drain();
  ASSERT_EQ(net.nodes[2]->seen.size(), 2u);
  EXPECT_EQ(net.nodes[2]->seen[0].second, 5);
  EXPECT_EQ(net.nodes[2]->seen[1].second, 6);
}

TEST(Simulator, MulticastReachesEveryPartyIncludingSelf) {
  Net net;
  net.sim.multicast(PartyId{2}, skip_msg(1));
  EXPECT_EQ(net.sim.counters().by_type[static_cast<std::size_t>(MsgType::skip)], 4u);
  net.drain();
  for (int k = 1; k <= 4; ++k) EXPECT_EQ(net.nodes[k]->seen.size(), 1u);
}

std::vector<std::tuple<int, int, std::uint64_t>> delivery_order(SchedulerPolicy p, std::uint64_t seed) {
  EventLog log;
  Net net(p, seed, &log);
  int budget = 60;
  for (int k = 1; k <= 4; ++k) {
    net.nodes[k]->fanout = 1;
    net.nodes[k]->budget = &budget;
  }
  net.sim.multicast(PartyId{1}, skip_msg(1));
  net.sim.multicast(PartyId{2}, skip_msg(1));
  net.drain();
  std::vector<std::tuple<int, int, std::uint64_t>> out;
  for (const auto& e : log.events) {
    if (const auto* d = std::get_if<Delivered>(&e.body)) out.emplace_back(d->from.index(), d->to.index(), d->seq);
  }
  return out;
}

TEST(Simulator, RandomDelayReplaysIdentically) {
  const auto p = SchedulerPolicy::parse("random-delay");
  EXPECT_EQ(delivery_order(p, 11), delivery_order(p, 11));
  EXPECT_NE(delivery_order(p, 11), delivery_order(p, 12));
}

class Fairness : public ::testing::TestWithParam<const char*> {};

TEST_P(Fairness, EveryEnvelopeIsDeliveredWithinItsBound) {
  EventLog log;
  Net net(SchedulerPolicy::parse(GetParam()), 3, &log);
  int budget = 1500;
  for (int k = 1; k <= 4; ++k) {
    net.nodes[k]->fanout = 2;
    net.nodes[k]->budget = &budget;
  }
  for (int k = 1; k <= 4; ++k) net.sim.multicast(PartyId{k}, skip_msg(0));
  net.drain();
  net.sim.halt();

  std::map<std::uint64_t, int> seen;
  for (const auto& e : log.events) {
    if (const auto* d = std::get_if<Delivered>(&e.body)) {
      ++seen[d->seq];
      EXPECT_LE(e.step, d->bound) << "seq " << d->seq;
    }
  }
  EXPECT_EQ(seen.size(), net.sim.injected());
  for (const auto& [seq, count] : seen) EXPECT_EQ(count, 1) << "seq " << seq;
  const auto& halted = std::get<Halted>(log.events.back().body);
  EXPECT_EQ(halted.pending, 0u);
  EXPECT_EQ(halted.delivered, halted.injected);
}

INSTANTIATE_TEST_SUITE_P(Policies, Fairness,
                         ::testing::Values("fifo", "random-delay", "worst-case-rotation", "partition-then-heal",
                                           "partition-then-heal:5"));

TEST(Scheduler, PartitionHoldsCrossTrafficUntilHeal) {
  // n = 4, f = 1: party 1 is cut off from the rest until step 40.
  EventLog log;
  Net net(SchedulerPolicy::parse("partition-then-heal:40"), 1, &log);
  int budget = 200;
  for (int k = 2; k <= 4; ++k) {
    net.nodes[k]->fanout = 1;
    net.nodes[k]->budget = &budget;
  }
  net.sim.inject(PartyId{2}, PartyId{1}, skip_msg(1));
  net.sim.multicast(PartyId{3}, skip_msg(1));
  net.drain();
  std::uint64_t first_cross = 0;
  for (const auto& e : log.events) {
    const auto* d = std::get_if<Delivered>(&e.body);
    if (d && (d->from == PartyId{1}) != (d->to == PartyId{1})) {
      first_cross = e.step;
      break;
    }
  }
  EXPECT_GT(first_cross, 40u);
}

TEST(Scheduler, WorstCaseRotationStarvesTheVictim) {
  // Victim for steps [0, 64) is party 1. With other traffic pending, its
  // envelope waits behind everything else.
  EventLog log;
  Net net(SchedulerPolicy::parse("worst-case-rotation"), 1, &log);
  net.sim.inject(PartyId{1}, PartyId{2}, skip_msg(9));
  for (int i = 0; i < 10; ++i) net.sim.inject(PartyId{3}, PartyId{4}, skip_msg(1));
  net.drain();
  const auto& last = std::get<Delivered>(log.events.back().body);
  EXPECT_EQ(last.from, PartyId{1});
}

TEST(SchedulerPolicy, ParsesAndRejects) {
  EXPECT_EQ(SchedulerPolicy::parse("fifo").kind, SchedulerPolicy::Kind::fifo);
  EXPECT_EQ(SchedulerPolicy::parse("random-delay:9").seed, 9u);
  EXPECT_EQ(SchedulerPolicy::parse("partition-then-heal:100").heal_step, 100u);
  EXPECT_THROW(SchedulerPolicy::parse("partition-then-heal:0"), ConfigError);
  EXPECT_THROW(SchedulerPolicy::parse("fifo:3"), ConfigError);
  EXPECT_THROW(SchedulerPolicy::parse("chaos"), ConfigError);
  for (const char* s : {"fifo", "random-delay", "worst-case-rotation", "partition-then-heal:7"})
    EXPECT_EQ(SchedulerPolicy::parse(s).name(), s);
}

TEST(ByzantineBehavior, ParsesEveryKind) {
  for (const char* s : {"honest", "crash:12", "equivocate-send", "unselected-broadcaster", "silent-after-promote",
                        "done-spammer"})
    EXPECT_EQ(ByzantineBehavior::parse(s).name(), s);
  EXPECT_EQ(ByzantineBehavior::parse("crash").crash_after, 0u);
  EXPECT_THROW(ByzantineBehavior::parse("sneaky"), ConfigError);
}

}  // namespace
}  // namespace evaba
