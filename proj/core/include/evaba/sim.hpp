// SPDX-License-Identifier: Apache-2.0
//
// Deterministic discrete-event simulation of n parties over reliable,
// authenticated, asynchronous point-to-point links. Simulation time is the
// number of deliveries performed; the adversary only chooses delivery order.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "evaba/event_log.hpp"
#include "evaba/messages.hpp"
#include "evaba/types.hpp"

namespace evaba {

struct Envelope {
  PartyId from;
  PartyId to;
  ProtocolMessage payload;
  std::uint64_t seq = 0;
  std::uint64_t injected_at = 0;
  std::uint64_t bound = 0;
};

struct SchedulerPolicy {
  enum class Kind { fifo, random_delay, worst_case_rotation, partition_then_heal };

  Kind kind = Kind::fifo;
  std::uint64_t seed = 0;        // random-delay; 0 means "use the run seed"
  std::uint64_t heal_step = 0;   // partition-then-heal; 0 means 10 * n^2
  std::vector<PartyId> isolated; // partition-then-heal; empty means parties 1..f

  /// "fifo", "random-delay[:seed]", "worst-case-rotation",
  /// "partition-then-heal[:heal-step]".
  static SchedulerPolicy parse(std::string_view text);
  std::string name() const;
};

struct ByzantineBehavior {
  enum class Kind { honest, crash, equivocate_send, unselected_broadcaster, silent_after_promote, done_spammer };

  Kind kind = Kind::honest;
  std::uint64_t crash_after = 0;  // crash only: the party is dead from this delivery step on

  /// "honest", "crash[:after-step]", "equivocate-send",
  /// "unselected-broadcaster", "silent-after-promote", "done-spammer".
  static ByzantineBehavior parse(std::string_view text);
  std::string name() const;
  bool honest() const { return kind == Kind::honest; }
};

/// Chooses which pending envelope is delivered next. Every policy is fair:
/// an envelope injected at step s with k envelopes already pending is
/// delivered no later than step s + fairness_cap() + k.
class Scheduler {
 public:
  Scheduler(SchedulerPolicy policy, Quorum quorum, std::uint64_t run_seed);

  void push(Envelope e, std::uint64_t now);
  std::optional<Envelope> pop(std::uint64_t now);

  std::size_t pending() const { return store_.size(); }
  std::uint64_t fairness_cap() const { return cap_; }
  const SchedulerPolicy& policy() const { return policy_; }
  /// Pending envelopes whose delivery bound is already in the past.
  std::uint64_t overdue(std::uint64_t now) const;

 private:
  using Key = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>;  // (k1, k2, seq)

  Key key_for(const Envelope& e, std::uint64_t now);
  bool isolated(PartyId p) const;
  Envelope take(std::map<std::uint64_t, std::pair<Envelope, Key>>::iterator it);

  SchedulerPolicy policy_;
  Quorum quorum_;
  std::mt19937_64 rng_;
  std::uint64_t cap_ = 0;
  std::uint64_t max_delay_ = 0;
  std::uint64_t rotation_period_ = 0;
  std::map<std::uint64_t, std::pair<Envelope, Key>> store_;  // by seq
  std::set<Key> order_;
};

class HaltError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Simulator;

/// Capabilities handed to a node while it handles an event.
class Context {
 public:
  Context(Simulator& sim, PartyId self) : sim_(&sim), self_(self) {}

  PartyId self() const { return self_; }
  void send(PartyId to, ProtocolMessage m);
  void multicast(const ProtocolMessage& m);
  std::uint64_t now() const;
  const Quorum& quorum() const;
  /// Null when the run is not recording.
  EventLog* log() const;
  void record(EventBody body) const;

 private:
  Simulator* sim_;
  PartyId self_;
};

class Node {
 public:
  virtual ~Node() = default;
  virtual void start(Context&) {}
  virtual void on_message(PartyId from, const ProtocolMessage& m, Context& ctx) = 0;
};

struct DeliveryEvent {
  std::uint64_t step = 0;
  PartyId from;
  PartyId to;
  MsgType type = MsgType::send;
  int view = 0;
  bool handled = true;  // false when the recipient had crashed
};

struct Quiescent {};

using StepResult = std::variant<DeliveryEvent, Quiescent>;

/// Per-run message counters, accumulated at injection time.
struct MessageCounters {
  std::array<std::uint64_t, kMsgTypeCount> by_type{};
  std::map<int, std::array<std::uint64_t, kMsgTypeCount>> by_view;
  std::map<std::pair<int, int>, std::uint64_t> sends;  // (view, step)
  std::map<std::pair<int, int>, std::uint64_t> acks;   // (view, step)
  std::uint64_t bytes = 0;

  std::uint64_t total() const;
};

class Simulator {
 public:
  Simulator(Quorum quorum, SchedulerPolicy policy, std::uint64_t run_seed, std::size_t sig_bytes = 48,
            EventLog* log = nullptr);

  /// Installs the node for party `id`. All n nodes must be installed before start().
  void install(PartyId id, std::unique_ptr<Node> node);
  void crash_at(PartyId id, std::uint64_t step);

  void start();
  void inject(PartyId from, PartyId to, ProtocolMessage payload);
  void multicast(PartyId from, const ProtocolMessage& payload);
  StepResult step();
  void halt();

  std::uint64_t now() const { return now_; }
  bool halted() const { return halted_; }
  bool crashed(PartyId p) const;
  const Quorum& quorum() const { return quorum_; }
  const MessageCounters& counters() const { return counters_; }
  const Scheduler& scheduler() const { return scheduler_; }
  std::uint64_t injected() const { return next_seq_; }
  std::uint64_t delivered() const { return delivered_; }
  EventLog* log() const { return log_; }
  Node& node(PartyId id) const;

 private:
  Quorum quorum_;
  Scheduler scheduler_;
  std::size_t sig_bytes_;
  EventLog* log_;
  std::vector<std::unique_ptr<Node>> nodes_;        // index 0 unused
  std::vector<std::optional<std::uint64_t>> crash_; // index 0 unused
  MessageCounters counters_;
  std::uint64_t now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t delivered_ = 0;
  bool halted_ = false;
};

}  // namespace evaba
