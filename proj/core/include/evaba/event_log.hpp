// SPDX-License-Identifier: Apache-2.0
//
// Structured record of one simulation run. The simulator appends one
// `Delivered` entry per delivery; parties append protocol milestones. The
// auditor replays nothing but this log.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "evaba/messages.hpp"
#include "evaba/types.hpp"

namespace evaba {

struct Delivered {
  std::uint64_t seq = 0;
  PartyId from;
  PartyId to;
  MsgType type = MsgType::send;
  int view = 0;
  int pb_step = 0;  // SEND/ACK only
  std::size_t bytes = 0;
  std::uint64_t injected_at = 0;
  std::uint64_t bound = 0;  // latest step at which the scheduler promised delivery
};

struct CommitteeSelected {
  PartyId party;
  int view = 0;
  std::vector<PartyId> members;
};

/// A party began a step-1 broadcast of `value`.
struct Proposed {
  PartyId party;
  int view = 0;
  Value value;
};

/// `party` delivered `value` in the `step`-th broadcast of `sender`'s promotion.
struct PbDelivered {
  PartyId party;
  PartyId sender;
  int view = 0;
  int step = 0;
  Value value;
};

enum class SigKind { pb, skip };

/// `holder` combined shares into a threshold signature.
struct SigFormed {
  PartyId holder;
  SigKind kind = SigKind::pb;
  PartyId sender;  // promoter for pb signatures
  int view = 0;
  int step = 0;    // pb only
  Value value;     // pb only
  int contributors = 0;
};

struct LeaderElected {
  PartyId party;
  int view = 0;
  PartyId raw;
  PartyId mapped;
};

struct Decided {
  PartyId party;
  int view = 0;
  Value value;
};

struct LockRaised {
  PartyId party;
  int view = 0;
};

/// State snapshot taken when `party` moves into `view`.
struct ViewEntered {
  PartyId party;
  int view = 0;
  int lock = 0;
  int prepare_view = 0;
  Value prepare_value;
  bool decided = false;
};

enum class Milestone {
  first_proposal,     // first valid proposal or suggestion received in the view
  suggestion_quorum,  // n - f suggestions received
  done_sent,
  done_quorum,  // n - f valid DONEs received
  skip_set,
};

struct Reached {
  PartyId party;
  int view = 0;
  Milestone what = Milestone::first_proposal;
};

/// Closing record: network accounting when the run stopped.
struct Halted {
  std::uint64_t injected = 0;
  std::uint64_t delivered = 0;
  std::uint64_t pending = 0;
  std::uint64_t overdue_pending = 0;  // pending envelopes already past their bound
};

using EventBody = std::variant<Delivered, CommitteeSelected, Proposed, PbDelivered, SigFormed, LeaderElected, Decided,
                               LockRaised, ViewEntered, Reached, Halted>;

struct Event {
  std::uint64_t step = 0;
  EventBody body;
};

struct RunHeader {
  std::uint64_t run_id = 0;
  std::uint64_t seed = 0;
  Quorum quorum;
  std::string instance;
  std::vector<PartyId> corrupt;
  std::string validity;
  std::string scheduler;
  int max_views = 0;

  bool honest(PartyId p) const;
};

struct EventLog {
  RunHeader header;
  std::vector<Event> events;

  void record(std::uint64_t step, EventBody body) { events.push_back({step, std::move(body)}); }
};

std::string_view to_string(Milestone m);
std::optional<Milestone> milestone_from_string(std::string_view s);

}  // namespace evaba
