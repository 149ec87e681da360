// SPDX-License-Identifier: Apache-2.0
//
// One party's Efficient-VABA state machine. Per view:
//   committee selection -> promotion (members only) -> proposal/suggestion
//   -> DONE / SKIP barrier -> election + mapping -> view change.
//
// Every "wait until" of the protocol is a phase; progress() advances through
// phases whenever a delivered message satisfies the pending condition.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "evaba/committee.hpp"
#include "evaba/election.hpp"
#include "evaba/ppb.hpp"
#include "evaba/promotion.hpp"
#include "evaba/sim.hpp"

namespace evaba {

/// PREPARE: the best step-1 evidence this party learned, and the value it
/// promotes when selected.
struct Prepare {
  int view = 0;
  Value value;
  std::optional<ThresholdSig> proof;
};

struct Decision {
  Value value;
  int view = 0;
  ThresholdSig evidence;  // step-3 signature of the view leader's promotion
};

struct PartyConfig {
  std::string instance = "evaba";
  Quorum quorum;
  Value input;
  Validity validity;
  ByzantineBehavior behavior;
  /// Second value an equivocating sender pushes to part of the network.
  Value alternate_input;
};

class Party final : public Node {
 public:
  enum class Phase { selecting, running, electing, view_change };

  Party(PartyConfig config, PartyId self, CryptoOracle& oracle);

  void start(Context& ctx) override;
  void on_message(PartyId from, const ProtocolMessage& m, Context& ctx) override;

  PartyId id() const { return self_; }
  int view() const { return view_; }
  Phase phase() const { return phase_; }
  int lock() const { return lock_; }
  const Prepare& prepare() const { return prepare_; }
  const std::optional<Decision>& decision() const { return decision_; }
  const PartyConfig& config() const { return config_; }

  std::optional<Committee> committee_of(int view) const;
  /// Party[view]: the mapped leader, once this party finished the election.
  std::optional<PartyId> leader_of(int view) const;
  bool skip(int view) const;
  int done_count(int view) const;
  int suggestions(int view) const;
  int view_changes(int view) const;
  const PbReceiver& pb() const { return pb_; }
  const PromotionReceiver& evidence() const { return evidence_; }
  const std::optional<Promotion>& promotion() const { return promotion_; }

 private:
  struct ViewState {
    std::optional<Committee> committee;
    bool suggested = false;
    std::set<PartyId> suggesters;
    std::optional<std::pair<PartyId, Evidence>> best;  // first valid completion proof seen
    bool done_sent = false;
    std::set<PartyId> done_from;
    bool skip_share_sent = false;
    std::map<PartyId, SignShare> skip_shares;
    bool skip = false;
    bool skip_sent = false;
    std::optional<ElectionResult> election;
    std::set<PartyId> vc_from;
    std::vector<std::pair<PartyId, ProtocolMessage>> waiting_committee;
    std::vector<std::pair<PartyId, ViewChangeMsg>> waiting_leader;
  };

  void dispatch(PartyId from, const ProtocolMessage& m);
  void progress();
  void enter_view(int view);
  void start_promotion();
  void on_skip();

  void handle_send(PartyId from, const SendMsg& msg);
  void handle_ack(PartyId from, const AckMsg& msg);
  void handle_proposal(PartyId from, int view, PartyId promoter, const Evidence& proof, bool suggestion);
  void handle_done(PartyId from, const DoneMsg& msg);
  void handle_skip_share(PartyId from, const SkipShareMsg& msg);
  void handle_skip(PartyId from, const SkipMsg& msg);
  void handle_view_change(PartyId from, const ViewChangeMsg& msg);

  void promotion_completed();
  void send_done(int view, ViewState& vs);
  void set_skip(int view, ViewState& vs);
  void step_signed(int step, const Value& value, const ThresholdSig& sig);
  bool completion_valid(int view, PartyId promoter, const Evidence& proof) const;
  PbEnv env() const;

  void emit(const ProtocolMessage& m);
  void emit_to(PartyId to, ProtocolMessage m);
  void record(EventBody body) const;
  bool is(ByzantineBehavior::Kind k) const { return config_.behavior.kind == k; }

  PartyConfig config_;
  PartyId self_;
  CryptoOracle& oracle_;
  SigningKey key_;
  Context* ctx_ = nullptr;

  int view_ = 0;
  Phase phase_ = Phase::selecting;
  int lock_ = 0;
  Prepare prepare_;
  std::optional<Decision> decision_;
  bool silent_ = false;

  CommitteeSelector committees_;
  LeaderElection elections_;
  PbReceiver pb_;
  PromotionReceiver evidence_;
  std::optional<Promotion> promotion_;
  std::vector<PbBroadcast> equivocation_;
  std::map<int, ViewState> views_;
};

}  // namespace evaba
