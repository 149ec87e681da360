// SPDX-License-Identifier: Apache-2.0
//
// Every message the protocol puts on the wire, plus the digests that
// signatures bind to.
#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "evaba/crypto_oracle.hpp"
#include "evaba/types.hpp"

namespace evaba {

/// Identifies one provable-broadcast instance: the `step`-th broadcast of
/// `party`'s promotion in `view`.
struct StepId {
  std::string instance;
  PartyId party;
  int view = 0;
  int step = 0;  // 1..4

  friend bool operator==(const StepId&, const StepId&) = default;
};

/// Digest of <StepId, v>; what ACK shares and step signatures sign.
Digest step_digest(const StepId& id, const Value& v);
/// Digest of <instance, SKIP, view>.
Digest skip_digest(std::string_view instance, int view);

enum class CoinPurpose { committee, elect };
std::string coin_label(std::string_view instance, CoinPurpose purpose, int view);

/// <view, sig> proving that `sig` completed step 1 of the leader's promotion
/// in `view`. An absent sig carries no evidence and ranks as view 0.
struct PrepareEvidence {
  int view = 0;
  std::optional<ThresholdSig> sig;
};

/// <value, threshold signature> pair. Used for promotion slots and
/// completion proofs.
struct Evidence {
  Value value;
  ThresholdSig sig;
};

struct CoinShareMsg {
  CoinPurpose purpose = CoinPurpose::committee;
  int view = 0;
  CoinShare share;
};

/// P-PB SEND. Step 1 carries prepare evidence; later steps carry the
/// previous step's threshold signature.
struct SendMsg {
  StepId id;
  Value value;
  std::variant<PrepareEvidence, ThresholdSig> proof;
};

struct AckMsg {
  StepId id;
  SignShare share;
};

/// Proposals and suggestions share a layout: a completed promotion's value
/// and step-4 signature, attributed to its promoter.
struct ProposalMsg {
  int view = 0;
  PartyId promoter;
  Evidence proof;
};

struct SuggestionMsg {
  int view = 0;
  PartyId promoter;
  Evidence proof;
};

struct DoneMsg {
  int view = 0;
  PartyId promoter;
  Evidence proof;
};

struct SkipShareMsg {
  int view = 0;
  SignShare share;
};

struct SkipMsg {
  int view = 0;
  ThresholdSig sig;
};

struct ViewChangeMsg {
  int view = 0;
  std::optional<Evidence> prepare;  // <v2, t2>, validates at step 1
  std::optional<Evidence> lock;     // <v3, t3>, validates at step 2
  std::optional<Evidence> commit;   // <v4, t4>, validates at step 3
};

using ProtocolMessage = std::variant<CoinShareMsg, SendMsg, AckMsg, ProposalMsg, SuggestionMsg, DoneMsg,
                                     SkipShareMsg, SkipMsg, ViewChangeMsg>;

enum class MsgType {
  share_cs,
  share_elect,
  send,
  ack,
  proposal,
  suggestion,
  done,
  skip_share,
  skip,
  view_change,
};
inline constexpr int kMsgTypeCount = 10;

inline constexpr std::array<MsgType, kMsgTypeCount> kAllMsgTypes = {
    MsgType::share_cs, MsgType::share_elect, MsgType::send,     MsgType::ack,  MsgType::proposal,
    MsgType::suggestion, MsgType::done,      MsgType::skip_share, MsgType::skip, MsgType::view_change,
};

std::string_view to_string(MsgType t);
std::optional<MsgType> msg_type_from_string(std::string_view s);

MsgType type_of(const ProtocolMessage& m);
int view_of(const ProtocolMessage& m);
/// Payload bytes plus `sig_bytes` per signature object.
std::size_t size_estimate(const ProtocolMessage& m, std::size_t sig_bytes);

}  // namespace evaba
