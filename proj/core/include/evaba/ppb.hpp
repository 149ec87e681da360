// SPDX-License-Identifier: Apache-2.0
//
// Prioritized provable broadcast: receivers sign only for senders that sit
// in the current view's committee, and only once per StepId.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <variant>

#include "evaba/committee.hpp"
#include "evaba/crypto_oracle.hpp"
#include "evaba/messages.hpp"

namespace evaba {

/// External validity predicate for proposals.
using Validity = std::function<bool(const Value&)>;

/// "proposer-tagged": non-empty and of the form "p<k>:..." with k in [1, n].
/// "any": accepts everything. Throws ConfigError otherwise.
Validity named_validity(std::string_view name, int n);

using PbProof = std::variant<PrepareEvidence, ThresholdSig>;

/// Receiver-side inputs to SEND validation.
struct PbEnv {
  const CryptoOracle& oracle;
  const Validity& valid;
  std::string_view instance;
  int lock = 0;
  /// Mapped leader of a completed view, if this party knows it.
  std::function<std::optional<PartyId>(int view)> leader_of;
};

/// Accepts step-1 input `v` with prepare evidence. `view` is the view of the
/// promotion being checked.
///
/// Evidence with a signature must come from an earlier view and validate as
/// a step-1 signature of that view's leader; it ranks as its view. Evidence
/// without a signature ranks as view 0. The rank must be >= LOCK.
bool check_key(const PbEnv& env, int view, const Value& v, const PrepareEvidence& prepare);

/// Step 1 defers to check_key; later steps require the previous step's
/// threshold signature over the same value.
bool ex_pb_val(const PbEnv& env, const StepId& id, const Value& v, const PbProof& proof);

struct PbDelivery {
  StepId id;
  Value value;
  PbProof proof;
};

class PbReceiver {
 public:
  explicit PbReceiver(std::string instance) : instance_(std::move(instance)) {}

  /// The SEND receive rule. On acceptance the StepId is stopped, and the
  /// delivery and the ACK to reply with are returned.
  std::optional<std::pair<PbDelivery, AckMsg>> on_send(PartyId from, const SendMsg& msg, const Committee& committee,
                                                        const PbEnv& env, const SigningKey& signer);
  void abandon(const StepId& id);
  bool stopped(const StepId& id) const;

 private:
  using StepKey = std::tuple<int, int, int>;  // party, view, step
  static StepKey key(const StepId& id) { return {id.party.index(), id.view, id.step}; }

  std::string instance_;
  std::set<StepKey> stopped_;
};

/// Sender side of one P-PB step.
class PbBroadcast {
 public:
  PbBroadcast(StepId id, Value value, PbProof proof, int threshold);

  SendMsg send() const { return SendMsg{id_, value_, proof_}; }
  const StepId& id() const { return id_; }
  const Value& value() const { return value_; }
  const Digest& digest() const { return digest_; }

  /// First valid ACK per sender counts. Returns true when this ACK completed
  /// the quorum.
  bool on_ack(PartyId from, const AckMsg& ack, const CryptoOracle& oracle);
  bool complete() const { return static_cast<int>(shares_.size()) >= threshold_; }
  int acks() const { return static_cast<int>(shares_.size()); }
  ThresholdSig sign(CryptoOracle& oracle) const;

 private:
  StepId id_;
  Value value_;
  PbProof proof_;
  Digest digest_;
  int threshold_;
  std::map<PartyId, SignShare> shares_;
};

}  // namespace evaba
