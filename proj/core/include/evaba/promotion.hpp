// SPDX-License-Identifier: Apache-2.0
//
// Proposal promotion: four chained P-PB steps (prepare, lock, commit,
// commit-proof). Each step's signature is the next step's input proof.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>

#include "evaba/ppb.hpp"

namespace evaba {

/// Per-(sender, view) evidence a receiver accumulates. Slot k holds the
/// value and the proof carried by the step-(k+1) SEND.
struct PromotionSlots {
  std::optional<Evidence> prepare;  // from step 2; sig completes step 1
  std::optional<Evidence> lock;     // from step 3; sig completes step 2
  std::optional<Evidence> commit;   // from step 4; sig completes step 3
};

class PromotionReceiver {
 public:
  /// Step-1 deliveries record nothing.
  void record_delivery(PartyId sender, int view, int step, const Value& value, const PbProof& proof);
  void abandon_all(const std::string& instance, PartyId sender, int view, PbReceiver& pb) const;

  std::optional<Evidence> get_prepare(PartyId sender, int view) const;
  std::optional<Evidence> get_lock(PartyId sender, int view) const;
  std::optional<Evidence> get_commit(PartyId sender, int view) const;

 private:
  const PromotionSlots* find(PartyId sender, int view) const;

  std::map<std::pair<PartyId, int>, PromotionSlots> slots_;
};

/// Sender-side continuation of one promotion. Drive it with on_ack(); after
/// each completed step multicast current_send() until completed().
class Promotion {
 public:
  Promotion(std::string instance, PartyId self, int view, Value value, PrepareEvidence prepare, int threshold);
  /// Continues from step 2 with an already-obtained step-1 signature.
  Promotion(std::string instance, PartyId self, int view, Value value, ThresholdSig step1, int threshold);

  struct Progress {
    enum class Kind { pending, advanced, completed } kind = Kind::pending;
    int step = 0;                      // the step that just finished
    std::optional<ThresholdSig> sig;   // its signature
  };

  SendMsg current_send() const { return broadcast_.send(); }
  int step() const { return broadcast_.id().step; }
  const Value& value() const { return broadcast_.value(); }
  int view() const { return broadcast_.id().view; }

  Progress on_ack(PartyId from, const AckMsg& ack, CryptoOracle& oracle);
  void abandon() { abandoned_ = true; }
  bool abandoned() const { return abandoned_; }
  bool completed() const { return commit_proof_.has_value(); }
  /// The step-4 signature once all four steps finished.
  const std::optional<ThresholdSig>& commit_proof() const { return commit_proof_; }

 private:
  PbBroadcast broadcast_;
  int threshold_;
  bool abandoned_ = false;
  std::optional<ThresholdSig> commit_proof_;
};

}  // namespace evaba
