// SPDX-License-Identifier: Apache-2.0
#include "evaba/promotion.hpp"

namespace evaba {

void PromotionReceiver::record_delivery(PartyId sender, int view, int step, const Value& value, const PbProof& proof) {
  if (step < 2 || step > 4) return;
  const auto* sig = std::get_if<ThresholdSig>(&proof);
  if (!sig) return;
  auto& slots = slots_[{sender, view}];
  Evidence e{value, *sig};
  switch (step) {
    case 2:
      slots.prepare = std::move(e);
      break;
    case 3:
      slots.lock = std::move(e);
      break;
    case 4:
      slots.commit = std::move(e);
      break;
  }
}

void PromotionReceiver::abandon_all(const std::string& instance, PartyId sender, int view, PbReceiver& pb) const {
  for (int step = 1; step <= 4; ++step) pb.abandon(StepId{instance, sender, view, step});
}

const PromotionSlots* PromotionReceiver::find(PartyId sender, int view) const {
  auto it = slots_.find({sender, view});
  return it == slots_.end() ? nullptr : &it->second;
}

std::optional<Evidence> PromotionReceiver::get_prepare(PartyId sender, int view) const {
  const auto* s = find(sender, view);
  return s ? s->prepare : std::nullopt;
}

std::optional<Evidence> PromotionReceiver::get_lock(PartyId sender, int view) const {
  const auto* s = find(sender, view);
  return s ? s->lock : std::nullopt;
}

std::optional<Evidence> PromotionReceiver::get_commit(PartyId sender, int view) const {
  const auto* s = find(sender, view);
  return s ? s->commit : std::nullopt;
}

Promotion::Promotion(std::string instance, PartyId self, int view, Value value, PrepareEvidence prepare,
                     int threshold)
    : broadcast_(StepId{std::move(instance), self, view, 1}, std::move(value), std::move(prepare), threshold),
      threshold_(threshold) {}

Promotion::Promotion(std::string instance, PartyId self, int view, Value value, ThresholdSig step1, int threshold)
    : broadcast_(StepId{std::move(instance), self, view, 2}, std::move(value), std::move(step1), threshold),
      threshold_(threshold) {}

Promotion::Progress Promotion::on_ack(PartyId from, const AckMsg& ack, CryptoOracle& oracle) {
  if (abandoned_ || completed()) return {};
  if (!broadcast_.on_ack(from, ack, oracle)) return {};

  const int finished = broadcast_.id().step;
  ThresholdSig sig = broadcast_.sign(oracle);
  if (finished == 4) {
    commit_proof_ = sig;
    return {Progress::Kind::completed, finished, std::move(sig)};
  }
  StepId next = broadcast_.id();
  next.step = finished + 1;
  Value v = broadcast_.value();
  broadcast_ = PbBroadcast(std::move(next), std::move(v), sig, threshold_);
  return {Progress::Kind::advanced, finished, std::move(sig)};
}

}  // namespace evaba
