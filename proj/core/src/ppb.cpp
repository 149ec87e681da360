// SPDX-License-Identifier: Apache-2.0
#include "evaba/ppb.hpp"

#include <vector>

namespace evaba {

Validity named_validity(std::string_view name, int n) {
  if (name == "any") return [](const Value&) { return true; };
  if (name != "proposer-tagged") throw ConfigError("unknown validity predicate: " + std::string(name));
  return [n](const Value& v) {
    const auto colon = v.find(':');
    if (v.size() < 3 || v[0] != 'p' || colon == Value::npos || colon < 2 || colon > 4) return false;
    int k = 0;
    for (std::size_t i = 1; i < colon; ++i) {
      if (v[i] < '0' || v[i] > '9') return false;
      k = k * 10 + (v[i] - '0');
    }
    return k >= 1 && k <= n;
  };
}

bool check_key(const PbEnv& env, int view, const Value& v, const PrepareEvidence& prepare) {
  if (!env.valid(v)) return false;
  int rank = 0;
  if (prepare.sig) {
    if (prepare.view < 1 || prepare.view >= view) return false;
    auto leader = env.leader_of ? env.leader_of(prepare.view) : std::nullopt;
    if (!leader) return false;
    const StepId prepared{std::string(env.instance), *leader, prepare.view, 1};
    if (!env.oracle.threshold_validate(step_digest(prepared, v), *prepare.sig)) return false;
    rank = prepare.view;
  }
  return rank >= env.lock;
}

bool ex_pb_val(const PbEnv& env, const StepId& id, const Value& v, const PbProof& proof) {
  if (id.step == 1) {
    const auto* prepare = std::get_if<PrepareEvidence>(&proof);
    return prepare && check_key(env, id.view, v, *prepare);
  }
  if (id.step < 2 || id.step > 4) return false;
  const auto* sig = std::get_if<ThresholdSig>(&proof);
  if (!sig) return false;
  StepId previous = id;
  previous.step -= 1;
  return env.oracle.threshold_validate(step_digest(previous, v), *sig);
}

std::optional<std::pair<PbDelivery, AckMsg>> PbReceiver::on_send(PartyId from, const SendMsg& msg,
                                                                  const Committee& committee, const PbEnv& env,
                                                                  const SigningKey& signer) {
  const StepId& id = msg.id;
  if (id.instance != instance_ || from != id.party) return std::nullopt;
  if (committee.view != id.view || !committee.contains(id.party)) return std::nullopt;
  if (stopped(id)) return std::nullopt;
  if (!ex_pb_val(env, id, msg.value, msg.proof)) return std::nullopt;

  stopped_.insert(key(id));
  AckMsg ack{id, signer.sign(step_digest(id, msg.value))};
  return std::make_pair(PbDelivery{id, msg.value, msg.proof}, std::move(ack));
}

void PbReceiver::abandon(const StepId& id) { stopped_.insert(key(id)); }

bool PbReceiver::stopped(const StepId& id) const { return stopped_.contains(key(id)); }

PbBroadcast::PbBroadcast(StepId id, Value value, PbProof proof, int threshold)
    : id_(std::move(id)),
      value_(std::move(value)),
      proof_(std::move(proof)),
      digest_(step_digest(id_, value_)),
      threshold_(threshold) {}

bool PbBroadcast::on_ack(PartyId from, const AckMsg& ack, const CryptoOracle& oracle) {
  if (complete() || ack.id != id_ || shares_.contains(from)) return false;
  if (!oracle.share_validate(digest_, from, ack.share)) return false;
  shares_.emplace(from, ack.share);
  return complete();
}

ThresholdSig PbBroadcast::sign(CryptoOracle& oracle) const {
  std::vector<SignShare> shares;
  shares.reserve(shares_.size());
  for (const auto& [_, s] : shares_) shares.push_back(s);
  return oracle.threshold_sign(shares);
}

}  // namespace evaba
