// SPDX-License-Identifier: Apache-2.0
#include "evaba/election.hpp"

#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace evaba {

PartyId map_to_party(PartyId leader, const Committee& committee) {
  if (committee.members.empty()) throw std::invalid_argument("map_to_party: empty committee");
  int best = std::numeric_limits<int>::max();
  PartyId party;
  for (PartyId p : committee.members) {
    const int dis = std::abs(leader.index() - p.index());
    if (dis < best) {
      best = dis;
      party = p;
    }
  }
  return party;
}

CoinShareMsg LeaderElection::begin(int view, const SigningKey& key) const {
  return CoinShareMsg{CoinPurpose::elect, view, key.coin(coin_label(instance_, CoinPurpose::elect, view))};
}

bool LeaderElection::on_share(PartyId from, const CoinShareMsg& msg, const CryptoOracle& oracle) {
  if (msg.purpose != CoinPurpose::elect) return false;
  if (msg.share.label != coin_label(instance_, CoinPurpose::elect, msg.view)) return false;
  return collector_.add(from, msg.share, oracle);
}

std::optional<ElectionResult> LeaderElection::result(const Committee& committee, const CryptoOracle& oracle) const {
  const auto label = coin_label(instance_, CoinPurpose::elect, committee.view);
  if (collector_.count(label) < quorum_.small()) return std::nullopt;
  auto out = oracle.coin_toss(label, collector_.shares(label), CoinMode::leader);
  const PartyId raw = out.parties.front();
  return ElectionResult{raw, committee.contains(raw) ? raw : map_to_party(raw, committee)};
}

}  // namespace evaba
