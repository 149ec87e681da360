// SPDX-License-Identifier: Apache-2.0
//
// Leader election by threshold coin, then mapping of the elected party
// onto the view's committee.
#pragma once

#include <optional>
#include <string>

#include "evaba/committee.hpp"

namespace evaba {

/// Nearest committee member by absolute id distance; the first member in
/// ascending order wins ties. `committee` must be non-empty.
PartyId map_to_party(PartyId leader, const Committee& committee);

struct ElectionResult {
  PartyId raw;     // coin output, any party in [1, n]
  PartyId mapped;  // always a committee member
};

class LeaderElection {
 public:
  LeaderElection(std::string instance, Quorum quorum) : instance_(std::move(instance)), quorum_(quorum) {}

  CoinShareMsg begin(int view, const SigningKey& key) const;
  bool on_share(PartyId from, const CoinShareMsg& msg, const CryptoOracle& oracle);
  std::optional<ElectionResult> result(const Committee& committee, const CryptoOracle& oracle) const;

 private:
  std::string instance_;
  Quorum quorum_;
  CoinCollector collector_;
};

}  // namespace evaba
