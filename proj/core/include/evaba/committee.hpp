// SPDX-License-Identifier: Apache-2.0
//
// Per-view committee selection with committee size f + 1.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evaba/crypto_oracle.hpp"
#include "evaba/messages.hpp"
#include "evaba/types.hpp"

namespace evaba {

struct Committee {
  int view = 0;
  std::vector<PartyId> members;  // ascending

  bool contains(PartyId p) const;
  std::size_t size() const { return members.size(); }

  friend bool operator==(const Committee&, const Committee&) = default;
};

/// Accumulates coin shares per label. Only the first valid share per sender
/// and label counts; the share must belong to the sender.
class CoinCollector {
 public:
  /// Returns true if the share was new and valid.
  bool add(PartyId from, const CoinShare& share, const CryptoOracle& oracle);
  int count(const std::string& label) const;
  std::vector<CoinShare> shares(const std::string& label) const;

 private:
  std::map<std::string, std::map<PartyId, CoinShare>> by_label_;
};

/// One party's view of committee selection across all views.
class CommitteeSelector {
 public:
  CommitteeSelector(std::string instance, Quorum quorum) : instance_(std::move(instance)), quorum_(quorum) {}

  /// The SHARE message to multicast when entering `view`.
  CoinShareMsg begin(int view, const SigningKey& key) const;
  /// Shares for any view are kept, so early arrivals are not lost.
  bool on_share(PartyId from, const CoinShareMsg& msg, const CryptoOracle& oracle);
  /// The committee once f + 1 valid shares for `view` are held.
  std::optional<Committee> result(int view, const CryptoOracle& oracle) const;
  int shares_held(int view) const;

 private:
  std::string instance_;
  Quorum quorum_;
  CoinCollector collector_;
};

struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
};

std::uint64_t binomial(int n, int k);
/// Probability that a uniformly sampled kappa-subset of n parties contains
/// only faulty parties: C(f, kappa) / C(n, kappa), reduced.
Fraction all_faulty_probability(int n, int f, int kappa);
/// True iff p <= (1/3)^kappa, compared exactly.
bool within_third_power_bound(Fraction p, int kappa);

}  // namespace evaba
