// SPDX-License-Identifier: Apache-2.0
#include "evaba/committee.hpp"

#include <algorithm>
#include <numeric>

namespace evaba {

bool Committee::contains(PartyId p) const { return std::binary_search(members.begin(), members.end(), p); }

bool CoinCollector::add(PartyId from, const CoinShare& share, const CryptoOracle& oracle) {
  auto& held = by_label_[share.label];
  if (held.contains(from)) return false;
  if (!oracle.coin_verify(share.label, from, share)) return false;
  held.emplace(from, share);
  return true;
}

int CoinCollector::count(const std::string& label) const {
  auto it = by_label_.find(label);
  return it == by_label_.end() ? 0 : static_cast<int>(it->second.size());
}

std::vector<CoinShare> CoinCollector::shares(const std::string& label) const {
  std::vector<CoinShare> out;
  if (auto it = by_label_.find(label); it != by_label_.end()) {
    for (const auto& [_, s] : it->second) out.push_back(s);
  }
  return out;
}

CoinShareMsg CommitteeSelector::begin(int view, const SigningKey& key) const {
  return CoinShareMsg{CoinPurpose::committee, view, key.coin(coin_label(instance_, CoinPurpose::committee, view))};
}

bool CommitteeSelector::on_share(PartyId from, const CoinShareMsg& msg, const CryptoOracle& oracle) {
  if (msg.purpose != CoinPurpose::committee) return false;
  if (msg.share.label != coin_label(instance_, CoinPurpose::committee, msg.view)) return false;
  return collector_.add(from, msg.share, oracle);
}

int CommitteeSelector::shares_held(int view) const {
  return collector_.count(coin_label(instance_, CoinPurpose::committee, view));
}

std::optional<Committee> CommitteeSelector::result(int view, const CryptoOracle& oracle) const {
  const auto label = coin_label(instance_, CoinPurpose::committee, view);
  if (collector_.count(label) < quorum_.small()) return std::nullopt;
  auto shares = collector_.shares(label);
  auto out = oracle.coin_toss(label, shares, CoinMode::committee, quorum_.small());
  return Committee{view, std::move(out.parties)};
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    // r * (n - k + i) is divisible by i at every step.
    r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return r;
}

Fraction all_faulty_probability(int n, int f, int kappa) {
  Fraction p{binomial(f, kappa), binomial(n, kappa)};
  if (p.num == 0) return {0, 1};
  auto g = std::gcd(p.num, p.den);
  return {p.num / g, p.den / g};
}

bool within_third_power_bound(Fraction p, int kappa) {
  std::uint64_t lhs = p.num;
  for (int i = 0; i < kappa; ++i) {
    if (__builtin_mul_overflow(lhs, std::uint64_t{3}, &lhs)) return false;
  }
  return lhs <= p.den;
}

}  // namespace evaba
