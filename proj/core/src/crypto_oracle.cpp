// SPDX-License-Identifier: Apache-2.0
#include "evaba/crypto_oracle.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

namespace evaba {

Digest& Digest::add(std::string_view field) {
  bytes_ += std::to_string(field.size());
  bytes_ += ':';
  bytes_ += field;
  return *this;
}

Digest& Digest::add(std::int64_t field) { return add(std::string_view(std::to_string(field))); }

CryptoOracle::CryptoOracle(Quorum quorum, std::uint64_t seed)
    : quorum_(quorum), secret_(mix64(seed ^ 0x5eedc0ffee0dd5ULL)) {}

std::uint64_t CryptoOracle::next_tag() {
  // Zero is reserved for "never issued".
  std::uint64_t tag = 0;
  while (tag == 0 || shares_.contains(tag) || sigs_.contains(tag) || coins_.contains(tag)) {
    tag = mix64(secret_ ^ mix64(++counter_));
  }
  return tag;
}

SignShare CryptoOracle::share_sign(PartyId caller, PartyId signer, const Digest& message) {
  if (caller != signer) {
    throw CryptoError(CryptoErrc::forgery, "share_sign: caller is not the signer");
  }
  SignShare share{signer, message, next_tag()};
  shares_.emplace(share.tag, ShareRecord{signer, message});
  return share;
}

bool CryptoOracle::share_validate(const Digest& message, PartyId signer, const SignShare& share) const {
  if (share.signer != signer || share.digest != message) return false;
  auto it = shares_.find(share.tag);
  return it != shares_.end() && it->second.signer == signer && it->second.digest == message;
}

ThresholdSig CryptoOracle::threshold_sign(std::span<const SignShare> shares) {
  if (shares.empty()) {
    throw CryptoError(CryptoErrc::threshold_not_met, "threshold_sign: no shares");
  }
  const Digest& digest = shares.front().digest;
  std::set<PartyId> signers;
  for (const auto& s : shares) {
    if (s.digest != digest) {
      throw CryptoError(CryptoErrc::mixed_message, "threshold_sign: shares over different messages");
    }
    if (!share_validate(digest, s.signer, s)) {
      throw CryptoError(CryptoErrc::invalid_share, "threshold_sign: share was not issued by the oracle");
    }
    signers.insert(s.signer);
  }
  if (static_cast<int>(signers.size()) < signature_threshold()) {
    throw CryptoError(CryptoErrc::threshold_not_met, "threshold_sign: fewer than n-f distinct signers");
  }
  ThresholdSig sig{digest, {signers.begin(), signers.end()}, next_tag()};
  sigs_.emplace(sig.tag, SigRecord{sig.digest, sig.contributors});
  return sig;
}

bool CryptoOracle::threshold_validate(const Digest& message, const ThresholdSig& sig) const {
  if (sig.digest != message) return false;
  auto it = sigs_.find(sig.tag);
  return it != sigs_.end() && it->second.digest == message && it->second.contributors == sig.contributors;
}

CoinShare CryptoOracle::coin_share(PartyId caller, PartyId holder, std::string_view label) {
  if (caller != holder) {
    throw CryptoError(CryptoErrc::forgery, "coin_share: caller is not the holder");
  }
  CoinShare share{holder, std::string(label), next_tag()};
  coins_.emplace(share.tag, CoinRecord{holder, share.label});
  auto& holders = coin_holders_[share.label];
  if (std::find(holders.begin(), holders.end(), holder) == holders.end()) holders.push_back(holder);
  return share;
}

bool CryptoOracle::coin_verify(std::string_view label, PartyId holder, const CoinShare& share) const {
  if (share.holder != holder || share.label != label) return false;
  auto it = coins_.find(share.tag);
  return it != coins_.end() && it->second.holder == holder && it->second.label == label;
}

int CryptoOracle::coin_shares_issued(std::string_view label) const {
  auto it = coin_holders_.find(std::string(label));
  return it == coin_holders_.end() ? 0 : static_cast<int>(it->second.size());
}

CoinOutput CryptoOracle::coin_toss(std::string_view label, std::span<const CoinShare> shares, CoinMode mode,
                                   int size) const {
  std::set<PartyId> holders;
  for (const auto& s : shares) {
    if (coin_verify(label, s.holder, s)) holders.insert(s.holder);
  }
  if (static_cast<int>(holders.size()) < coin_threshold()) {
    throw CryptoError(CryptoErrc::threshold_not_met, "coin_toss: fewer than f+1 valid shares");
  }
  return evaluate(label, mode, size);
}

CoinOutput CryptoOracle::peek(std::string_view label, CoinMode mode, int size) const {
  if (coin_shares_issued(label) < coin_threshold()) {
    throw CryptoError(CryptoErrc::not_yet_revealed, "coin value for label not yet revealed");
  }
  return evaluate(label, mode, size);
}

CoinOutput CryptoOracle::evaluate(std::string_view label, CoinMode mode, int size) const {
  const std::uint64_t mode_salt = mode == CoinMode::leader ? 0x1eadULL : 0xc0317ULL + static_cast<std::uint64_t>(size);
  std::mt19937_64 prg(mix64(secret_ ^ fnv1a(label) ^ mix64(mode_salt)));
  CoinOutput out{std::string(label), {}};
  const int n = quorum_.n;
  if (mode == CoinMode::leader) {
    std::uniform_int_distribution<int> pick(1, n);
    out.parties.emplace_back(pick(prg));
    return out;
  }
  if (size < 1 || size > n) {
    throw std::invalid_argument("coin_toss: committee size out of range");
  }
  // Fisher-Yates over [1, n]; the first `size` slots are a uniform sample
  // without replacement.
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 1);
  for (int i = 0; i < size; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(pick(prg))]);
  }
  ids.resize(static_cast<std::size_t>(size));
  std::sort(ids.begin(), ids.end());
  for (int id : ids) out.parties.emplace_back(id);
  return out;
}

}  // namespace evaba
