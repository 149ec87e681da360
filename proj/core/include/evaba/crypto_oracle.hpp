// SPDX-License-Identifier: Apache-2.0
//
// Ideal-functionality threshold signatures and threshold coin tossing.
//
// Shares and signatures carry an oracle-issued tag; validation succeeds only
// for objects the oracle actually issued, so within one simulation run the
// unforgeability and robustness properties hold exactly rather than with
// overwhelming probability.
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "evaba/types.hpp"

namespace evaba {

/// Canonical encoding of a signed tuple. Fields are length-prefixed and
/// concatenated in declaration order, so equal digests mean equal tuples.
class Digest {
 public:
  Digest() = default;

  Digest& add(std::string_view field);
  Digest& add(std::int64_t field);
  Digest& add(PartyId p) { return add(static_cast<std::int64_t>(p.index())); }

  const std::string& bytes() const { return bytes_; }
  bool empty() const { return bytes_.empty(); }

  friend bool operator==(const Digest&, const Digest&) = default;

 private:
  std::string bytes_;
};

struct SignShare {
  PartyId signer;
  Digest digest;
  std::uint64_t tag = 0;
};

struct ThresholdSig {
  Digest digest;
  std::vector<PartyId> contributors;  // ascending, distinct
  std::uint64_t tag = 0;
};

struct CoinShare {
  PartyId holder;
  std::string label;
  std::uint64_t tag = 0;
};

enum class CoinMode { leader, committee };

/// Result of a coin toss. Leader mode holds exactly one party; committee
/// mode holds `size` distinct parties in ascending order.
struct CoinOutput {
  std::string label;
  std::vector<PartyId> parties;
};

enum class CryptoErrc { forgery, threshold_not_met, mixed_message, invalid_share, not_yet_revealed };

class CryptoError : public std::runtime_error {
 public:
  CryptoError(CryptoErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  CryptoErrc code() const { return code_; }

 private:
  CryptoErrc code_;
};

class CryptoOracle {
 public:
  CryptoOracle(Quorum quorum, std::uint64_t seed);

  const Quorum& quorum() const { return quorum_; }
  /// Shares needed for a threshold signature (n - f).
  int signature_threshold() const { return quorum_.big(); }
  /// Shares needed to reconstruct a coin (f + 1).
  int coin_threshold() const { return quorum_.small(); }

  /// `caller` is the party invoking the primitive; the oracle refuses to sign
  /// on behalf of anyone else.
  SignShare share_sign(PartyId caller, PartyId signer, const Digest& message);
  bool share_validate(const Digest& message, PartyId signer, const SignShare& share) const;

  /// Requires >= n - f distinct valid shares over one digest.
  ThresholdSig threshold_sign(std::span<const SignShare> shares);
  bool threshold_validate(const Digest& message, const ThresholdSig& sig) const;

  CoinShare coin_share(PartyId caller, PartyId holder, std::string_view label);
  bool coin_verify(std::string_view label, PartyId holder, const CoinShare& share) const;

  /// Requires >= f + 1 distinct valid shares for `label`. The result is a
  /// pure function of (seed, label, mode, size).
  CoinOutput coin_toss(std::string_view label, std::span<const CoinShare> shares, CoinMode mode,
                       int size = 1) const;

  /// Introspection for adversary schedulers and tests. Throws
  /// CryptoErrc::not_yet_revealed until f + 1 holders were issued shares.
  CoinOutput peek(std::string_view label, CoinMode mode, int size = 1) const;
  int coin_shares_issued(std::string_view label) const;

 private:
  struct ShareRecord {
    PartyId signer;
    Digest digest;
  };
  struct SigRecord {
    Digest digest;
    std::vector<PartyId> contributors;
  };
  struct CoinRecord {
    PartyId holder;
    std::string label;
  };

  std::uint64_t next_tag();
  CoinOutput evaluate(std::string_view label, CoinMode mode, int size) const;

  Quorum quorum_;
  std::uint64_t secret_;
  std::uint64_t counter_ = 0;
  std::unordered_map<std::uint64_t, ShareRecord> shares_;
  std::unordered_map<std::uint64_t, SigRecord> sigs_;
  std::unordered_map<std::uint64_t, CoinRecord> coins_;
  std::unordered_map<std::string, std::vector<PartyId>> coin_holders_;
};

/// A party's handle onto the oracle; every call is made as that party.
class SigningKey {
 public:
  SigningKey(CryptoOracle& oracle, PartyId self) : oracle_(&oracle), self_(self) {}

  PartyId self() const { return self_; }
  SignShare sign(const Digest& message) const { return oracle_->share_sign(self_, self_, message); }
  CoinShare coin(std::string_view label) const { return oracle_->coin_share(self_, self_, label); }
  CryptoOracle& oracle() const { return *oracle_; }

 private:
  CryptoOracle* oracle_;
  PartyId self_;
};

}  // namespace evaba
