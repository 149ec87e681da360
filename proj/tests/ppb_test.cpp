// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "evaba/ppb.hpp"
#include "evaba/promotion.hpp"

namespace evaba {
namespace {

class PpbTest : public ::testing::Test {
 protected:
  const Quorum q{4, 1};
  CryptoOracle oracle{q, 21};
  Validity valid = named_validity("proposer-tagged", 4);
  std::map<int, PartyId> leaders;
  PbEnv env{oracle, valid, "evaba", 0, [this](int v) -> std::optional<PartyId> {
              auto it = leaders.find(v);
              return it == leaders.end() ? std::nullopt : std::optional(it->second);
            }};
  Committee committee{3, {PartyId{1}, PartyId{3}}};

  ThresholdSig sig(const StepId& id, const Value& v, std::initializer_list<int> signers = {1, 2, 3}) {
    std::vector<SignShare> shares;
    for (int k : signers) shares.push_back(oracle.share_sign(PartyId{k}, PartyId{k}, step_digest(id, v)));
    return oracle.threshold_sign(shares);
  }
  StepId id(int party, int view, int step) const { return StepId{"evaba", PartyId{party}, view, step}; }
};

TEST_F(PpbTest, NamedValidity) {
  EXPECT_TRUE(valid("p1:x"));
  EXPECT_TRUE(valid("p4:"));
  EXPECT_FALSE(valid("p5:x"));
  EXPECT_FALSE(valid("p0:x"));
  EXPECT_FALSE(valid("q1:x"));
  EXPECT_FALSE(valid("p:x"));
  EXPECT_FALSE(valid("p1x"));
  EXPECT_FALSE(valid(""));
  EXPECT_TRUE(named_validity("any", 4)(""));
  EXPECT_THROW(named_validity("strict", 4), ConfigError);
}

TEST_F(PpbTest, CheckKeyUnsignedEvidenceRanksZero) {
  EXPECT_TRUE(check_key(env, 3, "p1:a", PrepareEvidence{}));
  env.lock = 1;
  EXPECT_FALSE(check_key(env, 3, "p1:a", PrepareEvidence{}));
  EXPECT_FALSE(check_key(env, 3, "bogus", PrepareEvidence{}));
}

TEST_F(PpbTest, CheckKeySignedEvidence) {
  leaders[2] = PartyId{3};
  const PrepareEvidence good{2, sig(id(3, 2, 1), "p3:a")};
  env.lock = 2;
  EXPECT_TRUE(check_key(env, 3, "p3:a", good));
  EXPECT_FALSE(check_key(env, 3, "p3:b", good));       // other value
  EXPECT_FALSE(check_key(env, 2, "p3:a", good));       // not from an earlier view
  env.lock = 3;
  EXPECT_FALSE(check_key(env, 4, "p3:a", good));       // rank below lock
  env.lock = 0;
  leaders[2] = PartyId{1};
  EXPECT_FALSE(check_key(env, 3, "p3:a", good));       // not the leader's promotion
  leaders.erase(2);
  EXPECT_FALSE(check_key(env, 3, "p3:a", good));       // leader unknown
  leaders[2] = PartyId{3};
  const PrepareEvidence step2{2, sig(id(3, 2, 2), "p3:a")};
  EXPECT_FALSE(check_key(env, 3, "p3:a", step2));      // wrong step
}

TEST_F(PpbTest, LaterStepsNeedThePreviousStepSignature) {
  const auto s1 = sig(id(1, 3, 1), "p1:a");
  EXPECT_TRUE(ex_pb_val(env, id(1, 3, 2), "p1:a", s1));
  EXPECT_FALSE(ex_pb_val(env, id(1, 3, 3), "p1:a", s1));
  EXPECT_FALSE(ex_pb_val(env, id(1, 3, 2), "p1:b", s1));
  EXPECT_FALSE(ex_pb_val(env, id(1, 3, 2), "p1:a", PrepareEvidence{}));
  EXPECT_FALSE(ex_pb_val(env, id(1, 3, 1), "p1:a", s1));
  EXPECT_FALSE(ex_pb_val(env, id(1, 3, 5), "p1:a", sig(id(1, 3, 4), "p1:a")));
}

TEST_F(PpbTest, ReceiverSignsOncePerStepForCommitteeSenders) {
  PbReceiver rx("evaba");
  SigningKey me(oracle, PartyId{2});
  const SendMsg send{id(1, 3, 1), "p1:a", PrepareEvidence{}};

  EXPECT_FALSE(rx.on_send(PartyId{4}, send, committee, env, me));  // relayed
  const auto first = rx.on_send(PartyId{1}, send, committee, env, me);
  ASSERT_TRUE(first);
  EXPECT_EQ(first->first.value, "p1:a");
  EXPECT_TRUE(oracle.share_validate(step_digest(send.id, "p1:a"), PartyId{2}, first->second.share));
  EXPECT_FALSE(rx.on_send(PartyId{1}, SendMsg{id(1, 3, 1), "p1:b", PrepareEvidence{}}, committee, env, me));

  const SendMsg outsider{id(2, 3, 1), "p2:a", PrepareEvidence{}};
  EXPECT_FALSE(rx.on_send(PartyId{2}, outsider, committee, env, me));
  const SendMsg stale{id(1, 2, 1), "p1:a", PrepareEvidence{}};
  EXPECT_FALSE(rx.on_send(PartyId{1}, stale, committee, env, me));  // committee of another view
  EXPECT_FALSE(rx.on_send(PartyId{3}, SendMsg{StepId{"other", PartyId{3}, 3, 1}, "p3:a", PrepareEvidence{}},
                          committee, env, me));
}

TEST_F(PpbTest, AbandonedStepsAreNeverSigned) {
  PbReceiver rx("evaba");
  SigningKey me(oracle, PartyId{2});
  PromotionReceiver slots;
  slots.abandon_all("evaba", PartyId{3}, 3, rx);
  for (int step = 1; step <= 4; ++step) EXPECT_TRUE(rx.stopped(id(3, 3, step)));
  EXPECT_FALSE(rx.on_send(PartyId{3}, SendMsg{id(3, 3, 1), "p3:a", PrepareEvidence{}}, committee, env, me));
  EXPECT_FALSE(rx.stopped(id(1, 3, 1)));
}

TEST_F(PpbTest, BroadcastCompletesAtNMinusFDistinctValidAcks) {
  PbBroadcast pb(id(1, 3, 1), "p1:a", PrepareEvidence{}, q.big());
  auto ack = [&](int k) { return AckMsg{pb.id(), oracle.share_sign(PartyId{k}, PartyId{k}, pb.digest())}; };
  EXPECT_FALSE(pb.on_ack(PartyId{1}, ack(1), oracle));
  EXPECT_FALSE(pb.on_ack(PartyId{1}, ack(1), oracle));  // duplicate sender
  EXPECT_FALSE(pb.on_ack(PartyId{3}, ack(2), oracle));  // share not from the sender
  AckMsg other = ack(2);
  other.id.step = 2;
  EXPECT_FALSE(pb.on_ack(PartyId{2}, other, oracle));
  EXPECT_EQ(pb.acks(), 1);
  EXPECT_FALSE(pb.on_ack(PartyId{2}, ack(2), oracle));
  EXPECT_TRUE(pb.on_ack(PartyId{4}, ack(4), oracle));
  EXPECT_TRUE(pb.complete());
  EXPECT_FALSE(pb.on_ack(PartyId{3}, ack(3), oracle));
  EXPECT_TRUE(oracle.threshold_validate(pb.digest(), pb.sign(oracle)));
}

// -- promotion ---------------------------------------------------------------

class PromotionTest : public PpbTest {
 protected:
  Promotion::Progress feed(Promotion& p, std::initializer_list<int> from) {
    Promotion::Progress last;
    const SendMsg send = p.current_send();
    const Digest d = step_digest(send.id, send.value);
    for (int k : from) last = p.on_ack(PartyId{k}, AckMsg{send.id, oracle.share_sign(PartyId{k}, PartyId{k}, d)}, oracle);
    return last;
  }
};

TEST_F(PromotionTest, FourStepsChainEachSignatureIntoTheNext) {
  Promotion p("evaba", PartyId{1}, 3, "p1:a", PrepareEvidence{}, q.big());
  for (int step = 1; step <= 4; ++step) {
    ASSERT_EQ(p.step(), step);
    const SendMsg send = p.current_send();
    if (step > 1) {
      EXPECT_TRUE(ex_pb_val(env, send.id, send.value, send.proof));
    }
    const auto progress = feed(p, {1, 2, 4});
    EXPECT_EQ(progress.step, step);
    ASSERT_TRUE(progress.sig);
    EXPECT_TRUE(oracle.threshold_validate(step_digest(id(1, 3, step), "p1:a"), *progress.sig));
    EXPECT_EQ(progress.kind, step == 4 ? Promotion::Progress::Kind::completed : Promotion::Progress::Kind::advanced);
  }
  EXPECT_TRUE(p.completed());
  EXPECT_TRUE(oracle.threshold_validate(step_digest(id(1, 3, 4), "p1:a"), *p.commit_proof()));
  EXPECT_EQ(feed(p, {3}).kind, Promotion::Progress::Kind::pending);
}

TEST_F(PromotionTest, AbandonedPromotionStops) {
  Promotion p("evaba", PartyId{1}, 3, "p1:a", PrepareEvidence{}, q.big());
  feed(p, {1});
  p.abandon();
  EXPECT_EQ(feed(p, {2, 3, 4}).kind, Promotion::Progress::Kind::pending);
  EXPECT_EQ(p.step(), 1);
  EXPECT_FALSE(p.completed());
}

TEST_F(PromotionTest, ResumesAtStepTwoFromAStepOneSignature) {
  const auto s1 = sig(id(1, 3, 1), "p1:b");
  Promotion p("evaba", PartyId{1}, 3, "p1:b", s1, q.big());
  EXPECT_EQ(p.step(), 2);
  const auto send = p.current_send();
  EXPECT_TRUE(ex_pb_val(env, send.id, send.value, send.proof));
}

TEST_F(PromotionTest, ReceiverSlotsHoldTheProofCarriedByEachStep) {
  PromotionReceiver rx;
  const auto s1 = sig(id(1, 3, 1), "p1:a");
  const auto s2 = sig(id(1, 3, 2), "p1:a");
  rx.record_delivery(PartyId{1}, 3, 1, "p1:a", PrepareEvidence{});
  EXPECT_FALSE(rx.get_prepare(PartyId{1}, 3));
  rx.record_delivery(PartyId{1}, 3, 2, "p1:a", s1);
  rx.record_delivery(PartyId{1}, 3, 3, "p1:a", s2);
  ASSERT_TRUE(rx.get_prepare(PartyId{1}, 3));
  EXPECT_EQ(rx.get_prepare(PartyId{1}, 3)->sig.tag, s1.tag);
  EXPECT_EQ(rx.get_lock(PartyId{1}, 3)->sig.tag, s2.tag);
  EXPECT_FALSE(rx.get_commit(PartyId{1}, 3));
  EXPECT_FALSE(rx.get_prepare(PartyId{1}, 4));
  EXPECT_FALSE(rx.get_prepare(PartyId{3}, 3));
}

}  // namespace
}  // namespace evaba
