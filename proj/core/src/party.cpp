// SPDX-License-Identifier: Apache-2.0
#include "evaba/party.hpp"

#include <type_traits>

namespace evaba {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

Party::Party(PartyConfig config, PartyId self, CryptoOracle& oracle)
    : config_(std::move(config)),
      self_(self),
      oracle_(oracle),
      key_(oracle, self),
      committees_(config_.instance, config_.quorum),
      elections_(config_.instance, config_.quorum),
      pb_(config_.instance) {
  prepare_.value = config_.input;
  if (!config_.validity) config_.validity = [](const Value&) { return true; };
}

// ---- inspection -----------------------------------------------------------

std::optional<Committee> Party::committee_of(int view) const {
  auto it = views_.find(view);
  return it == views_.end() ? std::nullopt : it->second.committee;
}

std::optional<PartyId> Party::leader_of(int view) const {
  auto it = views_.find(view);
  if (it == views_.end() || !it->second.election) return std::nullopt;
  return it->second.election->mapped;
}

bool Party::skip(int view) const {
  auto it = views_.find(view);
  return it != views_.end() && it->second.skip;
}

int Party::done_count(int view) const {
  auto it = views_.find(view);
  return it == views_.end() ? 0 : static_cast<int>(it->second.done_from.size());
}

int Party::suggestions(int view) const {
  auto it = views_.find(view);
  return it == views_.end() ? 0 : static_cast<int>(it->second.suggesters.size());
}

int Party::view_changes(int view) const {
  auto it = views_.find(view);
  return it == views_.end() ? 0 : static_cast<int>(it->second.vc_from.size());
}

// ---- plumbing -------------------------------------------------------------

void Party::emit(const ProtocolMessage& m) {
  if (!silent_) ctx_->multicast(m);
}

void Party::emit_to(PartyId to, ProtocolMessage m) {
  if (!silent_) ctx_->send(to, std::move(m));
}

void Party::record(EventBody body) const {
  if (ctx_) ctx_->record(std::move(body));
}

PbEnv Party::env() const {
  return PbEnv{oracle_, config_.validity, config_.instance, lock_, [this](int v) { return leader_of(v); }};
}

bool Party::completion_valid(int view, PartyId promoter, const Evidence& proof) const {
  auto it = views_.find(view);
  if (it == views_.end() || !it->second.committee || !it->second.committee->contains(promoter)) return false;
  return oracle_.threshold_validate(step_digest(StepId{config_.instance, promoter, view, 4}, proof.value), proof.sig);
}

// ---- entry points ---------------------------------------------------------

void Party::start(Context& ctx) {
  ctx_ = &ctx;
  enter_view(1);
  progress();
}

void Party::on_message(PartyId from, const ProtocolMessage& m, Context& ctx) {
  ctx_ = &ctx;
  dispatch(from, m);
  progress();
}

void Party::dispatch(PartyId from, const ProtocolMessage& m) {
  std::visit(overloaded{
                 [&](const CoinShareMsg& s) {
                   if (s.purpose == CoinPurpose::committee)
                     committees_.on_share(from, s, oracle_);
                   else
                     elections_.on_share(from, s, oracle_);
                 },
                 [&](const SendMsg& s) {
                   auto& vs = views_[s.id.view];
                   if (!vs.committee)
                     vs.waiting_committee.emplace_back(from, s);
                   else
                     handle_send(from, s);
                 },
                 [&](const AckMsg& a) { handle_ack(from, a); },
                 [&](const ProposalMsg& p) {
                   auto& vs = views_[p.view];
                   if (!vs.committee)
                     vs.waiting_committee.emplace_back(from, p);
                   else
                     handle_proposal(from, p.view, p.promoter, p.proof, false);
                 },
                 [&](const SuggestionMsg& p) {
                   auto& vs = views_[p.view];
                   if (!vs.committee)
                     vs.waiting_committee.emplace_back(from, p);
                   else
                     handle_proposal(from, p.view, p.promoter, p.proof, true);
                 },
                 [&](const DoneMsg& d) { handle_done(from, d); },
                 [&](const SkipShareMsg& s) { handle_skip_share(from, s); },
                 [&](const SkipMsg& s) { handle_skip(from, s); },
                 [&](const ViewChangeMsg& v) {
                   auto& vs = views_[v.view];
                   if (!vs.election)
                     vs.waiting_leader.emplace_back(from, v);
                   else
                     handle_view_change(from, v);
                 },
             },
             m);
}

// ---- view lifecycle -------------------------------------------------------

void Party::enter_view(int view) {
  view_ = view;
  phase_ = Phase::selecting;
  promotion_.reset();
  equivocation_.clear();
  record(ViewEntered{self_, view, lock_, prepare_.view, prepare_.value, decision_.has_value()});
  emit(committees_.begin(view, key_));
}

void Party::progress() {
  for (;;) {
    auto& vs = views_[view_];
    switch (phase_) {
      case Phase::selecting: {
        auto c = committees_.result(view_, oracle_);
        if (!c) return;
        vs.committee = *c;
        record(CommitteeSelected{self_, view_, c->members});
        phase_ = Phase::running;
        if (c->contains(self_) || is(ByzantineBehavior::Kind::unselected_broadcaster)) start_promotion();
        if (is(ByzantineBehavior::Kind::done_spammer)) {
          // A DONE whose signature the oracle never issued.
          ThresholdSig forged{step_digest(StepId{config_.instance, self_, view_, 4}, config_.input), {self_}, 0};
          emit(DoneMsg{view_, self_, Evidence{config_.input, forged}});
        }
        auto waiting = std::move(vs.waiting_committee);
        vs.waiting_committee.clear();
        for (auto& [from, m] : waiting) dispatch(from, m);
        break;
      }
      case Phase::running:
        if (!vs.skip) return;
        on_skip();
        break;
      case Phase::electing: {
        auto r = elections_.result(*vs.committee, oracle_);
        if (!r) return;
        vs.election = *r;
        record(LeaderElected{self_, view_, r->raw, r->mapped});
        emit(ViewChangeMsg{view_, evidence_.get_prepare(r->mapped, view_), evidence_.get_lock(r->mapped, view_),
                           evidence_.get_commit(r->mapped, view_)});
        phase_ = Phase::view_change;
        auto waiting = std::move(vs.waiting_leader);
        vs.waiting_leader.clear();
        for (auto& [from, m] : waiting) handle_view_change(from, m);
        break;
      }
      case Phase::view_change:
        if (static_cast<int>(vs.vc_from.size()) < config_.quorum.big()) return;
        enter_view(view_ + 1);
        break;
    }
  }
}

void Party::start_promotion() {
  const int threshold = config_.quorum.big();
  PrepareEvidence evidence;
  if (view_ == 1) {
    evidence.view = 1;  // <1, bottom>: no signature, ranks as view 0
  } else {
    evidence.view = prepare_.view;
    evidence.sig = prepare_.proof;
  }
  const Value& value = prepare_.value;
  record(Proposed{self_, view_, value});

  if (is(ByzantineBehavior::Kind::equivocate_send) && config_.quorum.n > 1) {
    // One peer hears the alternate value, everyone else the real one.
    const PartyId odd_one{self_.index() == 1 ? 2 : 1};
    const Value& alt = config_.alternate_input;
    record(Proposed{self_, view_, alt});
    equivocation_.emplace_back(StepId{config_.instance, self_, view_, 1}, value, evidence, threshold);
    equivocation_.emplace_back(StepId{config_.instance, self_, view_, 1}, alt, evidence, threshold);
    for (int i = 1; i <= config_.quorum.n; ++i) {
      const PartyId to{i};
      emit_to(to, to == odd_one ? equivocation_[1].send() : equivocation_[0].send());
    }
    return;
  }

  promotion_.emplace(config_.instance, self_, view_, value, evidence, threshold);
  emit(promotion_->current_send());
}

void Party::on_skip() {
  auto& vs = views_[view_];
  for (PartyId m : vs.committee->members) evidence_.abandon_all(config_.instance, m, view_, pb_);
  if (promotion_) promotion_->abandon();
  equivocation_.clear();
  phase_ = Phase::electing;
  emit(elections_.begin(view_, key_));
}

// ---- promotion ------------------------------------------------------------

void Party::handle_send(PartyId from, const SendMsg& msg) {
  const auto& vs = views_[msg.id.view];
  auto accepted = pb_.on_send(from, msg, *vs.committee, env(), key_);
  if (!accepted) return;
  auto& [delivery, ack] = *accepted;
  evidence_.record_delivery(delivery.id.party, delivery.id.view, delivery.id.step, delivery.value, delivery.proof);
  record(PbDelivered{self_, delivery.id.party, delivery.id.view, delivery.id.step, delivery.value});
  emit_to(from, std::move(ack));
}

void Party::step_signed(int step, const Value& value, const ThresholdSig& sig) {
  record(SigFormed{self_, SigKind::pb, self_, view_, step, value, static_cast<int>(sig.contributors.size())});
}

void Party::handle_ack(PartyId from, const AckMsg& msg) {
  if (msg.id.view != view_ || msg.id.party != self_) return;

  if (!equivocation_.empty()) {
    for (auto& pb : equivocation_) {
      if (!pb.on_ack(from, msg, oracle_)) continue;
      ThresholdSig sig = pb.sign(oracle_);
      step_signed(1, pb.value(), sig);
      promotion_.emplace(config_.instance, self_, view_, pb.value(), std::move(sig), config_.quorum.big());
      equivocation_.clear();
      emit(promotion_->current_send());
      return;
    }
    return;
  }

  if (!promotion_ || promotion_->abandoned()) return;
  auto p = promotion_->on_ack(from, msg, oracle_);
  switch (p.kind) {
    case Promotion::Progress::Kind::pending:
      return;
    case Promotion::Progress::Kind::advanced:
      step_signed(p.step, promotion_->value(), *p.sig);
      emit(promotion_->current_send());
      return;
    case Promotion::Progress::Kind::completed:
      step_signed(p.step, promotion_->value(), *p.sig);
      promotion_completed();
      return;
  }
}

void Party::promotion_completed() {
  if (is(ByzantineBehavior::Kind::silent_after_promote)) {
    silent_ = true;
    return;
  }
  auto& vs = views_[view_];
  Evidence proof{promotion_->value(), *promotion_->commit_proof()};
  if (!vs.best) vs.best = {self_, proof};
  emit(ProposalMsg{view_, self_, proof});
  if (!vs.suggested) {
    vs.suggested = true;
    emit(SuggestionMsg{view_, self_, proof});
  }
}

// ---- barrier --------------------------------------------------------------

void Party::handle_proposal(PartyId from, int view, PartyId promoter, const Evidence& proof, bool suggestion) {
  if (view != view_ || phase_ != Phase::running) return;
  if (!completion_valid(view, promoter, proof)) return;
  auto& vs = views_[view];
  if (!vs.best) {
    vs.best = {promoter, proof};
    record(Reached{self_, view, Milestone::first_proposal});
  }
  if (!vs.suggested) {
    vs.suggested = true;
    emit(SuggestionMsg{view, promoter, proof});
  }
  if (!suggestion) return;
  if (!vs.suggesters.insert(from).second) return;
  if (static_cast<int>(vs.suggesters.size()) == config_.quorum.big()) {
    record(Reached{self_, view, Milestone::suggestion_quorum});
    if (!vs.skip && !vs.done_sent) send_done(view, vs);
  }
}

void Party::send_done(int view, ViewState& vs) {
  vs.done_sent = true;
  record(Reached{self_, view, Milestone::done_sent});
  DoneMsg done{view, vs.best->first, vs.best->second};
  const int copies = is(ByzantineBehavior::Kind::done_spammer) ? 3 : 1;
  for (int i = 0; i < copies; ++i) emit(done);
}

void Party::handle_done(PartyId from, const DoneMsg& msg) {
  auto& vs = views_[msg.view];
  if (vs.done_from.contains(from)) return;
  const Digest d = step_digest(StepId{config_.instance, msg.promoter, msg.view, 4}, msg.proof.value);
  if (!oracle_.threshold_validate(d, msg.proof.sig)) return;
  vs.done_from.insert(from);
  if (static_cast<int>(vs.done_from.size()) != config_.quorum.big()) return;
  record(Reached{self_, msg.view, Milestone::done_quorum});
  if (!vs.skip_share_sent) {
    vs.skip_share_sent = true;
    emit(SkipShareMsg{msg.view, key_.sign(skip_digest(config_.instance, msg.view))});
  }
}

void Party::set_skip(int view, ViewState& vs) {
  if (vs.skip) return;
  vs.skip = true;
  record(Reached{self_, view, Milestone::skip_set});
}

void Party::handle_skip_share(PartyId from, const SkipShareMsg& msg) {
  auto& vs = views_[msg.view];
  if (vs.skip_shares.contains(from)) return;
  const Digest d = skip_digest(config_.instance, msg.view);
  if (!oracle_.share_validate(d, from, msg.share)) return;
  vs.skip_shares.emplace(from, msg.share);
  set_skip(msg.view, vs);
  if (vs.skip_sent || static_cast<int>(vs.skip_shares.size()) < config_.quorum.big()) return;
  std::vector<SignShare> shares;
  for (const auto& [_, s] : vs.skip_shares) shares.push_back(s);
  ThresholdSig sig = oracle_.threshold_sign(shares);
  record(SigFormed{self_, SigKind::skip, self_, msg.view, 0, {}, static_cast<int>(sig.contributors.size())});
  vs.skip_sent = true;
  emit(SkipMsg{msg.view, std::move(sig)});
}

void Party::handle_skip(PartyId, const SkipMsg& msg) {
  if (!oracle_.threshold_validate(skip_digest(config_.instance, msg.view), msg.sig)) return;
  auto& vs = views_[msg.view];
  set_skip(msg.view, vs);
  if (vs.skip_sent) return;
  vs.skip_sent = true;
  emit(msg);
}

// ---- view change ----------------------------------------------------------

void Party::handle_view_change(PartyId from, const ViewChangeMsg& msg) {
  auto& vs = views_[msg.view];
  if (!vs.vc_from.insert(from).second) return;
  const PartyId leader = vs.election->mapped;
  auto valid_at = [&](int step, const Evidence& e) {
    return oracle_.threshold_validate(step_digest(StepId{config_.instance, leader, msg.view, step}, e.value), e.sig);
  };

  if (msg.commit && !decision_ && valid_at(3, *msg.commit)) {
    decision_ = Decision{msg.commit->value, msg.view, msg.commit->sig};
    record(Decided{self_, msg.view, msg.commit->value});
  }
  if (msg.lock && msg.view > lock_ && valid_at(2, *msg.lock)) {
    lock_ = msg.view;
    record(LockRaised{self_, msg.view});
  }
  if (msg.prepare && msg.view > prepare_.view && valid_at(1, *msg.prepare)) {
    prepare_ = Prepare{msg.view, msg.prepare->value, msg.prepare->sig};
  }
}

}  // namespace evaba
