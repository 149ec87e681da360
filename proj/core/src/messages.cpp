// SPDX-License-Identifier: Apache-2.0
#include "evaba/messages.hpp"

#include <type_traits>

namespace evaba {

Digest step_digest(const StepId& id, const Value& v) {
  return Digest().add("pb").add(id.instance).add(id.party).add(id.view).add(id.step).add(v);
}

Digest skip_digest(std::string_view instance, int view) {
  return Digest().add("skip").add(instance).add(view);
}

std::string coin_label(std::string_view instance, CoinPurpose purpose, int view) {
  return Digest().add(purpose == CoinPurpose::committee ? "cs" : "elect").add(instance).add(view).bytes();
}

namespace {

constexpr std::array<std::string_view, kMsgTypeCount> kNames = {
    "SHARE(cs)", "SHARE(elect)", "SEND", "ACK", "PROPOSAL", "SUGGESTION", "DONE", "SKIP-SHARE", "SKIP", "VIEW-CHANGE",
};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string_view to_string(MsgType t) { return kNames[static_cast<std::size_t>(t)]; }

std::optional<MsgType> msg_type_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == s) return static_cast<MsgType>(i);
  }
  return std::nullopt;
}

MsgType type_of(const ProtocolMessage& m) {
  return std::visit(overloaded{
                        [](const CoinShareMsg& c) {
                          return c.purpose == CoinPurpose::committee ? MsgType::share_cs : MsgType::share_elect;
                        },
                        [](const SendMsg&) { return MsgType::send; },
                        [](const AckMsg&) { return MsgType::ack; },
                        [](const ProposalMsg&) { return MsgType::proposal; },
                        [](const SuggestionMsg&) { return MsgType::suggestion; },
                        [](const DoneMsg&) { return MsgType::done; },
                        [](const SkipShareMsg&) { return MsgType::skip_share; },
                        [](const SkipMsg&) { return MsgType::skip; },
                        [](const ViewChangeMsg&) { return MsgType::view_change; },
                    },
                    m);
}

int view_of(const ProtocolMessage& m) {
  return std::visit(
      [](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, SendMsg> || std::is_same_v<T, AckMsg>) {
          return msg.id.view;
        } else {
          return msg.view;
        }
      },
      m);
}

std::size_t size_estimate(const ProtocolMessage& m, std::size_t sig_bytes) {
  auto evidence = [&](const std::optional<Evidence>& e) { return e ? e->value.size() + sig_bytes : 0; };
  return std::visit(overloaded{
                        [&](const CoinShareMsg&) { return sig_bytes; },
                        [&](const SendMsg& s) {
                          const bool has_sig = std::holds_alternative<ThresholdSig>(s.proof) ||
                                               std::get<PrepareEvidence>(s.proof).sig.has_value();
                          return s.value.size() + (has_sig ? sig_bytes : 0);
                        },
                        [&](const AckMsg&) { return sig_bytes; },
                        [&](const ProposalMsg& p) { return p.proof.value.size() + sig_bytes; },
                        [&](const SuggestionMsg& p) { return p.proof.value.size() + sig_bytes; },
                        [&](const DoneMsg& d) { return d.proof.value.size() + sig_bytes; },
                        [&](const SkipShareMsg&) { return sig_bytes; },
                        [&](const SkipMsg&) { return sig_bytes; },
                        [&](const ViewChangeMsg& v) {
                          return evidence(v.prepare) + evidence(v.lock) + evidence(v.commit);
                        },
                    },
                    m);
}

}  // namespace evaba
