// SPDX-License-Identifier: Apache-2.0
#include "evaba/trace.hpp"

#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

namespace evaba {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

json parties(const std::vector<PartyId>& ps) {
  json a = json::array();
  for (PartyId p : ps) a.push_back(p.index());
  return a;
}

std::vector<PartyId> parties(const json& a) {
  std::vector<PartyId> out;
  for (const auto& x : a) out.emplace_back(x.get<int>());
  return out;
}

PartyId pid(const json& j, const char* key) { return PartyId{j.at(key).get<int>()}; }

json encode(const EventBody& body) {
  return std::visit(
      overloaded{
          [](const Delivered& e) {
            return json{{"type", "delivered"}, {"seq", e.seq},   {"from", e.from.index()},
                        {"to", e.to.index()},  {"msg", to_string(e.type)}, {"view", e.view},
                        {"pb_step", e.pb_step}, {"bytes", e.bytes}, {"injected_at", e.injected_at},
                        {"bound", e.bound}};
          },
          [](const CommitteeSelected& e) {
            return json{{"type", "committee"}, {"party", e.party.index()}, {"view", e.view},
                        {"members", parties(e.members)}};
          },
          [](const Proposed& e) {
            return json{{"type", "proposed"}, {"party", e.party.index()}, {"view", e.view}, {"value", e.value}};
          },
          [](const PbDelivered& e) {
            return json{{"type", "pb_delivered"}, {"party", e.party.index()}, {"sender", e.sender.index()},
                        {"view", e.view},         {"step", e.step},           {"value", e.value}};
          },
          [](const SigFormed& e) {
            return json{{"type", "sig_formed"},
                        {"holder", e.holder.index()},
                        {"kind", e.kind == SigKind::pb ? "pb" : "skip"},
                        {"sender", e.sender.index()},
                        {"view", e.view},
                        {"step", e.step},
                        {"value", e.value},
                        {"contributors", e.contributors}};
          },
          [](const LeaderElected& e) {
            return json{{"type", "leader"}, {"party", e.party.index()}, {"view", e.view},
                        {"raw", e.raw.index()}, {"mapped", e.mapped.index()}};
          },
          [](const Decided& e) {
            return json{{"type", "decided"}, {"party", e.party.index()}, {"view", e.view}, {"value", e.value}};
          },
          [](const LockRaised& e) {
            return json{{"type", "lock"}, {"party", e.party.index()}, {"view", e.view}};
          },
          [](const ViewEntered& e) {
            return json{{"type", "view_entered"}, {"party", e.party.index()},   {"view", e.view},
                        {"lock", e.lock},         {"prepare_view", e.prepare_view}, {"prepare_value", e.prepare_value},
                        {"decided", e.decided}};
          },
          [](const Reached& e) {
            return json{{"type", "milestone"}, {"party", e.party.index()}, {"view", e.view},
                        {"what", to_string(e.what)}};
          },
          [](const Halted& e) {
            return json{{"type", "halted"},
                        {"injected", e.injected},
                        {"delivered", e.delivered},
                        {"pending", e.pending},
                        {"overdue_pending", e.overdue_pending}};
          },
      },
      body);
}

EventBody decode(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "delivered") {
    auto t = msg_type_from_string(j.at("msg").get<std::string>());
    if (!t) throw TraceError("unknown message type " + j.at("msg").dump());
    return Delivered{j.at("seq").get<std::uint64_t>(), pid(j, "from"), pid(j, "to"), *t, j.at("view").get<int>(),
                     j.at("pb_step").get<int>(), j.at("bytes").get<std::size_t>(),
                     j.at("injected_at").get<std::uint64_t>(), j.at("bound").get<std::uint64_t>()};
  }
  if (type == "committee")
    return CommitteeSelected{pid(j, "party"), j.at("view").get<int>(), parties(j.at("members"))};
  if (type == "proposed") return Proposed{pid(j, "party"), j.at("view").get<int>(), j.at("value").get<Value>()};
  if (type == "pb_delivered")
    return PbDelivered{pid(j, "party"), pid(j, "sender"), j.at("view").get<int>(), j.at("step").get<int>(),
                       j.at("value").get<Value>()};
  if (type == "sig_formed")
    return SigFormed{pid(j, "holder"),         j.at("kind").get<std::string>() == "skip" ? SigKind::skip : SigKind::pb,
                     pid(j, "sender"),         j.at("view").get<int>(),
                     j.at("step").get<int>(),  j.at("value").get<Value>(),
                     j.at("contributors").get<int>()};
  if (type == "leader")
    return LeaderElected{pid(j, "party"), j.at("view").get<int>(), pid(j, "raw"), pid(j, "mapped")};
  if (type == "decided") return Decided{pid(j, "party"), j.at("view").get<int>(), j.at("value").get<Value>()};
  if (type == "lock") return LockRaised{pid(j, "party"), j.at("view").get<int>()};
  if (type == "view_entered")
    return ViewEntered{pid(j, "party"), j.at("view").get<int>(), j.at("lock").get<int>(),
                       j.at("prepare_view").get<int>(), j.at("prepare_value").get<Value>(),
                       j.at("decided").get<bool>()};
  if (type == "milestone") {
    auto m = milestone_from_string(j.at("what").get<std::string>());
    if (!m) throw TraceError("unknown milestone " + j.at("what").dump());
    return Reached{pid(j, "party"), j.at("view").get<int>(), *m};
  }
  if (type == "halted")
    return Halted{j.at("injected").get<std::uint64_t>(), j.at("delivered").get<std::uint64_t>(),
                  j.at("pending").get<std::uint64_t>(), j.at("overdue_pending").get<std::uint64_t>()};
  throw TraceError("unknown event type '" + type + "'");
}

}  // namespace

void write_trace(std::ostream& os, const EventLog& log) {
  const auto& h = log.header;
  json head{{"type", "run"},           {"run_id", h.run_id},   {"seed", h.seed},
            {"n", h.quorum.n},         {"f", h.quorum.f},      {"instance", h.instance},
            {"corrupt", parties(h.corrupt)}, {"validity", h.validity}, {"scheduler", h.scheduler},
            {"max_views", h.max_views}};
  os << head.dump() << '\n';
  for (const auto& e : log.events) {
    json j = encode(e.body);
    j["at"] = e.step;
    os << j.dump() << '\n';
  }
}

std::vector<EventLog> read_trace(std::istream& is) {
  std::vector<EventLog> logs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (j.at("type") == "run") {
        EventLog log;
        auto& h = log.header;
        h.run_id = j.at("run_id").get<std::uint64_t>();
        h.seed = j.at("seed").get<std::uint64_t>();
        h.quorum = Quorum{j.at("n").get<int>(), j.at("f").get<int>()};
        h.instance = j.at("instance").get<std::string>();
        h.corrupt = parties(j.at("corrupt"));
        h.validity = j.at("validity").get<std::string>();
        h.scheduler = j.at("scheduler").get<std::string>();
        h.max_views = j.at("max_views").get<int>();
        logs.push_back(std::move(log));
        continue;
      }
      if (logs.empty()) throw TraceError("event before any run header");
      logs.back().events.push_back(Event{j.at("at").get<std::uint64_t>(), decode(j)});
    } catch (const json::exception& e) {
      throw TraceError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const TraceError& e) {
      throw TraceError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return logs;
}

}  // namespace evaba
