// SPDX-License-Identifier: Apache-2.0
#include "evaba/audit.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

#include "evaba/ppb.hpp"

namespace evaba {

namespace {

constexpr std::array<std::string_view, 26> kChecks = {
    "exactly-once",          "fairness",           "agreement",          "integrity",
    "external-validity",     "termination",        "pb-integrity",       "pb-selected",
    "pb-uniqueness",         "threshold-quorum",   "provability-dispersal", "evidence-chaining",
    "commit-implies-lock",   "committee-validity", "committee-honest-member", "committee-agreement",
    "election-agreement",    "election-membership", "election-identity", "lock-safety",
    "prepare-convergence",   "leader-completion-decides", "skip-soundness", "suggestion-before-done",
    "message-counts",        "view-entry-order",
};

template <class... Args>
std::string cat(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

// (sender, view, step)
using StepKey = std::tuple<int, int, int>;
// (sender, view, step, value)
using ValueKey = std::tuple<int, int, int, Value>;

class Auditor {
 public:
  explicit Auditor(const EventLog& log) : log_(log), q_(log.header.quorum) {
    try {
      valid_ = named_validity(log.header.validity.empty() ? "any" : log.header.validity, q_.n);
    } catch (const ConfigError&) {
      valid_ = [](const Value&) { return true; };
    }
  }

  std::vector<Violation> run() {
    index();
    ordered_pass();
    network();
    decisions();
    committees();
    elections();
    view_entries();
    message_counts();
    std::stable_sort(out_.begin(), out_.end(), [](const Violation& a, const Violation& b) {
      return std::tie(a.event_index, a.check) < std::tie(b.event_index, b.check);
    });
    return std::move(out_);
  }

 private:
  bool honest(PartyId p) const { return log_.header.honest(p); }
  void flag(std::string_view check, std::size_t i, std::string detail) {
    out_.push_back({std::string(check), i, std::move(detail)});
  }
  std::size_t end_index() const { return log_.events.empty() ? 0 : log_.events.size() - 1; }

  // First honest observation of each view's committee and leader.
  void index() {
    for (std::size_t i = 0; i < log_.events.size(); ++i) {
      const auto& body = log_.events[i].body;
      if (const auto* c = std::get_if<CommitteeSelected>(&body); c && honest(c->party)) {
        committee_.try_emplace(c->view, c->members);
      } else if (const auto* l = std::get_if<LeaderElected>(&body); l && honest(l->party)) {
        leader_.try_emplace(l->view, l->mapped);
      } else if (const auto* s = std::get_if<SigFormed>(&body); s && s->kind == SigKind::pb) {
        formed_.try_emplace({s->sender.index(), s->view, s->step}, s->value);
      }
    }
  }

  bool member(int view, PartyId p) const {
    auto it = committee_.find(view);
    return it != committee_.end() && std::binary_search(it->second.begin(), it->second.end(), p);
  }

  // Checks whose meaning depends on what happened earlier in the log.
  void ordered_pass() {
    std::map<ValueKey, int> honest_deliveries;
    std::set<std::tuple<int, int, int, int>> delivered_once;  // party, sender, view, step
    std::map<std::tuple<int, int, int>, Value> party_chain;   // party, sender, view -> value at steps 2..4
    std::map<StepKey, Value> sig_values;
    std::set<std::pair<int, int>> suggestion_quorum;  // party, view
    std::set<int> done_quorum_views;
    std::set<int> completed_views;

    for (std::size_t i = 0; i < log_.events.size(); ++i) {
      const auto& body = log_.events[i].body;

      if (const auto* d = std::get_if<PbDelivered>(&body)) {
        if (!honest(d->party)) continue;
        if (!delivered_once.insert({d->party.index(), d->sender.index(), d->view, d->step}).second)
          flag("pb-integrity", i, cat(d->party, " delivered ", d->sender, "/v", d->view, "/s", d->step, " twice"));
        if (!member(d->view, d->sender))
          flag("pb-selected", i, cat(d->party, " delivered from non-member ", d->sender, " in view ", d->view));
        if (d->step >= 2) {
          auto prior = sig_values.find({d->sender.index(), d->view, d->step - 1});
          if (prior == sig_values.end() || prior->second != d->value)
            flag("evidence-chaining", i,
                 cat("step ", d->step, " of ", d->sender, "/v", d->view, " delivered without a prior step-",
                     d->step - 1, " signature on the same value"));
          auto [it, fresh] = party_chain.try_emplace({d->party.index(), d->sender.index(), d->view}, d->value);
          if (!fresh && it->second != d->value)
            flag("evidence-chaining", i, cat(d->party, " holds two values for ", d->sender, "/v", d->view));
        }
        if (d->step == 4) {
          auto it = honest_deliveries.find({d->sender.index(), d->view, 3, d->value});
          const int locks = it == honest_deliveries.end() ? 0 : it->second;
          if (locks < q_.small())
            flag("commit-implies-lock", i,
                 cat(d->party, " holds commit evidence for ", d->sender, "/v", d->view, " backed by ", locks,
                     " honest lock holders"));
        }
        ++honest_deliveries[{d->sender.index(), d->view, d->step, d->value}];
      } else if (const auto* s = std::get_if<SigFormed>(&body)) {
        if (s->contributors < q_.big())
          flag("threshold-quorum", i, cat("signature with ", s->contributors, " contributors, need ", q_.big()));
        if (s->kind != SigKind::pb) continue;
        auto [it, fresh] = sig_values.try_emplace({s->sender.index(), s->view, s->step}, s->value);
        if (!fresh && it->second != s->value)
          flag("pb-uniqueness", i, cat("two values signed for ", s->sender, "/v", s->view, "/s", s->step));
        auto count = [&](int step) {
          auto c = honest_deliveries.find({s->sender.index(), s->view, step, s->value});
          return c == honest_deliveries.end() ? 0 : c->second;
        };
        if (count(s->step) < q_.small())
          flag("provability-dispersal", i,
               cat("step ", s->step, " signature of ", s->sender, "/v", s->view, " has ", count(s->step),
                   " honest deliveries"));
        if (s->step >= 2 && count(s->step - 1) < q_.small())
          flag("provability-dispersal", i,
               cat("step ", s->step, " signature of ", s->sender, "/v", s->view, " has ", count(s->step - 1),
                   " honest deliveries at the previous step"));
        if (s->step == 4) completed_views.insert(s->view);
      } else if (const auto* r = std::get_if<Reached>(&body)) {
        switch (r->what) {
          case Milestone::suggestion_quorum:
            suggestion_quorum.insert({r->party.index(), r->view});
            break;
          case Milestone::done_sent:
            if (honest(r->party) && !suggestion_quorum.contains({r->party.index(), r->view}))
              flag("suggestion-before-done", i, cat(r->party, " sent DONE in view ", r->view, " early"));
            break;
          case Milestone::done_quorum:
            done_quorum_views.insert(r->view);
            break;
          case Milestone::skip_set:
            if (!honest(r->party)) break;
            if (!done_quorum_views.contains(r->view))
              flag("skip-soundness", i, cat(r->party, " skipped view ", r->view, " before any DONE quorum"));
            else if (!completed_views.contains(r->view))
              flag("skip-soundness", i, cat(r->party, " skipped view ", r->view, " with no completed promotion"));
            break;
          case Milestone::first_proposal:
            break;
        }
      }
    }
  }

  void network() {
    std::set<std::uint64_t> seqs;
    std::uint64_t deliveries = 0;
    for (std::size_t i = 0; i < log_.events.size(); ++i) {
      const auto& e = log_.events[i];
      if (const auto* d = std::get_if<Delivered>(&e.body)) {
        ++deliveries;
        if (!seqs.insert(d->seq).second) flag("exactly-once", i, cat("envelope ", d->seq, " delivered twice"));
        if (e.step > d->bound)
          flag("fairness", i, cat("envelope ", d->seq, " delivered at ", e.step, " past its bound ", d->bound));
      } else if (const auto* h = std::get_if<Halted>(&e.body)) {
        if (h->delivered != deliveries || h->delivered + h->pending != h->injected)
          flag("exactly-once", i,
               cat("injected ", h->injected, " != delivered ", h->delivered, " + pending ", h->pending));
        if (!seqs.empty() && *seqs.rbegin() >= h->injected)
          flag("exactly-once", i, cat("delivered an envelope that was never injected"));
        if (h->overdue_pending > 0) flag("fairness", i, cat(h->overdue_pending, " envelopes overdue at halt"));
      }
    }
  }

  void decisions() {
    std::map<Value, int> first_proposed;  // value -> earliest view
    std::map<int, std::pair<Value, int>> decided;  // party -> value, view
    std::optional<Value> agreed;
    for (std::size_t i = 0; i < log_.events.size(); ++i) {
      const auto& body = log_.events[i].body;
      if (const auto* p = std::get_if<Proposed>(&body)) {
        auto [it, fresh] = first_proposed.try_emplace(p->value, p->view);
        if (!fresh) it->second = std::min(it->second, p->view);
        continue;
      }
      const auto* d = std::get_if<Decided>(&body);
      if (!d || !honest(d->party)) continue;
      if (!decided.try_emplace(d->party.index(), d->value, d->view).second)
        flag("agreement", i, cat(d->party, " decided twice"));
      if (!agreed) agreed = d->value;
      else if (*agreed != d->value) flag("agreement", i, cat(d->party, " decided '", d->value, "' not '", *agreed, "'"));
      auto it = first_proposed.find(d->value);
      if (it == first_proposed.end() || it->second > d->view)
        flag("integrity", i, cat(d->party, " decided '", d->value, "' that was not proposed by view ", d->view));
      if (!valid_(d->value)) flag("external-validity", i, cat(d->party, " decided invalid '", d->value, "'"));
    }
    const int max_views = log_.header.max_views;
    for (int k = 1; k <= q_.n; ++k) {
      const PartyId p{k};
      if (!honest(p)) continue;
      auto it = decided.find(k);
      if (it == decided.end())
        flag("termination", end_index(), cat(p, " never decided"));
      else if (max_views > 0 && it->second.second > max_views)
        flag("termination", end_index(), cat(p, " decided in view ", it->second.second, " beyond ", max_views));
    }
  }

  void committees() {
    for (std::size_t i = 0; i < log_.events.size(); ++i) {
      const auto* c = std::get_if<CommitteeSelected>(&log_.events[i].body);
      if (!c || !honest(c->party)) continue;
      const auto& m = c->members;
      const bool in_range = std::all_of(m.begin(), m.end(), [&](PartyId p) { return p.valid(q_.n); });
      if (static_cast<int>(m.size()) != q_.small() || !in_range || std::adjacent_find(m.begin(), m.end(), [](PartyId a, PartyId b) {
            return !(a < b);
          }) != m.end())
        flag("committee-validity", i, cat("view ", c->view, " committee is not f+1 distinct ascending parties"));
      if (std::none_of(m.begin(), m.end(), [&](PartyId p) { return honest(p); }))
        flag("committee-honest-member", i, cat("view ", c->view, " committee has no honest member"));
      if (committee_.at(c->view) != m)
        flag("committee-agreement", i, cat(c->party, " disagrees on the view ", c->view, " committee"));
    }
  }

  void elections() {
    std::map<int, PartyId> raw;
    for (std::size_t i = 0; i < log_.events.size(); ++i) {
      const auto* l = std::get_if<LeaderElected>(&log_.events[i].body);
      if (!l || !honest(l->party)) continue;
      auto [it, fresh] = raw.try_emplace(l->view, l->raw);
      if (leader_.at(l->view) != l->mapped || it->second != l->raw)
        flag("election-agreement", i, cat(l->party, " elected a different leader in view ", l->view));
      if (!member(l->view, l->mapped))
        flag("election-membership", i, cat("view ", l->view, " leader ", l->mapped, " is not a member"));
      if (member(l->view, l->raw) && l->raw != l->mapped)
        flag("election-identity", i, cat("member ", l->raw, " was remapped to ", l->mapped));
    }
  }

  void view_entries() {
    // Facts about view j that constrain every honest entry into j + 1.
    std::set<int> decided_in;
    std::set<int> locked_in;
    for (const auto& e : log_.events) {
      if (const auto* d = std::get_if<Decided>(&e.body); d && honest(d->party)) decided_in.insert(d->view);
      if (const auto* l = std::get_if<LockRaised>(&e.body); l && honest(l->party)) locked_in.insert(l->view);
    }
    for (const auto& [view, leader] : leader_) {
      if (formed_.contains({leader.index(), view, 2})) locked_in.insert(view);
    }

    std::map<int, int> last_view;  // party -> view
    std::map<int, Value> prepare_at;  // entered view -> prepare value
    for (std::size_t i = 0; i < log_.events.size(); ++i) {
      const auto* v = std::get_if<ViewEntered>(&log_.events[i].body);
      if (!v || !honest(v->party)) continue;
      auto [it, fresh] = last_view.try_emplace(v->party.index(), v->view);
      if ((fresh && v->view != 1) || (!fresh && v->view != it->second + 1))
        flag("view-entry-order", i, cat(v->party, " entered view ", v->view, " out of order"));
      it->second = v->view;

      const int j = v->view - 1;
      if (j < 1) continue;
      if (decided_in.contains(j) && v->lock < j)
        flag("lock-safety", i, cat(v->party, " entered view ", v->view, " with LOCK ", v->lock, " < ", j));
      if (locked_in.contains(j)) {
        if (v->prepare_view != j)
          flag("prepare-convergence", i,
               cat(v->party, " entered view ", v->view, " with PREPARE.view ", v->prepare_view, " != ", j));
        auto [p, first] = prepare_at.try_emplace(v->view, v->prepare_value);
        if (!first && p->second != v->prepare_value)
          flag("prepare-convergence", i, cat(v->party, " entered view ", v->view, " with a different PREPARE.value"));
      }
      auto leader = leader_.find(j);
      if (leader != leader_.end() && formed_.contains({leader->second.index(), j, 4}) && !v->decided)
        flag("leader-completion-decides", i,
             cat(v->party, " left view ", j, " undecided although the leader's promotion completed"));
    }
  }

  void message_counts() {
    const std::uint64_t n = q_.n;
    const std::uint64_t members = q_.small();
    std::map<std::pair<int, MsgType>, std::uint64_t> per_view;
    std::map<StepKey, std::uint64_t> sends, acks;  // (view, step, 0)
    std::map<std::pair<int, MsgType>, std::size_t> last_index;
    for (std::size_t i = 0; i < log_.events.size(); ++i) {
      const auto* d = std::get_if<Delivered>(&log_.events[i].body);
      if (!d) continue;
      if (d->type == MsgType::send) {
        if (!member(d->view, d->from)) continue;
        ++sends[{d->view, d->pb_step, 0}];
      } else if (d->type == MsgType::ack) {
        if (!member(d->view, d->to)) continue;
        ++acks[{d->view, d->pb_step, 0}];
      }
      ++per_view[{d->view, d->type}];
      last_index[{d->view, d->type}] = i;
    }
    auto limit = [&](MsgType t) -> std::uint64_t {
      switch (t) {
        case MsgType::send:
        case MsgType::ack:
          return 4 * n * members;
        case MsgType::proposal:
          return n * members;
        case MsgType::done:
          return 2 * n * n;
        default:
          return n * n;
      }
    };
    for (const auto& [key, count] : per_view) {
      if (count > limit(key.second))
        flag("message-counts", last_index[key],
             cat(count, " ", to_string(key.second), " in view ", key.first, " exceeds ", limit(key.second)));
    }
    for (const auto* table : {&sends, &acks}) {
      for (const auto& [key, count] : *table) {
        if (count > n * members)
          flag("message-counts", end_index(),
               cat(count, table == &sends ? " SEND" : " ACK", " at view ", std::get<0>(key), " step ",
                   std::get<1>(key), " exceeds ", n * members));
      }
    }
  }

  const EventLog& log_;
  Quorum q_;
  Validity valid_;
  std::map<int, std::vector<PartyId>> committee_;
  std::map<int, PartyId> leader_;
  std::map<StepKey, Value> formed_;
  std::vector<Violation> out_;
};

}  // namespace

std::span<const std::string_view> audit_checks() { return kChecks; }

std::vector<Violation> audit_event_log(const EventLog& log) { return Auditor(log).run(); }

}  // namespace evaba
