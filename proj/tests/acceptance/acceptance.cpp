// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.
// Properties are recomputed here from the raw event logs rather than taken
// from the library's own auditor, except where the auditor is the subject.
#include <chrono>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "evaba/audit.hpp"
#include "evaba/committee.hpp"
#include "evaba/harness.hpp"
#include "evaba/report.hpp"
#include "support/mutations.hpp"
#include "support/oracles.hpp"

namespace {

using namespace evaba;

struct Verdict {
  bool pass = true;
  std::string note;

  void require(bool ok, const std::string& why) {
    if (ok) return;
    if (pass) note = why;
    pass = false;
  }
};

int failures = 0;

void print(const char* id, const char* title, const Verdict& v, const std::string& detail) {
  std::printf("%s %s %s: %s\n", v.pass ? "PASS" : "FAIL", id, title, v.pass ? detail.c_str() : v.note.c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const char* const kSchedulers[] = {"fifo", "random-delay", "worst-case-rotation", "partition-then-heal"};
const char* const kBehaviors[] = {"honest", "crash:0", "equivocate-send", "unselected-broadcaster", "done-spammer"};
constexpr int kRunsPerCell = 10;
const std::set<std::string> kSafetyChecks = {"agreement", "integrity", "external-validity", "pb-integrity",
                                             "pb-selected"};

ScenarioConfig cell(int n, const char* scheduler, const char* behavior, std::uint64_t seed) {
  ScenarioConfig c;
  c.n = n;
  c.f = (n - 1) / 3;
  c.seed = seed;
  c.runs = kRunsPerCell;
  c.max_views = 20;
  c.scheduler = SchedulerPolicy::parse(scheduler);
  for (int k = n - c.f + 1; k <= n; ++k) c.behaviors[PartyId{k}] = ByzantineBehavior::parse(behavior);
  return c;
}

// ---- per-log recomputations ------------------------------------------------

struct GridStats {
  std::size_t runs = 0;
  std::size_t safety_violations = 0;
  std::size_t other_violations = 0;
  std::string first_violation;
  std::size_t undecided = 0;
  int max_decided_view = 0;
  std::map<int, std::pair<double, int>> random_delay_views;  // n -> (sum, count)
  std::map<MsgType, double> worst_type_factor;                // max count / n^2 per view
  std::size_t committee_views = 0;
  std::size_t committee_bad = 0;
  std::size_t dispersal_sigs = 0;
  std::size_t dispersal_bad = 0;
  std::size_t lock_entries = 0;
  std::size_t lock_bad = 0;
  std::size_t prepare_entries = 0;
  std::size_t prepare_bad = 0;
};

void committee_validity(const EventLog& log, GridStats& g) {
  const auto& h = log.header;
  std::set<int> seen;
  for (const auto& e : log.events) {
    const auto* c = std::get_if<CommitteeSelected>(&e.body);
    if (!c || !h.honest(c->party)) continue;
    seen.insert(c->view);
    const std::set<PartyId> distinct(c->members.begin(), c->members.end());
    bool honest_member = false;
    for (PartyId p : c->members) honest_member |= h.honest(p);
    if (static_cast<int>(distinct.size()) != h.quorum.f + 1 || c->members.size() != distinct.size() || !honest_member)
      ++g.committee_bad;
  }
  g.committee_views += seen.size();
}

void provability_dispersal(const EventLog& log, GridStats& g) {
  const auto& h = log.header;
  std::map<std::tuple<int, int, int, Value>, std::set<PartyId>> delivered;  // sender, view, step, value
  for (const auto& e : log.events) {
    if (const auto* d = std::get_if<PbDelivered>(&e.body); d && h.honest(d->party)) {
      delivered[{d->sender.index(), d->view, d->step, d->value}].insert(d->party);
    } else if (const auto* s = std::get_if<SigFormed>(&e.body); s && s->kind == SigKind::pb && s->step >= 2) {
      ++g.dispersal_sigs;
      auto it = delivered.find({s->sender.index(), s->view, s->step - 1, s->value});
      if (it == delivered.end() || static_cast<int>(it->second.size()) < h.quorum.f + 1) ++g.dispersal_bad;
    }
  }
}

void lock_and_prepare(const EventLog& log, GridStats& g) {
  const auto& h = log.header;
  std::set<int> decided_in, locked_in;
  for (const auto& e : log.events) {
    if (const auto* d = std::get_if<Decided>(&e.body); d && h.honest(d->party)) decided_in.insert(d->view);
    if (const auto* l = std::get_if<LockRaised>(&e.body); l && h.honest(l->party)) locked_in.insert(l->view);
  }
  std::map<int, Value> prepare_value;
  for (const auto& e : log.events) {
    const auto* v = std::get_if<ViewEntered>(&e.body);
    if (!v || !h.honest(v->party)) continue;
    const int j = v->view - 1;
    if (decided_in.contains(j)) {
      ++g.lock_entries;
      if (v->lock < j) ++g.lock_bad;
    }
    if (locked_in.contains(j)) {
      ++g.prepare_entries;
      auto [it, first] = prepare_value.try_emplace(j, v->prepare_value);
      if (v->prepare_view != j || it->second != v->prepare_value) ++g.prepare_bad;
    }
  }
}

void message_types(const RunMetrics& r, int n, GridStats& g) {
  for (const auto& [view, counts] : r.messages_by_view) {
    for (MsgType t : kAllMsgTypes) {
      if (t == MsgType::send || t == MsgType::ack || t == MsgType::proposal) continue;
      const double factor = counts[static_cast<std::size_t>(t)] / double(n * n);
      auto& worst = g.worst_type_factor[t];
      worst = std::max(worst, factor);
    }
  }
}

// ---- criteria -------------------------------------------------------------

GridStats run_grid(double& seconds) {
  GridStats g;
  const auto t0 = std::chrono::steady_clock::now();
  std::uint64_t seed = 1000;
  for (int n : {4, 7, 10}) {
    for (const char* scheduler : kSchedulers) {
      for (const char* behavior : kBehaviors) {
        const auto config = cell(n, scheduler, behavior, ++seed);
        auto batch = run_batch(config, true);
        for (std::size_t i = 0; i < batch.runs.size(); ++i) {
          const auto& r = batch.runs[i];
          const auto& log = batch.logs[i];
          ++g.runs;
          for (const auto& v : r.violations) {
            auto& bucket = kSafetyChecks.contains(v.check) ? g.safety_violations : g.other_violations;
            ++bucket;
            if (g.first_violation.empty())
              g.first_violation = fmt("n=%d %s %s run %llu: %s", n, scheduler, behavior,
                                      static_cast<unsigned long long>(r.run_id), v.check.c_str());
          }
          if (!r.decided || r.hit_step_cap || r.decided_view > config.max_views) ++g.undecided;
          g.max_decided_view = std::max(g.max_decided_view, r.decided_view);
          if (std::string_view(scheduler) == "random-delay") {
            auto& [sum, count] = g.random_delay_views[n];
            sum += r.decided_view;
            ++count;
          }
          message_types(r, n, g);
          committee_validity(log, g);
          provability_dispersal(log, g);
          lock_and_prepare(log, g);
        }
      }
    }
  }
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return g;
}

void c3_message_count() {
  Verdict v;
  ScenarioConfig c;
  c.runs = 50;
  c.seed = 3;
  const std::uint64_t n = 4, members = 2;
  const auto batch = run_batch(c);
  std::size_t steps = 0, views = 0;
  for (const auto& r : batch.runs) {
    for (int view = 1; view <= r.decided_view; ++view) {
      std::uint64_t traffic = 0;
      for (int step = 1; step <= 4; ++step) {
        auto s = r.ppb_sends.find({view, step});
        auto a = r.ppb_acks.find({view, step});
        const std::uint64_t sends = s == r.ppb_sends.end() ? 0 : s->second;
        const std::uint64_t acks = a == r.ppb_acks.end() ? 0 : a->second;
        v.require(sends == n * members && acks == n * members,
                  fmt("run %llu view %d step %d: %llu SEND, %llu ACK (want 8)", (unsigned long long)r.run_id, view, step,
                      (unsigned long long)sends, (unsigned long long)acks));
        traffic += sends + acks;
        ++steps;
      }
      v.require(traffic == oracle::promotion_messages(n, members),
                fmt("run %llu view %d: %llu promotion messages", (unsigned long long)r.run_id, view,
                    (unsigned long long)traffic));
      ++views;
    }
  }
  const auto s = summarize(batch.runs, {4, 1});
  v.require(s.expected_promotion_per_view == 64 && s.baseline_promotion_per_view == 128, "analytic counts");
  const auto ratio = oracle::reduce({s.expected_promotion_per_view, s.baseline_promotion_per_view});
  v.require(ratio == oracle::reduce({members, n}), "ratio is not (f+1)/n");
  v.require(steps > 0, "no promotion steps observed");
  print("C3", "message-count", v,
        fmt("%zu P-PB steps each 8 SEND + 8 ACK; %zu views at 64 vs 8n^2 = 128, ratio %llu/%llu = (f+1)/n", steps,
            views, (unsigned long long)ratio.num, (unsigned long long)ratio.den));
}

void c5_committee(const GridStats& g) {
  Verdict v;
  v.require(g.committee_views > 0, "no committees observed");
  v.require(g.committee_bad == 0, fmt("%zu bad committees", g.committee_bad));
  int pairs = 0;
  for (int f = 1; f <= 10; ++f) {
    for (int kappa = 1; kappa <= f; ++kappa, ++pairs) {
      const auto got = all_faulty_probability(3 * f + 1, f, kappa);
      const auto want = oracle::all_faulty(3 * f + 1, f, kappa);
      v.require(got.num == want.num && got.den == want.den, fmt("C(f,k)/C(n,k) mismatch at f=%d k=%d", f, kappa));
      v.require(within_third_power_bound(got, kappa) && oracle::at_most_third_power(want, kappa),
                fmt("bound fails at f=%d k=%d", f, kappa));
    }
  }
  print("C5", "committee-validity", v,
        fmt("%zu run-views with f+1 members incl. an honest one; %d (f, k) pairs <= 3^-k exactly", g.committee_views,
            pairs));
}

void c8_coin() {
  Verdict v;
  const Quorum q{4, 1};
  CryptoOracle oracle(q, 0xacce97);
  const int labels = 10000;
  std::map<PartyId, int> leader, member;
  for (int i = 0; i < labels; ++i) {
    const std::string label = "acceptance/" + std::to_string(i);
    for (int k = 1; k <= q.small(); ++k) oracle.coin_share(PartyId{k}, PartyId{k}, label);
    ++leader[oracle.peek(label, CoinMode::leader).parties.front()];
    for (PartyId p : oracle.peek(label, CoinMode::committee, q.small()).parties) ++member[p];
  }
  double worst_leader = 0, worst_member = 0;
  for (int k = 1; k <= q.n; ++k) {
    worst_leader = std::max(worst_leader, std::abs(leader[PartyId{k}] / double(labels) - 1.0 / q.n));
    worst_member = std::max(worst_member, std::abs(member[PartyId{k}] / double(labels) - double(q.small()) / q.n));
  }
  v.require(worst_leader <= 0.05, fmt("leader frequency off by %.4f", worst_leader));
  v.require(worst_member <= 0.05, fmt("membership frequency off by %.4f", worst_member));
  print("C8", "coin-statistics", v,
        fmt("%d labels, n=4: max |leader - 1/4| = %.4f, max |member - 1/2| = %.4f", labels, worst_leader,
            worst_member));
}

void c9_determinism() {
  Verdict v;
  auto digest = [](ScenarioConfig c, int threads) {
    c.threads = threads;
    std::ostringstream os;
    write_report(os, c, run_batch(c).runs, ReportFormat::json);
    return fnv1a(os.str());
  };
  int batches = 0;
  for (const auto& config : {cell(7, "random-delay", "equivocate-send", 9), cell(10, "worst-case-rotation", "crash:0", 9),
                             cell(4, "partition-then-heal", "done-spammer", 9)}) {
    const auto a = digest(config, 1), b = digest(config, 1), c = digest(config, 3);
    v.require(a == b && a == c, fmt("report hash differs for n=%d %s", config.n, config.scheduler.name().c_str()));
    ++batches;
  }
  print("C9", "determinism", v, fmt("%d batches re-run with 1 and 3 threads, identical report hashes", batches));
}

void c10_negative_controls() {
  Verdict v;
  ScenarioConfig c;
  c.scheduler = SchedulerPolicy::parse("random-delay");
  auto base = run_scenario(c, 0);
  v.require(base.metrics.violations.empty(), "base log is not clean");
  auto only = [&](const std::optional<EventLog>& log, const char* check) {
    if (!log) {
      v.require(false, std::string("could not build control for ") + check);
      return;
    }
    std::set<std::string> got;
    for (const auto& x : audit_event_log(*log)) got.insert(x.check);
    v.require(got == std::set<std::string>{check}, std::string("control for ") + check + " tripped " +
                                                        std::to_string(got.size()) + " distinct checks");
  };
  only(testing::inject_double_decide(base.log), "agreement");
  only(testing::inject_non_member_delivery(base.log), "pb-selected");
  only(testing::inject_under_threshold_sig(base.log), "threshold-quorum");
  print("C10", "negative-controls", v,
        "double-decide -> agreement, non-member delivery -> pb-selected, n-f-1 shares -> threshold-quorum");
}

}  // namespace

int main() {
  double seconds = 0;
  const GridStats g = run_grid(seconds);

  {
    Verdict v;
    v.require(g.runs >= 500, "fewer than 500 runs");
    v.require(g.safety_violations == 0, fmt("%zu safety violations, first: %s", g.safety_violations,
                                            g.first_violation.c_str()));
    v.require(g.other_violations == 0, fmt("%zu other audit violations, first: %s", g.other_violations,
                                           g.first_violation.c_str()));
    v.require(seconds < 120, fmt("took %.1fs", seconds));
    print("C1", "safety", v, fmt("%zu runs, 0 violations of any audit check, %.1fs", g.runs, seconds));
  }
  {
    Verdict v;
    v.require(g.undecided == 0, fmt("%zu runs missed a decision within 20 views", g.undecided));
    std::string means;
    for (const auto& [n, acc] : g.random_delay_views) {
      const double mean = acc.first / acc.second;
      const int f = (n - 1) / 3;
      v.require(mean <= f + 2, fmt("n=%d random-delay mean decided view %.2f > f+2", n, mean));
      means += fmt(" n=%d:%.2f", n, mean);
    }
    print("C2", "liveness", v,
          fmt("all %zu runs decided, max view %d; random-delay mean decided view%s", g.runs, g.max_decided_view,
              means.c_str()));
  }
  c3_message_count();
  {
    Verdict v;
    const std::map<MsgType, double> bound = {{MsgType::share_cs, 1},  {MsgType::share_elect, 1}, {MsgType::suggestion, 1},
                                             {MsgType::done, 2},      {MsgType::skip_share, 1},  {MsgType::skip, 1},
                                             {MsgType::view_change, 1}};
    std::string worst;
    for (const auto& [t, c] : bound) {
      const double got = g.worst_type_factor.count(t) ? g.worst_type_factor.at(t) : 0.0;
      v.require(got <= c, fmt("%s reached %.2f n^2 in one view", std::string(to_string(t)).c_str(), got));
      worst += fmt(" %s<=%.2f", std::string(to_string(t)).c_str(), got);
    }
    print("C4", "quadratic-steps", v, "max per-view count / n^2:" + worst);
  }
  c5_committee(g);
  {
    Verdict v;
    v.require(g.dispersal_sigs > 0, "no step 2-4 signatures observed");
    v.require(g.dispersal_bad == 0, fmt("%zu signatures without f+1 honest prior deliveries", g.dispersal_bad));
    print("C6", "provability-dispersal", v,
          fmt("%zu step 2-4 signatures, each with >= f+1 honest previous-step deliveries", g.dispersal_sigs));
  }
  {
    Verdict v;
    v.require(g.lock_entries > 0 && g.prepare_entries > 0, "lock or prepare check was vacuous");
    v.require(g.lock_bad == 0, fmt("%zu entries with LOCK below the decided view", g.lock_bad));
    v.require(g.prepare_bad == 0, fmt("%zu entries with diverging PREPARE", g.prepare_bad));
    print("C7", "lock-prepare", v,
          fmt("%zu entries after a decision with LOCK >= j; %zu entries after a lock with PREPARE.view = j, equal value",
              g.lock_entries, g.prepare_entries));
  }
  c8_coin();
  c9_determinism();
  c10_negative_controls();

  std::printf("%d of 10 criteria failed\n", failures);
  return failures ? 1 : 0;
}
