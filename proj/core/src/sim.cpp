// SPDX-License-Identifier: Apache-2.0
#include "evaba/sim.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

namespace evaba {

namespace {

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(what) + ": not an unsigned integer: '" + std::string(text) + "'");
  }
  return v;
}

std::pair<std::string_view, std::optional<std::string_view>> split_arg(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) return {text, std::nullopt};
  return {text.substr(0, colon), text.substr(colon + 1)};
}

}  // namespace

SchedulerPolicy SchedulerPolicy::parse(std::string_view text) {
  auto [head, arg] = split_arg(text);
  SchedulerPolicy p;
  if (head == "fifo") {
    p.kind = Kind::fifo;
  } else if (head == "random-delay" || head == "random") {
    p.kind = Kind::random_delay;
    if (arg) p.seed = parse_u64(*arg, "random-delay seed");
    return p;
  } else if (head == "worst-case-rotation") {
    p.kind = Kind::worst_case_rotation;
  } else if (head == "partition-then-heal") {
    p.kind = Kind::partition_then_heal;
    if (arg) {
      p.heal_step = parse_u64(*arg, "heal step");
      if (p.heal_step == 0) throw ConfigError("partition-then-heal: heal step must be finite and positive");
    }
    return p;
  } else {
    throw ConfigError("unknown scheduler '" + std::string(text) + "'");
  }
  if (arg) throw ConfigError("scheduler '" + std::string(head) + "' takes no argument");
  return p;
}

std::string SchedulerPolicy::name() const {
  switch (kind) {
    case Kind::fifo:
      return "fifo";
    case Kind::random_delay:
      return seed ? "random-delay:" + std::to_string(seed) : "random-delay";
    case Kind::worst_case_rotation:
      return "worst-case-rotation";
    case Kind::partition_then_heal:
      return heal_step ? "partition-then-heal:" + std::to_string(heal_step) : "partition-then-heal";
  }
  return "?";
}

ByzantineBehavior ByzantineBehavior::parse(std::string_view text) {
  auto [head, arg] = split_arg(text);
  ByzantineBehavior b;
  if (head == "crash") {
    b.kind = Kind::crash;
    if (arg) b.crash_after = parse_u64(*arg, "crash step");
    return b;
  }
  if (head == "honest") {
    b.kind = Kind::honest;
  } else if (head == "equivocate-send") {
    b.kind = Kind::equivocate_send;
  } else if (head == "unselected-broadcaster") {
    b.kind = Kind::unselected_broadcaster;
  } else if (head == "silent-after-promote") {
    b.kind = Kind::silent_after_promote;
  } else if (head == "done-spammer") {
    b.kind = Kind::done_spammer;
  } else {
    throw ConfigError("unknown behavior '" + std::string(text) + "'");
  }
  if (arg) throw ConfigError("behavior '" + std::string(head) + "' takes no argument");
  return b;
}

std::string ByzantineBehavior::name() const {
  switch (kind) {
    case Kind::honest:
      return "honest";
    case Kind::crash:
      return "crash:" + std::to_string(crash_after);
    case Kind::equivocate_send:
      return "equivocate-send";
    case Kind::unselected_broadcaster:
      return "unselected-broadcaster";
    case Kind::silent_after_promote:
      return "silent-after-promote";
    case Kind::done_spammer:
      return "done-spammer";
  }
  return "?";
}

// ---------------------------------------------------------------------------

Scheduler::Scheduler(SchedulerPolicy policy, Quorum quorum, std::uint64_t run_seed)
    : policy_(std::move(policy)), quorum_(quorum) {
  const auto n2 = static_cast<std::uint64_t>(quorum_.n) * static_cast<std::uint64_t>(quorum_.n);
  cap_ = 16 * n2;
  max_delay_ = 2 * n2;
  rotation_period_ = 4 * n2;
  if (policy_.kind == SchedulerPolicy::Kind::partition_then_heal) {
    if (policy_.heal_step == 0) policy_.heal_step = 10 * n2;
    if (policy_.isolated.empty()) {
      for (int i = 1; i <= quorum_.f; ++i) policy_.isolated.emplace_back(i);
    }
    cap_ += policy_.heal_step;
  }
  rng_.seed(mix64((policy_.seed ? policy_.seed : run_seed) ^ 0x5c4edULL));
}

bool Scheduler::isolated(PartyId p) const {
  return std::find(policy_.isolated.begin(), policy_.isolated.end(), p) != policy_.isolated.end();
}

Scheduler::Key Scheduler::key_for(const Envelope& e, std::uint64_t now) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  switch (policy_.kind) {
    case SchedulerPolicy::Kind::fifo:
      return {0, e.seq, e.seq};
    case SchedulerPolicy::Kind::random_delay: {
      std::uniform_int_distribution<std::uint64_t> delay(0, max_delay_);
      return {now + delay(rng_), e.seq, e.seq};
    }
    case SchedulerPolicy::Kind::worst_case_rotation: {
      // Starve whichever party is the current victim and deliver everything
      // else newest-first.
      const auto victim = PartyId(static_cast<int>((now / rotation_period_) % static_cast<std::uint64_t>(quorum_.n)) + 1);
      const bool hit = e.from == victim || e.to == victim;
      return {hit ? 1u : 0u, kMax - e.seq, e.seq};
    }
    case SchedulerPolicy::Kind::partition_then_heal: {
      const bool crosses = isolated(e.from) != isolated(e.to);
      return {crosses ? 1u : 0u, e.seq, e.seq};
    }
  }
  return {0, e.seq, e.seq};
}

void Scheduler::push(Envelope e, std::uint64_t now) {
  e.injected_at = now;
  e.bound = now + cap_ + store_.size() + 1;
  Key k = key_for(e, now);
  order_.insert(k);
  auto seq = e.seq;
  store_.emplace(seq, std::make_pair(std::move(e), k));
}

Envelope Scheduler::take(std::map<std::uint64_t, std::pair<Envelope, Key>>::iterator it) {
  order_.erase(it->second.second);
  Envelope e = std::move(it->second.first);
  store_.erase(it);
  return e;
}

std::optional<Envelope> Scheduler::pop(std::uint64_t now) {
  if (store_.empty()) return std::nullopt;
  auto oldest = store_.begin();
  if (now - oldest->second.first.injected_at >= cap_) return take(oldest);
  if (policy_.kind == SchedulerPolicy::Kind::partition_then_heal && now >= policy_.heal_step) return take(oldest);
  auto seq = std::get<2>(*order_.begin());
  return take(store_.find(seq));
}

std::uint64_t Scheduler::overdue(std::uint64_t now) const {
  return static_cast<std::uint64_t>(
      std::count_if(store_.begin(), store_.end(), [&](const auto& kv) { return kv.second.first.bound < now; }));
}

// ---------------------------------------------------------------------------

void Context::send(PartyId to, ProtocolMessage m) { sim_->inject(self_, to, std::move(m)); }
void Context::multicast(const ProtocolMessage& m) { sim_->multicast(self_, m); }
std::uint64_t Context::now() const { return sim_->now(); }
const Quorum& Context::quorum() const { return sim_->quorum(); }
EventLog* Context::log() const { return sim_->log(); }
void Context::record(EventBody body) const {
  if (auto* log = sim_->log()) log->record(sim_->now(), std::move(body));
}

std::uint64_t MessageCounters::total() const {
  std::uint64_t t = 0;
  for (auto c : by_type) t += c;
  return t;
}

Simulator::Simulator(Quorum quorum, SchedulerPolicy policy, std::uint64_t run_seed, std::size_t sig_bytes,
                     EventLog* log)
    : quorum_(quorum),
      scheduler_(std::move(policy), quorum, run_seed),
      sig_bytes_(sig_bytes),
      log_(log),
      nodes_(static_cast<std::size_t>(quorum.n) + 1),
      crash_(static_cast<std::size_t>(quorum.n) + 1) {}

void Simulator::install(PartyId id, std::unique_ptr<Node> node) {
  if (!id.valid(quorum_.n)) throw std::out_of_range("install: party id out of range");
  nodes_[static_cast<std::size_t>(id.index())] = std::move(node);
}

Node& Simulator::node(PartyId id) const { return *nodes_.at(static_cast<std::size_t>(id.index())); }

void Simulator::crash_at(PartyId id, std::uint64_t step) { crash_.at(static_cast<std::size_t>(id.index())) = step; }

bool Simulator::crashed(PartyId p) const {
  const auto& c = crash_.at(static_cast<std::size_t>(p.index()));
  return c && now_ >= *c;
}

void Simulator::start() {
  for (int i = 1; i <= quorum_.n; ++i) {
    if (!nodes_[static_cast<std::size_t>(i)]) throw std::logic_error("start: node " + std::to_string(i) + " missing");
  }
  for (int i = 1; i <= quorum_.n; ++i) {
    PartyId p(i);
    if (crashed(p)) continue;
    Context ctx(*this, p);
    nodes_[static_cast<std::size_t>(i)]->start(ctx);
  }
}

void Simulator::inject(PartyId from, PartyId to, ProtocolMessage payload) {
  if (halted_) throw HaltError("inject after simulation halt");
  if (crashed(from)) throw HaltError("inject from crashed party");
  if (!from.valid(quorum_.n) || !to.valid(quorum_.n)) throw std::out_of_range("inject: party id out of range");

  const MsgType type = type_of(payload);
  const int view = view_of(payload);
  const auto t = static_cast<std::size_t>(type);
  counters_.by_type[t] += 1;
  counters_.by_view[view][t] += 1;
  counters_.bytes += size_estimate(payload, sig_bytes_);
  if (type == MsgType::send) counters_.sends[{view, std::get<SendMsg>(payload).id.step}] += 1;
  if (type == MsgType::ack) counters_.acks[{view, std::get<AckMsg>(payload).id.step}] += 1;

  Envelope e{from, to, std::move(payload), next_seq_++, 0, 0};
  scheduler_.push(std::move(e), now_);
}

void Simulator::multicast(PartyId from, const ProtocolMessage& payload) {
  for (int i = 1; i <= quorum_.n; ++i) inject(from, PartyId(i), payload);
}

StepResult Simulator::step() {
  if (halted_) return Quiescent{};
  auto next = scheduler_.pop(now_);
  if (!next) return Quiescent{};
  ++now_;
  ++delivered_;
  Envelope& e = *next;

  DeliveryEvent ev{now_, e.from, e.to, type_of(e.payload), view_of(e.payload), !crashed(e.to)};
  if (log_) {
    int pb_step = 0;
    if (const auto* s = std::get_if<SendMsg>(&e.payload)) pb_step = s->id.step;
    if (const auto* a = std::get_if<AckMsg>(&e.payload)) pb_step = a->id.step;
    log_->record(now_, Delivered{e.seq, e.from, e.to, ev.type, ev.view, pb_step, size_estimate(e.payload, sig_bytes_),
                                 e.injected_at, e.bound});
  }
  if (ev.handled) {
    Context ctx(*this, e.to);
    nodes_[static_cast<std::size_t>(e.to.index())]->on_message(e.from, e.payload, ctx);
  }
  return ev;
}

void Simulator::halt() {
  if (halted_) return;
  halted_ = true;
  if (log_) {
    log_->record(now_, Halted{next_seq_, delivered_, scheduler_.pending(), scheduler_.overdue(now_)});
  }
}

}  // namespace evaba
