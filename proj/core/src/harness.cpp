// SPDX-License-Identifier: Apache-2.0
#include "evaba/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include "evaba/party.hpp"

namespace evaba {

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError(std::string(key) + ": not a number: '" + std::string(text) + "'");
  return v;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

}  // namespace

void ScenarioConfig::set(std::string_view key_in, std::string_view value_in) {
  std::string key(trim(key_in));
  std::replace(key.begin(), key.end(), '_', '-');
  const std::string_view value = trim(value_in);
  if (key == "n") {
    n = parse_number<int>(key, value);
  } else if (key == "f") {
    f = parse_number<int>(key, value);
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "runs") {
    runs = parse_number<int>(key, value);
  } else if (key == "scheduler") {
    scheduler = SchedulerPolicy::parse(value);
  } else if (key == "behavior") {
    const auto eq = value.find('=');
    if (eq == std::string_view::npos) throw ConfigError("behavior: expected id=kind, got '" + std::string(value) + "'");
    const int id = parse_number<int>("behavior id", trim(value.substr(0, eq)));
    behaviors[PartyId{id}] = ByzantineBehavior::parse(trim(value.substr(eq + 1)));
  } else if (key == "max-views") {
    max_views = parse_number<int>(key, value);
  } else if (key == "validity") {
    validity = std::string(value);
  } else if (key == "instance") {
    instance = std::string(value);
  } else if (key == "payload-bytes") {
    payload_bytes = parse_number<std::size_t>(key, value);
  } else if (key == "sig-bytes") {
    sig_bytes = parse_number<std::size_t>(key, value);
  } else if (key == "max-steps") {
    max_steps = parse_number<std::uint64_t>(key, value);
  } else if (key == "settle") {
    if (value != "true" && value != "false") throw ConfigError("settle: expected true or false");
    settle = value == "true";
  } else if (key == "threads") {
    threads = parse_number<int>(key, value);
  } else {
    throw ConfigError("unknown setting '" + key + "'");
  }
}

ScenarioConfig ScenarioConfig::parse(std::string_view text) {
  ScenarioConfig c;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    c.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void ScenarioConfig::validate() const {
  if (f < 0 || n != 3 * f + 1)
    throw ConfigError("n must equal 3f+1 (got n=" + std::to_string(n) + ", f=" + std::to_string(f) + ")");
  if (runs < 0) throw ConfigError("runs must be non-negative");
  if (max_views < 1) throw ConfigError("max-views must be positive");
  if (threads < 0) throw ConfigError("threads must be non-negative");
  if (instance.empty()) throw ConfigError("instance must be non-empty");
  int corrupt_count = 0;
  for (const auto& [id, b] : behaviors) {
    if (!id.valid(n)) throw ConfigError("behavior for unknown party " + std::to_string(id.index()));
    if (!b.honest()) ++corrupt_count;
  }
  if (corrupt_count > f)
    throw ConfigError(std::to_string(corrupt_count) + " misbehaving parties exceed f=" + std::to_string(f));
  (void)named_validity(validity, n);
  for (PartyId p : scheduler.isolated) {
    if (!p.valid(n)) throw ConfigError("isolated party out of range");
  }
}

std::vector<PartyId> ScenarioConfig::corrupt() const {
  std::vector<PartyId> out;
  for (const auto& [id, b] : behaviors) {
    if (!b.honest()) out.push_back(id);
  }
  return out;
}

std::uint64_t ScenarioConfig::step_cap() const {
  if (max_steps) return max_steps;
  const auto nn = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n);
  return 40 * nn * static_cast<std::uint64_t>(max_views + 2);
}

std::uint64_t derive_run_seed(std::uint64_t batch_seed, std::uint64_t run_index) {
  return mix64(batch_seed ^ mix64(run_index + 1));
}

Value party_input(PartyId p, std::uint64_t run_seed) {
  return "p" + std::to_string(p.index()) + ":" + hex64(mix64(run_seed + static_cast<std::uint64_t>(p.index())));
}

RunOutcome run_scenario(const ScenarioConfig& config, std::uint64_t run_id) {
  const Quorum q{config.n, config.f};
  const std::uint64_t seed = derive_run_seed(config.seed, run_id);

  RunOutcome out;
  EventLog& log = out.log;
  log.header = RunHeader{run_id, seed, q, config.instance, config.corrupt(), config.validity, config.scheduler.name(),
                         config.max_views};

  CryptoOracle oracle(q, mix64(seed ^ 0xc0ffee));
  Simulator sim(q, config.scheduler, seed, config.sig_bytes, &log);
  const Validity validity = named_validity(config.validity, q.n);

  std::vector<const Party*> honest;
  for (int k = 1; k <= q.n; ++k) {
    const PartyId id{k};
    auto it = config.behaviors.find(id);
    const ByzantineBehavior behavior = it == config.behaviors.end() ? ByzantineBehavior{} : it->second;
    PartyConfig pc;
    pc.instance = config.instance;
    pc.quorum = q;
    pc.input = party_input(id, seed);
    pc.alternate_input = "p" + std::to_string(k) + ":alt-" + hex64(mix64(seed ^ static_cast<std::uint64_t>(k)));
    pc.validity = validity;
    pc.behavior = behavior;
    auto party = std::make_unique<Party>(std::move(pc), id, oracle);
    if (behavior.honest()) honest.push_back(party.get());
    if (behavior.kind == ByzantineBehavior::Kind::crash) sim.crash_at(id, behavior.crash_after);
    sim.install(id, std::move(party));
  }

  auto all_decided = [&] {
    return std::all_of(honest.begin(), honest.end(), [](const Party* p) { return p->decision().has_value(); });
  };
  auto past_view_limit = [&] {
    return std::any_of(honest.begin(), honest.end(), [&](const Party* p) { return p->view() > config.max_views; });
  };

  const std::uint64_t cap = config.step_cap();
  RunMetrics& m = out.metrics;
  sim.start();
  while (!all_decided() && !past_view_limit()) {
    if (sim.now() >= cap) {
      m.hit_step_cap = true;
      break;
    }
    if (std::holds_alternative<Quiescent>(sim.step())) break;
  }
  if (config.settle && all_decided()) {
    int last = 0;
    for (const Party* p : honest) last = std::max(last, p->decision()->view);
    auto settled = [&] {
      return std::all_of(honest.begin(), honest.end(), [&](const Party* p) { return p->view() > last; });
    };
    while (!settled() && sim.now() < cap) {
      if (std::holds_alternative<Quiescent>(sim.step())) break;
    }
  }
  sim.halt();

  m.run_id = run_id;
  m.seed = seed;
  m.decided = all_decided();
  for (const Party* p : honest) {
    m.views = std::max(m.views, p->view());
    if (const auto& d = p->decision()) {
      m.decided_view = std::max(m.decided_view, d->view);
      if (m.value_digest.empty()) m.value_digest = hex64(fnv1a(d->value));
    }
  }
  m.steps = sim.now();
  const auto& c = sim.counters();
  m.messages_by_type = c.by_type;
  m.messages_by_view = c.by_view;
  m.ppb_sends = c.sends;
  m.ppb_acks = c.acks;
  m.bytes = c.bytes;
  m.violations = audit_event_log(log);
  return out;
}

BatchResult run_batch(const ScenarioConfig& config, bool keep_logs) {
  config.validate();
  BatchResult result;
  const auto runs = static_cast<std::size_t>(config.runs);
  result.runs.resize(runs);
  if (keep_logs) result.logs.resize(runs);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs; i = next++) {
      auto outcome = run_scenario(config, i);
      result.runs[i] = std::move(outcome.metrics);
      if (keep_logs) result.logs[i] = std::move(outcome.log);
    }
  };
  unsigned threads = config.threads > 0 ? static_cast<unsigned>(config.threads) : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(runs, 1))));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return result;
}

}  // namespace evaba
