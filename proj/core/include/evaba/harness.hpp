// SPDX-License-Identifier: Apache-2.0
//
// Scenario configuration and batch execution.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evaba/audit.hpp"
#include "evaba/event_log.hpp"
#include "evaba/sim.hpp"

namespace evaba {

struct ScenarioConfig {
  int n = 4;
  int f = 1;
  std::uint64_t seed = 1;
  SchedulerPolicy scheduler;
  std::map<PartyId, ByzantineBehavior> behaviors;  // absent parties are honest
  int max_views = 20;
  std::string validity = "proposer-tagged";
  int runs = 1;
  std::string instance = "evaba";
  std::size_t payload_bytes = 32;  // L, reporting only
  std::size_t sig_bytes = 48;      // K, reporting only
  std::uint64_t max_steps = 0;     // 0: derived from n and max_views
  int threads = 0;                 // 0: hardware concurrency
  /// After every honest party decided, keep running until each has also
  /// entered the view after the latest decision, so the audit sees the
  /// state carried across that boundary.
  bool settle = true;

  /// Throws ConfigError unless n = 3f + 1, at most f parties misbehave and
  /// every field is in range.
  void validate() const;

  /// Applies one `key = value` setting. Keys match the CLI flag names.
  void set(std::string_view key, std::string_view value);
  /// Flat `key = value` text; '#' starts a comment; `behavior` may repeat.
  static ScenarioConfig parse(std::string_view text);
  static ScenarioConfig load(const std::filesystem::path& path);

  std::vector<PartyId> corrupt() const;
  std::uint64_t step_cap() const;
};

/// Per-run seed: a mix of the batch seed and the run index.
std::uint64_t derive_run_seed(std::uint64_t batch_seed, std::uint64_t run_index);

/// The input every party proposes in a run: "p<k>:<hex>".
Value party_input(PartyId p, std::uint64_t run_seed);

struct RunMetrics {
  std::uint64_t run_id = 0;
  std::uint64_t seed = 0;
  bool decided = false;  // every honest party decided
  int decided_view = 0;  // latest honest decision view
  std::string value_digest;
  int views = 0;  // highest view any honest party entered
  std::uint64_t steps = 0;
  bool hit_step_cap = false;
  std::array<std::uint64_t, kMsgTypeCount> messages_by_type{};
  std::map<int, std::array<std::uint64_t, kMsgTypeCount>> messages_by_view;
  std::map<std::pair<int, int>, std::uint64_t> ppb_sends;  // (view, step)
  std::map<std::pair<int, int>, std::uint64_t> ppb_acks;   // (view, step)
  std::uint64_t bytes = 0;
  std::vector<Violation> violations;
};

struct RunOutcome {
  RunMetrics metrics;
  EventLog log;
};

/// Runs and audits one simulation. `config` must be valid.
RunOutcome run_scenario(const ScenarioConfig& config, std::uint64_t run_id);

struct BatchResult {
  std::vector<RunMetrics> runs;  // sorted by run id
  std::vector<EventLog> logs;    // filled only when requested
};

/// Executes config.runs independent runs in parallel.
BatchResult run_batch(const ScenarioConfig& config, bool keep_logs = false);

}  // namespace evaba
