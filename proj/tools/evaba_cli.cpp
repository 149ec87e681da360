// SPDX-License-Identifier: Apache-2.0
//
// evaba run   --config <file> [overrides...]
// evaba audit --log <file>
//
// Exit status: 0 when every run decided and every audit check passed,
// 1 when something failed, 2 on usage or configuration errors.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "evaba/audit.hpp"
#include "evaba/harness.hpp"
#include "evaba/report.hpp"
#include "evaba/trace.hpp"

namespace {

struct RunArgs {
  std::string config;
  std::optional<int> n, f, runs, max_views, threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scheduler, validity;
  std::vector<std::string> behaviors;
  std::string trace;
  std::string format = "table";
};

int do_run(const RunArgs& a) {
  evaba::ScenarioConfig cfg = a.config.empty() ? evaba::ScenarioConfig{} : evaba::ScenarioConfig::load(a.config);
  if (a.n) cfg.n = *a.n;
  if (a.f) cfg.f = *a.f;
  if (a.runs) cfg.runs = *a.runs;
  if (a.max_views) cfg.max_views = *a.max_views;
  if (a.threads) cfg.threads = *a.threads;
  if (a.seed) cfg.seed = *a.seed;
  if (a.scheduler) cfg.set("scheduler", *a.scheduler);
  if (a.validity) cfg.set("validity", *a.validity);
  for (const auto& b : a.behaviors) cfg.set("behavior", b);
  const auto format = evaba::parse_report_format(a.format);
  cfg.validate();

  std::ofstream trace;
  if (!a.trace.empty()) {
    trace.open(a.trace);
    if (!trace) throw evaba::ConfigError("cannot write trace file " + a.trace);
  }
  const auto batch = evaba::run_batch(cfg, trace.is_open());
  for (const auto& log : batch.logs) evaba::write_trace(trace, log);
  evaba::write_report(std::cout, cfg, batch.runs, format);

  bool ok = true;
  for (const auto& r : batch.runs) ok = ok && r.decided && r.violations.empty();
  return ok ? 0 : 1;
}

int do_audit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw evaba::ConfigError("cannot read " + path);
  const auto logs = evaba::read_trace(in);
  std::size_t bad = 0;
  for (const auto& log : logs) {
    const auto violations = evaba::audit_event_log(log);
    std::cout << "run " << log.header.run_id << ": " << log.events.size() << " events, " << violations.size()
              << " violations\n";
    for (const auto& v : violations)
      std::cout << "  [" << v.check << "] event " << v.event_index << ": " << v.detail << '\n';
    if (!violations.empty()) ++bad;
  }
  std::cout << logs.size() << " runs audited, " << bad << " failed, " << evaba::audit_checks().size()
            << " checks each\n";
  return bad == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Efficient-VABA simulator and auditor"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Execute a batch of seeded runs and report");
  run_cmd->add_option("--config", run.config, "Scenario file (key = value lines)")->check(CLI::ExistingFile);
  run_cmd->add_option("--n", run.n, "Number of parties");
  run_cmd->add_option("--f", run.f, "Fault bound");
  run_cmd->add_option("--seed", run.seed, "Batch seed");
  run_cmd->add_option("--runs", run.runs, "Number of runs");
  run_cmd->add_option("--scheduler", run.scheduler,
                      "fifo | random-delay[:seed] | worst-case-rotation | partition-then-heal[:step]");
  run_cmd->add_option("--behavior", run.behaviors, "id=kind, repeatable");
  run_cmd->add_option("--max-views", run.max_views, "Give up after this many views");
  run_cmd->add_option("--validity", run.validity, "proposer-tagged | any");
  run_cmd->add_option("--threads", run.threads, "Worker threads (0 = all cores)");
  run_cmd->add_option("--trace", run.trace, "Write every run's event log as JSONL");
  run_cmd->add_option("--format", run.format, "json | table")->capture_default_str();

  std::string log_path;
  auto* audit_cmd = app.add_subcommand("audit", "Re-check a JSONL trace");
  audit_cmd->add_option("--log", log_path, "Trace file written by run --trace")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) return do_run(run);
    return do_audit(log_path);
  } catch (const evaba::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const evaba::TraceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
