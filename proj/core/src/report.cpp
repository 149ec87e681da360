// SPDX-License-Identifier: Apache-2.0
#include "evaba/report.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace evaba {

using nlohmann::ordered_json;

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::json;
  if (text == "table") return ReportFormat::table;
  throw ConfigError("unknown report format '" + std::string(text) + "' (expected json or table)");
}

BatchSummary summarize(std::span<const RunMetrics> runs, Quorum quorum) {
  BatchSummary s;
  s.runs = runs.size();
  const auto n = static_cast<std::uint64_t>(quorum.n);
  const auto members = static_cast<std::uint64_t>(quorum.small());
  s.baseline_promotion_per_view = 8 * n * n;
  s.expected_promotion_per_view = 8 * n * members;
  s.reduction_factor = static_cast<double>(quorum.n) / quorum.small();

  std::vector<int> views;
  std::uint64_t promotion = 0, promotion_views = 0;
  for (const auto& r : runs) {
    if (r.decided) {
      ++s.decided;
      views.push_back(r.decided_view);
    }
    if (!r.violations.empty()) ++s.with_violations;
    s.violations += r.violations.size();
    for (std::size_t t = 0; t < kMsgTypeCount; ++t) s.messages_by_type[t] += r.messages_by_type[t];
    for (const auto& [view, counts] : r.messages_by_view) {
      const auto pb = counts[static_cast<std::size_t>(MsgType::send)] + counts[static_cast<std::size_t>(MsgType::ack)];
      if (pb == 0) continue;
      promotion += pb;
      ++promotion_views;
    }
  }
  for (auto c : s.messages_by_type) s.total_messages += c;
  if (promotion_views) s.observed_promotion_per_view = static_cast<double>(promotion) / promotion_views;
  if (!views.empty()) {
    std::sort(views.begin(), views.end());
    double sum = 0;
    for (int v : views) sum += v;
    s.mean_decided_view = sum / views.size();
    const auto mid = views.size() / 2;
    s.median_decided_view = views.size() % 2 ? views[mid] : (views[mid - 1] + views[mid]) / 2.0;
    s.max_decided_view = views.back();
  }
  return s;
}

namespace {

ordered_json by_type(const std::array<std::uint64_t, kMsgTypeCount>& counts) {
  ordered_json j = ordered_json::object();
  for (MsgType t : kAllMsgTypes) j[std::string(to_string(t))] = counts[static_cast<std::size_t>(t)];
  return j;
}

ordered_json per_step(const std::map<std::pair<int, int>, std::uint64_t>& counts) {
  std::map<int, std::uint64_t> steps;
  for (const auto& [key, c] : counts) steps[key.second] += c;
  ordered_json j = ordered_json::object();
  for (const auto& [step, c] : steps) j[std::to_string(step)] = c;
  return j;
}

ordered_json run_record(const RunMetrics& r) {
  ordered_json j;
  j["record"] = "run";
  j["run_id"] = r.run_id;
  j["seed"] = r.seed;
  j["decided"] = r.decided;
  j["decided_view"] = r.decided_view;
  j["value_digest"] = r.value_digest;
  j["views"] = r.views;
  j["steps"] = r.steps;
  j["hit_step_cap"] = r.hit_step_cap;
  j["messages_by_type"] = by_type(r.messages_by_type);
  j["ppb_send_count"] = per_step(r.ppb_sends);
  j["ppb_ack_count"] = per_step(r.ppb_acks);
  j["bytes"] = r.bytes;
  ordered_json v = ordered_json::array();
  for (const auto& x : r.violations) v.push_back({{"check", x.check}, {"event", x.event_index}, {"detail", x.detail}});
  j["violations"] = std::move(v);
  return j;
}

std::string fixed(double x, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace

void write_report(std::ostream& os, const ScenarioConfig& config, std::span<const RunMetrics> runs,
                  ReportFormat format) {
  if (runs.empty()) return;
  const Quorum q{config.n, config.f};
  const BatchSummary s = summarize(runs, q);

  if (format == ReportFormat::json) {
    for (const auto& r : runs) os << run_record(r).dump() << '\n';
    ordered_json j;
    j["record"] = "summary";
    j["n"] = config.n;
    j["f"] = config.f;
    j["seed"] = config.seed;
    j["scheduler"] = config.scheduler.name();
    j["runs"] = s.runs;
    j["decided"] = s.decided;
    j["runs_with_violations"] = s.with_violations;
    j["violations"] = s.violations;
    j["mean_decided_view"] = s.mean_decided_view;
    j["median_decided_view"] = s.median_decided_view;
    j["max_decided_view"] = s.max_decided_view;
    j["messages_by_type"] = by_type(s.messages_by_type);
    j["total_messages"] = s.total_messages;
    j["vaba_promotion_per_view"] = s.baseline_promotion_per_view;
    j["expected_promotion_per_view"] = s.expected_promotion_per_view;
    j["observed_promotion_per_view"] = s.observed_promotion_per_view;
    j["reduction_factor"] = s.reduction_factor;
    os << j.dump() << '\n';
    return;
  }

  char line[160];
  os << "run     decided  view  views    steps  violations  value\n";
  for (const auto& r : runs) {
    std::snprintf(line, sizeof line, "%-7llu %-8s %4d  %5d  %7llu  %10zu  %s\n",
                  static_cast<unsigned long long>(r.run_id), r.decided ? "yes" : "NO", r.decided_view, r.views,
                  static_cast<unsigned long long>(r.steps), r.violations.size(), r.value_digest.c_str());
    os << line;
  }
  os << "\nsummary  n=" << config.n << " f=" << config.f << " scheduler=" << config.scheduler.name() << '\n';
  os << "  runs                      " << s.runs << '\n';
  os << "  decided                   " << s.decided << '\n';
  os << "  runs with violations      " << s.with_violations << '\n';
  os << "  decided view mean/median/max  " << fixed(s.mean_decided_view) << " / " << fixed(s.median_decided_view, 1)
     << " / " << s.max_decided_view << '\n';
  os << "  messages                  " << s.total_messages << '\n';
  for (MsgType t : kAllMsgTypes) {
    std::snprintf(line, sizeof line, "    %-14s %12llu\n", std::string(to_string(t)).c_str(),
                  static_cast<unsigned long long>(s.messages_by_type[static_cast<std::size_t>(t)]));
    os << line;
  }
  os << "  promotion msgs per view   VABA 8n^2 = " << s.baseline_promotion_per_view
     << "   this 8n(f+1) = " << s.expected_promotion_per_view
     << "   observed mean = " << fixed(s.observed_promotion_per_view) << '\n';
  os << "  reduction factor n/(f+1)  " << fixed(s.reduction_factor) << '\n';
}

}  // namespace evaba
