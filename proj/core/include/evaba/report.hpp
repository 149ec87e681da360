// SPDX-License-Identifier: Apache-2.0
//
// Batch reports: line-delimited JSON records or a summary table.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>

#include "evaba/harness.hpp"

namespace evaba {

enum class ReportFormat { json, table };

/// Throws ConfigError for anything but "json" or "table".
ReportFormat parse_report_format(std::string_view text);

struct BatchSummary {
  std::size_t runs = 0;
  std::size_t decided = 0;
  std::size_t with_violations = 0;
  std::size_t violations = 0;
  double mean_decided_view = 0;
  double median_decided_view = 0;
  int max_decided_view = 0;
  std::array<std::uint64_t, kMsgTypeCount> messages_by_type{};
  std::uint64_t total_messages = 0;
  /// Promotion traffic per view: the VABA baseline 8n^2 and this protocol's
  /// 8n(f+1), analytically.
  std::uint64_t baseline_promotion_per_view = 0;
  std::uint64_t expected_promotion_per_view = 0;
  /// Mean SEND+ACK over every (run, view) that carried promotion traffic.
  double observed_promotion_per_view = 0;
  double reduction_factor = 0;  // n / (f + 1)
};

BatchSummary summarize(std::span<const RunMetrics> runs, Quorum quorum);

/// Writes nothing for an empty batch.
void write_report(std::ostream& os, const ScenarioConfig& config, std::span<const RunMetrics> runs,
                  ReportFormat format);

}  // namespace evaba
