// SPDX-License-Identifier: Apache-2.0
//
// Offline invariant checks over a run's event log.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evaba/event_log.hpp"

namespace evaba {

struct Violation {
  std::string check;
  std::size_t event_index = 0;  // first offending event
  std::string detail;
};

/// Names of every check audit_event_log() runs, in reporting order.
std::span<const std::string_view> audit_checks();

/// Replays `log` against every check. An empty result means the run passed.
std::vector<Violation> audit_event_log(const EventLog& log);

}  // namespace evaba
