// SPDX-License-Identifier: Apache-2.0
//
// JSONL persistence for event logs. Each run starts with a `run` header
// line followed by one line per event; several runs may share a file.
#pragma once

#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "evaba/event_log.hpp"

namespace evaba {

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_trace(std::ostream& os, const EventLog& log);
/// Throws TraceError on malformed input.
std::vector<EventLog> read_trace(std::istream& is);

}  // namespace evaba
