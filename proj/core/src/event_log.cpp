// SPDX-License-Identifier: Apache-2.0
#include "evaba/event_log.hpp"

#include <algorithm>
#include <array>

namespace evaba {

bool RunHeader::honest(PartyId p) const { return std::find(corrupt.begin(), corrupt.end(), p) == corrupt.end(); }

namespace {
constexpr std::array<std::string_view, 5> kMilestones = {
    "first-proposal", "suggestion-quorum", "done-sent", "done-quorum", "skip-set",
};
}

std::string_view to_string(Milestone m) { return kMilestones[static_cast<std::size_t>(m)]; }

std::optional<Milestone> milestone_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kMilestones.size(); ++i) {
    if (kMilestones[i] == s) return static_cast<Milestone>(i);
  }
  return std::nullopt;
}

}  // namespace evaba
