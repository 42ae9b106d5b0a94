#pragma once

#include <string>

#include "changesim/errors.hpp"

namespace changesim::sem {

// The three analysis strategies. Each maps to exactly one regression form:
//   ChangeScore          (y1 - y0) ~ x
//   FollowUpAdjusted      y1       ~ x + y0
//   FollowUpUnadjusted    y1       ~ x
enum class Strategy { ChangeScore, FollowUpAdjusted, FollowUpUnadjusted };

inline constexpr Strategy kAllStrategies[] = {
    Strategy::ChangeScore, Strategy::FollowUpAdjusted,
    Strategy::FollowUpUnadjusted};

// Canonical CLI/serialization token.
inline std::string strategy_token(Strategy s) {
  switch (s) {
    case Strategy::ChangeScore:
      return "change-score";
    case Strategy::FollowUpAdjusted:
      return "adjusted";
    case Strategy::FollowUpUnadjusted:
      return "unadjusted";
  }
  throw InternalError("unreachable strategy value");
}

// Human-readable name used in verdict text and table rows.
inline std::string strategy_display(Strategy s) {
  switch (s) {
    case Strategy::ChangeScore:
      return "change-score";
    case Strategy::FollowUpAdjusted:
      return "follow-up adjusted for baseline";
    case Strategy::FollowUpUnadjusted:
      return "follow-up unadjusted for baseline";
  }
  throw InternalError("unreachable strategy value");
}

inline Strategy parse_strategy(const std::string& token) {
  if (token == "change-score") return Strategy::ChangeScore;
  if (token == "adjusted") return Strategy::FollowUpAdjusted;
  if (token == "unadjusted") return Strategy::FollowUpUnadjusted;
  throw UsageError("unknown strategy '" + token +
                   "' (expected change-score, adjusted or unadjusted)");
}

}  // namespace changesim::sem
