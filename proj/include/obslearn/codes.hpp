#pragma once

// Text encodings of enums, shared by the CSV reader/writer, ids and reports.

#include <optional>
#include <string>
#include <string_view>

#include "obslearn/env.hpp"

namespace obslearn {

inline std::string to_code(State s) { return s == State::X ? "X" : "Y"; }
inline std::string to_code(Signal s) { return s == Signal::White ? "W" : "B"; }
inline std::string to_code(Condition c) { return c == Condition::Individual ? "IND" : "SOC"; }
inline std::string to_code(ConditionOrder o) {
  return o == ConditionOrder::IndividualFirst ? "IND_FIRST" : "SOC_FIRST";
}
inline std::string to_code(Treatment t) {
  switch (t) {
    case Treatment::Base: return "BASE";
    case Treatment::Demographics: return "DEMO";
    case Treatment::Bot: return "BOT";
    case Treatment::Ball: return "BALL";
    case Treatment::Pool: return "POOL";
  }
  return "?";
}

inline std::optional<State> parse_state(std::string_view s) {
  if (s == "X") return State::X;
  if (s == "Y") return State::Y;
  return std::nullopt;
}
inline std::optional<Signal> parse_signal(std::string_view s) {
  if (s == "W") return Signal::White;
  if (s == "B") return Signal::Black;
  return std::nullopt;
}
inline std::optional<Condition> parse_condition(std::string_view s) {
  if (s == "IND") return Condition::Individual;
  if (s == "SOC") return Condition::Social;
  return std::nullopt;
}
inline std::optional<ConditionOrder> parse_condition_order(std::string_view s) {
  if (s == "IND_FIRST") return ConditionOrder::IndividualFirst;
  if (s == "SOC_FIRST") return ConditionOrder::SocialFirst;
  return std::nullopt;
}
inline std::optional<Treatment> parse_treatment(std::string_view s) {
  if (s == "BASE") return Treatment::Base;
  if (s == "DEMO") return Treatment::Demographics;
  if (s == "BOT") return Treatment::Bot;
  if (s == "BALL") return Treatment::Ball;
  if (s == "POOL") return Treatment::Pool;
  return std::nullopt;
}

}  // namespace obslearn
