#pragma once

#include "obslearn/record.hpp"

namespace obslearn {

/// True when the record's informative observation is already a white ball
/// (individual condition) or a neighbor guess of X (social condition).
inline bool is_canonical(const TrialRecord& r) {
  if (r.condition == Condition::Social) return r.neighbor_guess.value_or(State::X) == State::X;
  return r.ball.value_or(Signal::White) == Signal::White;
}

/// Relabels boxes and ball colours so the observation becomes White / guess X.
///
/// The swap maps (theta_x, theta_y) to (theta_y, theta_x) and flips every
/// state and colour field. Confidence in the own choice is label-free and is
/// kept as is, so likelihood ratios and error labels are preserved.
inline TrialRecord canonicalize(const TrialRecord& r) {
  require_valid(r.structure);
  if (is_canonical(r)) return r;
  TrialRecord out = r;
  out.structure = r.structure.mirrored();
  out.true_state = other(r.true_state);
  out.choice = other(r.choice);
  if (r.ball) out.ball = other(*r.ball);
  if (r.neighbor_guess) out.neighbor_guess = other(*r.neighbor_guess);
  return out;
}

}  // namespace obslearn
