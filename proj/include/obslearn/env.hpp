#pragma once

// Physical environment of the two-box guessing task: states, ball signals,
// information structures and the exact Bayesian benchmark.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "obslearn/error.hpp"

namespace obslearn {

enum class State : std::uint8_t { X, Y };

/// White is the signal x, Black the signal y.
enum class Signal : std::uint8_t { White, Black };

enum class Condition : std::uint8_t { Individual, Social };

/// Pool marks the pre-recorded neighbor sessions; they play only the
/// individual condition and never enter the analysis samples.
enum class Treatment : std::uint8_t { Base, Demographics, Bot, Ball, Pool };

enum class ConditionOrder : std::uint8_t { IndividualFirst, SocialFirst };

constexpr State other(State s) { return s == State::X ? State::Y : State::X; }
constexpr Signal other(Signal s) {
  return s == Signal::White ? Signal::Black : Signal::White;
}

/// The state a rational observer maps a signal to when the signal's colour
/// is the majority colour of that box under every canonical structure.
constexpr State state_for(Signal s) {
  return s == Signal::White ? State::X : State::Y;
}
constexpr Signal signal_for(State s) {
  return s == State::X ? Signal::White : Signal::Black;
}

inline constexpr int kBallsPerBox = 10;

using Rational = boost::rational<std::int64_t>;

/// Box contents as ball counts: box X holds `white_in_x` white balls and box Y
/// holds `black_in_y` black balls, out of ten each.
struct InformationStructure {
  int white_in_x = 5;
  int black_in_y = 5;

  constexpr double theta_x() const { return white_in_x / double(kBallsPerBox); }
  constexpr double theta_y() const { return black_in_y / double(kBallsPerBox); }

  constexpr bool valid() const {
    return white_in_x >= 0 && white_in_x <= kBallsPerBox && black_in_y >= 0 &&
           black_in_y <= kBallsPerBox;
  }

  /// Member of the 21-element design set: both fractions in {0.5..1.0} and
  /// theta_x >= theta_y.
  constexpr bool canonical() const {
    return valid() && black_in_y >= 5 && white_in_x >= black_in_y;
  }

  /// Both boxes have identical composition, so no signal is informative.
  constexpr bool uninformative() const {
    return white_in_x + black_in_y == kBallsPerBox;
  }

  /// Box roles and colours exchanged: (theta_x, theta_y) -> (theta_y, theta_x).
  constexpr InformationStructure mirrored() const {
    return {black_in_y, white_in_x};
  }

  friend constexpr auto operator<=>(const InformationStructure&,
                                    const InformationStructure&) = default;
};

inline void require_valid(const InformationStructure& s) {
  if (!s.valid()) {
    throw DataError("invalid information structure (" +
                    std::to_string(s.white_in_x) + "," +
                    std::to_string(s.black_in_y) + ")");
  }
}

/// Number of balls of colour `signal` in box `state`.
constexpr int ball_count(const InformationStructure& s, Signal signal, State state) {
  if (state == State::X) {
    return signal == Signal::White ? s.white_in_x : kBallsPerBox - s.white_in_x;
  }
  return signal == Signal::Black ? s.black_in_y : kBallsPerBox - s.black_in_y;
}

/// P(signal | state), exact.
inline Rational likelihood(const InformationStructure& s, Signal signal, State state) {
  require_valid(s);
  return Rational(ball_count(s, signal, state), kBallsPerBox);
}

inline double likelihood_value(const InformationStructure& s, Signal signal, State state) {
  return boost::rational_cast<double>(likelihood(s, signal, state));
}

/// Binary posterior. Only P(X) is stored; P(Y) is always its complement.
struct Posterior {
  double prob_x = 0.5;

  constexpr double prob_y() const { return 1.0 - prob_x; }
  constexpr double prob(State s) const { return s == State::X ? prob_x : prob_y(); }

  friend constexpr bool operator==(const Posterior&, const Posterior&) = default;
};

/// Exact P(X | signal) under the uniform prior.
inline Rational bayes_posterior_exact(const InformationStructure& s, Signal signal) {
  const Rational lx = likelihood(s, signal, State::X);
  const Rational ly = likelihood(s, signal, State::Y);
  if (lx + ly == Rational(0)) {
    throw DataError("impossible signal: zero likelihood under both states");
  }
  return lx / (lx + ly);
}

inline Posterior bayes_posterior(const InformationStructure& s, Signal signal) {
  return {boost::rational_cast<double>(bayes_posterior_exact(s, signal))};
}

/// The box holding strictly more balls of the observed colour; empty on a tie.
inline std::optional<State> rational_choice(const InformationStructure& s, Signal signal) {
  require_valid(s);
  const int in_x = ball_count(s, signal, State::X);
  const int in_y = ball_count(s, signal, State::Y);
  if (in_x == in_y) return std::nullopt;
  return in_x > in_y ? State::X : State::Y;
}

/// The 21 design structures in lexicographic (theta_x, theta_y) order.
inline std::vector<InformationStructure> enumerate_structures() {
  std::vector<InformationStructure> out;
  for (int wx = 5; wx <= kBallsPerBox; ++wx) {
    for (int by = 5; by <= wx; ++by) out.push_back({wx, by});
  }
  return out;
}

inline constexpr std::size_t kNumCanonicalStructures = 21;

}  // namespace obslearn
