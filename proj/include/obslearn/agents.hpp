#pragma once

// Behavioral model of a subject: power-weighted (Grether) belief updating in
// the first stage, logistic best response in the second, and the belief
// system used to read a neighbor's guess.

#include <cmath>
#include <limits>
#include <optional>

#include "obslearn/env.hpp"
#include "obslearn/rng.hpp"

namespace obslearn {

enum class AgentKind : std::uint8_t { Structural, ExactBayesianRational, Bot };

/// Bonus for a correct guess, in dollars.
struct Stake {
  double dollars = 12.0;
};

/// Behavioral parameters. `beta` and `beta_tilde` are response precisions per
/// dollar; `c_tilde` and `beta_tilde` describe what the subject believes about
/// a human neighbor. `beta_tilde_bot` replaces `beta_tilde` when the neighbor
/// is the announced rational bot.
struct AgentParams {
  double c = 0.888;
  double beta = 0.472;
  double beta_tilde = 0.038;
  double c_tilde = 0.888;
  double report_noise_sd = 0.0;
  double beta_tilde_bot = 1000.0;
  AgentKind kind = AgentKind::Structural;

  friend bool operator==(const AgentParams&, const AgentParams&) = default;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// P(X) = lx^c / (lx^c + ly^c), with 0^0 = 1 so c = 0 is uninformative.
inline Posterior grether_update(double c, double like_x, double like_y) {
  if (like_x <= 0.0 && like_y <= 0.0) {
    throw DataError("degenerate update: both likelihoods are zero");
  }
  const double wx = std::pow(like_x, c);
  const double wy = std::pow(like_y, c);
  return {wx / (wx + wy)};
}

inline Posterior grether_posterior(double c, const InformationStructure& s, Signal signal) {
  return grether_update(c, likelihood_value(s, signal, State::X),
                        likelihood_value(s, signal, State::Y));
}

inline Posterior grether_posterior(const AgentParams& p, const InformationStructure& s,
                                   Signal signal) {
  return grether_posterior(p.c, s, signal);
}

/// Probability of choosing X: 1 / (1 + exp(-beta (2 P(X) - 1) U)).
/// An infinite beta is the best-response limit (0.5 at indifference). Large
/// finite beta saturates to exactly 0 or 1 in floating point.
inline double logit_choice_prob(double beta, Posterior posterior, Stake stake = {}) {
  const double margin = 2.0 * posterior.prob_x - 1.0;
  if (std::isinf(beta)) {
    if (margin == 0.0) return 0.5;
    return margin > 0.0 ? 1.0 : 0.0;
  }
  const double z = beta * margin * stake.dollars;
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// What the subject believes a neighbor who saw `signal` chooses.
inline double believed_neighbor_choice_prob(double beta_tilde, double c_tilde,
                                            const InformationStructure& s, Signal signal,
                                            Stake stake = {}) {
  return logit_choice_prob(beta_tilde, grether_posterior(c_tilde, s, signal), stake);
}

inline double believed_neighbor_choice_prob(const AgentParams& p, const InformationStructure& s,
                                            Signal signal, Stake stake = {}) {
  return believed_neighbor_choice_prob(p.beta_tilde, p.c_tilde, s, signal, stake);
}

/// Likelihood of each neighbor guess under each state, mixing over the
/// neighbor's unseen ball.
struct GuessLikelihoods {
  double x_if_X = 0.5;
  double y_if_X = 0.5;
  double x_if_Y = 0.5;
  double y_if_Y = 0.5;

  double given(State guess, State state) const {
    if (state == State::X) return guess == State::X ? x_if_X : y_if_X;
    return guess == State::X ? x_if_Y : y_if_Y;
  }
};

inline GuessLikelihoods social_signal_likelihoods(double beta_tilde, double c_tilde,
                                                  const InformationStructure& s,
                                                  Stake stake = {}) {
  const double choose_x_on_white = believed_neighbor_choice_prob(beta_tilde, c_tilde, s, Signal::White, stake);
  const double choose_x_on_black = believed_neighbor_choice_prob(beta_tilde, c_tilde, s, Signal::Black, stake);
  const double white_x = likelihood_value(s, Signal::White, State::X);
  const double black_x = likelihood_value(s, Signal::Black, State::X);
  const double white_y = likelihood_value(s, Signal::White, State::Y);
  const double black_y = likelihood_value(s, Signal::Black, State::Y);
  GuessLikelihoods g;
  g.x_if_X = choose_x_on_white * white_x + choose_x_on_black * black_x;
  g.y_if_X = (1.0 - choose_x_on_white) * white_x + (1.0 - choose_x_on_black) * black_x;
  g.x_if_Y = choose_x_on_white * white_y + choose_x_on_black * black_y;
  g.y_if_Y = (1.0 - choose_x_on_white) * white_y + (1.0 - choose_x_on_black) * black_y;
  return g;
}

inline GuessLikelihoods social_signal_likelihoods(const AgentParams& p,
                                                  const InformationStructure& s,
                                                  Stake stake = {}) {
  return social_signal_likelihoods(p.beta_tilde, p.c_tilde, s, stake);
}

/// Posterior after a neighbor guess: the power-weighted update applied to the
/// guess likelihoods implied by the believed neighbor model.
inline Posterior social_posterior(double c, double beta_tilde, double c_tilde,
                                  const InformationStructure& s, State guess,
                                  Stake stake = {}) {
  const GuessLikelihoods g = social_signal_likelihoods(beta_tilde, c_tilde, s, stake);
  return grether_update(c, g.given(guess, State::X), g.given(guess, State::Y));
}

inline Posterior social_posterior(const AgentParams& p, const InformationStructure& s,
                                  State guess, Stake stake = {}) {
  return social_posterior(p.c, p.beta_tilde, p.c_tilde, s, guess, stake);
}

/// Bayesian posterior on a guess when the neighbor is believed to be exactly
/// rational (infinite precision, unbiased updating).
inline Posterior rational_neighbor_posterior(const InformationStructure& s, State guess) {
  const GuessLikelihoods g = social_signal_likelihoods(kInfinity, 1.0, s);
  return grether_update(1.0, g.given(guess, State::X), g.given(guess, State::Y));
}

/// The announced bot: majority colour of the ball, a fair coin on a tie.
inline State bot_choice(const InformationStructure& s, Signal signal, Stream& rng) {
  if (auto choice = rational_choice(s, signal)) return *choice;
  return rng.bernoulli(0.5) ? State::X : State::Y;
}

/// What the subject sees in a round.
struct TrialContext {
  Condition condition = Condition::Individual;
  Treatment treatment = Treatment::Base;
  InformationStructure structure;
  std::optional<Signal> ball;
  std::optional<State> neighbor_guess;
};

/// First-stage belief for any condition and treatment.
///
/// Individual condition and the ball treatment update on the ball itself; a
/// guess that contradicts the shown ball is ignored. Other social treatments
/// read the guess through the believed neighbor model, with `beta_tilde_bot`
/// for the bot. Non-structural kinds hold exact Bayesian beliefs.
inline Posterior subjective_posterior(const AgentParams& p, const TrialContext& ctx,
                                      Stake stake = {}) {
  const bool uses_ball =
      ctx.condition == Condition::Individual || ctx.treatment == Treatment::Ball;
  if (uses_ball) {
    if (!ctx.ball) throw DataError("trial context lacks the ball it depends on");
    if (p.kind != AgentKind::Structural) return bayes_posterior(ctx.structure, *ctx.ball);
    return grether_posterior(p.c, ctx.structure, *ctx.ball);
  }
  if (!ctx.neighbor_guess) throw DataError("social trial context lacks the neighbor guess");
  if (p.kind != AgentKind::Structural) {
    return rational_neighbor_posterior(ctx.structure, *ctx.neighbor_guess);
  }
  const double bt = ctx.treatment == Treatment::Bot ? p.beta_tilde_bot : p.beta_tilde;
  return social_posterior(p.c, bt, p.c_tilde, ctx.structure, *ctx.neighbor_guess, stake);
}

}  // namespace obslearn
