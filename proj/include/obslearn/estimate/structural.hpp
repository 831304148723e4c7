#pragma once

// Two-step structural estimation: the posterior-bias exponent c by OLS on
// log-odds, the response precision beta by logit maximum likelihood, and the
// believed neighbor precision beta_tilde by nonlinear least squares.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "obslearn/agents.hpp"
#include "obslearn/error.hpp"
#include "obslearn/estimate/optimize.hpp"
#include "obslearn/record.hpp"

namespace obslearn {

struct EstimationResult {
  double estimate = 0.0;
  double std_error = 0.0;
  long n_used = 0;
  long n_dropped = 0;
  bool converged = false;
  int iterations = 0;
  double objective_at_optimum = 0.0;
  /// Uncentered R2 for the OLS fit, McFadden pseudo-R2 for the logit.
  double fit_r2 = std::numeric_limits<double>::quiet_NaN();
  bool at_bound = false;
  std::string note;
};

enum class PosteriorSource : std::uint8_t { Reported, Bayesian };

struct FitOptions {
  /// Clamp reported 0/100 to 1/99 instead of dropping the record.
  bool winsorize = false;
  /// Treatments whose records enter the fit. Empty selects the default: all
  /// treatments for the individual condition, every treatment but Ball for
  /// the social condition.
  std::set<Treatment> treatments;
  Stake stake;
};

namespace detail {

inline std::vector<const TrialRecord*> fit_sample(const Panel& panel, Condition cond,
                                                  const std::set<Treatment>& treatments) {
  std::set<Treatment> keep = treatments;
  if (keep.empty()) {
    keep = {Treatment::Base, Treatment::Demographics, Treatment::Bot};
    if (cond == Condition::Individual) keep.insert(Treatment::Ball);
  }
  return panel.select([&](const TrialRecord& r) {
    return !r.is_pool() && r.condition == cond && keep.count(r.treatment) > 0;
  });
}

/// Log-odds of the reported P(X); false when the report is 0 or 100 and
/// winsorizing is off.
inline bool reported_log_odds(const TrialRecord& r, bool winsorize, double& out) {
  int pct = recovered_prob_x_pct(r);
  if (pct <= 0 || pct >= 100) {
    if (!winsorize) return false;
    pct = pct <= 0 ? 1 : 99;
  }
  out = std::log(double(pct) / double(100 - pct));
  return true;
}

/// Likelihoods of the observation under X and Y: the ball in the individual
/// condition, the guess under an exactly rational neighbor in the social one.
inline std::pair<double, double> benchmark_likelihoods(const TrialRecord& r) {
  if (r.condition == Condition::Individual) {
    return {likelihood_value(r.structure, *r.ball, State::X),
            likelihood_value(r.structure, *r.ball, State::Y)};
  }
  const GuessLikelihoods g = social_signal_likelihoods(kInfinity, 1.0, r.structure);
  return {g.given(*r.neighbor_guess, State::X), g.given(*r.neighbor_guess, State::Y)};
}

inline Posterior benchmark_posterior(const TrialRecord& r) {
  if (r.condition == Condition::Individual) return bayes_posterior(r.structure, *r.ball);
  return rational_neighbor_posterior(r.structure, *r.neighbor_guess);
}

}  // namespace detail

/// Least squares through the origin, y = b x, with the conventional standard
/// error and uncentered R2.
inline EstimationResult fit_through_origin(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DataError("fit_through_origin: length mismatch");
  EstimationResult res;
  res.n_used = long(xs.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  if (res.n_used < 2 || sxx == 0.0) {
    throw DataError("fewer than 2 usable records with informative signals");
  }
  res.estimate = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - res.estimate * xs[i];
    ssr += e * e;
  }
  res.std_error = std::sqrt(ssr / double(res.n_used - 1) / sxx);
  res.objective_at_optimum = ssr;
  res.fit_r2 = syy > 0.0 ? 1.0 - ssr / syy : std::numeric_limits<double>::quiet_NaN();
  res.converged = true;
  res.iterations = 1;
  return res;
}

/// c from ln(P(X)/P(Y)) = c * ln(p(s|X)/p(s|Y)), least squares through the
/// origin. Records with a 0/100 report or a zero likelihood are dropped and
/// counted.
inline EstimationResult fit_c_ols(const Panel& panel, Condition cond, const FitOptions& opt = {}) {
  std::vector<double> xs, ys;
  long dropped = 0;
  for (const TrialRecord* r : detail::fit_sample(panel, cond, opt.treatments)) {
    validate_record(*r);
    const auto [lx, ly] = detail::benchmark_likelihoods(*r);
    double y;
    if (lx <= 0.0 || ly <= 0.0 || !detail::reported_log_odds(*r, opt.winsorize, y)) {
      ++dropped;
      continue;
    }
    xs.push_back(std::log(lx / ly));
    ys.push_back(y);
  }
  EstimationResult res;
  try {
    res = fit_through_origin(xs, ys);
  } catch (const DataError& e) {
    throw DataError(std::string("fit_c_ols: ") + e.what());
  }
  res.n_dropped = dropped;
  return res;
}

/// Logit likelihood of choosing X with index beta * x, where
/// x = (2 P(X) - 1) * U.
struct BetaLogLikelihood {
  std::vector<double> index;   // (2 pi - 1) U
  std::vector<int> chose_x;

  double value(double beta) const {
    double ll = 0.0;
    for (std::size_t i = 0; i < index.size(); ++i) {
      const double z = beta * index[i];
      // log sigma(z) and log(1 - sigma(z)) without overflow
      const double log1pexp = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
      ll += chose_x[i] ? z - log1pexp : -log1pexp;
    }
    return ll;
  }

  double score(double beta) const {
    double g = 0.0;
    for (std::size_t i = 0; i < index.size(); ++i) {
      g += (chose_x[i] - sigma(beta * index[i])) * index[i];
    }
    return g;
  }

  double information(double beta) const {
    double h = 0.0;
    for (double x : index) {
      const double p = sigma(beta * x);
      h += p * (1.0 - p) * x * x;
    }
    return h;
  }

  static double sigma(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
  }
};

inline BetaLogLikelihood beta_log_likelihood(const Panel& panel, Condition cond,
                                             PosteriorSource source, const FitOptions& opt = {}) {
  BetaLogLikelihood ll;
  for (const TrialRecord* r : detail::fit_sample(panel, cond, opt.treatments)) {
    validate_record(*r);
    const double pi = source == PosteriorSource::Reported ? recovered_prob_x(*r)
                                                          : detail::benchmark_posterior(*r).prob_x;
    ll.index.push_back((2.0 * pi - 1.0) * opt.stake.dollars);
    ll.chose_x.push_back(r->choice == State::X ? 1 : 0);
  }
  return ll;
}

inline constexpr int kMaxNewtonIterations = 100;
inline constexpr double kLogLikTolerance = 1e-10;

/// Newton iterations with step halving from beta = 0. Perfectly separated
/// data (choices always on the side the posterior favors, or always against)
/// make the likelihood monotone; that case returns an infinite estimate with
/// converged = false and note "separation".
inline EstimationResult fit_beta_logit(const BetaLogLikelihood& ll) {
  EstimationResult res;
  res.n_used = long(ll.index.size());
  if (res.n_used < 2) throw DataError("fit_beta_logit: fewer than 2 records");

  bool all_agree = true, all_disagree = true, any_signal = false;
  for (std::size_t i = 0; i < ll.index.size(); ++i) {
    if (ll.index[i] == 0.0) continue;
    any_signal = true;
    const bool agrees = (ll.index[i] > 0.0) == (ll.chose_x[i] == 1);
    all_agree = all_agree && agrees;
    all_disagree = all_disagree && !agrees;
  }
  if (!any_signal) throw DataError("fit_beta_logit: every posterior is exactly 1/2");
  if (all_agree || all_disagree) {
    res.estimate = all_agree ? kInfinity : -kInfinity;
    res.std_error = kInfinity;
    res.note = "separation";
    return res;
  }

  double beta = 0.0;
  double cur = ll.value(beta);
  const double null_ll = cur;
  for (res.iterations = 1; res.iterations <= kMaxNewtonIterations; ++res.iterations) {
    const double g = ll.score(beta);
    const double h = ll.information(beta);
    double step = g / h;
    double next = beta + step;
    double next_ll = ll.value(next);
    for (int halvings = 0; next_ll < cur && halvings < 60; ++halvings) {
      step /= 2.0;
      next = beta + step;
      next_ll = ll.value(next);
    }
    const double change = std::abs(next_ll - cur);
    beta = next;
    cur = next_ll;
    if (change < kLogLikTolerance) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged) throw NumericalError("fit_beta_logit: no convergence in 100 iterations");
  res.estimate = beta;
  res.std_error = 1.0 / std::sqrt(ll.information(beta));
  res.objective_at_optimum = cur;
  res.fit_r2 = 1.0 - cur / null_ll;
  return res;
}

inline EstimationResult fit_beta_logit(const Panel& panel, Condition cond, PosteriorSource source,
                                       const FitOptions& opt = {}) {
  return fit_beta_logit(beta_log_likelihood(panel, cond, source, opt));
}

/// One social observation for the beta_tilde fit.
struct GuessObservation {
  InformationStructure structure;
  State guess = State::X;
  double log_odds = 0.0;
};

/// Sum of squared gaps between observed log-odds after a guess and the
/// model's c_hat * ln(p('s'|X) / p('s'|Y)), with the believed neighbor bias
/// fixed at c_hat.
struct BetaTildeObjective {
  std::vector<GuessObservation> observations;
  double c_hat = 1.0;
  Stake stake;

  double predicted(const GuessObservation& o, double beta_tilde) const {
    const GuessLikelihoods g = social_signal_likelihoods(beta_tilde, c_hat, o.structure, stake);
    return c_hat * std::log(g.given(o.guess, State::X) / g.given(o.guess, State::Y));
  }

  double operator()(double beta_tilde) const {
    double s = 0.0;
    for (const auto& o : observations) {
      const double e = o.log_odds - predicted(o, beta_tilde);
      s += e * e;
    }
    return s;
  }
};

struct NlsOptions {
  bool winsorize = false;
  bool include_bot = false;
  double lower = 0.0;
  double upper = 20.0;
  std::size_t coarse_points = 400;
  double rel_tol = 1e-10;
};

inline BetaTildeObjective beta_tilde_objective(const Panel& panel, double c_hat, Stake stake,
                                               const NlsOptions& opt, long* dropped = nullptr) {
  BetaTildeObjective obj;
  obj.c_hat = c_hat;
  obj.stake = stake;
  long n_dropped = 0;
  for (const auto& r : panel.records) {
    if (r.is_pool() || r.condition != Condition::Social) continue;
    const bool keep = r.treatment == Treatment::Base || r.treatment == Treatment::Demographics ||
                      (opt.include_bot && r.treatment == Treatment::Bot);
    if (!keep) continue;
    validate_record(r);
    double y;
    if (!detail::reported_log_odds(r, opt.winsorize, y)) {
      ++n_dropped;
      continue;
    }
    obj.observations.push_back({r.structure, *r.neighbor_guess, y});
  }
  if (dropped) *dropped = n_dropped;
  return obj;
}

/// Bounded 1-D least squares for beta_tilde: coarse bracketing then
/// golden-section. The standard error comes from a central second difference
/// of the objective, se = sqrt(2 s2 / S''), s2 = S / (n - 1).
inline EstimationResult fit_beta_tilde_nls(const BetaTildeObjective& obj, const NlsOptions& opt = {}) {
  EstimationResult res;
  res.n_used = long(obj.observations.size());
  if (res.n_used < 2) throw DataError("fit_beta_tilde_nls: fewer than 2 usable social records");
  if (!(opt.upper > opt.lower)) throw DataError("fit_beta_tilde_nls: empty search interval");
  const MinimizeResult m = bracket_and_minimize(obj, opt.lower, opt.upper, opt.coarse_points, opt.rel_tol);
  if (!m.converged) throw NumericalError("fit_beta_tilde_nls: golden-section did not converge");
  res.estimate = m.x;
  res.objective_at_optimum = m.fx;
  res.iterations = m.iterations;
  res.converged = true;
  const double span = opt.upper - opt.lower;
  if (opt.upper - m.x <= 1e-6 * span) {
    res.at_bound = true;
    res.note = "upper bound";
  } else if (m.x - opt.lower <= 1e-6 * span && m.x > 0.0) {
    res.at_bound = true;
    res.note = "lower bound";
  }
  const double h = std::max(1e-4 * std::abs(m.x), 1e-5);
  const double curvature = (obj(m.x + h) - 2.0 * m.fx + obj(m.x - h)) / (h * h);
  const double s2 = m.fx / double(res.n_used - 1);
  res.std_error = curvature > 0.0 ? std::sqrt(2.0 * s2 / curvature) : kInfinity;
  return res;
}

inline EstimationResult fit_beta_tilde_nls(const Panel& panel, double c_hat, Stake stake = {},
                                           const NlsOptions& opt = {}) {
  long dropped = 0;
  const BetaTildeObjective obj = beta_tilde_objective(panel, c_hat, stake, opt, &dropped);
  EstimationResult res = fit_beta_tilde_nls(obj, opt);
  res.n_dropped = dropped;
  return res;
}

}  // namespace obslearn
