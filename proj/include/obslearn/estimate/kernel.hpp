#pragma once

// Nadaraya-Watson regression with a Gaussian kernel on the 0..100 scale.

#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "obslearn/classify.hpp"
#include "obslearn/error.hpp"
#include "obslearn/estimate/structural.hpp"

namespace obslearn {

inline constexpr double kDefaultBandwidth = 15.0;
inline constexpr double kKernelWeightFloor = 1e-12;

struct KernelCurve {
  std::vector<double> grid;
  /// NaN where the total kernel weight is below the floor.
  std::vector<double> estimates;
  /// Kernel-weighted standard deviation of ys around the estimate.
  std::vector<double> sd;
  /// Kish effective sample size (sum w)^2 / sum w^2.
  std::vector<double> n_effective;
  std::vector<double> total_weight;
  double bandwidth = kDefaultBandwidth;

  bool defined(std::size_t i) const { return !std::isnan(estimates[i]); }
};

inline std::vector<double> default_kernel_grid() {
  std::vector<double> g(101);
  for (int i = 0; i <= 100; ++i) g[i] = i;
  return g;
}

inline KernelCurve kernel_regression(const std::vector<double>& xs, const std::vector<double>& ys,
                                     double bandwidth = kDefaultBandwidth,
                                     std::vector<double> grid = default_kernel_grid()) {
  if (xs.empty()) throw DataError("kernel_regression: empty input");
  if (xs.size() != ys.size()) throw DataError("kernel_regression: xs and ys differ in length");
  if (!(bandwidth > 0.0)) throw ConfigError("kernel_regression: bandwidth must be positive");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  KernelCurve c;
  c.bandwidth = bandwidth;
  c.grid = std::move(grid);
  const std::size_t m = c.grid.size();
  c.estimates.assign(m, nan);
  c.sd.assign(m, nan);
  c.n_effective.assign(m, 0.0);
  c.total_weight.assign(m, 0.0);
  std::vector<double> w(xs.size());
  for (std::size_t g = 0; g < m; ++g) {
    double sw = 0.0, sw2 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double u = (c.grid[g] - xs[i]) / bandwidth;
      w[i] = std::exp(-0.5 * u * u);
      sw += w[i];
      sw2 += w[i] * w[i];
    }
    c.total_weight[g] = sw;
    if (sw < kKernelWeightFloor) continue;
    // weighted mean anchored at ys[0] so a constant input is reproduced exactly
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) acc += w[i] * (ys[i] - ys[0]);
    const double mean = ys[0] + acc / sw;
    double var = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) var += w[i] * (ys[i] - mean) * (ys[i] - mean);
    c.estimates[g] = mean;
    c.sd[g] = std::sqrt(var / sw);
    c.n_effective[g] = sw * sw / sw2;
  }
  return c;
}

enum class CurveKind : std::uint8_t { BeliefIndividual, BeliefSocial, ChoiceIndividual, ChoiceSocial };

inline std::string to_code(CurveKind k) {
  switch (k) {
    case CurveKind::BeliefIndividual: return "belief_individual";
    case CurveKind::BeliefSocial: return "belief_social";
    case CurveKind::ChoiceIndividual: return "choice_individual";
    case CurveKind::ChoiceSocial: return "choice_social";
  }
  return "?";
}

struct CurvePoints {
  std::vector<double> xs;
  std::vector<double> ys;
};

/// Belief curves plot the reported P(X) against the rational benchmark; choice
/// curves plot the X indicator against the reported P(X). Excluded records are
/// omitted. `treatments` empty keeps every treatment except Ball in the social
/// condition and every treatment in the individual condition.
inline CurvePoints curve_inputs(const Panel& panel, CurveKind which,
                                const std::set<Treatment>& treatments = {},
                                ClassifyOptions opt = {}) {
  const bool social = which == CurveKind::BeliefSocial || which == CurveKind::ChoiceSocial;
  const bool belief = which == CurveKind::BeliefIndividual || which == CurveKind::BeliefSocial;
  const Condition cond = social ? Condition::Social : Condition::Individual;
  CurvePoints out;
  for (const TrialRecord* r : detail::fit_sample(panel, cond, treatments)) {
    if (classify_record(*r, opt) == ErrorLabel::Excluded) continue;
    const double reported = recovered_prob_x_pct(*r);
    if (belief) {
      out.xs.push_back(100.0 * detail::benchmark_posterior(*r).prob_x);
      out.ys.push_back(reported);
    } else {
      out.xs.push_back(reported);
      out.ys.push_back(r->choice == State::X ? 1.0 : 0.0);
    }
  }
  return out;
}

}  // namespace obslearn
