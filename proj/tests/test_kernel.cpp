#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "obslearn/estimate/kernel.hpp"
#include "obslearn/sim.hpp"

using namespace obslearn;

TEST(KernelRegression, ConstantInput) {
  const std::vector<double> xs = {3, 17, 50, 51, 99}, ys(5, 7.0);
  const KernelCurve c = kernel_regression(xs, ys);
  ASSERT_EQ(c.grid.size(), 101u);
  for (std::size_t i = 0; i < c.grid.size(); ++i) EXPECT_EQ(c.estimates[i], 7.0);
}

TEST(KernelRegression, SinglePoint) {
  const KernelCurve c = kernel_regression({40.0}, {0.3}, 15.0);
  for (double v : c.estimates) EXPECT_EQ(v, 0.3);
}

TEST(KernelRegression, HugeBandwidthGivesTheMean) {
  Stream rng(4);
  std::vector<double> xs(200), ys(200);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = 100.0 * rng.uniform();
    ys[i] = rng.normal() + xs[i] / 10.0;
  }
  const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / double(ys.size());
  const KernelCurve c = kernel_regression(xs, ys, 1e6);
  for (double v : c.estimates) EXPECT_NEAR(v, mean, 1e-6);
}

TEST(KernelRegression, ConvexCombination) {
  Stream rng(8);
  std::vector<double> xs(60), ys(60);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = 100.0 * rng.uniform();
    ys[i] = 10.0 * rng.normal();
  }
  const auto [lo, hi] = std::minmax_element(ys.begin(), ys.end());
  for (double h : {0.5, 5.0, 15.0}) {
    const KernelCurve c = kernel_regression(xs, ys, h);
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      if (!c.defined(i)) continue;
      EXPECT_GE(c.estimates[i], *lo - 1e-12);
      EXPECT_LE(c.estimates[i], *hi + 1e-12);
      EXPECT_GE(c.n_effective[i], 1.0 - 1e-12);
    }
  }
}

TEST(KernelRegression, UndefinedFarFromData) {
  const KernelCurve c = kernel_regression({0.0, 1.0}, {1.0, 2.0}, 1.0);
  EXPECT_TRUE(c.defined(0));
  EXPECT_FALSE(c.defined(100));
  EXPECT_TRUE(std::isnan(c.estimates[100]));
}

TEST(KernelRegression, Errors) {
  EXPECT_THROW(kernel_regression({}, {}), DataError);
  EXPECT_THROW(kernel_regression({1.0}, {1.0, 2.0}), DataError);
  EXPECT_THROW(kernel_regression({1.0}, {1.0}, 0.0), ConfigError);
}

TEST(CurveInputs, RationalBeliefsLieOnTheDiagonal) {
  SimConfig cfg;
  cfg.population.c = ParamDist::point(1.0);
  const Panel p = simulate_experiment(cfg);
  const CurvePoints pts = curve_inputs(p, CurveKind::BeliefIndividual);
  ASSERT_FALSE(pts.xs.empty());
  for (std::size_t i = 0; i < pts.xs.size(); ++i) EXPECT_NEAR(pts.xs[i], pts.ys[i], 0.5 + 1e-9);
}

TEST(CurveInputs, SharpChoiceIsAStep) {
  SimConfig cfg;
  cfg.population.beta = ParamDist::point(1e6);
  const Panel p = simulate_experiment(cfg);
  const CurvePoints pts = curve_inputs(p, CurveKind::ChoiceIndividual);
  for (std::size_t i = 0; i < pts.xs.size(); ++i) {
    if (pts.xs[i] > 50.0) {
      EXPECT_EQ(pts.ys[i], 1.0);
    } else if (pts.xs[i] < 50.0) {
      EXPECT_EQ(pts.ys[i], 0.0);
    }
  }
}

TEST(CurveInputs, SocialBeliefsFartherFromTheDiagonal) {
  const Panel p = simulate_experiment(SimConfig{});
  auto mad = [&](CurveKind k) {
    const CurvePoints pts = curve_inputs(p, k);
    const KernelCurve c = kernel_regression(pts.xs, pts.ys);
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      if (!c.defined(i)) continue;
      sum += std::abs(c.estimates[i] - c.grid[i]);
      ++n;
    }
    return sum / n;
  };
  EXPECT_GT(mad(CurveKind::BeliefSocial), mad(CurveKind::BeliefIndividual));
}

TEST(CurveInputs, ExcludedRecordsOmitted) {
  const Panel p = simulate_experiment(SimConfig{});
  EXPECT_EQ(curve_inputs(p, CurveKind::ChoiceIndividual).xs.size(), 151u * 20u);
}
