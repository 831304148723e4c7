#include <gtest/gtest.h>

#include <cmath>

#include "obslearn/estimate/regression.hpp"
#include "obslearn/rng.hpp"
#include "obslearn/sim.hpp"

using namespace obslearn;

namespace {

Eigen::MatrixXd random_design(Stream& rng, int n, int k) {
  Eigen::MatrixXd x(n, k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) x(i, j) = rng.normal();
  }
  return x;
}

}  // namespace

TEST(Ols, KnownCoefficients) {
  // y = 1 + 2 a - b exactly
  Eigen::MatrixXd x(5, 2);
  x << 0, 1, 1, 0, 2, 3, 3, 1, 4, 4;
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) y(i) = 1 + 2 * x(i, 0) - x(i, 1);
  const RegressionFit f = fit_ols(x, y, {"a", "b"});
  EXPECT_NEAR(f.coef(0), 1.0, 1e-12);
  EXPECT_NEAR(f.coef(1), 2.0, 1e-12);
  EXPECT_NEAR(f.coef(2), -1.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_EQ(f.names[0], "(Intercept)");
}

TEST(Ols, ConstantOutcomeGivesExactZeroSlopes) {
  Stream rng(2);
  const Eigen::MatrixXd x = random_design(rng, 30, 4);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(30, 11.9);
  const RegressionFit f = fit_ols(x, y, {"a", "b", "c", "d"});
  for (int j = 1; j < 5; ++j) EXPECT_EQ(f.coef(j), 0.0);
  EXPECT_EQ(f.coef(0), 11.9);
}

TEST(Ols, OrthogonalCovariates) {
  // balanced +-1 design, outcome depends only on the intercept and noise orthogonal to it
  Eigen::MatrixXd x(8, 2);
  x << 1, 1, 1, -1, -1, 1, -1, -1, 1, 1, 1, -1, -1, 1, -1, -1;
  Eigen::VectorXd y(8);
  y << 5, 5, 5, 5, 7, 7, 7, 7;
  const RegressionFit f = fit_ols(x, y, {"a", "b"});
  EXPECT_NEAR(f.coef(1), 0.0, 1e-12);
  EXPECT_NEAR(f.coef(2), 0.0, 1e-12);
  EXPECT_NEAR(f.coef(0), y.mean(), 1e-12);
}

TEST(Ols, StandardErrorsMatchReference) {
  Eigen::MatrixXd x(4, 1);
  x << 1, 2, 3, 4;
  Eigen::VectorXd y(4);
  y << 1, 3, 2, 5;
  const RegressionFit f = fit_ols(x, y, {"x"});
  EXPECT_NEAR(f.coef(0), 0.0, 1e-12);
  EXPECT_NEAR(f.coef(1), 1.1, 1e-12);
  EXPECT_NEAR(f.std_error(0), 1.4230249470757708, 1e-9);
  EXPECT_NEAR(f.std_error(1), 0.5196152422706632, 1e-9);
  EXPECT_NEAR(f.r_squared, 0.6914285714285715, 1e-9);
}

TEST(Ols, RankDeficiency) {
  Eigen::MatrixXd x(6, 2);
  x << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10, 6, 12;
  Eigen::VectorXd y(6);
  y << 1, 2, 3, 4, 5, 7;
  EXPECT_THROW(fit_ols(x, y, {"a", "b"}), DataError);
}

TEST(Logit, MatchesReference) {
  Eigen::MatrixXd x(10, 1);
  x << 0.5, 1.2, -0.3, 2.2, 1.7, -1.1, 0.1, 0.9, -0.6, 1.4;
  Eigen::VectorXd y(10);
  y << 0, 1, 0, 1, 1, 0, 1, 0, 0, 1;
  const RegressionFit f = fit_logit(x, y, {"x"});
  EXPECT_TRUE(f.converged);
  EXPECT_NEAR(f.coef(0), -1.502858569596018, 1e-7);
  EXPECT_NEAR(f.coef(1), 2.3526511205561427, 1e-7);
  EXPECT_NEAR(f.std_error(1), 1.3725853665773016, 1e-6);
  const RegressionFit r = fit_logit(x, y, {"x"}, CovarianceType::Robust);
  EXPECT_NEAR(r.std_error(1), 1.0521732414177845, 1e-6);
  std::vector<std::string> cl = {"a", "a", "b", "b", "c", "c", "d", "d", "e", "e"};
  const RegressionFit c = fit_logit(x, y, {"x"}, CovarianceType::Cluster, cl);
  EXPECT_NEAR(c.std_error(1), 1.4110632539953152, 1e-6);
  EXPECT_NEAR(f.pseudo_r_squared, 0.45545513779266655, 1e-7);
}

TEST(Logit, SingletonClustersEqualRobust) {
  Stream rng(12);
  const Eigen::MatrixXd x = random_design(rng, 200, 3);
  Eigen::VectorXd y(200);
  std::vector<std::string> ids;
  for (int i = 0; i < 200; ++i) {
    const double eta = 0.3 + x(i, 0) - 0.5 * x(i, 1);
    y(i) = rng.uniform() < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
    ids.push_back(std::to_string(i));
  }
  const RegressionFit robust = fit_logit(x, y, {"a", "b", "c"}, CovarianceType::Robust);
  const RegressionFit cluster = fit_logit(x, y, {"a", "b", "c"}, CovarianceType::Cluster, ids);
  EXPECT_LT((robust.cov - cluster.cov).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(cluster.n_clusters, 200);
}

TEST(Logit, CovarianceIsSymmetricPsd) {
  Stream rng(13);
  const Eigen::MatrixXd x = random_design(rng, 150, 2);
  Eigen::VectorXd y(150);
  std::vector<std::string> ids;
  for (int i = 0; i < 150; ++i) {
    y(i) = rng.uniform() < 0.4 ? 1.0 : 0.0;
    ids.push_back(std::to_string(i / 5));
  }
  for (CovarianceType t : {CovarianceType::Conventional, CovarianceType::Robust, CovarianceType::Cluster}) {
    const RegressionFit f = fit_logit(x, y, {"a", "b"}, t, ids);
    EXPECT_LT((f.cov - f.cov.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(f.cov);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-14);
  }
}

TEST(Logit, AverageMarginalEffects) {
  Stream rng(14);
  const Eigen::MatrixXd x = random_design(rng, 300, 1);
  Eigen::VectorXd y(300);
  for (int i = 0; i < 300; ++i) y(i) = rng.uniform() < 0.3 ? 1.0 : 0.0;
  const RegressionFit f = fit_logit(x, y, {"a"});
  const Eigen::VectorXd eta = f.coef(0) + (x.col(0) * f.coef(1)).array();
  double w = 0.0;
  for (int i = 0; i < 300; ++i) {
    const double p = 1.0 / (1.0 + std::exp(-eta(i)));
    w += p * (1.0 - p) / 300.0;
  }
  EXPECT_NEAR(f.ame(1), w * f.coef(1), 1e-12);
  // outcome independent of x
  EXPECT_NEAR(f.ame(1), 0.0, 0.06);
}

TEST(Logit, Separation) {
  Eigen::MatrixXd x(6, 1);
  x << -3, -2, -1, 1, 2, 3;
  Eigen::VectorXd y(6);
  y << 0, 0, 0, 1, 1, 1;
  EXPECT_THROW(fit_logit(x, y, {"x"}), NumericalError);
}

TEST(SubjectRegressions, PlantedProbStatEffect) {
  SimConfig cfg;
  cfg.arms = {{Treatment::Base, 150}, {Treatment::Demographics, 150}};
  cfg.population.beta = ParamDist::point(0.25);
  cfg.population.probstat_beta_boost = 0.6;
  const Panel p = simulate_experiment(cfg);
  const RateTables t = rate_tables(p);
  const RegressionFit f = fit_subject_ols(t.by_subject, subject_covariates(p), Condition::Individual);
  EXPECT_EQ(f.n, 300);
  EXPECT_LT(f.coef(4), 0.0);
  EXPECT_EQ(f.names[4], "prob_stat");
}

TEST(SubjectRegressions, PlantedNeighborEffect) {
  SimConfig cfg;
  cfg.arms = {{Treatment::Demographics, 200}};
  cfg.pool_population = cfg.population;
  cfg.population.neighbor_probstat_beta_tilde_boost = 5.0;
  const Panel p = simulate_experiment(cfg);
  const RegressionFit f = fit_irrationality_logit(p, true, true);
  EXPECT_EQ(f.names[8], "neighbor_prob_stat");
  EXPECT_LT(f.ame(8), 0.0);
  EXPECT_EQ(f.cov_type, CovarianceType::Cluster);
  EXPECT_EQ(f.n_clusters, 200);
}
