#pragma once

// Linear and logistic regressions on subject covariates.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "obslearn/classify.hpp"
#include "obslearn/error.hpp"
#include "obslearn/record.hpp"

namespace obslearn {

enum class CovarianceType : std::uint8_t { Conventional, Robust, Cluster };

inline std::string to_code(CovarianceType t) {
  switch (t) {
    case CovarianceType::Conventional: return "conventional";
    case CovarianceType::Robust: return "robust";
    case CovarianceType::Cluster: return "cluster";
  }
  return "?";
}

struct RegressionFit {
  std::vector<std::string> names;  // "(Intercept)" first
  Eigen::VectorXd coef;
  Eigen::MatrixXd cov;
  /// Average marginal effects; logit only.
  Eigen::VectorXd ame;
  long n = 0;
  long n_clusters = 0;
  CovarianceType cov_type = CovarianceType::Conventional;
  double r_squared = std::numeric_limits<double>::quiet_NaN();
  double adj_r_squared = std::numeric_limits<double>::quiet_NaN();
  double pseudo_r_squared = std::numeric_limits<double>::quiet_NaN();
  double log_likelihood = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = false;

  double std_error(Eigen::Index j) const { return std::sqrt(std::max(cov(j, j), 0.0)); }
};

namespace detail {

inline Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z(x.rows(), x.cols() + 1);
  z.col(0).setOnes();
  z.rightCols(x.cols()) = x;
  return z;
}

inline std::vector<std::string> names_with_intercept(const std::vector<std::string>& names) {
  std::vector<std::string> out{"(Intercept)"};
  out.insert(out.end(), names.begin(), names.end());
  return out;
}

inline void require_full_rank(const Eigen::MatrixXd& z, const char* who) {
  if (z.rows() <= z.cols()) {
    throw DataError(std::string(who) + ": need more observations than coefficients");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  if (qr.rank() < z.cols()) throw DataError(std::string(who) + ": design matrix is rank deficient");
}

}  // namespace detail

/// OLS with an intercept and conventional standard errors. Slopes are solved
/// on centered data so a constant outcome gives slopes of exactly zero.
inline RegressionFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const std::vector<std::string>& names) {
  const Eigen::Index n = x.rows(), k = x.cols();
  if (y.size() != n || Eigen::Index(names.size()) != k) {
    throw DataError("fit_ols: dimension mismatch");
  }
  const Eigen::MatrixXd z = detail::with_intercept(x);
  detail::require_full_rank(z, "fit_ols");

  double ybar = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) ybar += (y(i) - y(0)) / double(n);
  ybar += y(0);
  const Eigen::RowVectorXd xbar = x.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - xbar;
  const Eigen::VectorXd yc = (y.array() - ybar).matrix();
  const Eigen::VectorXd slopes = k > 0 ? Eigen::VectorXd(xc.colPivHouseholderQr().solve(yc))
                                       : Eigen::VectorXd(0);

  RegressionFit f;
  f.names = detail::names_with_intercept(names);
  f.coef.resize(k + 1);
  f.coef(0) = ybar - (k > 0 ? double(xbar * slopes) : 0.0);
  f.coef.tail(k) = slopes;
  f.n = long(n);
  const Eigen::VectorXd resid = yc - xc * slopes;
  const double ssr = resid.squaredNorm();
  const double sst = yc.squaredNorm();
  const double s2 = ssr / double(n - k - 1);
  f.cov = s2 * (z.transpose() * z).inverse();
  f.cov = 0.5 * (f.cov + f.cov.transpose());
  if (sst > 0.0) {
    f.r_squared = 1.0 - ssr / sst;
    f.adj_r_squared = 1.0 - (1.0 - f.r_squared) * double(n - 1) / double(n - k - 1);
  }
  f.converged = true;
  f.iterations = 1;
  return f;
}

/// Logistic MLE with an intercept by Newton iteration. `clusters` is needed
/// only for the cluster covariance and holds one group id per row.
inline RegressionFit fit_logit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const std::vector<std::string>& names,
                               CovarianceType cov_type = CovarianceType::Conventional,
                               const std::vector<std::string>& clusters = {}) {
  const Eigen::Index n = x.rows();
  if (y.size() != n || Eigen::Index(names.size()) != x.cols()) {
    throw DataError("fit_logit: dimension mismatch");
  }
  if (cov_type == CovarianceType::Cluster && Eigen::Index(clusters.size()) != n) {
    throw DataError("fit_logit: one cluster id per observation required");
  }
  const Eigen::MatrixXd z = detail::with_intercept(x);
  detail::require_full_rank(z, "fit_logit");
  const Eigen::Index k = z.cols();

  auto probs = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = z * b;
    Eigen::VectorXd p(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = eta(i) >= 0 ? 1.0 / (1.0 + std::exp(-eta(i))) : std::exp(eta(i)) / (1.0 + std::exp(eta(i)));
    }
    return p;
  };
  auto loglik = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = z * b;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = eta(i);
      const double log1pexp = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
      ll += y(i) * e - log1pexp;
    }
    return ll;
  };

  RegressionFit f;
  f.names = detail::names_with_intercept(names);
  f.n = long(n);
  f.cov_type = cov_type;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  double cur = loglik(b);
  const double ybar = y.mean();
  if (ybar <= 0.0 || ybar >= 1.0) throw NumericalError("fit_logit: outcome has no variation");
  const double null_ll = double(n) * (ybar * std::log(ybar) + (1.0 - ybar) * std::log1p(-ybar));
  for (f.iterations = 1; f.iterations <= 100; ++f.iterations) {
    const Eigen::VectorXd p = probs(b);
    const Eigen::VectorXd w = (p.array() * (1.0 - p.array())).matrix();
    const Eigen::VectorXd g = z.transpose() * (y - p);
    const Eigen::MatrixXd h = z.transpose() * w.asDiagonal() * z;
    Eigen::VectorXd step = h.ldlt().solve(g);
    Eigen::VectorXd next = b + step;
    double next_ll = loglik(next);
    for (int halvings = 0; next_ll < cur && halvings < 60; ++halvings) {
      step /= 2.0;
      next = b + step;
      next_ll = loglik(next);
    }
    const double change = std::abs(next_ll - cur);
    b = next;
    cur = next_ll;
    if (change < 1e-10) {
      f.converged = true;
      break;
    }
  }
  if (!f.converged) throw NumericalError("fit_logit: no convergence in 100 iterations");
  if ((z * b).cwiseAbs().maxCoeff() > 30.0) {
    throw NumericalError("fit_logit: fitted probabilities at 0 or 1 (separation)");
  }

  const Eigen::VectorXd p = probs(b);
  const Eigen::VectorXd w = (p.array() * (1.0 - p.array())).matrix();
  const Eigen::MatrixXd bread = (z.transpose() * w.asDiagonal() * z).inverse();
  f.coef = b;
  f.log_likelihood = cur;
  f.pseudo_r_squared = 1.0 - cur / null_ll;
  if (cov_type == CovarianceType::Conventional) {
    f.cov = bread;
  } else {
    const Eigen::VectorXd resid = y - p;
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    double scale;
    if (cov_type == CovarianceType::Robust) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd s = z.row(i).transpose() * resid(i);
        meat += s * s.transpose();
      }
      scale = double(n) / double(n - 1);
    } else {
      std::map<std::string, Eigen::VectorXd> sums;
      std::vector<std::string> order;
      for (Eigen::Index i = 0; i < n; ++i) {
        auto [it, fresh] = sums.try_emplace(clusters[i], Eigen::VectorXd::Zero(k));
        if (fresh) order.push_back(clusters[i]);
        it->second += z.row(i).transpose() * resid(i);
      }
      for (const auto& id : order) meat += sums[id] * sums[id].transpose();
      const double g = double(order.size());
      if (g < 2) throw DataError("fit_logit: need at least 2 clusters");
      f.n_clusters = long(order.size());
      scale = g / (g - 1.0);
    }
    f.cov = scale * bread * meat * bread;
  }
  f.cov = 0.5 * (f.cov + f.cov.transpose());
  f.ame = w.mean() * b;
  return f;
}

inline const std::vector<std::string> kCovariateNames = {"female", "education_years", "age",
                                                         "prob_stat"};

inline void put_covariates(Eigen::MatrixXd& x, Eigen::Index row, Eigen::Index col, const Covariates& c) {
  x(row, col + 0) = c.female ? 1.0 : 0.0;
  x(row, col + 1) = c.education_years;
  x(row, col + 2) = c.age;
  x(row, col + 3) = c.prob_stat ? 1.0 : 0.0;
}

/// Subject covariates from the panel's first record of each subject.
inline std::map<std::string, Covariates> subject_covariates(const Panel& panel) {
  std::map<std::string, Covariates> out;
  for (const auto& r : panel.records) {
    if (!r.is_pool()) out.try_emplace(r.subject_id, r.subject);
  }
  return out;
}

/// Irrationality rate (in percent) on subject covariates, one row per subject
/// in `condition`, using the by_subject rate table.
inline RegressionFit fit_subject_ols(const RateTable& by_subject,
                                     const std::map<std::string, Covariates>& covariates,
                                     Condition condition) {
  const std::string cond = to_code(condition);
  std::vector<std::pair<double, Covariates>> rows;
  for (const auto& [key, cell] : by_subject.cells) {
    if (key.size() != 3 || key[2] != cond || cell.n == 0) continue;
    auto it = covariates.find(key[0]);
    if (it == covariates.end()) throw DataError("fit_subject_ols: no covariates for " + key[0]);
    rows.emplace_back(100.0 * cell.rate(), it->second);
  }
  Eigen::MatrixXd x(Eigen::Index(rows.size()), 4);
  Eigen::VectorXd y(Eigen::Index(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    y(Eigen::Index(i)) = rows[i].first;
    put_covariates(x, Eigen::Index(i), 0, rows[i].second);
  }
  return fit_ols(x, y, kCovariateNames);
}

/// Logit of the irrational indicator on subject (and optionally neighbor)
/// covariates over the Demographics social records, clustered by subject
/// when requested.
inline RegressionFit fit_irrationality_logit(const Panel& panel, bool include_neighbor,
                                             bool cluster_by_subject, ClassifyOptions opt = {}) {
  std::vector<const TrialRecord*> rows;
  for (const auto& r : panel.records) {
    if (r.treatment != Treatment::Demographics || r.condition != Condition::Social) continue;
    if (classify_record(r, opt) == ErrorLabel::Excluded) continue;
    if (include_neighbor && !r.neighbor) {
      throw DataError("fit_irrationality_logit: record without neighbor covariates");
    }
    rows.push_back(&r);
  }
  const Eigen::Index k = include_neighbor ? 8 : 4;
  Eigen::MatrixXd x(Eigen::Index(rows.size()), k);
  Eigen::VectorXd y(Eigen::Index(rows.size()));
  std::vector<std::string> clusters;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto row = Eigen::Index(i);
    put_covariates(x, row, 0, rows[i]->subject);
    if (include_neighbor) put_covariates(x, row, 4, *rows[i]->neighbor);
    y(row) = is_irrational(classify_record(*rows[i], opt)) ? 1.0 : 0.0;
    clusters.push_back(rows[i]->subject_id);
  }
  std::vector<std::string> names = kCovariateNames;
  if (include_neighbor) {
    for (const auto& n : kCovariateNames) names.push_back("neighbor_" + n);
  }
  return fit_logit(x, y, names,
                   cluster_by_subject ? CovarianceType::Cluster : CovarianceType::Conventional,
                   clusters);
}

}  // namespace obslearn
