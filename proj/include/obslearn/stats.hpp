#pragma once

// Hypothesis tests for error-rate comparisons.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "obslearn/error.hpp"

namespace obslearn {

enum class TestMethod : std::uint8_t {
  OneProportionZ,
  TwoProportionZ,
  PairedT,
  AndersonDarling,
  AndersonDarlingPermutation
};

inline std::string to_code(TestMethod m) {
  switch (m) {
    case TestMethod::OneProportionZ: return "one_prop_z";
    case TestMethod::TwoProportionZ: return "two_prop_z";
    case TestMethod::PairedT: return "paired_t";
    case TestMethod::AndersonDarling: return "anderson_darling";
    case TestMethod::AndersonDarlingPermutation: return "anderson_darling_perm";
  }
  return "?";
}

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  long n1 = 0;
  long n2 = 0;
  TestMethod method = TestMethod::OneProportionZ;
  /// Set when the statistic is degenerate (zero variance of paired differences).
  bool degenerate = false;
};

/// Two-sided standard normal tail probability.
inline double normal_two_sided_p(double z) {
  return std::clamp(std::erfc(std::abs(z) / std::sqrt(2.0)), 0.0, 1.0);
}

inline TestResult prop_test_one(long k, long n, double p0) {
  if (n < 1 || k < 0 || k > n || !(p0 > 0.0 && p0 < 1.0)) {
    throw DataError("prop_test_one: need 0 <= k <= n, n >= 1, 0 < p0 < 1");
  }
  const double z = (double(k) / double(n) - p0) / std::sqrt(p0 * (1.0 - p0) / double(n));
  return {z, normal_two_sided_p(z), n, 0, TestMethod::OneProportionZ, false};
}

/// Pooled two-proportion z-test; positive statistic when sample 1's share is larger.
inline TestResult two_prop_test(long k1, long n1, long k2, long n2) {
  if (n1 < 1 || n2 < 1 || k1 < 0 || k2 < 0 || k1 > n1 || k2 > n2) {
    throw DataError("two_prop_test: invalid counts");
  }
  const double p1 = double(k1) / double(n1);
  const double p2 = double(k2) / double(n2);
  const double pooled = double(k1 + k2) / double(n1 + n2);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / double(n1) + 1.0 / double(n2)));
  if (se == 0.0) return {0.0, 1.0, n1, n2, TestMethod::TwoProportionZ, false};
  const double z = (p1 - p2) / se;
  return {z, normal_two_sided_p(z), n1, n2, TestMethod::TwoProportionZ, false};
}

/// Paired t-test on a[i] - b[i]. Zero-variance differences give t = 0, p = 1
/// when the mean is zero and p = 0 with the degenerate flag otherwise.
inline TestResult paired_rate_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("paired_rate_test: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) throw DataError("paired_rate_test: need at least two pairs");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / double(n);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / double(n - 1));
  TestResult res{0.0, 1.0, long(n), long(n), TestMethod::PairedT, false};
  if (sd == 0.0 || sd < 1e-14 * std::abs(mean)) {
    if (mean != 0.0) {
      res.statistic = mean > 0 ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity();
      res.p_value = 0.0;
      res.degenerate = true;
    }
    return res;
  }
  res.statistic = mean / (sd / std::sqrt(double(n)));
  boost::math::students_t dist(double(n - 1));
  res.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(res.statistic))), 0.0, 1.0);
  return res;
}

namespace detail {

/// Midrank two-sample A2_akN statistic, summed over the distinct pooled values.
inline double ad_midrank_statistic(std::span<const double> x, std::span<const double> y) {
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  std::sort(pooled.begin(), pooled.end());
  const double N = double(pooled.size());
  std::vector<double> sx(x.begin(), x.end()), sy(y.begin(), y.end());
  std::sort(sx.begin(), sx.end());
  std::sort(sy.begin(), sy.end());

  double total = 0.0;
  const std::array<const std::vector<double>*, 2> samples = {&sx, &sy};
  for (std::size_t start = 0; start < pooled.size();) {
    const double z = pooled[start];
    const std::size_t stop = std::size_t(std::upper_bound(pooled.begin(), pooled.end(), z) - pooled.begin());
    const double lj = double(stop - start);
    const double bj = double(start) + lj / 2.0;
    const double denom = bj * (N - bj) - N * lj / 4.0;
    for (const auto* s : samples) {
      const double ni = double(s->size());
      const auto lo = std::lower_bound(s->begin(), s->end(), z);
      const auto hi = std::upper_bound(s->begin(), s->end(), z);
      const double mij = double(hi - s->begin()) - double(hi - lo) / 2.0;
      const double dev = N * mij - bj * ni;
      total += lj / N * dev * dev / denom / ni;
    }
    start = stop;
  }
  return total * (N - 1.0) / N;
}

/// Standardized statistic (A2 - (k-1)) / sigma for k = 2 samples.
inline double ad_standardize(double a2, double n1, double n2) {
  const double N = n1 + n2;
  const double k = 2.0;
  const double H = 1.0 / n1 + 1.0 / n2;
  double h = 0.0;
  for (int i = 1; i <= int(N) - 1; ++i) h += 1.0 / double(i);
  double g = 0.0;
  for (int i = 1; i <= int(N) - 2; ++i) {
    double inner = 0.0;
    for (int j = i + 1; j <= int(N) - 1; ++j) inner += 1.0 / double(j);
    g += inner / double(N - i);
  }
  const double a = (4 * g - 6) * (k - 1) + (10 - 6 * g) * H;
  const double b = (2 * g - 4) * k * k + 8 * h * k + (2 * g - 14 * h - 4) * H - 8 * h + 4 * g - 6;
  const double c = (6 * h + 2 * g - 2) * k * k + (4 * h - 4 * g + 6) * k + (2 * h - 6) * H + 4 * h;
  const double d = (2 * h + 6) * k * k - 4 * h * k;
  const double var = (a * N * N * N + b * N * N + c * N + d) / ((N - 1) * (N - 2) * (N - 3));
  return (a2 - (k - 1)) / std::sqrt(var);
}

/// p-value from the k = 2 row of the published critical-value table: quadratic
/// fit of log(level) on the critical values. Below the table the quadratic is
/// extrapolated and capped at 1; above it the log-level is continued along the
/// fit's tangent at the last critical value so p keeps decreasing.
inline double ad_interpolated_p(double t) {
  constexpr std::array<double, 7> b0 = {0.675, 1.281, 1.645, 1.96, 2.326, 2.573, 3.085};
  constexpr std::array<double, 7> b1 = {-0.245, 0.25, 0.678, 1.149, 1.822, 2.364, 3.615};
  constexpr std::array<double, 7> b2 = {-0.105, -0.305, -0.362, -0.391, -0.396, -0.345, -0.154};
  constexpr std::array<double, 7> level = {0.25, 0.1, 0.05, 0.025, 0.01, 0.005, 0.001};
  std::array<double, 7> crit{};
  for (std::size_t i = 0; i < 7; ++i) crit[i] = b0[i] + b1[i] + b2[i];  // m = k - 1 = 1

  // Least-squares quadratic through (crit, log level): normal equations.
  double s[5] = {0, 0, 0, 0, 0}, r[3] = {0, 0, 0};
  for (std::size_t i = 0; i < 7; ++i) {
    double p = 1.0;
    for (int e = 0; e < 5; ++e) {
      s[e] += p;
      if (e < 3) r[e] += p * std::log(level[i]);
      p *= crit[i];
    }
  }
  // Solve [[s0 s1 s2][s1 s2 s3][s2 s3 s4]] [c0 c1 c2] = r by Cramer's rule.
  auto det3 = [](double a, double b, double c, double d, double e, double f, double g, double h,
                 double i) { return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g); };
  const double D = det3(s[0], s[1], s[2], s[1], s[2], s[3], s[2], s[3], s[4]);
  const double c0 = det3(r[0], s[1], s[2], r[1], s[2], s[3], r[2], s[3], s[4]) / D;
  const double c1 = det3(s[0], r[0], s[2], s[1], r[1], s[3], s[2], r[2], s[4]) / D;
  const double c2 = det3(s[0], s[1], r[0], s[1], s[2], r[1], s[2], s[3], r[2]) / D;

  const double top = crit.back();
  double log_p;
  if (t > top) {
    const double slope = c1 + 2.0 * c2 * top;
    log_p = c0 + c1 * top + c2 * top * top + slope * (t - top);
  } else {
    log_p = c0 + c1 * t + c2 * t * t;
  }
  return std::clamp(std::exp(log_p), 0.0, 1.0);
}

}  // namespace detail

enum class AdPValue : std::uint8_t { Interpolation, Permutation };

/// Largest per-sample size accepted by the exact permutation p-value.
inline constexpr std::size_t kAdPermutationMaxN = 10;

/// Two-sample Anderson-Darling test (Scholz-Stephens k-sample form with
/// midranks for ties). The statistic is the standardized A2; it is symmetric
/// in the two samples.
inline TestResult anderson_darling_2(std::span<const double> x, std::span<const double> y,
                                     AdPValue method = AdPValue::Interpolation) {
  if (x.empty() || y.empty()) throw DataError("anderson_darling_2: empty sample");
  const std::size_t N = x.size() + y.size();
  if (N < 4) throw DataError("anderson_darling_2: need at least 4 pooled observations");
  {
    const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
    const auto [mn2, mx2] = std::minmax_element(y.begin(), y.end());
    if (*mn == *mx && *mn2 == *mx2 && *mn == *mn2) {
      throw DataError("anderson_darling_2: need more than one distinct observation");
    }
  }
  const double n1 = double(x.size()), n2 = double(y.size());
  const double a2 = detail::ad_midrank_statistic(x, y);
  TestResult res;
  res.statistic = detail::ad_standardize(a2, n1, n2);
  res.n1 = long(x.size());
  res.n2 = long(y.size());
  if (method == AdPValue::Interpolation) {
    res.method = TestMethod::AndersonDarling;
    res.p_value = detail::ad_interpolated_p(res.statistic);
    return res;
  }

  if (x.size() > kAdPermutationMaxN || y.size() > kAdPermutationMaxN) {
    throw DataError("anderson_darling_2: permutation p-value limited to 10 per sample");
  }
  res.method = TestMethod::AndersonDarlingPermutation;
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  std::vector<bool> in_x(N, false);
  std::fill(in_x.begin(), in_x.begin() + long(x.size()), true);
  std::sort(in_x.begin(), in_x.end());
  long total = 0, extreme = 0;
  std::vector<double> px, py;
  const double tol = 1e-10 * std::max(1.0, std::abs(a2));
  do {
    px.clear();
    py.clear();
    for (std::size_t i = 0; i < N; ++i) (in_x[i] ? px : py).push_back(pooled[i]);
    ++total;
    if (detail::ad_midrank_statistic(px, py) >= a2 - tol) ++extreme;
  } while (std::next_permutation(in_x.begin(), in_x.end()));
  res.p_value = double(extreme) / double(total);
  return res;
}

}  // namespace obslearn
