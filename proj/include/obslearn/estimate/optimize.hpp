#pragma once

// One-dimensional bounded minimization.

#include <cmath>
#include <cstddef>
#include <limits>

namespace obslearn {

struct MinimizeResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Golden-section search on [a, b]; stops when the bracket is narrower than
/// rel_tol * |x| + abs_tol.
template <class F>
MinimizeResult golden_section_minimize(F&& f, double a, double b, double rel_tol = 1e-10,
                                       double abs_tol = 1e-12, int max_iter = 500) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  MinimizeResult res;
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    const double mid = 0.5 * (a + b);
    if (b - a <= rel_tol * std::abs(mid) + abs_tol) {
      res.converged = true;
      break;
    }
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  res.x = fc <= fd ? c : d;
  res.fx = fc <= fd ? fc : fd;
  return res;
}

/// Evaluates f on `points` equally spaced values spanning [lo, hi] and returns
/// the smallest.
template <class F>
MinimizeResult grid_scan_minimize(F&& f, double lo, double hi, std::size_t points) {
  MinimizeResult best{lo, std::numeric_limits<double>::infinity(), 0, true};
  for (std::size_t i = 0; i < points; ++i) {
    const double x = points == 1 ? lo : lo + (hi - lo) * double(i) / double(points - 1);
    const double fx = f(x);
    if (fx < best.fx) best = {x, fx, int(i), true};
  }
  best.iterations = int(points);
  return best;
}

/// Coarse scan to bracket the global minimum, then golden-section refinement
/// inside the bracket. The endpoints win ties so flat objectives return the
/// bound exactly.
template <class F>
MinimizeResult bracket_and_minimize(F&& f, double lo, double hi, std::size_t coarse_points = 400,
                                    double rel_tol = 1e-10) {
  const double step = (hi - lo) / double(coarse_points - 1);
  std::size_t best = 0;
  double best_f = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < coarse_points; ++i) {
    const double fx = f(lo + step * double(i));
    if (fx < best_f) {
      best_f = fx;
      best = i;
    }
  }
  const double a = lo + step * double(best == 0 ? 0 : best - 1);
  const double b = best + 1 >= coarse_points ? hi : lo + step * double(best + 1);
  MinimizeResult res = golden_section_minimize(f, a, b, rel_tol);
  res.iterations += int(coarse_points);
  const double f_lo = f(lo), f_hi = f(hi);
  if (f_lo <= res.fx) {
    res.x = lo;
    res.fx = f_lo;
  }
  if (f_hi < res.fx) {
    res.x = hi;
    res.fx = f_hi;
  }
  return res;
}

}  // namespace obslearn
