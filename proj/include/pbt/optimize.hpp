#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>

#include "pbt/errors.hpp"

namespace pbt {

struct ArgmaxResult {
  double x = 0.0;
  double value = 0.0;
};

/// Maximizes a 1-D function on [lo, hi]: uniform grid scan, then golden-section
/// refinement on the two cells around the best grid point. Exact to `tol` for
/// unimodal objectives; boundary maxima are returned at the boundary.
template <typename F>
ArgmaxResult numeric_argmax(F&& f, double lo, double hi, double tol = 1e-9, std::size_t grid_points = 10001) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("numeric_argmax needs lo < hi");
  if (!(tol > 0.0)) throw DomainError("numeric_argmax needs tol > 0");
  grid_points = std::max<std::size_t>(grid_points, 3);

  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  auto grid = [&](std::size_t i) { return i + 1 == grid_points ? hi : lo + step * static_cast<double>(i); };

  std::size_t best = 0;
  double best_value = f(lo);
  for (std::size_t i = 1; i < grid_points; ++i) {
    const double v = f(grid(i));
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }

  double a = grid(best == 0 ? 0 : best - 1);
  double b = grid(std::min(best + 1, grid_points - 1));
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }

  ArgmaxResult result{best == 0 ? lo : grid(best), best_value};
  const double mid = 0.5 * (a + b);
  const double f_mid = f(mid);
  if (f_mid > result.value) result = {mid, f_mid};
  for (double edge : {a, b}) {
    const double fe = f(edge);
    if (fe > result.value) result = {edge, fe};
  }
  return result;
}

}  // namespace pbt
