#pragma once

// Test-only brute-force oracles for the pricing game. Everything here is
// written from the profit definitions directly and does not call the solver.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "pbt/optimize.hpp"

namespace oracle {

struct Seller {
  double a, b, c, qbar, phibar, sigbar;
};

struct Instance {
  std::vector<Seller> sellers;
  double gamma, delta, eta, omega;

  double qbar_mean() const {
    double s = 0.0;
    for (const auto& x : sellers) s += x.qbar;
    return s / static_cast<double>(sellers.size());
  }
};

/// Random instance over the default experiment ranges.
inline Instance random_instance(std::mt19937_64& gen, std::size_t k = 4) {
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); };
  Instance inst;
  for (std::size_t i = 0; i < k; ++i)
    inst.sellers.push_back({u(0.01, 0.5), u(0.01, 1.0), u(0.01, 0.5), u(0.3, 0.95), u(0.0, 1.0), u(0.0, 1.0)});
  inst.gamma = u(0.1, 1.0);
  inst.delta = u(0.01, 0.05);
  inst.eta = u(1.0, 10.0);
  inst.omega = u(1.0, 5.0);
  return inst;
}

/// Seller profit p s - (a s^2 + b s) qbar - c phibar, any real s.
inline double seller_profit(const Seller& x, double p, double s) {
  return p * s - (x.a * s * s + x.b * s) * x.qbar - x.c * x.phibar;
}

/// Grid + golden argmax on a bracket that doubles until the maximizer is interior.
template <typename F>
pbt::ArgmaxResult unbounded_argmax(F&& f, double half_width = 1.0) {
  for (int i = 0; i < 60; ++i, half_width *= 2.0) {
    const auto r = pbt::numeric_argmax(f, -half_width, half_width, 1e-10);
    if (std::abs(r.x) < 0.999 * half_width) return r;
  }
  return pbt::numeric_argmax(f, -half_width, half_width, 1e-10);
}

/// Seller best response found numerically.
inline double seller_response(const Seller& x, double p) {
  return unbounded_argmax([&](double s) { return seller_profit(x, p, s); }).x;
}

/// Seller best response from the first-order condition, rewritten here independently.
inline double seller_response_foc(const Seller& x, double p) { return (p - x.b * x.qbar) / (2.0 * x.a * x.qbar); }

inline double total_richness(const Instance& inst, double p) {
  double s = 0.0;
  for (const auto& x : inst.sellers) s += seller_response_foc(x, p);
  return s;
}

/// Platform profit with sellers responding to p.
inline double platform_profit(const Instance& inst, double pg, double p) {
  const double s = total_richness(inst, p);
  return (pg - p) * s - inst.gamma * s * s - inst.delta * s;
}

inline double platform_response(const Instance& inst, double pg) {
  return unbounded_argmax([&](double p) { return platform_profit(inst, pg, p); }).x;
}

/// Platform response from the first-order condition of the quadratic in p,
/// with S(p) = p*A - B: d/dp[(pg - p) S - gamma S^2 - delta S] = 0.
inline double platform_response_foc(const Instance& inst, double pg) {
  double A = 0.0, B = 0.0;
  for (const auto& x : inst.sellers) {
    A += 1.0 / (2.0 * x.a * x.qbar);
    B += x.b / (2.0 * x.a);
  }
  // (pg - p) A - (pA - B) - 2 gamma (pA - B) A - delta A = 0
  return (pg * A + B + 2.0 * inst.gamma * B * A - inst.delta * A) / (2.0 * A + 2.0 * inst.gamma * A * A);
}

/// Consumer profit with the platform and sellers responding to pg.
inline double consumer_profit(const Instance& inst, double pg) {
  const double p = platform_response_foc(inst, pg);
  const double s = total_richness(inst, p);
  double corr = 0.0;
  for (const auto& x : inst.sellers) corr += x.sigbar;
  const double arg = 1.0 + inst.qbar_mean() * s;
  if (!(arg > 0.0)) return -1e300;
  return inst.eta * std::log(arg) + inst.omega * corr - pg * s;
}

/// Lowest bundle price at which the induced total richness is positive.
inline double min_positive_supply_price(const Instance& inst) {
  // total richness is affine increasing in pg; find its root by bisection.
  double lo = -1e6, hi = 1e6;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (total_richness(inst, platform_response_foc(inst, mid)) > 0.0 ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace oracle
