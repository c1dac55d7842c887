#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "dpfw/vec.hpp"

namespace dpfw {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Hoelder dual: 1/p + 1/q = 1, with p=1 <-> q=inf.
inline double dual_exponent(double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("dual_exponent: require p >= 1");
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

// The lp setup used everywhere: the constraint set is the lp ball of the
// given radius, the dual norm is lq, and (kappa_q, q_plus, scale_plus)
// describe the smooth norm associated with lq:
//   q >= 2:      kappa_q = min(q-1, e^2(ln d - 1)),
//                q_plus  = min(q-1, ln d - 1), smooth norm = l_{q_plus}
//   1 <= q < 2:  kappa_q = d^(1-2/p), smooth norm = d^(1/2-1/p) * l2
// Immutable after construction; every operation on it is pure.
struct GeometryConfig {
  double p = 2.0;
  double q = 2.0;
  std::size_t dim = 0;
  double radius = 2.0;
  double diameter = 4.0;
  double kappa_q = 1.0;
  double q_plus = 2.0;
  double scale_plus = 1.0;
};

inline GeometryConfig make_geometry(double p, std::size_t d, double radius = 2.0) {
  if (d < 1) throw std::invalid_argument("make_geometry: require d >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("make_geometry: require radius > 0");
  GeometryConfig g;
  g.p = p;
  g.q = dual_exponent(p);
  g.dim = d;
  g.radius = radius;
  g.diameter = 2.0 * radius;
  const double logd = std::log(static_cast<double>(d));
  if (g.q >= 2.0) {
    g.kappa_q = std::min(g.q - 1.0, std::exp(2.0) * (logd - 1.0));
    g.q_plus = std::min(g.q - 1.0, logd - 1.0);
    g.scale_plus = 1.0;
  } else {
    const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
    g.kappa_q = std::pow(static_cast<double>(d), 1.0 - 2.0 * inv_p);
    g.scale_plus = std::pow(static_cast<double>(d), 0.5 - inv_p);
    g.q_plus = 2.0;
  }
  return g;
}

// Exponents in (0,1) are allowed: the smooth-norm exponent ln d - 1 falls
// below 1 in small dimension and the construction uses the quasi-norm as is.
inline double lp_norm(ConstView v, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  if (!(p > 0.0)) throw std::invalid_argument("lp_norm: require p > 0");
  if (p == 1.0) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  }
  if (p == 2.0) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  }
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(s, 1.0 / p);
}

// scale_plus * || v ||_{q_plus}
inline double smooth_norm(ConstView v, const GeometryConfig& g) {
  return g.scale_plus * lp_norm(v, g.q_plus);
}

inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// argmin_{v in lp ball of radius R} <direction, v>, in closed form.
// All-zero direction returns the zero vector. Ties (p=1) break to the
// lowest index.
inline Vec lmo(ConstView direction, const GeometryConfig& g) {
  if (direction.size() != g.dim) throw std::invalid_argument("lmo: dimension mismatch");
  const double R = g.radius;
  Vec v = zeros(g.dim);
  bool all_zero = true;
  for (double x : direction) {
    if (x != 0.0) {
      all_zero = false;
      break;
    }
  }
  if (all_zero) return v;

  if (std::isinf(g.p)) {
    for (std::size_t i = 0; i < g.dim; ++i) v[i] = -R * sign_of(direction[i]);
    return v;
  }
  if (g.p == 1.0) {
    std::size_t j = 0;
    for (std::size_t i = 1; i < g.dim; ++i)
      if (std::abs(direction[i]) > std::abs(direction[j])) j = i;
    v[j] = -R * sign_of(direction[j]);
    return v;
  }
  const double nq = lp_norm(direction, g.q);
  for (std::size_t i = 0; i < g.dim; ++i) {
    v[i] = -R * sign_of(direction[i]) * std::pow(std::abs(direction[i]) / nq, g.q - 1.0);
  }
  return v;
}

// The 2d extreme points of the l1 ball, ordered (+R e_0, -R e_0, +R e_1, ...).
// This is the candidate set enumerated by the noisy-argmin selection.
inline std::vector<Vec> l1_vertices(const GeometryConfig& g) {
  if (g.p != 1.0) throw std::invalid_argument("l1_vertices: require p = 1");
  std::vector<Vec> out;
  out.reserve(2 * g.dim);
  for (std::size_t i = 0; i < g.dim; ++i) {
    Vec plus = zeros(g.dim);
    plus[i] = g.radius;
    out.push_back(std::move(plus));
    Vec minus = zeros(g.dim);
    minus[i] = -g.radius;
    out.push_back(std::move(minus));
  }
  return out;
}

}  // namespace dpfw
