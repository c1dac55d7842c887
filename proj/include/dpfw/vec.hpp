#pragma once

#include <bit>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace dpfw {

using Vec = std::vector<double>;
using ConstView = std::span<const double>;

inline Vec zeros(std::size_t d) { return Vec(d, 0.0); }

inline double dot(ConstView a, ConstView b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void add_in_place(Vec& a, ConstView b) {
  if (a.size() != b.size()) throw std::invalid_argument("add: size mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

// a += c * b
inline void axpy(Vec& a, double c, ConstView b) {
  if (a.size() != b.size()) throw std::invalid_argument("axpy: size mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += c * b[i];
}

inline Vec scaled(ConstView a, double c) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
  return out;
}

inline Vec sub(ConstView a, ConstView b) {
  if (a.size() != b.size()) throw std::invalid_argument("sub: size mismatch");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

// Smallest L with 2^L >= n; 0 for n <= 1.
inline unsigned ceil_log2(std::size_t n) {
  if (n <= 1) return 0;
  return static_cast<unsigned>(std::bit_width(n - 1));
}

}  // namespace dpfw
