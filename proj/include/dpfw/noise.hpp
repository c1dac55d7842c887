#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "dpfw/geometry.hpp"
#include "dpfw/rng.hpp"
#include "dpfw/vec.hpp"

namespace dpfw {

struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 1e-4;
};

// delta = 0 is rejected: every calibration below needs log(1/delta).
inline void validate(const PrivacyBudget& b) {
  if (!(b.epsilon > 0.0)) throw std::invalid_argument("privacy budget: require epsilon > 0");
  if (!(b.delta > 0.0 && b.delta < 1.0))
    throw std::invalid_argument("privacy budget: require delta in (0,1)");
}

// One Gamma(shape, scale) draw, E = shape*scale, Var = shape*scale^2.
// Marsaglia-Tsang for shape >= 1, boosted by U^(1/shape) below 1.
inline double sample_gamma(double shape, double scale, Rng& rng) {
  if (!(shape > 0.0)) throw std::invalid_argument("sample_gamma: require shape > 0");
  if (scale < 0.0) throw std::invalid_argument("sample_gamma: require scale >= 0");
  if (scale == 0.0) return 0.0;

  double boost = 1.0;
  if (shape < 1.0) {
    boost = std::pow(rng.uniform_pos(), 1.0 / shape);
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v * scale;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return boost * d * v * scale;
  }
}

// Nonnegative draw G^(1/s) with G ~ Gamma(1/s, 1); with an independent
// random sign the density is proportional to exp(-|x|^s).
inline double sample_generalized_normal(double shape_exponent, Rng& rng) {
  if (!(shape_exponent > 0.0))
    throw std::invalid_argument("sample_generalized_normal: require shape > 0");
  return std::pow(sample_gamma(1.0 / shape_exponent, 1.0, rng), 1.0 / shape_exponent);
}

// Zero-mean Laplace with the given scale b (variance 2 b^2); b = 0 gives 0.
inline double sample_laplace(double scale, Rng& rng) {
  if (scale < 0.0) throw std::invalid_argument("sample_laplace: require scale >= 0");
  if (scale == 0.0) return 0.0;
  double r;
  do {
    r = rng.uniform01();
  } while (r == 0.0);
  const double u = r - 0.5;
  return -scale * sign_of(u) * std::log(1.0 - 2.0 * std::abs(u));
}

struct GGNoiseParams {
  double sigma_plus = 0.0;
  double q_plus = 2.0;
  double scale_plus = 1.0;
  std::size_t dim = 0;
};

inline GGNoiseParams gg_params(const GeometryConfig& g, double sigma_plus) {
  return GGNoiseParams{sigma_plus, g.q_plus, g.scale_plus, g.dim};
}

// Spherical noise for the smooth norm || . ||_+ = scale_plus * l_{q_plus}:
// the squared smooth norm of the output is Gamma(dim/2, 2 sigma_plus)
// distributed and the direction is uniform on the smooth-norm unit sphere
// (radius from a Gamma draw, direction from normalized signed
// generalized-normal coordinates). sigma_plus = 0 gives the zero vector.
inline Vec sample_generalized_gaussian(const GGNoiseParams& p, Rng& rng) {
  if (p.dim < 1) throw std::invalid_argument("generalized gaussian: require dim >= 1");
  if (p.sigma_plus < 0.0) throw std::invalid_argument("generalized gaussian: require sigma >= 0");
  if (p.sigma_plus == 0.0) return zeros(p.dim);
  if (!(p.q_plus > 0.0) || !(p.scale_plus > 0.0))
    throw std::invalid_argument("generalized gaussian: invalid smooth norm");

  const double r2 = sample_gamma(0.5 * static_cast<double>(p.dim), 2.0 * p.sigma_plus, rng);
  Vec x(p.dim);
  double sn = 0.0;
  do {
    for (std::size_t i = 0; i < p.dim; ++i) {
      const double e = sample_generalized_normal(p.q_plus, rng);
      x[i] = rng.coin() ? e : -e;
    }
    sn = p.scale_plus * lp_norm(x, p.q_plus);
  } while (sn == 0.0);
  const double r = std::sqrt(r2) / sn;
  for (double& xi : x) xi *= r;
  return x;
}

// Noise variance for the tree mechanism over a stream of length n:
//   sigma_+^2 = 8 (ceil(log2 n)+1)^2 kappa_q log((ceil(log2 n)+1)/delta)
//               (beta D + L)^2 / eps^2
// smooth_lip is the beta*D + L bound supplied by the loss model; the factor
// 8 = 2 * 2^2 carries the per-node sensitivity 2(beta D + L) and the
// per-level budget split eps/(ceil(log2 n)+1), delta/(ceil(log2 n)+1).
inline double calibrate_tree_sigma(std::size_t n, double kappa_q, const PrivacyBudget& b,
                                   double smooth_lip) {
  if (n < 1) throw std::invalid_argument("calibrate_tree_sigma: require n >= 1");
  if (!(kappa_q > 0.0)) throw std::invalid_argument("calibrate_tree_sigma: require kappa_q > 0");
  if (smooth_lip < 0.0) throw std::invalid_argument("calibrate_tree_sigma: require smooth_lip >= 0");
  validate(b);
  const double levels = static_cast<double>(ceil_log2(n) + 1);
  return 8.0 * levels * levels * kappa_q * std::log(levels / b.delta) * smooth_lip * smooth_lip /
         (b.epsilon * b.epsilon);
}

// Laplace scale for the per-vertex score noise at step t of an n-step run:
//   4 D (beta D + L) sqrt(log n * log(1/delta)) / (eps sqrt(t))
inline double rnm_laplace_scale(std::size_t t, std::size_t n, double diameter, double beta,
                                double lip, const PrivacyBudget& b) {
  if (t < 1 || t > n) throw std::invalid_argument("rnm_laplace_scale: require 1 <= t <= n");
  validate(b);
  const double nn = static_cast<double>(n);
  return 4.0 * diameter * (beta * diameter + lip) *
         std::sqrt(std::log(nn) * std::log(1.0 / b.delta)) /
         (b.epsilon * std::sqrt(static_cast<double>(t)));
}

// Index of the minimum of score_i + Laplace(scale), fresh independent noise
// per entry; exact ties break to the lowest index.
inline std::size_t report_noisy_max(ConstView scores, double scale, Rng& rng) {
  if (scores.empty()) throw std::invalid_argument("report_noisy_max: empty scores");
  std::size_t best = 0;
  double best_val = scores[0] + sample_laplace(scale, rng);
  for (std::size_t i = 1; i < scores.size(); ++i) {
    const double v = scores[i] + sample_laplace(scale, rng);
    if (v < best_val) {
      best = i;
      best_val = v;
    }
  }
  return best;
}

}  // namespace dpfw
