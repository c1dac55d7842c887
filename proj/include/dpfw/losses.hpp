#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dpfw/geometry.hpp"
#include "dpfw/rng.hpp"
#include "dpfw/vec.hpp"

namespace dpfw {

struct Sample {
  Vec x;
  double y = 0.0;
};

enum class LossKind { kSquared, kGlmIdentity, kGlmLogistic };

inline double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z), overflow-safe
inline double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

// Per-sample loss with declared curvature/Lipschitz constants over the
// constraint set. beta, lip and grad_dev are inputs, not runtime estimates;
// beta*D + lip feeds the noise calibrations.
struct LossModel {
  LossKind kind = LossKind::kSquared;
  double beta = 0.0;      // smoothness of the gradient
  double lip = 0.0;       // bound on the dual norm of the gradient
  double grad_dev = 0.0;  // bound on the gradient deviation from its mean

  double smooth_lip(double diameter) const { return beta * diameter + lip; }

  double value(ConstView theta, const Sample& s) const {
    const double z = dot(theta, s.x);
    switch (kind) {
      case LossKind::kSquared: {
        const double r = s.y - z;
        return r * r;
      }
      case LossKind::kGlmIdentity:
        return 0.5 * z * z - s.y * z;
      case LossKind::kGlmLogistic:
        return softplus(z) - s.y * z;
    }
    throw std::logic_error("loss: unknown kind");
  }

  Vec grad(ConstView theta, const Sample& s) const {
    const double z = dot(theta, s.x);
    double factor = 0.0;
    switch (kind) {
      case LossKind::kSquared:
        factor = -2.0 * (s.y - z);
        break;
      case LossKind::kGlmIdentity:
        factor = z - s.y;
        break;
      case LossKind::kGlmLogistic:
        factor = logistic(z) - s.y;
        break;
    }
    return scaled(s.x, factor);
  }
};

// Conservative constants for the squared loss over the radius-R ball fed by
// the unit-lq-norm feature stream: |<x,theta>| <= R and |y| <= 1 + 8 sd
// outside a ~1e-15 Gaussian tail.
inline LossModel regression_loss_model(double noise_sd, double radius) {
  const double x_q_bound = 1.0;
  const double y_bound = 1.0 + 8.0 * noise_sd;
  LossModel m;
  m.kind = LossKind::kSquared;
  m.beta = 2.0 * x_q_bound * x_q_bound;
  m.lip = 2.0 * (y_bound + radius * x_q_bound) * x_q_bound;
  m.grad_dev = 2.0 * m.lip;
  return m;
}

// Streaming linear-regression data: features are i.i.d. N(0, 0.05^2)^d
// normalized to unit lq norm, the ground-truth parameter is drawn the same
// way and normalized to unit lp norm, and y = <x, theta*> + N(0, noise_sd^2).
class RegressionStream {
 public:
  RegressionStream(std::size_t dim, double p, double noise_sd, Rng rng)
      : dim_(dim), p_(p), q_(dual_exponent(p)), noise_sd_(noise_sd), rng_(rng) {
    if (dim_ < 1) throw std::invalid_argument("regression stream: require d >= 1");
    if (noise_sd_ < 0.0) throw std::invalid_argument("regression stream: require noise_sd >= 0");
    theta_star_ = unit_gaussian(p_, rng_);
  }

  const Vec& theta_star() const { return theta_star_; }
  std::size_t dim() const { return dim_; }
  double noise_sd() const { return noise_sd_; }

  Sample next() { return draw_one(rng_); }

  // Fresh batch from an explicit stream (e.g. a held-out test set).
  std::vector<Sample> sample_batch(std::size_t n, Rng& rng) const {
    std::vector<Sample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(draw_one(rng));
    return out;
  }

  LossModel loss_model(double radius) const { return regression_loss_model(noise_sd_, radius); }

 private:
  Vec unit_gaussian(double norm_p, Rng& rng) const {
    for (;;) {
      Vec v(dim_);
      for (double& x : v) x = 0.05 * rng.normal();
      const double n = lp_norm(v, norm_p);
      if (n > 0.0) {
        for (double& x : v) x /= n;
        return v;
      }
    }
  }

  Sample draw_one(Rng& rng) const {
    Sample s;
    s.x = unit_gaussian(q_, rng);
    s.y = dot(s.x, theta_star_) + noise_sd_ * rng.normal();
    return s;
  }

  std::size_t dim_;
  double p_;
  double q_;
  double noise_sd_;
  Rng rng_;
  Vec theta_star_;
};

inline double evaluate_risk(ConstView theta, const std::vector<Sample>& test_set,
                            const LossModel& loss) {
  if (test_set.empty()) throw std::invalid_argument("evaluate_risk: empty test set");
  double s = 0.0;
  for (const Sample& x : test_set) s += loss.value(theta, x);
  return s / static_cast<double>(test_set.size());
}

// (L(theta_hat) - L(theta_star)) / (L(theta0) - L(theta_star))
inline double subopt(ConstView theta_hat, ConstView theta_star, ConstView theta0,
                     const std::vector<Sample>& test_set, const LossModel& loss) {
  const double l_star = evaluate_risk(theta_star, test_set, loss);
  const double denom = evaluate_risk(theta0, test_set, loss) - l_star;
  if (!(std::abs(denom) > 0.0)) throw std::domain_error("subopt: degenerate denominator");
  return (evaluate_risk(theta_hat, test_set, loss) - l_star) / denom;
}

inline double subopt(ConstView theta_hat, ConstView theta_star,
                     const std::vector<Sample>& test_set, const LossModel& loss) {
  return subopt(theta_hat, theta_star, zeros(theta_star.size()), test_set, loss);
}

}  // namespace dpfw
