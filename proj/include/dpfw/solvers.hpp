#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dpfw/geometry.hpp"
#include "dpfw/losses.hpp"
#include "dpfw/noise.hpp"
#include "dpfw/rng.hpp"
#include "dpfw/tree_aggregator.hpp"
#include "dpfw/vec.hpp"

namespace dpfw {

// d_t = grad_cur + (1 - rho_t) (d_prev - grad_prev_iterate)
inline Vec recursive_gradient(ConstView d_prev, ConstView grad_cur, ConstView grad_prev_iterate,
                              double rho_t) {
  if (!(rho_t > 0.0 && rho_t <= 1.0))
    throw std::invalid_argument("recursive_gradient: require rho in (0,1]");
  Vec d(grad_cur.begin(), grad_cur.end());
  axpy(d, 1.0 - rho_t, d_prev);
  axpy(d, -(1.0 - rho_t), grad_prev_iterate);
  return d;
}

// Online Frank-Wolfe with noisy tree prefix sums of the gradient
// increments g_t = (t+1) grad(theta_t; x_t) - t grad(theta_{t-1}; x_t).
// One sample in, one released iterate out, per step. theta_0 = theta_1 = 0
// and rho_t = eta_t = 1/(1+t); eta_scale multiplies eta_t only.
class TofwSolver {
 public:
  TofwSolver(const GeometryConfig& geom, const LossModel& loss, std::size_t horizon,
             const PrivacyBudget& budget, bool private_noise, double eta_scale, Rng rng)
      : geom_(geom),
        loss_(loss),
        horizon_(horizon),
        eta_scale_(eta_scale),
        theta_(zeros(geom.dim)),
        theta_prev_(zeros(geom.dim)),
        d_(zeros(geom.dim)),
        sigma_plus_(calibrated_sigma(geom, loss, horizon, budget, private_noise)),
        tree_(std::max<std::size_t>(1, horizon), geom.dim, sigma_plus_, geom.q_plus,
              geom.scale_plus, rng) {
    if (!(geom_.p > 1.0)) throw std::invalid_argument("tofw: require p > 1 geometry");
    if (!(eta_scale_ > 0.0)) throw std::invalid_argument("tofw: require eta_scale > 0");
  }

  std::size_t steps() const { return t_; }
  std::size_t horizon() const { return horizon_; }
  double sigma_plus() const { return sigma_plus_; }
  const Vec& theta() const { return theta_; }
  const Vec& last_direction() const { return d_; }

  // Consumes x_t, releases theta_{t+1}.
  const Vec& step(const Sample& s) {
    if (t_ >= horizon_) throw std::out_of_range("tofw: horizon exceeded");
    const std::size_t t = t_ + 1;
    const Vec grad_cur = loss_.grad(theta_, s);
    const Vec grad_prev = loss_.grad(theta_prev_, s);
    Vec g = scaled(grad_cur, static_cast<double>(t + 1));
    axpy(g, -static_cast<double>(t), grad_prev);
    tree_.append(g);
    d_ = tree_.partial_sum(t);
    const double inv = 1.0 / static_cast<double>(t + 1);
    for (double& di : d_) di *= inv;
    const Vec v = lmo(d_, geom_);
    const double eta = std::min(1.0, eta_scale_ / static_cast<double>(1 + t));
    theta_prev_ = theta_;
    for (std::size_t i = 0; i < theta_.size(); ++i) theta_[i] += eta * (v[i] - theta_[i]);
    ++t_;
    return theta_;
  }

 private:
  static double calibrated_sigma(const GeometryConfig& geom, const LossModel& loss,
                                 std::size_t horizon, const PrivacyBudget& budget,
                                 bool private_noise) {
    if (!private_noise || horizon < 1) return 0.0;
    return std::sqrt(
        calibrate_tree_sigma(horizon, geom.kappa_q, budget, loss.smooth_lip(geom.diameter)));
  }

  GeometryConfig geom_;
  LossModel loss_;
  std::size_t horizon_;
  double eta_scale_;
  std::size_t t_ = 0;
  Vec theta_, theta_prev_, d_;
  double sigma_plus_;
  TreeAggregator tree_;
};

// Online Frank-Wolfe over the l1 ball: the recursive gradient estimator
// (d_1 is the raw first gradient) scores the 2d ball vertices and the
// noisy argmin picks the update direction, with fresh per-vertex Laplace
// noise each round.
class PofwSolver {
 public:
  PofwSolver(const GeometryConfig& geom, const LossModel& loss, std::size_t horizon,
             const PrivacyBudget& budget, bool private_noise, double eta_scale, Rng rng)
      : geom_(geom),
        loss_(loss),
        horizon_(horizon),
        budget_(budget),
        private_noise_(private_noise),
        eta_scale_(eta_scale),
        rng_(rng),
        vertices_(l1_vertices(geom)),
        theta_(zeros(geom.dim)),
        theta_prev_(zeros(geom.dim)),
        d_(zeros(geom.dim)) {
    if (geom_.p != 1.0) throw std::invalid_argument("pofw: require p = 1 geometry");
    if (!(eta_scale_ > 0.0)) throw std::invalid_argument("pofw: require eta_scale > 0");
    if (private_noise_) validate(budget_);
  }

  std::size_t steps() const { return t_; }
  std::size_t horizon() const { return horizon_; }
  const Vec& theta() const { return theta_; }
  const Vec& last_direction() const { return d_; }
  double last_scale() const { return last_scale_; }

  const Vec& step(const Sample& s) {
    if (t_ >= horizon_) throw std::out_of_range("pofw: horizon exceeded");
    const std::size_t t = t_ + 1;
    if (t == 1) {
      d_ = loss_.grad(theta_, s);
    } else {
      const double rho = 1.0 / static_cast<double>(1 + t);
      d_ = recursive_gradient(d_, loss_.grad(theta_, s), loss_.grad(theta_prev_, s), rho);
    }
    last_scale_ = private_noise_
                      ? rnm_laplace_scale(t, horizon_, geom_.diameter, loss_.beta, loss_.lip,
                                          budget_)
                      : 0.0;
    Vec scores(vertices_.size());
    for (std::size_t j = 0; j < vertices_.size(); ++j) scores[j] = dot(d_, vertices_[j]);
    const std::size_t pick = report_noisy_max(scores, last_scale_, rng_);
    const Vec& v = vertices_[pick];
    const double eta = std::min(1.0, eta_scale_ / static_cast<double>(1 + t));
    theta_prev_ = theta_;
    for (std::size_t i = 0; i < theta_.size(); ++i) theta_[i] += eta * (v[i] - theta_[i]);
    ++t_;
    return theta_;
  }

 private:
  GeometryConfig geom_;
  LossModel loss_;
  std::size_t horizon_;
  PrivacyBudget budget_;
  bool private_noise_;
  double eta_scale_;
  Rng rng_;
  std::vector<Vec> vertices_;
  std::size_t t_ = 0;
  Vec theta_, theta_prev_, d_;
  double last_scale_ = 0.0;
};

enum class Algo { kTofw, kPofw, kNonprivateTofw, kNonprivatePofw };

inline bool is_private(Algo a) { return a == Algo::kTofw || a == Algo::kPofw; }
inline bool is_pofw(Algo a) { return a == Algo::kPofw || a == Algo::kNonprivatePofw; }

struct StreamRunConfig {
  Algo algo = Algo::kTofw;
  GeometryConfig geom;
  std::size_t horizon = 0;
  PrivacyBudget budget;
  double eta_scale = 1.0;
};

// Drives one solver over a sample source, invoking on_step(t, theta_{t+1})
// after every consumed sample. The non-private algos run the identical code
// path with all noise scales forced to zero.
template <typename Source, typename OnStep>
void run_stream(const StreamRunConfig& cfg, Source&& source, const LossModel& loss, Rng rng,
                OnStep&& on_step) {
  if (is_pofw(cfg.algo)) {
    PofwSolver solver(cfg.geom, loss, cfg.horizon, cfg.budget, is_private(cfg.algo),
                      cfg.eta_scale, rng);
    for (std::size_t t = 1; t <= cfg.horizon; ++t) on_step(t, solver.step(source()));
  } else {
    TofwSolver solver(cfg.geom, loss, cfg.horizon, cfg.budget, is_private(cfg.algo),
                      cfg.eta_scale, rng);
    for (std::size_t t = 1; t <= cfg.horizon; ++t) on_step(t, solver.step(source()));
  }
}

}  // namespace dpfw
