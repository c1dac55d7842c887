#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dpfw/geometry.hpp"
#include "dpfw/losses.hpp"
#include "dpfw/noise.hpp"
#include "dpfw/rng.hpp"
#include "dpfw/solvers.hpp"
#include "dpfw/vec.hpp"

namespace dpfw {

enum class LinkKind { kIdentity, kLogistic };

inline double link_value(LinkKind link, double z) {
  return link == LinkKind::kIdentity ? z : logistic(z);
}

inline double link_deriv_bound(LinkKind link) {
  return link == LinkKind::kIdentity ? 1.0 : 0.25;
}

inline LossKind link_loss_kind(LinkKind link) {
  return link == LinkKind::kIdentity ? LossKind::kGlmIdentity : LossKind::kGlmLogistic;
}

// Simulated generalized-linear bandit: K arms with l1-bounded parameters,
// bounded contexts drawn from coordinate-aligned clusters, rewards
// zeta(X^T theta*_a) plus bounded noise (uniform, sd = reward_noise_sd).
struct BanditEnv {
  std::size_t arms = 2;
  std::size_t dim = 50;
  double radius = 2.0;         // l1 bound on each theta*_i and the solver ball
  LinkKind link = LinkKind::kIdentity;
  double context_bound = 1.0;  // M: ||X||_inf <= M
  double h_sub = 1.0;          // pre-selection margin
  double reward_noise_sd = 0.0;
  std::vector<Vec> theta_star;

  // cluster shape: the favored coordinate sits in [high_lo, high_hi] * M,
  // the other arms' coordinates in [0, low_hi] * M, the rest in
  // [-jitter, jitter] * M.
  double high_lo = 0.8, high_hi = 1.0, low_hi = 0.2, jitter = 0.1;

  Vec draw_context(Rng& rng) const {
    Vec x(dim, 0.0);
    const std::size_t cluster = static_cast<std::size_t>(rng.uniform01() * arms) % arms;
    for (std::size_t i = 0; i < dim; ++i) {
      if (i == cluster) {
        x[i] = context_bound * (high_lo + (high_hi - high_lo) * rng.uniform01());
      } else if (i < arms) {
        x[i] = context_bound * low_hi * rng.uniform01();
      } else {
        x[i] = context_bound * jitter * (2.0 * rng.uniform01() - 1.0);
      }
    }
    return x;
  }

  double mean_reward(ConstView ctx, std::size_t arm) const {
    return link_value(link, dot(ctx, theta_star[arm]));
  }

  double draw_reward(ConstView ctx, std::size_t arm, Rng& rng) const {
    double noise = 0.0;
    if (reward_noise_sd > 0.0) {
      const double a = std::sqrt(3.0) * reward_noise_sd;
      noise = a * (2.0 * rng.uniform01() - 1.0);
    }
    return mean_reward(ctx, arm) + noise;
  }

  std::size_t best_arm(ConstView ctx) const {
    std::size_t best = 0;
    double best_val = mean_reward(ctx, 0);
    for (std::size_t i = 1; i < arms; ++i) {
      const double v = mean_reward(ctx, i);
      if (v > best_val) {
        best = i;
        best_val = v;
      }
    }
    return best;
  }

  // GLM loss constants from the environment bounds: |<x,theta>| <= M R, so
  // |zeta(z) - y| <= 2 zeta_range + noise and beta <= zeta' M^2.
  LossModel loss_model() const {
    const double m = context_bound;
    const double z_bound = m * radius;
    const double zeta_range =
        link == LinkKind::kIdentity ? z_bound : 1.0;  // logistic values lie in (0,1)
    const double y_bound = zeta_range + std::sqrt(3.0) * reward_noise_sd;
    LossModel lm;
    lm.kind = link_loss_kind(link);
    lm.beta = link_deriv_bound(link) * m * m;
    lm.lip = (zeta_range + y_bound) * m;
    lm.grad_dev = 2.0 * lm.lip;
    return lm;
  }

  void validate() const {
    if (arms < 2 || dim < arms) throw std::invalid_argument("bandit env: require K >= 2, d >= K");
    if (!(h_sub > 0.0)) throw std::invalid_argument("bandit env: require h_sub > 0");
    if (theta_star.size() != arms) throw std::invalid_argument("bandit env: K parameter vectors");
    for (const Vec& th : theta_star) {
      if (th.size() != dim) throw std::invalid_argument("bandit env: parameter dimension");
      if (lp_norm(th, 1.0) > radius * (1.0 + 1e-12))
        throw std::invalid_argument("bandit env: ||theta*||_1 exceeds radius");
    }
  }
};

// Separable instance: theta*_i = R e_i with contexts clustered on the
// matching coordinates.
inline BanditEnv make_cluster_env(std::size_t arms, std::size_t dim, double radius,
                                  double context_bound, double reward_noise_sd, LinkKind link) {
  BanditEnv env;
  env.arms = arms;
  env.dim = dim;
  env.radius = radius;
  env.link = link;
  env.context_bound = context_bound;
  env.reward_noise_sd = reward_noise_sd;
  env.theta_star.resize(arms, zeros(dim));
  for (std::size_t i = 0; i < arms; ++i) env.theta_star[i][i] = radius;
  // worst-case score gap between the favored and the other arms on a cluster
  const double gap = link == LinkKind::kIdentity
                         ? radius * context_bound * (env.high_lo - env.low_hi)
                         : link_value(link, radius * context_bound * env.high_lo) -
                               link_value(link, radius * context_bound * env.low_hi);
  env.h_sub = gap;
  env.validate();
  return env;
}

inline BanditEnv make_two_arm_env(std::size_t dim, double radius, double context_bound,
                                  double reward_noise_sd, LinkKind link) {
  return make_cluster_env(2, dim, radius, context_bound, reward_noise_sd, link);
}

// t0 = ceil(c * ln(d T) * ln(T) / eps^2)
inline std::size_t forced_length(std::size_t horizon, std::size_t dim, double epsilon, double c) {
  if (horizon < 1 || dim < 1) throw std::invalid_argument("forced_length: require T, d >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("forced_length: require epsilon > 0");
  if (!(c > 0.0)) throw std::invalid_argument("forced_length: require c > 0");
  const double t = static_cast<double>(horizon);
  const double v = c * std::log(static_cast<double>(dim) * t) * std::log(t) / (epsilon * epsilon);
  return static_cast<std::size_t>(std::ceil(v));
}

// {i : zeta(X^T theta_{t0,i}) > max_j zeta(X^T theta_{t0,j}) - h_sub/2};
// never empty since the maximizer qualifies.
inline std::vector<std::size_t> preselect(ConstView ctx, const std::vector<Vec>& forced_estimators,
                                          LinkKind link, double h_sub) {
  if (forced_estimators.empty()) throw std::invalid_argument("preselect: no estimators");
  std::vector<double> vals(forced_estimators.size());
  double best = -kInf;
  for (std::size_t i = 0; i < forced_estimators.size(); ++i) {
    vals[i] = link_value(link, dot(ctx, forced_estimators[i]));
    best = std::max(best, vals[i]);
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < vals.size(); ++i)
    if (vals[i] > best - 0.5 * h_sub) keep.push_back(i);
  return keep;
}

// argmax over the preselected arms with the full-sample estimators;
// lowest index on ties.
inline std::size_t greedy_action(ConstView ctx, const std::vector<Vec>& estimators,
                                 const std::vector<std::size_t>& preselected, LinkKind link) {
  if (preselected.empty()) throw std::invalid_argument("greedy_action: empty candidate set");
  std::size_t best = preselected[0];
  double best_val = link_value(link, dot(ctx, estimators[best]));
  for (std::size_t k = 1; k < preselected.size(); ++k) {
    const std::size_t i = preselected[k];
    const double v = link_value(link, dot(ctx, estimators[i]));
    if (v > best_val) {
      best = i;
      best_val = v;
    }
  }
  return best;
}

struct BanditRoundResult {
  std::size_t arm = 0;
  double reward = 0.0;
  double inst_regret = 0.0;
};

// Forced sampling (t0 consecutive real pulls per arm, no synthetic
// updates), then greedy play: pre-selection on the frozen forced
// estimators, greedy argmax on the live ones, one real sample for the
// chosen arm and the synthetic pair (0, zeta(0)) for every other arm each
// round. Only the per-arm estimator sequences depend on the rewards; the
// action is a function of the context and the released estimators.
class BanditRun {
 public:
  BanditRun(const BanditEnv& env, std::size_t horizon, std::size_t forced_len,
            const PrivacyBudget& budget, bool private_noise, Rng rng)
      : env_(env), horizon_(horizon), t0_(forced_len), rng_(rng.derive(0x9e11)) {
    env_.validate();
    if (t0_ < 1) throw std::invalid_argument("bandit: require t0 >= 1");
    if (t0_ * env_.arms > horizon_)
      throw std::invalid_argument("bandit: horizon too short for forced sampling");
    const GeometryConfig geom = make_geometry(1.0, env_.dim, env_.radius);
    const LossModel lm = env_.loss_model();
    solvers_.reserve(env_.arms);
    for (std::size_t i = 0; i < env_.arms; ++i) {
      solvers_.emplace_back(geom, lm, horizon_, budget, private_noise, 1.0,
                            rng.derive(100 + i));
    }
    forced_estimators_.assign(env_.arms, zeros(env_.dim));
    real_pulls_.assign(env_.arms, 0);
    synthetic_.x = zeros(env_.dim);
    synthetic_.y = link_value(env_.link, 0.0);
  }

  std::size_t t() const { return t_; }
  std::size_t forced_len() const { return t0_; }
  std::size_t horizon() const { return horizon_; }
  bool in_forced_phase() const { return t_ < t0_ * env_.arms; }
  double cumulative_regret() const { return cum_regret_; }
  const std::vector<Vec>& forced_estimators() const { return forced_estimators_; }
  std::size_t real_pulls(std::size_t arm) const { return real_pulls_.at(arm); }
  std::size_t solver_steps(std::size_t arm) const { return solvers_.at(arm).steps(); }

  std::vector<Vec> estimators() const {
    std::vector<Vec> out;
    out.reserve(solvers_.size());
    for (const auto& s : solvers_) out.push_back(s.theta());
    return out;
  }

  BanditRoundResult round() {
    if (t_ >= horizon_) throw std::out_of_range("bandit: horizon exceeded");
    const std::size_t step = t_ + 1;
    const Vec ctx = env_.draw_context(rng_);
    BanditRoundResult res;
    if (step <= t0_ * env_.arms) {
      const std::size_t arm = (step - 1) / t0_;
      res.arm = arm;
      res.reward = env_.draw_reward(ctx, arm, rng_);
      solvers_[arm].step(Sample{ctx, res.reward});
      bump_real(arm);
      if (step == (arm + 1) * t0_) forced_estimators_[arm] = solvers_[arm].theta();
    } else {
      const std::vector<std::size_t> keep = preselect(ctx, forced_estimators_, env_.link, env_.h_sub);
      const std::size_t arm = greedy_action(ctx, estimators(), keep, env_.link);
      res.arm = arm;
      res.reward = env_.draw_reward(ctx, arm, rng_);
      for (std::size_t i = 0; i < env_.arms; ++i) {
        if (i == arm) {
          solvers_[i].step(Sample{ctx, res.reward});
        } else {
          solvers_[i].step(synthetic_);
        }
      }
      bump_real(arm);
    }
    const std::size_t star = env_.best_arm(ctx);
    res.inst_regret = env_.mean_reward(ctx, star) - env_.mean_reward(ctx, res.arm);
    cum_regret_ += res.inst_regret;
    ++t_;
    return res;
  }

 private:
  void bump_real(std::size_t arm) { ++real_pulls_[arm]; }

  BanditEnv env_;
  std::size_t horizon_;
  std::size_t t0_;
  Rng rng_;
  std::vector<PofwSolver> solvers_;
  std::vector<Vec> forced_estimators_;
  std::vector<std::size_t> real_pulls_;
  Sample synthetic_;
  std::size_t t_ = 0;
  double cum_regret_ = 0.0;
};

}  // namespace dpfw
