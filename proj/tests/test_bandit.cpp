#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dpfw/bandit.hpp"

using namespace dpfw;

namespace {

// estimators giving the prescribed identity-link scores on context e_0
std::vector<Vec> score_estimators(std::initializer_list<double> scores) {
  std::vector<Vec> est;
  for (double s : scores) est.push_back(Vec{s, 0.0, 0.0});
  return est;
}

const Vec kCtx = {1.0, 0.0, 0.0};

}  // namespace

TEST_CASE("pre-selection margin set") {
  const auto est = score_estimators({1.0, 0.8, 0.2});
  const auto keep = preselect(kCtx, est, LinkKind::kIdentity, 0.5);
  CHECK(keep == std::vector<std::size_t>{0, 1});

  CHECK(preselect(kCtx, est, LinkKind::kIdentity, 1e9).size() == 3);
  CHECK(preselect(kCtx, est, LinkKind::kIdentity, 1e-12) == std::vector<std::size_t>{0});
}

TEST_CASE("greedy action") {
  const auto est = score_estimators({0.3, 0.9, 0.9});
  CHECK(greedy_action(kCtx, est, {2}, LinkKind::kIdentity) == 2);
  CHECK(greedy_action(kCtx, est, {0, 1, 2}, LinkKind::kIdentity) == 1);  // tie -> lowest
  CHECK_THROWS_AS(greedy_action(kCtx, est, {}, LinkKind::kIdentity), std::invalid_argument);
}

TEST_CASE("forced length formula") {
  CHECK(forced_length(10000, 50, 1.0, 1.0) == 121);
  const std::size_t t0 = forced_length(10000, 50, 1.0, 1.0);
  const std::size_t t0_eps2 = forced_length(10000, 50, 2.0, 1.0);
  CHECK(t0_eps2 <= t0 / 4 + 1);
  CHECK_THROWS_AS(forced_length(10000, 50, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(forced_length(10000, 50, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("synthetic sample has zero gradient") {
  for (LinkKind link : {LinkKind::kIdentity, LinkKind::kLogistic}) {
    LossModel lm;
    lm.kind = link_loss_kind(link);
    const Sample synthetic{zeros(5), link_value(link, 0.0)};
    const Vec theta = {0.5, -0.5, 1.0, 0.0, 2.0};
    CHECK(lm.grad(theta, synthetic) == zeros(5));
  }
}

TEST_CASE("round accounting") {
  const std::size_t T = 200, t0 = 10;
  BanditEnv env = make_two_arm_env(5, 2.0, 1.0, 0.05, LinkKind::kIdentity);
  BanditRun run(env, T, t0, PrivacyBudget{1.0, 1.0 / T}, true, Rng(77));
  std::vector<std::size_t> chosen(env.arms, 0);
  for (std::size_t t = 1; t <= T; ++t) {
    const auto res = run.round();
    REQUIRE(res.arm < env.arms);
    CHECK(res.inst_regret >= 0.0);
    if (t <= env.arms * t0) {
      CHECK(res.arm == (t - 1) / t0);  // scripted forced schedule
    } else {
      ++chosen[res.arm];
    }
  }
  // every arm advanced t0 forced steps plus one step per greedy round
  const std::size_t greedy_rounds = T - env.arms * t0;
  for (std::size_t i = 0; i < env.arms; ++i) {
    CHECK(run.solver_steps(i) == t0 + greedy_rounds);
    CHECK(run.real_pulls(i) == t0 + chosen[i]);
  }
  CHECK(chosen[0] + chosen[1] == greedy_rounds);
  CHECK_THROWS_AS(run.round(), std::out_of_range);
}

TEST_CASE("three-arm cluster environment") {
  const std::size_t T = 300, t0 = 8;
  BanditEnv env = make_cluster_env(3, 6, 2.0, 1.0, 0.05, LinkKind::kIdentity);
  BanditRun run(env, T, t0, PrivacyBudget{1.0, 1.0 / T}, true, Rng(99));
  for (std::size_t t = 1; t <= T; ++t) run.round();
  const std::size_t greedy_rounds = T - 3 * t0;
  std::size_t real_total = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(run.solver_steps(i) == t0 + greedy_rounds);
    real_total += run.real_pulls(i);
  }
  CHECK(real_total == T);
}

TEST_CASE("horizon must cover forced sampling") {
  BanditEnv env = make_two_arm_env(5, 2.0, 1.0, 0.05, LinkKind::kIdentity);
  CHECK_THROWS_AS(BanditRun(env, 15, 10, PrivacyBudget{1.0, 0.01}, true, Rng(1)),
                  std::invalid_argument);
}

TEST_CASE("cumulative regret is nonnegative and monotone") {
  BanditEnv env = make_two_arm_env(6, 2.0, 1.0, 0.1, LinkKind::kLogistic);
  BanditRun run(env, 300, 12, PrivacyBudget{1.0, 1e-3}, true, Rng(5));
  double prev = 0.0;
  for (int t = 0; t < 300; ++t) {
    run.round();
    CHECK(run.cumulative_regret() >= prev - 1e-15);
    prev = run.cumulative_regret();
  }
}

TEST_CASE("oracle forced estimators always keep the best arm") {
  BanditEnv env = make_two_arm_env(8, 2.0, 1.0, 0.05, LinkKind::kIdentity);
  Rng rng(31);
  for (int rep = 0; rep < 1000; ++rep) {
    const Vec ctx = env.draw_context(rng);
    const auto keep = preselect(ctx, env.theta_star, env.link, env.h_sub);
    REQUIRE(!keep.empty());
    bool has_best = false;
    for (std::size_t i : keep)
      if (i == env.best_arm(ctx)) has_best = true;
    CHECK(has_best);
  }
}

TEST_CASE("noiseless separable instance is identified") {
  const std::size_t T = 1500;
  BanditEnv env = make_two_arm_env(10, 2.0, 1.0, 0.0, LinkKind::kIdentity);
  const std::size_t t0 = forced_length(T, 10, 1.0, 1.0);
  BanditRun run(env, T, t0, PrivacyBudget{1.0, 1.0 / T}, false, Rng(13));
  double tail_regret = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    const auto res = run.round();
    if (t > T - T / 10) tail_regret += res.inst_regret;
  }
  CHECK(tail_regret == 0.0);
}
