#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpfw/bandit.hpp"
#include "dpfw/csv.hpp"
#include "dpfw/geometry.hpp"
#include "dpfw/losses.hpp"
#include "dpfw/noise.hpp"
#include "dpfw/rng.hpp"
#include "dpfw/solvers.hpp"

namespace dpfw {

enum class Mode { kSco, kBandit };

struct ExperimentConfig {
  Mode mode = Mode::kSco;
  Algo algo = Algo::kTofw;
  double p = 1.5;
  std::size_t dim = 10;
  std::size_t horizon = 2000;  // T = n
  double radius = 2.0;
  double epsilon = 1.0;
  double delta = 0.0;  // 0 -> 1/T
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  double noise_sd = 0.05;
  std::size_t test_size = 10000;
  std::size_t stride = 0;  // 0 -> max(1, T/100)
  double eta_scale = 1.0;
  // bandit
  std::size_t arms = 2;
  double t0_multiplier = 1.0;
  double h_sub = 0.0;  // 0 -> environment default
  LinkKind link = LinkKind::kIdentity;

  PrivacyBudget budget() const {
    return PrivacyBudget{epsilon, delta > 0.0 ? delta : 1.0 / static_cast<double>(horizon)};
  }

  std::size_t effective_stride() const {
    return stride > 0 ? stride : std::max<std::size_t>(1, horizon / 100);
  }

  void validate() const {
    if (horizon < 1) throw std::invalid_argument("config: require T >= 1");
    if (dim < 1) throw std::invalid_argument("config: require d >= 1");
    if (seeds.empty()) throw std::invalid_argument("config: require at least one seed");
    if (!(radius > 0.0)) throw std::invalid_argument("config: require radius > 0");
    if (!(eta_scale > 0.0)) throw std::invalid_argument("config: require lr scale > 0");
    if (mode == Mode::kSco) {
      if (!(p >= 1.0)) throw std::invalid_argument("config: require p >= 1");
      if (is_pofw(algo) && p != 1.0)
        throw std::invalid_argument("config: pofw requires p = 1");
      if (!is_pofw(algo) && p == 1.0)
        throw std::invalid_argument("config: tofw requires p > 1");
      if (test_size < 1) throw std::invalid_argument("config: require test_size >= 1");
    } else {
      if (arms < 2) throw std::invalid_argument("config: require K >= 2");
      if (!is_pofw(algo)) throw std::invalid_argument("config: bandit runs on the l1 solver");
      if (!(t0_multiplier > 0.0)) throw std::invalid_argument("config: require t0 multiplier > 0");
      if (h_sub < 0.0) throw std::invalid_argument("config: require h_sub >= 0");
    }
    if (is_private(algo)) dpfw::validate(budget());
  }
};

// Every configuration value echoed as key=value lines, written to the
// sidecar next to the CSV so the output is self-describing.
inline std::vector<std::string> config_metadata(const ExperimentConfig& c) {
  std::vector<std::string> meta;
  auto add = [&meta](const std::string& k, const std::string& v) { meta.push_back(k + "=" + v); };
  add("mode", c.mode == Mode::kSco ? "sco" : "bandit");
  switch (c.algo) {
    case Algo::kTofw: add("algo", "tofw"); break;
    case Algo::kPofw: add("algo", "pofw"); break;
    case Algo::kNonprivateTofw: add("algo", "nonprivate-tofw"); break;
    case Algo::kNonprivatePofw: add("algo", "nonprivate-pofw"); break;
  }
  add("p", format_double(c.p));
  add("d", std::to_string(c.dim));
  add("T", std::to_string(c.horizon));
  add("radius", format_double(c.radius));
  add("eps", format_double(c.epsilon));
  add("delta", format_double(c.budget().delta));
  add("noise_sd", format_double(c.noise_sd));
  add("test_size", std::to_string(c.test_size));
  add("stride", std::to_string(c.effective_stride()));
  add("lr_scale", format_double(c.eta_scale));
  if (c.mode == Mode::kSco) {
    const LossModel lm = regression_loss_model(c.noise_sd, c.radius);
    add("loss_beta", format_double(lm.beta));
    add("loss_L", format_double(lm.lip));
    add("loss_G", format_double(lm.grad_dev));
    add("smooth_lip", format_double(lm.smooth_lip(2.0 * c.radius)));
  } else {
    add("K", std::to_string(c.arms));
    add("t0_mult", format_double(c.t0_multiplier));
    add("h_sub", c.h_sub > 0.0 ? format_double(c.h_sub) : "env-default");
    add("link", c.link == LinkKind::kIdentity ? "identity" : "logistic");
    add("context_bound", format_double(1.0));
    add("reward_noise_sd", format_double(0.1));
    const LossModel lm =
        make_cluster_env(c.arms, std::max(c.arms, c.dim), c.radius, 1.0, 0.1, c.link).loss_model();
    add("loss_beta", format_double(lm.beta));
    add("loss_L", format_double(lm.lip));
  }
  std::string seeds = "seeds=";
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    if (i) seeds += ";";
    seeds += std::to_string(c.seeds[i]);
  }
  meta.push_back(seeds);
  return meta;
}

namespace detail {

inline std::vector<std::size_t> checkpoints(std::size_t horizon, std::size_t stride) {
  std::vector<std::size_t> cps;
  for (std::size_t t = stride; t < horizon; t += stride) cps.push_back(t);
  cps.push_back(horizon);
  return cps;
}

struct ScoPoint {
  std::size_t t;
  double risk;
  double subopt;
  double time_ms;
};

inline std::vector<ScoPoint> run_sco_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng root(seed);
  Rng data_rng = root.derive(1);
  Rng test_rng = root.derive(2);
  Rng noise_rng = root.derive(3);

  RegressionStream stream(cfg.dim, cfg.p, cfg.noise_sd, data_rng);
  const std::vector<Sample> test_set = stream.sample_batch(cfg.test_size, test_rng);
  const LossModel loss = stream.loss_model(cfg.radius);
  const GeometryConfig geom = make_geometry(cfg.p, cfg.dim, cfg.radius);

  StreamRunConfig run;
  run.algo = cfg.algo;
  run.geom = geom;
  run.horizon = cfg.horizon;
  run.budget = cfg.budget();
  run.eta_scale = cfg.eta_scale;

  const std::vector<std::size_t> cps = checkpoints(cfg.horizon, cfg.effective_stride());
  std::vector<ScoPoint> points;
  points.reserve(cps.size());
  std::size_t next_cp = 0;
  double eval_ms = 0.0;  // checkpoint evaluation cost, excluded from solver time
  const auto start = std::chrono::steady_clock::now();
  run_stream(run, [&stream] { return stream.next(); }, loss, noise_rng,
             [&](std::size_t t, const Vec& theta) {
               if (next_cp < cps.size() && t == cps[next_cp]) {
                 const auto eval_start = std::chrono::steady_clock::now();
                 const double ms =
                     std::chrono::duration<double, std::milli>(eval_start - start).count() -
                     eval_ms;
                 ScoPoint pt;
                 pt.t = t;
                 pt.risk = evaluate_risk(theta, test_set, loss);
                 pt.subopt = subopt(theta, stream.theta_star(), test_set, loss);
                 pt.time_ms = ms;
                 points.push_back(pt);
                 ++next_cp;
                 eval_ms += std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - eval_start)
                                .count();
               }
             });
  return points;
}

struct BanditPoint {
  std::size_t t;
  double cum_regret;
};

inline std::vector<BanditPoint> run_bandit_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng root(seed);
  if (cfg.arms > cfg.dim)
    throw std::invalid_argument("config: the cluster environment needs K <= d");
  BanditEnv env = make_cluster_env(cfg.arms, cfg.dim, cfg.radius, 1.0, 0.1, cfg.link);
  if (cfg.h_sub > 0.0) env.h_sub = cfg.h_sub;
  const std::size_t t0 = forced_length(cfg.horizon, cfg.dim, cfg.epsilon, cfg.t0_multiplier);
  BanditRun run(env, cfg.horizon, t0, cfg.budget(), is_private(cfg.algo), root);

  const std::vector<std::size_t> cps = checkpoints(cfg.horizon, cfg.effective_stride());
  std::vector<BanditPoint> points;
  points.reserve(cps.size());
  std::size_t next_cp = 0;
  for (std::size_t t = 1; t <= cfg.horizon; ++t) {
    run.round();
    if (next_cp < cps.size() && t == cps[next_cp]) {
      points.push_back(BanditPoint{t, run.cumulative_regret()});
      ++next_cp;
    }
  }
  return points;
}

inline void mean_std(const std::vector<double>& xs, double* mean, double* sd) {
  double m = 0.0;
  for (double v : xs) m += v;
  m /= static_cast<double>(xs.size());
  double s2 = 0.0;
  for (double v : xs) s2 += (v - m) * (v - m);
  *mean = m;
  *sd = xs.size() > 1 ? std::sqrt(s2 / static_cast<double>(xs.size() - 1)) : 0.0;
}

}  // namespace detail

struct ExperimentResult {
  CsvTable table;
  std::vector<std::string> metadata;
};

// Runs every seed, emits one row per (seed, checkpoint) plus aggregate
// mean/std rows per checkpoint. Seeds are sorted before writing so the
// output does not depend on scheduling.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<std::uint64_t> seeds = cfg.seeds;
  std::sort(seeds.begin(), seeds.end());

  ExperimentResult result;
  result.metadata = config_metadata(cfg);

  const std::string algo_name = [&cfg] {
    switch (cfg.algo) {
      case Algo::kTofw: return std::string("tofw");
      case Algo::kPofw: return std::string("pofw");
      case Algo::kNonprivateTofw: return std::string("nonprivate-tofw");
      case Algo::kNonprivatePofw: return std::string("nonprivate-pofw");
    }
    return std::string("?");
  }();

  if (cfg.mode == Mode::kSco) {
    result.table.header = {"mode", "algo", "p",    "d", "T",    "eps",    "delta",
                           "seed", "t",    "risk", "subopt", "time_ms"};
    std::map<std::size_t, std::vector<double>> risks, subopts, times;
    for (std::uint64_t seed : seeds) {
      const auto points = detail::run_sco_seed(cfg, seed);
      for (const auto& pt : points) {
        result.table.rows.push_back({"sco", algo_name, format_double(cfg.p),
                                     std::to_string(cfg.dim), std::to_string(cfg.horizon),
                                     format_double(cfg.epsilon), format_double(cfg.budget().delta),
                                     std::to_string(seed), std::to_string(pt.t),
                                     format_double(pt.risk), format_double(pt.subopt),
                                     format_double(pt.time_ms)});
        risks[pt.t].push_back(pt.risk);
        subopts[pt.t].push_back(pt.subopt);
        times[pt.t].push_back(pt.time_ms);
      }
    }
    for (const auto& [t, rs] : risks) {
      double rm, rsd, sm, ssd, tm, tsd;
      detail::mean_std(rs, &rm, &rsd);
      detail::mean_std(subopts[t], &sm, &ssd);
      detail::mean_std(times[t], &tm, &tsd);
      result.table.rows.push_back({"sco", algo_name, format_double(cfg.p),
                                   std::to_string(cfg.dim), std::to_string(cfg.horizon),
                                   format_double(cfg.epsilon), format_double(cfg.budget().delta),
                                   "mean", std::to_string(t), format_double(rm), format_double(sm),
                                   format_double(tm)});
      result.table.rows.push_back({"sco", algo_name, format_double(cfg.p),
                                   std::to_string(cfg.dim), std::to_string(cfg.horizon),
                                   format_double(cfg.epsilon), format_double(cfg.budget().delta),
                                   "std", std::to_string(t), format_double(rsd), format_double(ssd),
                                   format_double(tsd)});
    }
  } else {
    result.table.header = {"mode", "K", "d", "T", "eps", "seed", "t", "cum_regret"};
    std::map<std::size_t, std::vector<double>> regrets;
    for (std::uint64_t seed : seeds) {
      const auto points = detail::run_bandit_seed(cfg, seed);
      for (const auto& pt : points) {
        result.table.rows.push_back({"bandit", std::to_string(cfg.arms), std::to_string(cfg.dim),
                                     std::to_string(cfg.horizon), format_double(cfg.epsilon),
                                     std::to_string(seed), std::to_string(pt.t),
                                     format_double(pt.cum_regret)});
        regrets[pt.t].push_back(pt.cum_regret);
      }
    }
    for (const auto& [t, rs] : regrets) {
      double m, sd;
      detail::mean_std(rs, &m, &sd);
      result.table.rows.push_back({"bandit", std::to_string(cfg.arms), std::to_string(cfg.dim),
                                   std::to_string(cfg.horizon), format_double(cfg.epsilon), "mean",
                                   std::to_string(t), format_double(m)});
      result.table.rows.push_back({"bandit", std::to_string(cfg.arms), std::to_string(cfg.dim),
                                   std::to_string(cfg.horizon), format_double(cfg.epsilon), "std",
                                   std::to_string(t), format_double(sd)});
    }
  }
  return result;
}

// The CSV stays plain (header + rows); the configuration echo lands in a
// key=value sidecar next to it.
inline void write_result(const ExperimentResult& result, const std::string& path) {
  write_csv(result.table, path);
  std::ofstream meta(path + ".meta", std::ios::binary);
  if (!meta) throw std::runtime_error("cannot open " + path + ".meta");
  for (const std::string& line : result.metadata) meta << line << "\n";
  if (!meta) throw std::runtime_error("write failed for " + path + ".meta");
}

}  // namespace dpfw
