#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpfw/experiment.hpp"

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// key = value lines, '#' comments; keys are the long flag names without "--"
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot read file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) + " of '" + path +
                                  "' is not key=value");
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

double parse_exponent(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "INF" || s == "infinity") return dpfw::kInf;
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("config: cannot parse p value '" + s + "'");
  return v;
}

// "1,2,5" or "1..10"
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> seeds;
  const auto range_pos = s.find("..");
  if (range_pos != std::string::npos) {
    const std::uint64_t lo = std::stoull(s.substr(0, range_pos));
    const std::uint64_t hi = std::stoull(s.substr(range_pos + 2));
    if (hi < lo) throw std::invalid_argument("config: bad seed range '" + s + "'");
    for (std::uint64_t v = lo; v <= hi; ++v) seeds.push_back(v);
    return seeds;
  }
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string tok = s.substr(start, comma == std::string::npos ? comma : comma - start);
    if (!tok.empty()) seeds.push_back(std::stoull(tok));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (seeds.empty()) throw std::invalid_argument("config: no seeds in '" + s + "'");
  return seeds;
}

dpfw::Algo parse_algo(const std::string& s, double p) {
  using dpfw::Algo;
  if (s == "tofw") return Algo::kTofw;
  if (s == "pofw") return Algo::kPofw;
  if (s == "nonprivate-tofw") return Algo::kNonprivateTofw;
  if (s == "nonprivate-pofw") return Algo::kNonprivatePofw;
  if (s == "nonprivate") return p == 1.0 ? Algo::kNonprivatePofw : Algo::kNonprivateTofw;
  throw std::invalid_argument("config: unknown algo '" + s + "'");
}

struct CommonArgs {
  std::string config;
  std::string p = "1.5";
  std::size_t d = 10;
  std::size_t T = 2000;
  double eps = 1.0;
  double delta = 0.0;
  std::string algo = "tofw";
  std::string seeds = "1..10";
  double radius = 2.0;
  std::string out = "results.csv";
  std::size_t stride = 0;
  double lr_scale = 1.0;
  double noise_sd = 0.05;
  std::size_t test_size = 10000;
};

void add_common_flags(CLI::App* cmd, CommonArgs* a) {
  cmd->add_option("--config", a->config, "key=value config file mirroring the flags");
  cmd->add_option("--p", a->p, "lp exponent (number or 'inf')");
  cmd->add_option("--d", a->d, "dimension");
  cmd->add_option("--T", a->T, "horizon / sample count");
  cmd->add_option("--eps", a->eps, "privacy epsilon");
  cmd->add_option("--delta", a->delta, "privacy delta (default 1/T)");
  cmd->add_option("--algo", a->algo, "tofw | pofw | nonprivate[-tofw|-pofw]");
  cmd->add_option("--seeds", a->seeds, "comma list or lo..hi range");
  cmd->add_option("--radius", a->radius, "constraint ball radius");
  cmd->add_option("--out", a->out, "output CSV path");
  cmd->add_option("--stride", a->stride, "checkpoint stride (default T/100)");
  cmd->add_option("--lr-scale", a->lr_scale, "step size multiplier");
  cmd->add_option("--noise-sd", a->noise_sd, "regression response noise sd");
  cmd->add_option("--test-size", a->test_size, "held-out test set size");
}

// Values from the file fill in whatever was not set on the command line;
// returns the keys this consumer did not recognize.
std::map<std::string, std::string> apply_common_config(CLI::App* cmd, CommonArgs* a,
                                                       std::map<std::string, std::string> kv) {
  const auto take = [&](const char* flag, const char* key, auto setter) {
    const auto it = kv.find(key);
    if (it == kv.end()) return;
    if (cmd->count(flag) == 0) setter(it->second);
    kv.erase(it);
  };
  take("--p", "p", [a](const std::string& v) { a->p = v; });
  take("--d", "d", [a](const std::string& v) { a->d = std::stoull(v); });
  take("--T", "T", [a](const std::string& v) { a->T = std::stoull(v); });
  take("--eps", "eps", [a](const std::string& v) { a->eps = std::stod(v); });
  take("--delta", "delta", [a](const std::string& v) { a->delta = std::stod(v); });
  take("--algo", "algo", [a](const std::string& v) { a->algo = v; });
  take("--seeds", "seeds", [a](const std::string& v) { a->seeds = v; });
  take("--radius", "radius", [a](const std::string& v) { a->radius = std::stod(v); });
  take("--out", "out", [a](const std::string& v) { a->out = v; });
  take("--stride", "stride", [a](const std::string& v) { a->stride = std::stoull(v); });
  take("--lr-scale", "lr-scale", [a](const std::string& v) { a->lr_scale = std::stod(v); });
  take("--noise-sd", "noise-sd", [a](const std::string& v) { a->noise_sd = std::stod(v); });
  take("--test-size", "test-size", [a](const std::string& v) { a->test_size = std::stoull(v); });
  return kv;
}

void reject_unknown_keys(const std::map<std::string, std::string>& kv) {
  if (!kv.empty())
    throw std::invalid_argument("config: unknown key '" + kv.begin()->first + "'");
}

int run(const dpfw::ExperimentConfig& cfg, const std::string& out) {
  const dpfw::ExperimentResult result = dpfw::run_experiment(cfg);
  dpfw::write_result(result, out);
  std::cout << "wrote " << result.table.rows.size() << " rows to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming private Frank-Wolfe experiments"};
  app.require_subcommand(1);

  CommonArgs sco_args;
  CLI::App* sco = app.add_subcommand("sco", "streaming convex optimization run");
  add_common_flags(sco, &sco_args);

  CommonArgs bandit_args;
  bandit_args.p = "1";
  bandit_args.algo = "pofw";
  bandit_args.d = 50;
  bandit_args.T = 10000;
  std::size_t arms = 2;
  double h_sub = 0.0;
  double t0_mult = 1.0;
  std::string link = "identity";
  CLI::App* bandit = app.add_subcommand("bandit", "generalized linear bandit run");
  add_common_flags(bandit, &bandit_args);
  bandit->add_option("--K", arms, "number of arms");
  bandit->add_option("--h-sub", h_sub, "pre-selection margin (default from env)");
  bandit->add_option("--t0-mult", t0_mult, "forced-sampling length multiplier");
  bandit->add_option("--link", link, "identity | logistic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    dpfw::ExperimentConfig cfg;
    if (sco->parsed()) {
      if (!sco_args.config.empty())
        reject_unknown_keys(
            apply_common_config(sco, &sco_args, read_config_file(sco_args.config)));
      const CommonArgs& a = sco_args;
      cfg.mode = dpfw::Mode::kSco;
      cfg.p = parse_exponent(a.p);
      cfg.algo = parse_algo(a.algo, cfg.p);
      cfg.dim = a.d;
      cfg.horizon = a.T;
      cfg.epsilon = a.eps;
      cfg.delta = a.delta;
      cfg.seeds = parse_seeds(a.seeds);
      cfg.radius = a.radius;
      cfg.stride = a.stride;
      cfg.eta_scale = a.lr_scale;
      cfg.noise_sd = a.noise_sd;
      cfg.test_size = a.test_size;
      return run(cfg, a.out);
    }
    if (!bandit_args.config.empty()) {
      auto rest = apply_common_config(bandit, &bandit_args, read_config_file(bandit_args.config));
      const auto take = [&](const char* flag, const char* key, auto setter) {
        const auto it = rest.find(key);
        if (it == rest.end()) return;
        if (bandit->count(flag) == 0) setter(it->second);
        rest.erase(it);
      };
      take("--K", "K", [&](const std::string& v) { arms = std::stoull(v); });
      take("--h-sub", "h-sub", [&](const std::string& v) { h_sub = std::stod(v); });
      take("--t0-mult", "t0-mult", [&](const std::string& v) { t0_mult = std::stod(v); });
      take("--link", "link", [&](const std::string& v) { link = v; });
      reject_unknown_keys(rest);
    }
    const CommonArgs& a = bandit_args;
    cfg.mode = dpfw::Mode::kBandit;
    cfg.p = 1.0;
    cfg.algo = parse_algo(a.algo, cfg.p);
    cfg.dim = a.d;
    cfg.horizon = a.T;
    cfg.epsilon = a.eps;
    cfg.delta = a.delta;
    cfg.seeds = parse_seeds(a.seeds);
    cfg.radius = a.radius;
    cfg.stride = a.stride;
    cfg.eta_scale = a.lr_scale;
    cfg.arms = arms;
    cfg.h_sub = h_sub;
    cfg.t0_multiplier = t0_mult;
    if (link != "identity" && link != "logistic")
      throw std::invalid_argument("config: unknown link '" + link + "'");
    cfg.link = link == "identity" ? dpfw::LinkKind::kIdentity : dpfw::LinkKind::kLogistic;
    return run(cfg, a.out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
