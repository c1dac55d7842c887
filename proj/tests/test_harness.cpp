#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <string>

#include "dpfw/experiment.hpp"

using namespace dpfw;

namespace {

// strip the trailing time_ms field from every data row
std::string mask_time_column(const std::string& csv) {
  std::string out;
  std::size_t start = 0;
  while (start < csv.size()) {
    std::size_t end = csv.find('\n', start);
    if (end == std::string::npos) end = csv.size();
    std::string line = csv.substr(start, end - start);
    const std::size_t comma = line.rfind(',');
    if (comma != std::string::npos) line.resize(comma);
    out += line;
    out.push_back('\n');
    start = end + 1;
  }
  return out;
}

ExperimentConfig tiny_sco() {
  ExperimentConfig cfg;
  cfg.mode = Mode::kSco;
  cfg.algo = Algo::kTofw;
  cfg.p = 1.5;
  cfg.dim = 3;
  cfg.horizon = 50;
  cfg.seeds = {7};
  cfg.test_size = 200;
  return cfg;
}

}  // namespace

TEST_CASE("17-digit doubles round-trip") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::ldexp(rng.normal(), static_cast<int>(rng.uniform01() * 40) - 20);
    const std::string s = format_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
}

TEST_CASE("csv shape") {
  CsvTable t;
  t.header = {"a", "b"};
  CHECK(csv_to_string(t) == "a,b\n");
  t.rows.push_back({"1", "2"});
  CHECK(csv_to_string(t) == "a,b\n1,2\n");
  t.rows.push_back({"only-one"});
  CHECK_THROWS_AS(csv_to_string(t), std::invalid_argument);
}

TEST_CASE("csv io errors surface") {
  CsvTable t;
  t.header = {"a"};
  CHECK_THROWS_AS(write_csv(t, "/nonexistent-dir/x/y.csv"), std::runtime_error);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg = tiny_sco();
  cfg.horizon = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = tiny_sco();
  cfg.seeds.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = tiny_sco();
  cfg.algo = Algo::kPofw;  // pofw needs p = 1
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = tiny_sco();
  cfg.p = 1.0;  // tofw needs p > 1
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = tiny_sco();
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = tiny_sco();
  cfg.mode = Mode::kBandit;
  cfg.arms = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("delta defaults to 1/T") {
  ExperimentConfig cfg = tiny_sco();
  CHECK(cfg.budget().delta == Catch::Approx(1.0 / 50.0));
  cfg.delta = 0.01;
  CHECK(cfg.budget().delta == 0.01);
}

TEST_CASE("experiment output is deterministic given the seed") {
  const ExperimentConfig cfg = tiny_sco();
  const std::string a = mask_time_column(csv_to_string(run_experiment(cfg).table));
  const std::string b = mask_time_column(csv_to_string(run_experiment(cfg).table));
  CHECK(a == b);
}

TEST_CASE("experiment rows and aggregates") {
  ExperimentConfig cfg = tiny_sco();
  cfg.seeds = {2, 1};  // unsorted on purpose
  cfg.stride = 25;
  const ExperimentResult res = run_experiment(cfg);
  REQUIRE(res.table.header.size() == 12);
  // 2 checkpoints x (2 seeds + mean + std)
  CHECK(res.table.rows.size() == 8);
  CHECK(res.table.rows[0][7] == "1");  // seeds sorted before writing
  bool has_mean = false, has_std = false;
  for (const auto& row : res.table.rows) {
    if (row[7] == "mean") has_mean = true;
    if (row[7] == "std") has_std = true;
  }
  CHECK(has_mean);
  CHECK(has_std);
  // config echo lands in the metadata
  bool echoed = false;
  for (const auto& line : res.metadata)
    if (line == "T=50") echoed = true;
  CHECK(echoed);
}

TEST_CASE("bandit experiment rows") {
  ExperimentConfig cfg;
  cfg.mode = Mode::kBandit;
  cfg.algo = Algo::kPofw;
  cfg.p = 1.0;
  cfg.dim = 5;
  cfg.horizon = 120;
  cfg.arms = 2;
  cfg.t0_multiplier = 0.2;  // keep forced sampling short at this tiny T
  cfg.seeds = {1, 2};
  cfg.stride = 60;
  const ExperimentResult res = run_experiment(cfg);
  REQUIRE(res.table.header.size() == 8);
  CHECK(res.table.rows.size() == 8);
  // per-seed cumulative regret is nondecreasing in t
  double prev = -1.0;
  for (const auto& row : res.table.rows) {
    if (row[5] == "1") {
      const double v = std::strtod(row[7].c_str(), nullptr);
      CHECK(v >= prev);
      prev = v;
    }
  }
  const std::string a = csv_to_string(run_experiment(cfg).table);
  const std::string b = csv_to_string(run_experiment(cfg).table);
  CHECK(a == b);
}
