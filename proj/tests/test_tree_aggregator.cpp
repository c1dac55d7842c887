#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cmath>

#include "dpfw/tree_aggregator.hpp"

using namespace dpfw;

namespace {

TreeAggregator make_tree(std::size_t capacity, std::size_t dim, double sigma, std::uint64_t seed) {
  return TreeAggregator(capacity, dim, sigma, 2.0, 1.0, Rng(seed));
}

}  // namespace

TEST_CASE("exact summation with zero noise") {
  TreeAggregator tree = make_tree(4, 1, 0.0, 1);
  for (double v : {1.0, 2.0, 3.0, 4.0}) tree.append(Vec{v});
  CHECK(tree.partial_sum(4) == Vec{10.0});
  CHECK(tree.nodes_combined(4) == 1);  // 4 = 0b100
  CHECK(tree.partial_sum(3) == Vec{6.0});
  CHECK(tree.nodes_combined(3) == 2);  // 3 = 0b11
  CHECK(tree.partial_sum(1) == Vec{1.0});
}

TEST_CASE("noise draws follow the first-left-child sub-path") {
  // capacity 4: leaf1 is a left child (1 draw); leaf2 closes its parent
  // (2 draws); leaf3 is a left child (1 draw); leaf4 closes parent and root
  // (3 draws).
  TreeAggregator tree = make_tree(4, 2, 1.0, 2);
  const std::size_t expected[] = {1, 3, 4, 7};
  for (std::size_t t = 0; t < 4; ++t) {
    tree.append(Vec{1.0, -1.0});
    CHECK(tree.noise_draws() == expected[t]);
  }
  for (std::size_t leaf = 1; leaf <= 4; ++leaf) {
    CHECK(tree.noised_on_leaf_path(leaf) == tree.levels());
  }
}

TEST_CASE("capacity and argument errors") {
  TreeAggregator tree = make_tree(2, 1, 0.0, 3);
  tree.append(Vec{1.0});
  tree.append(Vec{2.0});
  CHECK_THROWS_AS(tree.append(Vec{3.0}), std::out_of_range);
  CHECK_THROWS_AS(tree.partial_sum(0), std::out_of_range);
  CHECK_THROWS_AS(tree.partial_sum(3), std::out_of_range);
  CHECK_THROWS_AS(make_tree(0, 1, 0.0, 4), std::invalid_argument);

  TreeAggregator t2 = make_tree(2, 2, 0.0, 5);
  CHECK_THROWS_AS(t2.append(Vec{1.0}), std::invalid_argument);
}

TEST_CASE("single-leaf tree") {
  TreeAggregator tree = make_tree(1, 1, 0.0, 6);
  CHECK(tree.levels() == 1);
  tree.append(Vec{5.0});
  CHECK(tree.partial_sum(1) == Vec{5.0});
}

TEST_CASE("zero-noise prefix sums match a naive oracle bit-exactly") {
  Rng rng(20240912);
  // integer-valued increments keep every addition order exact
  for (std::size_t n : {1u, 2u, 3u, 5u, 7u, 8u, 31u, 64u, 100u, 255u, 256u, 1000u}) {
    const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform01() * 20);
    TreeAggregator tree = make_tree(n, d, 0.0, rng.next_bits());
    std::vector<Vec> prefix;
    Vec run = zeros(d);
    for (std::size_t t = 1; t <= n; ++t) {
      Vec z(d);
      for (double& x : z) x = std::floor(2001.0 * rng.uniform01()) - 1000.0;
      tree.append(z);
      add_in_place(run, z);
      prefix.push_back(run);
      for (std::size_t s = t; s >= 1 && s + 16 > t; --s) {
        REQUIRE(tree.partial_sum(s) == prefix[s - 1]);
      }
    }
  }
}

TEST_CASE("real-valued prefix sums within relative tolerance") {
  Rng rng(77);
  const std::size_t n = 300, d = 3;
  TreeAggregator tree = make_tree(n, d, 0.0, 1);
  Vec run = zeros(d);
  for (std::size_t t = 1; t <= n; ++t) {
    Vec z(d);
    for (double& x : z) x = rng.normal();
    tree.append(z);
    add_in_place(run, z);
    const Vec got = tree.partial_sum(t);
    for (std::size_t i = 0; i < d; ++i)
      CHECK(got[i] == Catch::Approx(run[i]).margin(1e-9));
  }
}

TEST_CASE("query node count is the popcount bound") {
  TreeAggregator tree = make_tree(64, 1, 0.0, 9);
  for (std::size_t t = 1; t <= 64; ++t) {
    tree.append(Vec{1.0});
    CHECK(tree.nodes_combined(t) == static_cast<std::size_t>(std::popcount(t)));
    CHECK(tree.nodes_combined(t) <= tree.levels());
    CHECK(tree.partial_sum(t) == Vec{static_cast<double>(t)});
  }
}

TEST_CASE("per-path noise bound under partial fill") {
  TreeAggregator tree = make_tree(32, 1, 0.5, 10);
  for (std::size_t t = 0; t < 20; ++t) tree.append(Vec{1.0});
  for (std::size_t leaf = 1; leaf <= 32; ++leaf) {
    CHECK(tree.noised_on_leaf_path(leaf) <= tree.levels());
  }
}
