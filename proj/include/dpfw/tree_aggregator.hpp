#pragma once

#include <bit>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dpfw/noise.hpp"
#include "dpfw/rng.hpp"
#include "dpfw/vec.hpp"

namespace dpfw {

// Private prefix sums of a stream of d-dimensional increments under
// continual release.
//
// A complete binary tree with ceil(log2 capacity)+1 levels is allocated up
// front (heap layout, root at 0, children of i at 2i+1/2i+2; leaf t at
// offset + t). Each node accumulates the increments of the leaves in its
// subtree. When an increment arrives, every node on its leaf-to-root path
// is updated, and one fresh generalized-Gaussian draw is added to each node
// on the sub-path from the leaf up to and including the first left-child
// node. A node receives noise at most once over the aggregator's lifetime;
// the root counts as a left child for this rule, which closes the t =
// capacity case where the upward path contains no left child.
//
// partial_sum(t) assembles the noisy sum of the first t increments from
// popcount(t) stored nodes: for each set bit of t, the path ancestor at
// that height if it is a left child (or the root), otherwise its left
// sibling.
//
// Single writer; distinct aggregators are independent.
class TreeAggregator {
 public:
  TreeAggregator(std::size_t capacity, std::size_t dim, double sigma_plus, double q_plus,
                 double scale_plus, Rng rng)
      : capacity_(capacity),
        dim_(dim),
        levels_(ceil_log2(capacity) + 1),
        params_{sigma_plus, q_plus, scale_plus, dim},
        rng_(rng) {
    if (capacity_ < 1) throw std::invalid_argument("tree: require capacity >= 1");
    if (dim_ < 1) throw std::invalid_argument("tree: require dim >= 1");
    leaf_count_ = std::size_t{1} << (levels_ - 1);
    node_count_ = 2 * leaf_count_ - 1;
    nodes_.assign(node_count_ * dim_, 0.0);
    noised_.assign(node_count_, false);
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t dim() const { return dim_; }
  unsigned levels() const { return levels_; }
  std::size_t count() const { return t_; }
  double sigma_plus() const { return params_.sigma_plus; }
  std::size_t noise_draws() const { return noise_draws_; }

  void append(ConstView increment) {
    if (t_ >= capacity_) throw std::out_of_range("tree: capacity exceeded");
    if (increment.size() != dim_) throw std::invalid_argument("tree: dimension mismatch");
    std::size_t node = leaf_index(t_);
    bool on_lambda_path = true;
    for (;;) {
      double* acc = node_ptr(node);
      for (std::size_t i = 0; i < dim_; ++i) acc[i] += increment[i];
      if (on_lambda_path) {
        add_noise(node);
        if (is_left_or_root(node)) on_lambda_path = false;
      }
      if (node == 0) break;
      node = parent(node);
    }
    ++t_;
  }

  Vec partial_sum(std::size_t t) const {
    if (t < 1 || t > t_) throw std::out_of_range("tree: partial_sum step out of range");
    Vec v = zeros(dim_);
    std::size_t node = leaf_index(t - 1);
    for (unsigned level = 0; level < levels_; ++level) {
      if ((t >> level) & 1u) {
        const std::size_t use = is_left_or_root(node) ? node : node - 1;
        const double* acc = node_ptr(use);
        for (std::size_t i = 0; i < dim_; ++i) v[i] += acc[i];
      }
      if (node != 0) node = parent(node);
    }
    return v;
  }

  // Number of stored nodes combined by partial_sum(t); equals popcount(t).
  std::size_t nodes_combined(std::size_t t) const {
    if (t < 1 || t > t_) throw std::out_of_range("tree: step out of range");
    return static_cast<std::size_t>(std::popcount(t));
  }

  // Noised nodes on the root-to-leaf path of the (1-based) leaf.
  std::size_t noised_on_leaf_path(std::size_t leaf) const {
    if (leaf < 1 || leaf > leaf_count_) throw std::out_of_range("tree: leaf out of range");
    std::size_t node = leaf_index(leaf - 1);
    std::size_t n = noised_[node] ? 1 : 0;
    while (node != 0) {
      node = parent(node);
      if (noised_[node]) ++n;
    }
    return n;
  }

 private:
  std::size_t leaf_index(std::size_t pos) const { return (leaf_count_ - 1) + pos; }
  static std::size_t parent(std::size_t node) { return (node - 1) / 2; }
  static bool is_left_or_root(std::size_t node) { return node == 0 || (node % 2 == 1); }

  double* node_ptr(std::size_t node) { return nodes_.data() + node * dim_; }
  const double* node_ptr(std::size_t node) const { return nodes_.data() + node * dim_; }

  void add_noise(std::size_t node) {
    if (noised_[node]) throw std::logic_error("tree: node noised twice");
    noised_[node] = true;
    ++noise_draws_;
    if (params_.sigma_plus == 0.0) return;
    const Vec z = sample_generalized_gaussian(params_, rng_);
    double* acc = node_ptr(node);
    for (std::size_t i = 0; i < dim_; ++i) acc[i] += z[i];
  }

  std::size_t capacity_;
  std::size_t dim_;
  unsigned levels_;
  std::size_t leaf_count_ = 0;
  std::size_t node_count_ = 0;
  GGNoiseParams params_;
  Rng rng_;
  std::vector<double> nodes_;
  std::vector<bool> noised_;
  std::size_t t_ = 0;
  std::size_t noise_draws_ = 0;
};

}  // namespace dpfw
