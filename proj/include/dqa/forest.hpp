#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqa/error.hpp"
#include "dqa/rng.hpp"
#include "dqa/text.hpp"

namespace dqa {

struct ForestParams {
  int n_trees = 100;
  int max_depth = 20;
  int min_samples_split = 2;
  std::optional<int> features_per_split;  // nullopt -> floor(sqrt(d))
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<std::int64_t> class_counts;  // leaves only

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  int predict_leaf(std::span<const std::int32_t> row) const {
    int idx = 0;
    while (!nodes[idx].is_leaf()) {
      idx = double(row[nodes[idx].feature]) < nodes[idx].threshold ? nodes[idx].left
                                                                   : nodes[idx].right;
    }
    const auto& counts = nodes[idx].class_counts;
    int best = 0;
    for (int c = 1; c < int(counts.size()); ++c)
      if (counts[c] > counts[best]) best = c;
    return best;
  }
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  ForestParams params;
  std::vector<std::string> class_names;
};

namespace detail {

struct BestSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // sum(l_c^2)/L + sum(r_c^2)/R; maximizing this
                       // minimizes weighted Gini impurity
};

struct TreeBuilder {
  const FeatureMatrix& m;
  const ForestParams& p;
  int n_classes;
  std::uint64_t tree_seed;
  DecisionTree tree;

  // scratch
  std::vector<std::pair<std::int32_t, int>> sorted;  // (value, label)
  std::vector<std::int64_t> left_counts;

  TreeBuilder(const FeatureMatrix& mat, const ForestParams& params, int classes,
              std::uint64_t seed)
      : m(mat), p(params), n_classes(classes), tree_seed(seed) {}

  int feature_count() const {
    int d = int(m.cols);
    if (p.features_per_split) return std::clamp(*p.features_per_split, 1, d);
    return std::max(1, int(std::floor(std::sqrt(double(d)))));
  }

  // Scan one feature's sorted values; candidate thresholds at midpoints of
  // distinct adjacent values.
  void scan_feature(int f, std::span<const std::size_t> idx,
                    const std::vector<std::int64_t>& total_counts, BestSplit& best) {
    sorted.clear();
    sorted.reserve(idx.size());
    for (std::size_t i : idx) sorted.emplace_back(m.at(i, std::size_t(f)), m.labels[i]);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (sorted.front().first == sorted.back().first) return;  // constant feature

    left_counts.assign(std::size_t(n_classes), 0);
    std::int64_t left_sumsq = 0, right_sumsq = 0;
    for (std::int64_t c : total_counts) right_sumsq += c * c;
    const std::int64_t n = std::int64_t(sorted.size());

    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      int label = sorted[i].second;
      std::int64_t lc = left_counts[std::size_t(label)];
      std::int64_t rc = total_counts[std::size_t(label)] - lc;
      left_sumsq += 2 * lc + 1;
      right_sumsq -= 2 * rc - 1;
      left_counts[std::size_t(label)]++;

      std::int32_t v0 = sorted[i].first, v1 = sorted[i + 1].first;
      if (v0 == v1) continue;
      double threshold = double(v0) + (double(v1) - double(v0)) / 2.0;
      if (!(double(v0) < threshold)) continue;  // midpoint collapsed
      std::int64_t l = std::int64_t(i) + 1, r = n - l;
      double score = double(left_sumsq) / double(l) + double(right_sumsq) / double(r);
      if (!best.found || score > best.score) {
        best.found = true;
        best.feature = f;
        best.threshold = threshold;
        best.score = score;
      }
    }
  }

  // node_id encodes the root-to-node path (root 1, children 2i / 2i+1) so a
  // node's randomness is independent of traversal order and tree depth.
  int build(std::vector<std::size_t>& idx, std::size_t begin, std::size_t end, int depth,
            std::uint64_t node_id) {
    std::vector<std::int64_t> counts(std::size_t(n_classes), 0);
    for (std::size_t i = begin; i < end; ++i) counts[std::size_t(m.labels[idx[i]])]++;
    const std::int64_t size = std::int64_t(end - begin);
    bool pure = false;
    for (std::int64_t c : counts) {
      if (c == size) pure = true;
    }

    int node_index = int(tree.nodes.size());
    tree.nodes.emplace_back();

    if (depth >= p.max_depth || size < p.min_samples_split || pure) {
      tree.nodes[std::size_t(node_index)].class_counts = std::move(counts);
      return node_index;
    }

    // candidate features: all of them in index order when the subset rule
    // covers d, otherwise a seeded draw without replacement
    BestSplit best;
    const int d = int(m.cols);
    const int k = feature_count();
    std::span<const std::size_t> node_view(idx.data() + begin, std::size_t(size));
    if (k >= d) {
      for (int f = 0; f < d; ++f) scan_feature(f, node_view, counts, best);
    } else {
      Rng rng(derive_seed(tree_seed, node_id));
      auto subset = sample_without_replacement(std::size_t(d), std::size_t(k), rng);
      for (std::size_t f : subset) scan_feature(int(f), node_view, counts, best);
    }

    if (!best.found) {
      tree.nodes[std::size_t(node_index)].class_counts = std::move(counts);
      return node_index;
    }

    auto mid = std::partition(idx.begin() + std::ptrdiff_t(begin), idx.begin() + std::ptrdiff_t(end),
                              [&](std::size_t i) {
                                return double(m.at(i, std::size_t(best.feature))) < best.threshold;
                              });
    std::size_t split_at = std::size_t(mid - idx.begin());

    tree.nodes[std::size_t(node_index)].feature = best.feature;
    tree.nodes[std::size_t(node_index)].threshold = best.threshold;
    int left = build(idx, begin, split_at, depth + 1, node_id * 2);
    tree.nodes[std::size_t(node_index)].left = left;
    int right = build(idx, split_at, end, depth + 1, node_id * 2 + 1);
    tree.nodes[std::size_t(node_index)].right = right;
    return node_index;
  }
};

}  // namespace detail

inline ForestModel train_forest(const FeatureMatrix& m, const ForestParams& p) {
  if (m.rows < 2) throw Error("train_forest: need at least 2 records");
  if (m.class_names.size() < 2) throw Error("train_forest: need at least 2 classes");
  {
    std::vector<bool> present(m.class_names.size(), false);
    for (int l : m.labels) present[std::size_t(l)] = true;
    if (std::count(present.begin(), present.end(), true) < 2)
      throw Error("train_forest: single-class input");
  }
  if (p.n_trees < 1 || p.max_depth < 1) throw Error("train_forest: bad params");

  ForestModel model;
  model.params = p;
  model.class_names = m.class_names;
  model.trees.resize(std::size_t(p.n_trees));

  const int n_classes = int(m.class_names.size());
  for (int t = 0; t < p.n_trees; ++t) {
    const std::uint64_t tree_seed = derive_seed(p.seed, kSeedTrees + std::uint64_t(t));
    std::vector<std::size_t> idx;
    idx.reserve(m.rows);
    if (p.bootstrap) {
      Rng rng(derive_seed(tree_seed, 0));
      for (std::size_t i = 0; i < m.rows; ++i) idx.push_back(std::size_t(bounded(rng, m.rows)));
    } else {
      for (std::size_t i = 0; i < m.rows; ++i) idx.push_back(i);
    }
    detail::TreeBuilder builder(m, p, n_classes, tree_seed);
    builder.build(idx, 0, idx.size(), 0, 1);
    model.trees[std::size_t(t)] = std::move(builder.tree);
  }
  return model;
}

// Plurality vote over tree leaf predictions; ties resolve toward the class
// earlier in class_names.
inline std::vector<int> predict(const ForestModel& model, const FeatureMatrix& m) {
  if (model.trees.empty()) throw Error("predict: empty model");
  const std::size_t cols = m.cols;
  for (const auto& tree : model.trees) {
    for (const auto& node : tree.nodes) {
      if (!node.is_leaf() && std::size_t(node.feature) >= cols)
        throw Error("predict: feature dimension mismatch");
    }
  }
  std::vector<int> out(m.rows);
  std::vector<int> votes(model.class_names.size());
  for (std::size_t i = 0; i < m.rows; ++i) {
    std::fill(votes.begin(), votes.end(), 0);
    std::span<const std::int32_t> row(m.counts.data() + i * cols, cols);
    for (const auto& tree : model.trees) votes[std::size_t(tree.predict_leaf(row))]++;
    int best = 0;
    for (int c = 1; c < int(votes.size()); ++c)
      if (votes[std::size_t(c)] > votes[std::size_t(best)]) best = c;
    out[i] = best;
  }
  return out;
}

// Debug dump: {split_feature, threshold, children} internals, {class_counts} leaves.
inline nlohmann::json tree_to_json(const DecisionTree& tree, int idx = 0) {
  const TreeNode& n = tree.nodes[std::size_t(idx)];
  if (n.is_leaf()) return {{"class_counts", n.class_counts}};
  return {{"split_feature", n.feature},
          {"threshold", n.threshold},
          {"children", nlohmann::json::array(
                           {tree_to_json(tree, n.left), tree_to_json(tree, n.right)})}};
}

inline nlohmann::json model_to_json(const ForestModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : model.trees) trees.push_back(tree_to_json(t));
  return {{"n_trees", model.params.n_trees},
          {"max_depth", model.params.max_depth},
          {"seed", model.params.seed},
          {"class_names", model.class_names},
          {"trees", trees}};
}

}  // namespace dqa
