// Forest training, prediction, evaluation metrics, and the CV protocol.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dqa/cv.hpp"
#include "dqa/forest.hpp"
#include "dqa/metrics.hpp"
#include "oracles.hpp"

using namespace dqa;

namespace {

FeatureMatrix matrix(std::size_t cols, const std::vector<std::vector<std::int32_t>>& rows,
                     const std::vector<int>& labels, int n_classes) {
  FeatureMatrix m;
  m.rows = rows.size();
  m.cols = cols;
  for (const auto& r : rows)
    for (auto v : r) m.counts.push_back(v);
  m.labels = labels;
  for (int c = 0; c < n_classes; ++c) m.class_names.push_back("c" + std::to_string(c));
  for (std::size_t j = 0; j < cols; ++j) m.feature_names.push_back("f" + std::to_string(j));
  return m;
}

FeatureMatrix random_matrix(Rng& rng, std::size_t n, std::size_t d, int n_classes,
                            int value_range = 6) {
  std::vector<std::vector<std::int32_t>> rows(n, std::vector<std::int32_t>(d));
  std::vector<int> labels(n);
  while (true) {
    for (auto& r : rows)
      for (auto& v : r) v = std::int32_t(bounded(rng, std::uint64_t(value_range)));
    bool multi = false;
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = int(bounded(rng, std::uint64_t(n_classes)));
      if (labels[i] != labels[0]) multi = true;
    }
    if (multi) break;
  }
  return matrix(d, rows, labels, n_classes);
}

ForestParams stump_params(std::size_t d) {
  ForestParams p;
  p.n_trees = 1;
  p.bootstrap = false;
  p.features_per_split = int(d);
  p.max_depth = 1;
  return p;
}

}  // namespace

TEST_CASE("single stump on separable 1-D data matches the exhaustive oracle") {
  // x < 0 -> class 0, x >= 0 -> class 1 (values shifted to be non-negative counts)
  auto m = matrix(1, {{0}, {1}, {2}, {5}, {6}, {7}}, {0, 0, 0, 1, 1, 1}, 2);
  auto model = train_forest(m, stump_params(1));
  auto pred = predict(model, m);
  auto oracle = testing::StumpOracle::fit(m);
  CHECK(pred == oracle.predict(m));
  CHECK(pred == std::vector<int>{0, 0, 0, 1, 1, 1});

  // fresh points on either side of the split
  auto probe = matrix(1, {{1}, {6}}, {0, 1}, 2);
  CHECK(predict(model, probe) == std::vector<int>{0, 1});
}

TEST_CASE("stump equals oracle on random small matrices") {
  Rng rng(101);
  for (int trial = 0; trial < 120; ++trial) {
    std::size_t n = 2 + bounded(rng, 49);
    std::size_t d = 1 + bounded(rng, 3);
    int n_classes = 2 + int(bounded(rng, 2));
    auto m = random_matrix(rng, n, d, n_classes);
    auto model = train_forest(m, stump_params(d));
    auto oracle = testing::StumpOracle::fit(m);
    REQUIRE(predict(model, m) == oracle.predict(m));
  }
}

TEST_CASE("all-constant features produce a single majority leaf") {
  auto m = matrix(2, {{3, 3}, {3, 3}, {3, 3}}, {1, 1, 0}, 2);
  ForestParams p;
  p.n_trees = 5;
  p.max_depth = 4;
  p.bootstrap = false;
  auto model = train_forest(m, p);
  for (const auto& tree : model.trees) {
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].is_leaf());
  }
  CHECK(predict(model, m) == std::vector<int>{1, 1, 1});
}

TEST_CASE("training is deterministic for a fixed seed") {
  Rng rng(7);
  auto m = random_matrix(rng, 40, 5, 2);
  ForestParams p;
  p.n_trees = 15;
  p.seed = 99;
  auto a = predict(train_forest(m, p), m);
  auto b = predict(train_forest(m, p), m);
  CHECK(a == b);

  ForestParams p2 = p;
  p2.seed = 100;
  // different seed is allowed to differ; just must not crash
  predict(train_forest(m, p2), m);
}

TEST_CASE("plurality vote with tie toward earlier class") {
  // tie scenario: 2 trees voting each way on a point between two clusters
  auto m = matrix(1, {{0}, {0}, {10}, {10}}, {0, 0, 1, 1}, 2);
  ForestParams p;
  p.n_trees = 2;
  p.bootstrap = false;
  p.max_depth = 1;
  p.features_per_split = 1;
  auto model = train_forest(m, p);
  // both trees split identically here, so force a tie via a handcrafted model
  ForestModel tied;
  tied.class_names = {"false", "true"};
  tied.params = p;
  DecisionTree votes0, votes1;
  votes0.nodes.push_back(TreeNode{-1, 0, -1, -1, {5, 0}});
  votes1.nodes.push_back(TreeNode{-1, 0, -1, -1, {0, 5}});
  tied.trees = {votes0, votes1};
  auto probe = matrix(1, {{4}}, {0}, 2);
  CHECK(predict(tied, probe) == std::vector<int>{0});
}

TEST_CASE("training accuracy is monotone in depth") {
  Rng rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    auto m = random_matrix(rng, 60, 4, 2);
    double prev = -1.0;
    for (int depth = 1; depth <= 6; ++depth) {
      ForestParams p;
      p.n_trees = 1;
      p.bootstrap = false;
      p.max_depth = depth;
      p.seed = 5;
      auto pred = predict(train_forest(m, p), m);
      std::size_t correct = 0;
      for (std::size_t i = 0; i < m.rows; ++i)
        if (pred[i] == m.labels[i]) ++correct;
      double acc = double(correct) / double(m.rows);
      CHECK(acc >= prev - 1e-12);
      prev = acc;
    }
  }
}

TEST_CASE("train_forest rejects degenerate inputs") {
  auto single_class = matrix(1, {{0}, {1}}, {0, 0}, 2);
  CHECK_THROWS_AS(train_forest(single_class, ForestParams{}), Error);
  auto one_row = matrix(1, {{0}}, {0}, 2);
  CHECK_THROWS_AS(train_forest(one_row, ForestParams{}), Error);
}

TEST_CASE("model json dump shape") {
  auto m = matrix(1, {{0}, {9}}, {0, 1}, 2);
  auto model = train_forest(m, stump_params(1));
  auto j = model_to_json(model);
  CHECK(j["n_trees"] == 1);
  auto root = j["trees"][0];
  CHECK(root.contains("split_feature"));
  CHECK(root["children"].size() == 2);
  CHECK(root["children"][0].contains("class_counts"));
}

// --- metrics ---------------------------------------------------------------

TEST_CASE("macro_f1 unit values") {
  std::vector<int> truth{0, 1, 0, 1};
  CHECK(macro_f1(truth, truth, 2).macro_f1 == 1.0);

  // balanced binary truth, predict all class 0: per-class F1 [2/3, 0]
  std::vector<int> all_zero{0, 0, 0, 0};
  auto s = macro_f1(all_zero, truth, 2);
  CHECK(s.per_class_f1[0] == Catch::Approx(2.0 / 3.0));
  CHECK(s.per_class_f1[1] == 0.0);
  CHECK(s.macro_f1 == Catch::Approx(1.0 / 3.0));

  // disjoint predictions
  std::vector<int> flipped{1, 0, 1, 0};
  CHECK(macro_f1(flipped, truth, 2).macro_f1 == 0.0);

  CHECK_THROWS_AS(macro_f1(std::vector<int>{0}, truth, 2), Error);
}

TEST_CASE("macro_f1 is symmetric under class relabeling") {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t n = 4 + bounded(rng, 40);
    std::vector<int> pred(n), truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = int(bounded(rng, 3));
      truth[i] = int(bounded(rng, 3));
    }
    // permutation of {0,1,2}
    std::vector<int> perm{0, 1, 2};
    shuffle_inplace(perm, rng);
    std::vector<int> pred2(n), truth2(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred2[i] = perm[std::size_t(pred[i])];
      truth2[i] = perm[std::size_t(truth[i])];
    }
    CHECK(macro_f1(pred, truth, 3).macro_f1 ==
          Catch::Approx(macro_f1(pred2, truth2, 3).macro_f1));
  }
}

TEST_CASE("cohen_kappa worked examples") {
  // identical ratings
  std::vector<int> a{0, 1, 0, 1, 1};
  CHECK(cohen_kappa(a, a) == 1.0);

  // p_o == p_e == 0.5 -> kappa 0
  std::vector<int> x{0, 0, 1, 1}, y{0, 1, 0, 1};
  CHECK(cohen_kappa(x, y) == Catch::Approx(0.0).margin(1e-12));

  // hand computation: p_o = 0.75, p_e = 0.5 -> kappa 0.5
  std::vector<int> r1{1, 1, 1, 0}, r2{1, 1, 0, 0};
  CHECK(cohen_kappa(r1, r2) == Catch::Approx(0.5));

  // marginals (6,2) for both raters, 6 agreements:
  // p_o = 0.75, p_e = 0.625 -> kappa = 1/3
  std::vector<int> s1{1, 1, 1, 1, 1, 1, 0, 0}, s2{1, 1, 1, 1, 1, 0, 1, 0};
  CHECK(cohen_kappa(s1, s2) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));

  // degenerate: both constant, same value
  std::vector<int> c1{2, 2}, c2{2, 2};
  CHECK(cohen_kappa(c1, c2) == 1.0);

  CHECK_THROWS_AS(cohen_kappa(std::vector<int>{0}, std::vector<int>{0, 1}), Error);

  // string ratings work through the same template
  std::vector<std::string> h1{"x", "x", "y", "y"}, h2{"x", "y", "x", "y"};
  CHECK(cohen_kappa(h1, h2) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("pearson correlation") {
  std::vector<double> x{1, 2, 3};
  std::vector<double> y2x1{3, 5, 7};
  CHECK(pearson(x, y2x1) == Catch::Approx(1.0));
  std::vector<double> neg{-1, -2, -3};
  CHECK(pearson(x, neg) == Catch::Approx(-1.0));
  std::vector<double> y{1, 3, 2};
  CHECK(pearson(x, y) == Catch::Approx(0.5).epsilon(1e-12));

  std::vector<double> constant{2, 2, 2};
  CHECK_THROWS_AS(pearson(x, constant), Error);
}

TEST_CASE("pearson is invariant under positive affine transforms") {
  Rng rng(17);
  std::vector<double> x, y;
  for (int i = 0; i < 25; ++i) {
    x.push_back(double(bounded(rng, 1000)) / 10.0);
    y.push_back(double(bounded(rng, 1000)) / 10.0);
  }
  double base = pearson(x, y);
  std::vector<double> xs;
  for (double v : x) xs.push_back(3.5 * v + 11.0);
  CHECK(pearson(xs, y) == Catch::Approx(base).epsilon(1e-9));
}

TEST_CASE("label distribution baseline approaches analytic values") {
  std::vector<int> balanced(10000);
  for (std::size_t i = 0; i < balanced.size(); ++i) balanced[i] = int(i % 2);
  double b = label_distribution_baseline(balanced, 2, 100, 4);
  CHECK(b > 0.48);
  CHECK(b < 0.52);

  std::vector<int> four(8000);
  for (std::size_t i = 0; i < four.size(); ++i) four[i] = int(i % 4);
  double u = label_distribution_baseline(four, 4, 50, 4);
  CHECK(u > 0.23);
  CHECK(u < 0.27);

  // determinism
  std::vector<int> small{0, 1, 1, 0, 1};
  CHECK(label_distribution_baseline(small, 2, 1, 9) ==
        label_distribution_baseline(small, 2, 1, 9));
  CHECK_THROWS_AS(label_distribution_baseline(std::vector<int>{}, 2, 1, 0), Error);
}

// --- cross validation ---------------------------------------------------------

TEST_CASE("stratified folds keep class balance and partition all rows") {
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) labels.push_back(0);
  for (int i = 0; i < 10; ++i) labels.push_back(1);
  auto folds = stratified_folds(labels, 5, 3);
  REQUIRE(folds.size() == 5);
  std::vector<int> seen(labels.size(), 0);
  for (const auto& fold : folds) {
    int c0 = 0, c1 = 0;
    for (auto i : fold) {
      seen[i]++;
      (labels[i] == 0 ? c0 : c1)++;
    }
    CHECK(c0 == 4);
    CHECK(c1 == 2);
  }
  for (int s : seen) CHECK(s == 1);

  std::vector<int> scarce{0, 0, 0, 0, 1};
  CHECK_THROWS_AS(stratified_folds(scarce, 2, 0), Error);
}

TEST_CASE("cross_validated_f1 near 1 on separable data") {
  std::vector<std::vector<std::int32_t>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) {
    rows.push_back({std::int32_t(i < 15 ? 0 + int(i % 3) : 10 + int(i % 3))});
    labels.push_back(i < 15 ? 0 : 1);
  }
  auto m = matrix(1, rows, labels, 2);
  ForestParams p;
  p.n_trees = 11;
  p.seed = 5;
  CHECK(cross_validated_f1(m, p, 5) > 0.95);

  // smallest legal shape: 2 folds on 4 balanced records
  auto tiny = matrix(1, {{0}, {9}, {1}, {8}}, {0, 1, 0, 1}, 2);
  cross_validated_f1(tiny, p, 2);
}

TEST_CASE("cross_validated_f1 stays near baseline on shuffled labels") {
  Rng rng(31);
  int within = 0;
  const int trials = 8;
  for (int t = 0; t < trials; ++t) {
    auto m = random_matrix(rng, 120, 6, 2);
    ForestParams p;
    p.n_trees = 30;
    p.seed = std::uint64_t(t);
    double cv = cross_validated_f1(m, p, 4);
    double base = label_distribution_baseline(m.labels, 2, 50, std::uint64_t(t));
    if (std::abs(cv - base) < 0.12) ++within;
  }
  CHECK(within >= trials - 1);
}

TEST_CASE("holdout protocol runs and is deterministic") {
  Rng rng(41);
  auto m = random_matrix(rng, 60, 4, 2);
  ForestParams p;
  p.n_trees = 9;
  p.seed = 77;
  CHECK(holdout_f1(m, p, 0.2) == holdout_f1(m, p, 0.2));
  CHECK_THROWS_AS(holdout_f1(m, p, 1.5), Error);
}
