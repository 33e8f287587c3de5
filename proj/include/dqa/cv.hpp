#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dqa/error.hpp"
#include "dqa/forest.hpp"
#include "dqa/metrics.hpp"
#include "dqa/rng.hpp"

namespace dqa {

// Stratified fold assignment: per-class seeded shuffle, then round-robin
// dealing. Every class must have at least `folds` members.
inline std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels,
                                                              int folds, std::uint64_t seed) {
  if (folds < 2) throw Error("stratified_folds: folds must be >= 2");
  int n_classes = 0;
  for (int l : labels) n_classes = std::max(n_classes, l + 1);
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[std::size_t(labels[i])].push_back(i);

  std::vector<std::vector<std::size_t>> fold_members(static_cast<std::size_t>(folds));
  for (int c = 0; c < n_classes; ++c) {
    auto& members = by_class[std::size_t(c)];
    if (members.empty()) continue;
    if (members.size() < std::size_t(folds))
      throw Error("stratified_folds: class " + std::to_string(c) + " has " +
                  std::to_string(members.size()) + " members, fewer than folds=" +
                  std::to_string(folds));
    Rng rng(derive_seed(seed, kSeedFolds + std::uint64_t(c)));
    shuffle_inplace(members, rng);
    for (std::size_t i = 0; i < members.size(); ++i)
      fold_members[i % std::size_t(folds)].push_back(members[i]);
  }
  return fold_members;
}

namespace detail {

inline FeatureMatrix submatrix(const FeatureMatrix& m, std::span<const std::size_t> rows) {
  FeatureMatrix out;
  out.rows = rows.size();
  out.cols = m.cols;
  out.feature_names = m.feature_names;
  out.class_names = m.class_names;
  out.counts.resize(out.rows * out.cols);
  out.labels.resize(out.rows);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(m.counts.data() + rows[i] * m.cols, m.cols, out.counts.data() + i * m.cols);
    out.labels[i] = m.labels[rows[i]];
  }
  return out;
}

}  // namespace detail

// Mean held-out macro F1 over seeded stratified folds.
inline double cross_validated_f1(const FeatureMatrix& m, const ForestParams& p, int folds) {
  auto fold_members = stratified_folds(m.labels, folds, p.seed);
  const int n_classes = int(m.class_names.size());
  double total = 0.0;
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_rows;
    for (int g = 0; g < folds; ++g) {
      if (g == f) continue;
      train_rows.insert(train_rows.end(), fold_members[std::size_t(g)].begin(),
                        fold_members[std::size_t(g)].end());
    }
    FeatureMatrix train = detail::submatrix(m, train_rows);
    FeatureMatrix test = detail::submatrix(m, fold_members[std::size_t(f)]);
    ForestParams fold_params = p;
    fold_params.seed = derive_seed(p.seed, kSeedCvForest + std::uint64_t(f));
    ForestModel model = train_forest(train, fold_params);
    auto pred = predict(model, test);
    total += macro_f1(pred, test.labels, n_classes).macro_f1;
  }
  return total / double(folds);
}

// Single stratified holdout split; closer to a plain train/test protocol.
inline double holdout_f1(const FeatureMatrix& m, const ForestParams& p, double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error("holdout_f1: test_fraction must be in (0, 1)");
  int n_classes = int(m.class_names.size());
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < m.labels.size(); ++i)
    by_class[std::size_t(m.labels[i])].push_back(i);

  std::vector<std::size_t> train_rows, test_rows;
  for (int c = 0; c < n_classes; ++c) {
    auto& members = by_class[std::size_t(c)];
    if (members.size() < 2)
      throw Error("holdout_f1: class " + std::to_string(c) + " has fewer than 2 members");
    Rng rng(derive_seed(p.seed, kSeedFolds + std::uint64_t(c)));
    shuffle_inplace(members, rng);
    std::size_t n_test = std::size_t(double(members.size()) * test_fraction);
    n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
    for (std::size_t i = 0; i < members.size(); ++i)
      (i < n_test ? test_rows : train_rows).push_back(members[i]);
  }
  FeatureMatrix train = detail::submatrix(m, train_rows);
  FeatureMatrix test = detail::submatrix(m, test_rows);
  ForestParams params = p;
  params.seed = derive_seed(p.seed, kSeedCvForest);
  ForestModel model = train_forest(train, params);
  auto pred = predict(model, test);
  return macro_f1(pred, test.labels, n_classes).macro_f1;
}

}  // namespace dqa
