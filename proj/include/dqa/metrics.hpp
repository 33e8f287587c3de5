#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "dqa/error.hpp"
#include "dqa/rng.hpp"

namespace dqa {

struct EvalScore {
  double macro_f1 = 0.0;
  std::vector<double> per_class_f1;
  std::vector<std::int64_t> support;
};

// Per-class F1 = 2PR/(P+R), 0 when the class is never predicted nor present;
// macro = unweighted mean over all n_classes.
inline EvalScore macro_f1(std::span<const int> pred, std::span<const int> truth, int n_classes) {
  if (pred.size() != truth.size()) throw Error("macro_f1: length mismatch");
  if (truth.empty()) throw Error("macro_f1: empty input");
  if (n_classes < 1) throw Error("macro_f1: n_classes must be >= 1");

  std::vector<std::int64_t> tp(n_classes, 0), pred_count(n_classes, 0), truth_count(n_classes, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    int p = pred[i], t = truth[i];
    if (p < 0 || p >= n_classes || t < 0 || t >= n_classes)
      throw Error("macro_f1: class index out of range");
    if (p == t) tp[p]++;
    pred_count[p]++;
    truth_count[t]++;
  }

  EvalScore score;
  score.per_class_f1.resize(n_classes, 0.0);
  score.support.assign(truth_count.begin(), truth_count.end());
  double sum = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    double denom = 0.0;
    double precision = pred_count[c] > 0 ? double(tp[c]) / double(pred_count[c]) : 0.0;
    double recall = truth_count[c] > 0 ? double(tp[c]) / double(truth_count[c]) : 0.0;
    denom = precision + recall;
    score.per_class_f1[c] = denom > 0 ? 2.0 * precision * recall / denom : 0.0;
    sum += score.per_class_f1[c];
  }
  score.macro_f1 = sum / double(n_classes);
  return score;
}

// Cohen's kappa: (p_o - p_e) / (1 - p_e). p_e == 1 only happens when both
// raters are constant on the same value, which is perfect agreement.
template <typename T>
double cohen_kappa(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) throw Error("cohen_kappa: length mismatch");
  if (a.empty()) throw Error("cohen_kappa: empty input");
  const double n = double(a.size());
  std::map<T, std::int64_t> ca, cb;
  std::int64_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]]++;
    cb[b[i]]++;
    if (a[i] == b[i]) agree++;
  }
  double p_o = double(agree) / n;
  double p_e = 0.0;
  for (const auto& [v, na] : ca) {
    auto it = cb.find(v);
    if (it != cb.end()) p_e += (double(na) / n) * (double(it->second) / n);
  }
  if (p_e >= 1.0) return 1.0;
  return (p_o - p_e) / (1.0 - p_e);
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("pearson: length mismatch");
  if (x.size() < 2) throw Error("pearson: need at least 2 points");
  const double n = double(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("pearson: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

// Expected macro F1 of predicting i.i.d. from the empirical class
// distribution of `truth`; the reference point for predictivity margins.
inline double label_distribution_baseline(std::span<const int> truth, int n_classes,
                                          int repetitions, std::uint64_t seed) {
  if (truth.empty()) throw Error("label_distribution_baseline: empty truth");
  if (repetitions < 1) throw Error("label_distribution_baseline: repetitions must be >= 1");
  const std::size_t n = truth.size();
  std::vector<int> pred(n);
  double total = 0.0;
  for (int rep = 0; rep < repetitions; ++rep) {
    Rng rng(derive_seed(seed, kSeedBaseline + std::uint64_t(rep)));
    // drawing a uniform index's class == sampling the empirical distribution
    for (std::size_t i = 0; i < n; ++i) pred[i] = truth[bounded(rng, n)];
    total += macro_f1(pred, truth, n_classes).macro_f1;
  }
  return total / double(repetitions);
}

}  // namespace dqa
