#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "framecast/features.hpp"
#include "framecast/lkk.hpp"

namespace framecast::metrics {

inline constexpr double kProbClamp = 1e-12;

// First Wasserstein distance between two distributions over ordered bins
// with unit spacing: sum over i of |CDF_p(i) - CDF_q(i)|.
double wasserstein1(std::span<const double> p, std::span<const double> q);

// -sum(gt_i * ln(max(pred_i, clamp))).
double cross_entropy(std::span<const double> pred, std::span<const double> gt);

// KL(gt || pred) with the same clamp; zero gt entries contribute zero.
double kl_divergence(std::span<const double> gt, std::span<const double> pred);

// Mean absolute difference per class.
double mae(std::span<const double> pred, std::span<const double> gt);

// Argmax with ties resolved toward the lowest index.
int argmax_lowest(std::span<const double> v);

// Indices of the two largest entries, ordered by (value desc, index asc).
std::pair<int, int> top_two(std::span<const double> v);

struct MetricsReport {
  int k = 0;
  std::size_t n_pairs = 0;
  double wd = 0.0;
  double ce = 0.0;
  double kl = 0.0;
  double mae = 0.0;
  double top1_acc = 0.0;
  double top2_acc = 0.0;
  double adjacent_acc = 0.0;
  double macro_f1 = 0.0;
  std::map<std::string, std::int64_t> path_counts;
  std::vector<std::vector<std::int64_t>> confusion;  // [gt class][pred class]

  std::string to_json() const;
  std::string confusion_csv() const;
};

using Predictor = std::function<lkk::Prediction(const features::EncodedPair&)>;

// Averages the distribution metrics over pairs and fills the label-level
// tallies. Ground truth is the pair's normalized class counts (k = 5) or bin
// counts (k = 42). Pairs are processed concurrently; reduction is in pair
// order, so results do not depend on thread count.
MetricsReport evaluate(const Predictor& predictor,
                       const std::vector<features::EncodedPair>& pairs, int k);

// Convenience predictors.
Predictor gated_predictor(const lkk::LkkModel& model, const lkk::GatePolicy& gate);
Predictor forced_path_predictor(const lkk::LkkModel& model, lkk::Path path);

}  // namespace framecast::metrics
