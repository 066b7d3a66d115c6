#include "framecast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "framecast/error.hpp"
#include "framecast/io.hpp"
#include "framecast/parallel.hpp"

namespace framecast::metrics {

namespace {

void check_dist(std::span<const double> p, const char* who) {
  require(!p.empty(), "invalid_input", std::string(who) + ": empty distribution");
  double sum = 0.0;
  for (double v : p) {
    require(std::isfinite(v) && v >= 0.0, "invalid_input",
            std::string(who) + ": entries must be finite and non-negative");
    sum += v;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "invalid_input",
          std::string(who) + ": distribution does not sum to 1");
}

}  // namespace

double wasserstein1(std::span<const double> p, std::span<const double> q) {
  check_dist(p, "wasserstein1");
  check_dist(q, "wasserstein1");
  require(p.size() == q.size(), "shape_mismatch",
          "wasserstein1: distributions have different sizes");
  double cdf_diff = 0.0;
  double total = 0.0;
  // The final CDF difference is ~0 by normalization; summing K-1 terms.
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    cdf_diff += p[i] - q[i];
    total += std::abs(cdf_diff);
  }
  return total;
}

double cross_entropy(std::span<const double> pred, std::span<const double> gt) {
  check_dist(pred, "cross_entropy");
  check_dist(gt, "cross_entropy");
  require(pred.size() == gt.size(), "shape_mismatch",
          "cross_entropy: distributions have different sizes");
  double ce = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] > 0.0) ce -= gt[i] * std::log(std::max(pred[i], kProbClamp));
  }
  return ce;
}

double kl_divergence(std::span<const double> gt, std::span<const double> pred) {
  check_dist(gt, "kl_divergence");
  check_dist(pred, "kl_divergence");
  require(gt.size() == pred.size(), "shape_mismatch",
          "kl_divergence: distributions have different sizes");
  double kl = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] > 0.0) {
      kl += gt[i] * std::log(gt[i] / std::max(pred[i], kProbClamp));
    }
  }
  return kl;
}

double mae(std::span<const double> pred, std::span<const double> gt) {
  check_dist(pred, "mae");
  check_dist(gt, "mae");
  require(pred.size() == gt.size(), "shape_mismatch",
          "mae: distributions have different sizes");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - gt[i]);
  return acc / static_cast<double>(pred.size());
}

int argmax_lowest(std::span<const double> v) {
  require(!v.empty(), "invalid_input", "argmax_lowest: empty input");
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) best = i;
  }
  return best;
}

std::pair<int, int> top_two(std::span<const double> v) {
  require(v.size() >= 2, "invalid_input", "top_two: need at least two entries");
  int first = argmax_lowest(v);
  int second = first == 0 ? 1 : 0;
  for (int i = 0; i < static_cast<int>(v.size()); ++i) {
    if (i == first) continue;
    if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(second)]) second = i;
  }
  return {first, second};
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["k"] = k;
  j["n_pairs"] = n_pairs;
  j["wd"] = wd;
  j["ce"] = ce;
  j["kl"] = kl;
  j["mae"] = mae;
  j["top1_acc"] = top1_acc;
  j["top2_acc"] = top2_acc;
  j["adjacent_acc"] = adjacent_acc;
  j["macro_f1"] = macro_f1;
  nlohmann::ordered_json pc = nlohmann::ordered_json::object();
  for (const auto& [name, count] : path_counts) pc[name] = count;
  j["path_counts"] = pc;
  j["confusion"] = confusion;
  return j.dump(2) + "\n";
}

std::string MetricsReport::confusion_csv() const {
  std::ostringstream out;
  out << "gt_class";
  for (int c = 0; c < k; ++c) out << ",pred_" << c;
  out << "\n";
  for (int g = 0; g < k; ++g) {
    out << g;
    for (int c = 0; c < k; ++c) {
      out << "," << confusion[static_cast<std::size_t>(g)][static_cast<std::size_t>(c)];
    }
    out << "\n";
  }
  return out.str();
}

MetricsReport evaluate(const Predictor& predictor,
                       const std::vector<features::EncodedPair>& pairs, int k) {
  require(k >= 2, "invalid_input", "evaluate: k must be at least 2");
  require(!pairs.empty(), "invalid_input", "evaluate: no pairs to evaluate");

  struct PerPair {
    double wd = 0.0, ce = 0.0, kl = 0.0, mae = 0.0;
    int gt_label = 0, pred_label = 0;
    bool top2_hit = false;
    lkk::Path path = lkk::Path::WithoutKernels;
  };
  std::vector<PerPair> rows(pairs.size());

  parallel_for(pairs.size(), [&](std::size_t i) {
    const auto& pair = pairs[i];
    lkk::Prediction pred = predictor(pair);
    require(static_cast<int>(pred.dist.probs.size()) == k, "shape_mismatch",
            "evaluate: predictor output size does not match k");
    telemetry::ClassDistribution gt = pair.target(k);
    PerPair& r = rows[i];
    r.wd = wasserstein1(pred.dist.probs, gt.probs);
    r.ce = cross_entropy(pred.dist.probs, gt.probs);
    r.kl = kl_divergence(gt.probs, pred.dist.probs);
    r.mae = mae(pred.dist.probs, gt.probs);
    r.gt_label = argmax_lowest(gt.probs);
    r.pred_label = argmax_lowest(pred.dist.probs);
    auto [t1, t2] = top_two(pred.dist.probs);
    r.top2_hit = (r.gt_label == t1 || r.gt_label == t2);
    r.path = pred.path;
  });

  MetricsReport rep;
  rep.k = k;
  rep.n_pairs = pairs.size();
  rep.confusion.assign(static_cast<std::size_t>(k),
                       std::vector<std::int64_t>(static_cast<std::size_t>(k), 0));
  std::int64_t top1 = 0, top2 = 0, adjacent = 0;
  for (const PerPair& r : rows) {
    rep.wd += r.wd;
    rep.ce += r.ce;
    rep.kl += r.kl;
    rep.mae += r.mae;
    rep.confusion[static_cast<std::size_t>(r.gt_label)]
                 [static_cast<std::size_t>(r.pred_label)] += 1;
    if (r.pred_label == r.gt_label) ++top1;
    if (r.top2_hit) ++top2;
    if (std::abs(r.pred_label - r.gt_label) <= 1) ++adjacent;
    rep.path_counts[lkk::to_string(r.path)] += 1;
  }
  double n = static_cast<double>(pairs.size());
  rep.wd /= n;
  rep.ce /= n;
  rep.kl /= n;
  rep.mae /= n;
  rep.top1_acc = static_cast<double>(top1) / n;
  rep.top2_acc = static_cast<double>(top2) / n;
  rep.adjacent_acc = static_cast<double>(adjacent) / n;

  // Macro F1 over all k classes; a class with no true and no predicted
  // samples contributes zero.
  double f1_sum = 0.0;
  for (int c = 0; c < k; ++c) {
    std::int64_t tp = rep.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
    std::int64_t fp = 0, fn = 0;
    for (int g = 0; g < k; ++g) {
      if (g == c) continue;
      fp += rep.confusion[static_cast<std::size_t>(g)][static_cast<std::size_t>(c)];
      fn += rep.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(g)];
    }
    double prec = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    double rec = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    if (prec + rec > 0.0) f1_sum += 2.0 * prec * rec / (prec + rec);
  }
  rep.macro_f1 = f1_sum / static_cast<double>(k);
  return rep;
}

Predictor gated_predictor(const lkk::LkkModel& model, const lkk::GatePolicy& gate) {
  return [&model, &gate](const features::EncodedPair& pair) {
    return lkk::predict(model, pair.features, pair.player_guid, pair.game_id, gate);
  };
}

Predictor forced_path_predictor(const lkk::LkkModel& model, lkk::Path path) {
  return [&model, path](const features::EncodedPair& pair) {
    lkk::PathOutputs out =
        model.forward_paths(pair.features, pair.player_guid, pair.game_id);
    lkk::Prediction pred;
    pred.path = path;
    pred.dist.probs = out.for_path(path);
    pred.dist.validate();
    return pred;
  };
}

}  // namespace framecast::metrics
