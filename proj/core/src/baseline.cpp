#include "framecast/baseline.hpp"

#include <algorithm>
#include <numeric>

#include "framecast/error.hpp"
#include "framecast/rng.hpp"

namespace framecast::baseline {

SoftmaxRegressor::SoftmaxRegressor(int input_width, int k, std::uint64_t seed)
    : input_width_(input_width), k_(k) {
  require(input_width > 0, "invalid_input", "baseline: input width must be positive");
  require(k >= 2, "invalid_input", "baseline: k must be at least 2");
  w_ = store_.add("linear.w", static_cast<std::size_t>(k),
                  static_cast<std::size_t>(input_width), true);
  b_ = store_.add("linear.b", static_cast<std::size_t>(k), 1, false);
  RandomStream rng(seed, "baseline.init");
  nn::glorot_init(store_.entry(w_).value, static_cast<std::size_t>(k),
                  static_cast<std::size_t>(input_width), rng);
}

std::vector<double> SoftmaxRegressor::predict_probs(std::span<const double> x) const {
  require(x.size() == static_cast<std::size_t>(input_width_), "shape_mismatch",
          "baseline: feature width does not match the model");
  std::vector<double> logits(static_cast<std::size_t>(k_), 0.0);
  nn::dense_forward(store_.entry(w_).value, store_.entry(b_).value,
                    static_cast<std::size_t>(input_width_),
                    static_cast<std::size_t>(k_), x, logits);
  return nn::softmax(logits);
}

std::vector<double> SoftmaxRegressor::fit(
    const std::vector<features::EncodedPair>& train, const BaselineConfig& config) {
  require(!train.empty(), "invalid_input", "baseline: empty training set");
  require(config.epochs > 0 && config.batch_size > 0, "invalid_input",
          "baseline: epochs and batch size must be positive");

  nn::AdamConfig opt_cfg;
  opt_cfg.lr = config.learning_rate;
  nn::Adam opt(opt_cfg);
  RandomStream rng(config.seed, "baseline.shuffle");

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> logits(static_cast<std::size_t>(k_), 0.0);
  std::vector<double> dlogits(static_cast<std::size_t>(k_), 0.0);
  std::vector<double> epoch_losses;
  epoch_losses.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      std::size_t stop = std::min(order.size(),
                                  start + static_cast<std::size_t>(config.batch_size));
      double scale = 1.0 / static_cast<double>(stop - start);
      store_.zero_grads();
      double batch_loss = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        const auto& pair = train[order[i]];
        require(pair.features.size() == static_cast<std::size_t>(input_width_),
                "shape_mismatch", "baseline: feature width does not match the model");
        nn::dense_forward(store_.entry(w_).value, store_.entry(b_).value,
                          static_cast<std::size_t>(input_width_),
                          static_cast<std::size_t>(k_), pair.features, logits);
        std::fill(dlogits.begin(), dlogits.end(), 0.0);
        batch_loss += nn::softce_loss(logits, pair.target(k_).probs, dlogits, 1.0);
        nn::dense_backward(store_.entry(w_).value,
                           static_cast<std::size_t>(input_width_),
                           static_cast<std::size_t>(k_), pair.features, dlogits,
                           store_.entry(w_).grad, store_.entry(b_).grad, {}, scale);
      }
      batch_loss *= scale;
      batch_loss += nn::l1_penalty(store_, config.l1_lambda);
      auto params = store_.flatten_values();
      auto grads = store_.flatten_grads();
      opt.step(params, grads);
      store_.load_values(params);
      epoch_loss += batch_loss * static_cast<double>(stop - start);
      seen += stop - start;
    }
    epoch_losses.push_back(epoch_loss / static_cast<double>(seen));
  }
  return epoch_losses;
}

metrics::Predictor uniform_predictor(int k) {
  require(k >= 2, "invalid_input", "uniform_predictor: k must be at least 2");
  return [k](const features::EncodedPair&) {
    lkk::Prediction pred;
    pred.path = lkk::Path::WithoutKernels;
    pred.dist = telemetry::ClassDistribution::uniform(k);
    return pred;
  };
}

metrics::Predictor prior_predictor(const std::vector<features::EncodedPair>& train,
                                   int k) {
  require(!train.empty(), "invalid_input", "prior_predictor: empty training set");
  std::vector<double> mean(static_cast<std::size_t>(k), 0.0);
  for (const auto& pair : train) {
    auto t = pair.target(k);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += t.probs[i];
  }
  for (double& v : mean) v /= static_cast<double>(train.size());
  telemetry::ClassDistribution dist;
  dist.probs = std::move(mean);
  dist.validate();
  return [dist](const features::EncodedPair&) {
    lkk::Prediction pred;
    pred.path = lkk::Path::WithoutKernels;
    pred.dist = dist;
    return pred;
  };
}

metrics::Predictor regressor_predictor(const SoftmaxRegressor& model) {
  return [&model](const features::EncodedPair& pair) {
    lkk::Prediction pred;
    pred.path = lkk::Path::WithoutKernels;
    pred.dist.probs = model.predict_probs(pair.features);
    pred.dist.validate();
    return pred;
  };
}

}  // namespace framecast::baseline
