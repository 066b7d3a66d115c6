#pragma once

#include <cstdint>
#include <vector>

#include "framecast/features.hpp"
#include "framecast/metrics.hpp"
#include "framecast/nn.hpp"

namespace framecast::baseline {

struct BaselineConfig {
  int epochs = 200;
  int batch_size = 256;
  double learning_rate = 1e-3;
  double l1_lambda = 0.0;
  std::uint64_t seed = 1;
};

// Multinomial logistic regression on the encoded features, trained with the
// same soft cross-entropy objective as the main model.
class SoftmaxRegressor {
 public:
  SoftmaxRegressor(int input_width, int k, std::uint64_t seed);

  int input_width() const { return input_width_; }
  int k() const { return k_; }

  std::vector<double> predict_probs(std::span<const double> x) const;

  // Returns the mean train loss per epoch.
  std::vector<double> fit(const std::vector<features::EncodedPair>& train,
                          const BaselineConfig& config);

 private:
  int input_width_ = 0;
  int k_ = 0;
  nn::ParamStore store_;
  std::size_t w_ = 0, b_ = 0;
};

// Same distribution for every pair: uniform over k, or the mean of the train
// targets. Both serve as floors that a trained model must beat.
metrics::Predictor uniform_predictor(int k);
metrics::Predictor prior_predictor(const std::vector<features::EncodedPair>& train, int k);
metrics::Predictor regressor_predictor(const SoftmaxRegressor& model);

}  // namespace framecast::baseline
