#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "framecast/rng.hpp"

namespace framecast::nn {

// Named parameter array with its gradient buffer. Shape is (rows, cols);
// vectors use cols = 1. weight_matrix marks arrays subject to the L1 penalty.
struct ParamEntry {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool weight_matrix = false;
  std::vector<double> value;
  std::vector<double> grad;

  std::size_t size() const { return rows * cols; }
};

// Registry of parameter arrays in registration order. Flattening follows that
// order, so packets, optimizer state, and checkpoints all agree on layout.
class ParamStore {
 public:
  std::size_t add(const std::string& name, std::size_t rows, std::size_t cols,
                  bool weight_matrix);

  ParamEntry& entry(std::size_t handle) { return entries_[handle]; }
  const ParamEntry& entry(std::size_t handle) const { return entries_[handle]; }
  ParamEntry* find(const std::string& name);
  const ParamEntry* find(const std::string& name) const;

  std::size_t count() const { return entries_.size(); }
  std::size_t total_size() const;
  void zero_grads();

  std::vector<double> flatten_values() const;
  std::vector<double> flatten_grads() const;
  void load_values(std::span<const double> flat);
  void add_to_grads(std::span<const double> flat, double scale);

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::vector<ParamEntry> entries_;
};

// y = W x + b. W is row-major (out x in).
void dense_forward(std::span<const double> w, std::span<const double> b,
                   std::size_t in, std::size_t out, std::span<const double> x,
                   std::span<double> y);

// Accumulates scale * dL/dW into gw, scale * dL/db into gb, and writes
// dL/dx into dx when dx is non-empty. x must be the forward input.
void dense_backward(std::span<const double> w, std::size_t in, std::size_t out,
                    std::span<const double> x, std::span<const double> dy,
                    std::span<double> gw, std::span<double> gb,
                    std::span<double> dx, double scale);

void relu_inplace(std::span<double> x);
// d *= 1[y > 0], where y is the forward output (post-activation).
void relu_backward_inplace(std::span<const double> y, std::span<double> d);

std::vector<double> softmax(std::span<const double> logits);

// Soft-target cross-entropy -sum(t_i * log softmax(z)_i), evaluated via
// log-sum-exp. target must be a distribution (sum 1 within 1e-6, entries
// >= 0). When dlogits is non-empty, accumulates scale * (softmax(z) - t).
double softce_loss(std::span<const double> logits, std::span<const double> target,
                   std::span<double> dlogits, double scale);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam over a flat parameter vector. Moments are lazily sized on first step
// and must match the parameter count for the optimizer's lifetime.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(std::span<double> params, std::span<const double> grads);
  const AdamConfig& config() const { return cfg_; }
  std::int64_t steps_taken() const { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<double> m_, v_;
  std::int64_t t_ = 0;
};

// Adds lambda * sign(w) to the gradients of weight-matrix entries and
// returns the penalty lambda * sum |w|. Biases and non-matrix arrays
// (kernel tables) are exempt.
double l1_penalty(ParamStore& store, double lambda);

// Glorot-uniform init for a (rows x cols) weight matrix.
void glorot_init(std::vector<double>& w, std::size_t rows, std::size_t cols,
                 RandomStream& rng);

struct GradCheckGroup {
  std::string name;
  double max_rel_err = 0.0;
  int checked = 0;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::vector<GradCheckGroup> groups;
};

// Central finite differences against the analytic gradient. loss_fn must
// evaluate the full objective at the current parameters; grad_fn must fill
// the store's gradient buffers for the same objective. Samples
// `indices_per_group` coordinates from every parameter array.
GradCheckReport grad_check(ParamStore& store,
                           const std::function<double()>& loss_fn,
                           const std::function<void()>& grad_fn,
                           RandomStream& rng, int indices_per_group,
                           double step = 1e-5);

}  // namespace framecast::nn
