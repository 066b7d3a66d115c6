#include "framecast/nn.hpp"

#include <algorithm>
#include <cmath>

#include "framecast/error.hpp"

namespace framecast::nn {

std::size_t ParamStore::add(const std::string& name, std::size_t rows,
                            std::size_t cols, bool weight_matrix) {
  require(rows > 0 && cols > 0, "invalid_input", "param: empty shape for " + name);
  require(find(name) == nullptr, "invalid_input", "param: duplicate name " + name);
  ParamEntry e;
  e.name = name;
  e.rows = rows;
  e.cols = cols;
  e.weight_matrix = weight_matrix;
  e.value.assign(rows * cols, 0.0);
  e.grad.assign(rows * cols, 0.0);
  entries_.push_back(std::move(e));
  return entries_.size() - 1;
}

ParamEntry* ParamStore::find(const std::string& name) {
  for (auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

const ParamEntry* ParamStore::find(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::size_t ParamStore::total_size() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.size();
  return n;
}

void ParamStore::zero_grads() {
  for (auto& e : entries_) std::fill(e.grad.begin(), e.grad.end(), 0.0);
}

std::vector<double> ParamStore::flatten_values() const {
  std::vector<double> flat;
  flat.reserve(total_size());
  for (const auto& e : entries_) flat.insert(flat.end(), e.value.begin(), e.value.end());
  return flat;
}

std::vector<double> ParamStore::flatten_grads() const {
  std::vector<double> flat;
  flat.reserve(total_size());
  for (const auto& e : entries_) flat.insert(flat.end(), e.grad.begin(), e.grad.end());
  return flat;
}

void ParamStore::load_values(std::span<const double> flat) {
  require(flat.size() == total_size(), "shape_mismatch", "load_values: size mismatch");
  std::size_t at = 0;
  for (auto& e : entries_) {
    std::copy(flat.begin() + at, flat.begin() + at + e.size(), e.value.begin());
    at += e.size();
  }
}

void ParamStore::add_to_grads(std::span<const double> flat, double scale) {
  require(flat.size() == total_size(), "shape_mismatch", "add_to_grads: size mismatch");
  std::size_t at = 0;
  for (auto& e : entries_) {
    for (std::size_t i = 0; i < e.size(); ++i) e.grad[i] += scale * flat[at + i];
    at += e.size();
  }
}

void dense_forward(std::span<const double> w, std::span<const double> b,
                   std::size_t in, std::size_t out, std::span<const double> x,
                   std::span<double> y) {
  require(w.size() == in * out && b.size() == out && x.size() == in && y.size() == out,
          "shape_mismatch", "dense_forward: shape mismatch");
  for (std::size_t o = 0; o < out; ++o) {
    const double* row = w.data() + o * in;
    double acc = b[o];
    for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

void dense_backward(std::span<const double> w, std::size_t in, std::size_t out,
                    std::span<const double> x, std::span<const double> dy,
                    std::span<double> gw, std::span<double> gb,
                    std::span<double> dx, double scale) {
  require(w.size() == in * out && x.size() == in && dy.size() == out &&
              gw.size() == in * out && gb.size() == out &&
              (dx.empty() || dx.size() == in),
          "shape_mismatch", "dense_backward: shape mismatch");
  for (std::size_t o = 0; o < out; ++o) {
    double g = scale * dy[o];
    gb[o] += g;
    double* grow = gw.data() + o * in;
    for (std::size_t i = 0; i < in; ++i) grow[i] += g * x[i];
  }
  if (!dx.empty()) {
    // dx accumulates (callers zero it before the first contribution).
    for (std::size_t o = 0; o < out; ++o) {
      const double* row = w.data() + o * in;
      double d = dy[o];
      for (std::size_t i = 0; i < in; ++i) dx[i] += d * row[i];
    }
  }
}

void relu_inplace(std::span<double> x) {
  for (double& v : x) v = v > 0.0 ? v : 0.0;
}

void relu_backward_inplace(std::span<const double> y, std::span<double> d) {
  require(y.size() == d.size(), "shape_mismatch", "relu_backward: shape mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] <= 0.0) d[i] = 0.0;
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  require(!logits.empty(), "invalid_input", "softmax: empty input");
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double softce_loss(std::span<const double> logits, std::span<const double> target,
                   std::span<double> dlogits, double scale) {
  require(logits.size() == target.size() && !logits.empty(), "shape_mismatch",
          "softce_loss: shape mismatch");
  require(dlogits.empty() || dlogits.size() == logits.size(), "shape_mismatch",
          "softce_loss: gradient shape mismatch");
  double tsum = 0.0;
  for (double t : target) {
    require(std::isfinite(t) && t >= 0.0, "invalid_input",
            "softce_loss: target entries must be non-negative");
    tsum += t;
  }
  require(std::abs(tsum - 1.0) <= 1e-6, "invalid_input",
          "softce_loss: target is not a distribution");

  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double lse = 0.0;
  for (double v : logits) lse += std::exp(v - mx);
  lse = mx + std::log(lse);

  double loss = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (target[i] > 0.0) loss -= target[i] * (logits[i] - lse);
  }
  if (!dlogits.empty()) {
    for (std::size_t i = 0; i < logits.size(); ++i) {
      double p = std::exp(logits[i] - lse);
      dlogits[i] += scale * (p - target[i]);
    }
  }
  return loss;
}

void Adam::step(std::span<double> params, std::span<const double> grads) {
  require(params.size() == grads.size(), "shape_mismatch", "adam: size mismatch");
  if (m_.empty()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
  }
  require(m_.size() == params.size(), "shape_mismatch",
          "adam: parameter count changed mid-run");
  for (double g : grads)
    require(std::isfinite(g), "invalid_input", "adam: non-finite gradient");
  ++t_;
  double b1t = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double b2t = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double g = grads[i];
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
    double mhat = m_[i] / b1t;
    double vhat = v_[i] / b2t;
    params[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
  }
}

double l1_penalty(ParamStore& store, double lambda) {
  require(lambda >= 0.0, "invalid_input", "l1_penalty: negative lambda");
  if (lambda == 0.0) return 0.0;
  double penalty = 0.0;
  for (auto& e : store) {
    if (!e.weight_matrix) continue;
    for (std::size_t i = 0; i < e.size(); ++i) {
      double w = e.value[i];
      penalty += std::abs(w);
      // Subgradient 0 at w == 0.
      e.grad[i] += lambda * (w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0));
    }
  }
  return lambda * penalty;
}

void glorot_init(std::vector<double>& w, std::size_t rows, std::size_t cols,
                 RandomStream& rng) {
  w.resize(rows * cols);
  double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& v : w) v = rng.uniform(-a, a);
}

GradCheckReport grad_check(ParamStore& store,
                           const std::function<double()>& loss_fn,
                           const std::function<void()>& grad_fn,
                           RandomStream& rng, int indices_per_group, double step) {
  require(indices_per_group >= 1, "invalid_input", "grad_check: bad sample count");
  require(step > 0.0, "invalid_input", "grad_check: bad step");
  store.zero_grads();
  grad_fn();

  GradCheckReport report;
  for (std::size_t h = 0; h < store.count(); ++h) {
    // Snapshot analytic grads before FD evaluations disturb anything.
    std::vector<double> analytic = store.entry(h).grad;
    GradCheckGroup group;
    group.name = store.entry(h).name;
    std::size_t n = store.entry(h).size();
    int samples = std::min<int>(indices_per_group, static_cast<int>(n));
    for (int s = 0; s < samples; ++s) {
      std::size_t idx = n == 1 ? 0
                               : static_cast<std::size_t>(rng.uniform_int(
                                     0, static_cast<std::int64_t>(n) - 1));
      double saved = store.entry(h).value[idx];
      store.entry(h).value[idx] = saved + step;
      double up = loss_fn();
      store.entry(h).value[idx] = saved - step;
      double down = loss_fn();
      store.entry(h).value[idx] = saved;
      double fd = (up - down) / (2.0 * step);
      double an = analytic[idx];
      double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8});
      group.max_rel_err = std::max(group.max_rel_err, rel);
      ++group.checked;
    }
    report.max_rel_err = std::max(report.max_rel_err, group.max_rel_err);
    report.groups.push_back(std::move(group));
  }
  return report;
}

}  // namespace framecast::nn
