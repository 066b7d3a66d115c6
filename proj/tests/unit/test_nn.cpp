#include <doctest.h>

#include <cmath>
#include <vector>

#include <framecast/error.hpp>
#include <framecast/nn.hpp>
#include <framecast/rng.hpp>

using namespace framecast;

TEST_SUITE("nn") {

TEST_CASE("ParamStore flatten and load round-trip") {
  nn::ParamStore store;
  auto w = store.add("w", 2, 3, true);
  auto b = store.add("b", 2, 1, false);
  CHECK(store.total_size() == 8);
  for (std::size_t i = 0; i < 6; ++i) store.entry(w).value[i] = double(i) + 0.5;
  store.entry(b).value = {-1.0, 2.0};

  auto flat = store.flatten_values();
  REQUIRE(flat.size() == 8);
  CHECK(flat[0] == 0.5);
  CHECK(flat[6] == -1.0);

  nn::ParamStore other;
  other.add("w", 2, 3, true);
  other.add("b", 2, 1, false);
  other.load_values(flat);
  CHECK(other.flatten_values() == flat);

  std::vector<double> g(8, 1.0);
  other.zero_grads();
  other.add_to_grads(g, 0.25);
  CHECK(other.flatten_grads()[3] == 0.25);
  CHECK(other.find("w") != nullptr);
  CHECK(other.find("nope") == nullptr);

  std::vector<double> wrong(7, 0.0);
  CHECK_THROWS_AS(other.load_values(wrong), Error);
}

TEST_CASE("dense_forward hand example") {
  // y = W x + b with W = [[1,2],[3,4],[5,6]], x = [1,-1], b = [0.5,0,-0.5].
  std::vector<double> w = {1, 2, 3, 4, 5, 6};
  std::vector<double> b = {0.5, 0.0, -0.5};
  std::vector<double> x = {1.0, -1.0};
  std::vector<double> y(3);
  nn::dense_forward(w, b, 2, 3, x, y);
  CHECK(y[0] == doctest::Approx(-0.5));
  CHECK(y[1] == doctest::Approx(-1.0));
  CHECK(y[2] == doctest::Approx(-1.5));
}

TEST_CASE("dense_backward matches the transpose computation") {
  std::vector<double> w = {1, 2, 3, 4, 5, 6};
  std::vector<double> x = {0.5, -1.5};
  std::vector<double> dy = {1.0, 0.0, -2.0};
  std::vector<double> gw(6, 0.0), gb(3, 0.0), dx(2, 0.0);
  nn::dense_backward(w, 2, 3, x, dy, gw, gb, dx, 1.0);
  // dW = dy x^T.
  CHECK(gw[0] == doctest::Approx(0.5));
  CHECK(gw[1] == doctest::Approx(-1.5));
  CHECK(gw[4] == doctest::Approx(-1.0));
  CHECK(gw[5] == doctest::Approx(3.0));
  CHECK(gb[0] == doctest::Approx(1.0));
  CHECK(gb[2] == doctest::Approx(-2.0));
  // dx = W^T dy.
  CHECK(dx[0] == doctest::Approx(1.0 * 1 + 0.0 * 3 - 2.0 * 5));
  CHECK(dx[1] == doctest::Approx(1.0 * 2 + 0.0 * 4 - 2.0 * 6));
}

TEST_CASE("relu and its backward mask") {
  std::vector<double> x = {-1.0, 0.0, 2.0};
  nn::relu_inplace(x);
  CHECK(x == std::vector<double>{0.0, 0.0, 2.0});
  std::vector<double> d = {5.0, 5.0, 5.0};
  nn::relu_backward_inplace(x, d);
  CHECK(d == std::vector<double>{0.0, 0.0, 5.0});
}

TEST_CASE("softmax sums to one and ignores translation") {
  std::vector<double> z = {1.0, 2.0, 3.0};
  auto p = nn::softmax(z);
  double sum = p[0] + p[1] + p[2];
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> zc = {101.0, 102.0, 103.0};
  auto pc = nn::softmax(zc);
  for (int i = 0; i < 3; ++i) CHECK(p[size_t(i)] == doctest::Approx(pc[size_t(i)]).epsilon(1e-12));
  // Extreme logits stay finite.
  auto pe = nn::softmax(std::vector<double>{1000.0, 0.0});
  CHECK(pe[0] == doctest::Approx(1.0));
}

TEST_CASE("softce pinned values and gradient") {
  // Uniform target, zero logits, K = 5.
  std::vector<double> z(5, 0.0);
  std::vector<double> t(5, 0.2);
  double loss = nn::softce_loss(z, t, {}, 1.0);
  CHECK(loss == doctest::Approx(std::log(5.0)).epsilon(1e-12));

  // Gradient = softmax(z) - t; zero when the prediction equals the target.
  std::vector<double> z2 = {0.1, -0.7, 1.3};
  auto sm = nn::softmax(z2);
  std::vector<double> g(3, 0.0);
  nn::softce_loss(z2, sm, g, 1.0);
  for (double v : g) CHECK(v == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  std::vector<double> g2(3, 0.0);
  std::vector<double> onehot = {0.0, 1.0, 0.0};
  nn::softce_loss(z2, onehot, g2, 2.0);  // scale folds into the gradient
  CHECK(g2[0] == doctest::Approx(2.0 * sm[0]).epsilon(1e-12));
  CHECK(g2[1] == doctest::Approx(2.0 * (sm[1] - 1.0)).epsilon(1e-12));

  // Loss at the target equals the target's entropy.
  double at_target = nn::softce_loss(z2, sm, {}, 1.0);
  double entropy = 0.0;
  for (double p : sm) entropy -= p * std::log(p);
  CHECK(at_target == doctest::Approx(entropy).epsilon(1e-12));

  std::vector<double> not_dist = {0.5, 0.2, 0.1};
  CHECK_THROWS_AS(nn::softce_loss(z2, not_dist, {}, 1.0), Error);
}

TEST_CASE("adam first step magnitude") {
  nn::Adam opt;  // lr 1e-3
  std::vector<double> p = {1.0};
  std::vector<double> g = {1.0};
  opt.step(p, g);
  // mhat = 1, vhat = 1 at t = 1: delta = -lr / (1 + eps).
  CHECK(p[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-10));

  nn::Adam opt2;
  std::vector<double> q = {1.0};
  std::vector<double> gneg = {-0.004};
  opt2.step(q, gneg);
  CHECK(q[0] == doctest::Approx(1.0 + 1e-3).epsilon(1e-6));  // sign-like first step
}

TEST_CASE("adam matches an independent scalar trace") {
  // Reference recursion written out longhand.
  const double lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double m = 0.0, v = 0.0, x = 0.7;
  std::vector<double> grads = {0.3, -1.2, 0.05, 0.9, -0.4, 2.0};
  nn::Adam opt;
  std::vector<double> p = {0.7};
  for (std::size_t t = 1; t <= grads.size(); ++t) {
    double g = grads[t - 1];
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    double mhat = m / (1.0 - std::pow(b1, double(t)));
    double vhat = v / (1.0 - std::pow(b2, double(t)));
    x -= lr * mhat / (std::sqrt(vhat) + eps);
    std::vector<double> gv = {g};
    opt.step(p, gv);
    CHECK(p[0] == doctest::Approx(x).epsilon(1e-14));
  }
}

TEST_CASE("adam edge cases") {
  nn::Adam opt;
  std::vector<double> p = {2.0, -3.0};
  std::vector<double> zero = {0.0, 0.0};
  opt.step(p, zero);
  CHECK(p[0] == 2.0);
  CHECK(p[1] == -3.0);

  nn::AdamConfig cfg;
  cfg.lr = 0.0;
  nn::Adam frozen(cfg);
  std::vector<double> q = {1.5};
  std::vector<double> g = {10.0};
  for (int i = 0; i < 5; ++i) frozen.step(q, g);
  CHECK(q[0] == 1.5);

  std::vector<double> bad = {std::nan("")};
  CHECK_THROWS_AS(opt.step(p, bad), Error);
}

TEST_CASE("l1_penalty value, gradient, and exemptions") {
  nn::ParamStore store;
  auto w = store.add("w", 1, 2, true);
  auto b = store.add("b", 2, 1, false);
  store.entry(w).value = {1.0, -2.0};
  store.entry(b).value = {4.0, -4.0};
  store.zero_grads();

  double pen = nn::l1_penalty(store, 0.5);
  CHECK(pen == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(store.entry(w).grad[0] == doctest::Approx(0.5));
  CHECK(store.entry(w).grad[1] == doctest::Approx(-0.5));
  // Non-matrix arrays are exempt.
  CHECK(store.entry(b).grad[0] == 0.0);
  CHECK(nn::l1_penalty(store, 0.0) == 0.0);

  // Finite-difference check away from zero.
  double lambda = 0.3, h = 1e-6;
  store.entry(w).value[0] = 0.8;
  double base = lambda * (std::abs(0.8) + std::abs(-2.0));
  store.entry(w).value[0] = 0.8 + h;
  double up = lambda * (std::abs(0.8 + h) + std::abs(-2.0));
  store.entry(w).value[0] = 0.8 - h;
  double dn = lambda * (std::abs(0.8 - h) + std::abs(-2.0));
  store.entry(w).value[0] = 0.8;
  store.zero_grads();
  nn::l1_penalty(store, lambda);
  CHECK(store.entry(w).grad[0] == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-6));
  CHECK(base == doctest::Approx(lambda * 2.8));

  // Subgradient at zero is zero.
  store.entry(w).value[0] = 0.0;
  store.zero_grads();
  nn::l1_penalty(store, lambda);
  CHECK(store.entry(w).grad[0] == 0.0);
}

TEST_CASE("grad_check exact on a quadratic objective") {
  // loss = sum_i (w_i - c_i)^2: linear gradient, so central differences are
  // exact up to rounding.
  nn::ParamStore store;
  auto w = store.add("w", 3, 1, false);
  store.entry(w).value = {0.3, -1.1, 2.0};
  std::vector<double> c = {1.0, 0.5, -0.25};

  auto loss_fn = [&]() {
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
      double d = store.entry(w).value[size_t(i)] - c[size_t(i)];
      acc += d * d;
    }
    return acc;
  };
  auto grad_fn = [&]() {
    store.zero_grads();
    for (int i = 0; i < 3; ++i)
      store.entry(w).grad[size_t(i)] =
          2.0 * (store.entry(w).value[size_t(i)] - c[size_t(i)]);
  };
  RandomStream rng(1, "gc");
  auto report = nn::grad_check(store, loss_fn, grad_fn, rng, 3);
  CHECK(report.max_rel_err < 1e-9);
  REQUIRE(report.groups.size() == 1);
  CHECK(report.groups[0].checked == 3);
}

TEST_CASE("grad_check catches a corrupted gradient") {
  nn::ParamStore store;
  auto w = store.add("w", 2, 1, false);
  store.entry(w).value = {0.4, -0.9};
  auto loss_fn = [&]() {
    double a = store.entry(w).value[0], b = store.entry(w).value[1];
    return a * a + 3.0 * b * b;
  };
  auto grad_fn = [&]() {
    store.zero_grads();
    store.entry(w).grad[0] = 2.0 * store.entry(w).value[0] * 1.05;  // off by 5%
    store.entry(w).grad[1] = 6.0 * store.entry(w).value[1];
  };
  RandomStream rng(2, "gc");
  auto report = nn::grad_check(store, loss_fn, grad_fn, rng, 2);
  CHECK(report.max_rel_err > 1e-3);
}

TEST_CASE("grad_check on a random two-layer net with soft targets") {
  // 4 -> 6 relu -> 3 logits, soft-target cross-entropy; rel err < 1e-4.
  nn::ParamStore store;
  auto w1 = store.add("w1", 6, 4, true);
  auto b1 = store.add("b1", 6, 1, false);
  auto w2 = store.add("w2", 3, 6, true);
  auto b2 = store.add("b2", 3, 1, false);
  RandomStream init(5, "init");
  nn::glorot_init(store.entry(w1).value, 6, 4, init);
  nn::glorot_init(store.entry(w2).value, 3, 6, init);
  for (auto& v : store.entry(b1).value) v = init.uniform(-0.1, 0.1);
  for (auto& v : store.entry(b2).value) v = init.uniform(-0.1, 0.1);

  std::vector<double> x = {0.9, -0.3, 0.4, -1.2};
  std::vector<double> target = {0.2, 0.5, 0.3};

  auto forward = [&](std::vector<double>* h_out, std::vector<double>* z_out) {
    std::vector<double> h(6), z(3);
    nn::dense_forward(store.entry(w1).value, store.entry(b1).value, 4, 6, x, h);
    nn::relu_inplace(h);
    nn::dense_forward(store.entry(w2).value, store.entry(b2).value, 6, 3, h, z);
    if (h_out) *h_out = h;
    if (z_out) *z_out = z;
    return nn::softce_loss(z, target, {}, 1.0);
  };
  auto loss_fn = [&]() { return forward(nullptr, nullptr); };
  auto grad_fn = [&]() {
    store.zero_grads();
    std::vector<double> h, z;
    forward(&h, &z);
    std::vector<double> dz(3, 0.0);
    nn::softce_loss(z, target, dz, 1.0);
    std::vector<double> dh(6, 0.0);
    nn::dense_backward(store.entry(w2).value, 6, 3, h, dz, store.entry(w2).grad,
                       store.entry(b2).grad, dh, 1.0);
    nn::relu_backward_inplace(h, dh);
    nn::dense_backward(store.entry(w1).value, 4, 6, x, dh, store.entry(w1).grad,
                       store.entry(b1).grad, {}, 1.0);
  };
  RandomStream rng(6, "gc");
  auto report = nn::grad_check(store, loss_fn, grad_fn, rng, 6);
  CHECK(report.max_rel_err < 1e-4);
  CHECK(report.groups.size() == 4);
}

TEST_CASE("glorot_init stays within the fan bound") {
  std::vector<double> w;
  RandomStream rng(8, "gl");
  nn::glorot_init(w, 64, 32, rng);
  REQUIRE(w.size() == 64 * 32);
  double bound = std::sqrt(6.0 / (64.0 + 32.0));
  double hi = 0.0;
  for (double v : w) {
    CHECK(std::abs(v) <= bound);
    hi = std::max(hi, std::abs(v));
  }
  CHECK(hi > 0.8 * bound);  // actually spreads over the range
}

}  // TEST_SUITE
