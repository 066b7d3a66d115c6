#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <framecast/error.hpp>
#include <framecast/rng.hpp>

using namespace framecast;

TEST_SUITE("rng") {

TEST_CASE("fnv1a64 reference value") {
  // Published FNV-1a test vector.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("same seed and name reproduce the stream") {
  RandomStream a(7, "alpha");
  RandomStream b(7, "alpha");
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different names give different streams") {
  RandomStream a(7, "alpha");
  RandomStream b(7, "beta");
  int same = 0;
  for (int i = 0; i < 64; ++i) same += a.next_u64() == b.next_u64();
  CHECK(same == 0);
}

TEST_CASE("derive is deterministic and independent of parent position") {
  RandomStream a(3, "root");
  RandomStream d1 = a.derive("child");
  a.next_u64();  // advancing the parent must not change future derivations
  RandomStream d2 = RandomStream(3, "root").derive("child");
  for (int i = 0; i < 16; ++i) CHECK(d1.next_u64() == d2.next_u64());
}

TEST_CASE("uniform stays in [0,1) and covers the range") {
  RandomStream r(11, "u");
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("uniform_int bounds inclusive") {
  RandomStream r(11, "i");
  bool saw_lo = false, saw_hi = false;
  for (int i = 0; i < 2000; ++i) {
    auto v = r.uniform_int(-2, 3);
    CHECK(v >= -2);
    CHECK(v <= 3);
    saw_lo |= v == -2;
    saw_hi |= v == 3;
  }
  CHECK(saw_lo);
  CHECK(saw_hi);
  CHECK(r.uniform_int(5, 5) == 5);
  CHECK_THROWS_AS(r.uniform_int(2, 1), Error);
}

TEST_CASE("normal moments") {
  RandomStream r(5, "n");
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = r.normal(2.0, 3.0);
    sum += x;
    sq += x * x;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(mean == doctest::Approx(2.0).epsilon(0.02));
  CHECK(std::sqrt(var) == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("lognormal median") {
  RandomStream r(5, "ln");
  const int n = 100001;
  std::vector<double> xs(n);
  for (auto& x : xs) x = r.lognormal(std::log(50.0), 0.25);
  std::nth_element(xs.begin(), xs.begin() + n / 2, xs.end());
  CHECK(xs[n / 2] == doctest::Approx(50.0).epsilon(0.02));
}

TEST_CASE("shuffle is a permutation and seed-stable") {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  RandomStream r1(9, "s");
  RandomStream r2(9, "s");
  r1.shuffle(v);
  r2.shuffle(w);
  CHECK(v == w);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[size_t(i)] == i);
}

TEST_CASE("weighted_index respects weights") {
  RandomStream r(13, "w");
  std::vector<double> w = {0.0, 1.0, 3.0};
  std::array<int, 3> hits{};
  for (int i = 0; i < 40000; ++i) ++hits[r.weighted_index(w)];
  CHECK(hits[0] == 0);
  CHECK(double(hits[2]) / double(hits[1]) == doctest::Approx(3.0).epsilon(0.08));
  CHECK_THROWS_AS(r.weighted_index({0.0, 0.0}), Error);
  CHECK_THROWS_AS(r.weighted_index({-1.0, 2.0}), Error);
}

TEST_CASE("pick covers options") {
  RandomStream r(17, "p");
  std::vector<std::string> opts = {"x", "y", "z"};
  std::array<int, 3> hits{};
  for (int i = 0; i < 3000; ++i) {
    const auto& s = r.pick(opts);
    if (s == "x") ++hits[0];
    if (s == "y") ++hits[1];
    if (s == "z") ++hits[2];
  }
  CHECK(hits[0] > 0);
  CHECK(hits[1] > 0);
  CHECK(hits[2] > 0);
}

}  // TEST_SUITE
