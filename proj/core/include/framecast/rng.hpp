#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "framecast/error.hpp"

namespace framecast {

inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a64_u64(std::uint64_t x, std::uint64_t h = kFnvOffset) {
  for (int i = 0; i < 8; ++i) {
    h ^= (x >> (8 * i)) & 0xffu;
    h *= kFnvPrime;
  }
  return h;
}

// Deterministic random stream derived from a root seed plus a name.
// Every consumer of randomness owns a named stream, so adding a consumer
// never perturbs the draws of existing ones. All transforms are implemented
// here (not via std:: distributions) so output is identical across standard
// library implementations.
class RandomStream {
 public:
  RandomStream(std::uint64_t root_seed, std::string_view name)
      : RandomStream(fnv1a64(name, fnv1a64_u64(root_seed))) {}

  explicit RandomStream(std::uint64_t raw_seed) : seed_(raw_seed), eng_(raw_seed) {}

  // Independent child stream; does not consume from this one.
  RandomStream derive(std::string_view name) const {
    return RandomStream(fnv1a64(name, fnv1a64_u64(seed_)));
  }

  std::uint64_t next_u64() { return eng_(); }

  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive bounds, unbiased via rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    require(lo <= hi, "invalid_input", "uniform_int: lo > hi");
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next_u64());  // full range
    std::uint64_t limit = std::uint64_t(-1) - (std::uint64_t(-1) % span);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  // Box-Muller; the spare is cached, so draw order matters for reproducibility.
  double normal(double mean = 0.0, double stddev = 1.0) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return mean + stddev * r * std::cos(a);
  }

  // median = exp(mu_log); P(X <= median * exp(-z*sigma)) = Phi(-z).
  double lognormal(double mu_log, double sigma_log) {
    return std::exp(normal(mu_log, sigma_log));
  }

  template <class T>
  const T& pick(const std::vector<T>& options) {
    require(!options.empty(), "invalid_input", "pick: empty options");
    return options[static_cast<std::size_t>(
        uniform_int(0, static_cast<std::int64_t>(options.size()) - 1))];
  }

  // Index draw proportional to non-negative weights.
  std::size_t weighted_index(const std::vector<double>& w) {
    double total = 0.0;
    for (double x : w) {
      require(x >= 0.0, "invalid_input", "weighted_index: negative weight");
      total += x;
    }
    require(total > 0.0, "invalid_input", "weighted_index: zero total weight");
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      acc += w[i];
      if (u < acc) return i;
    }
    return w.size() - 1;
  }

  // Fisher-Yates.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(
          uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_ = 0;
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace framecast
