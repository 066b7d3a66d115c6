#include <doctest.h>

#include <cmath>
#include <vector>

#include <framecast/error.hpp>
#include <framecast/rng.hpp>
#include <framecast/stats.hpp>

using namespace framecast;

TEST_SUITE("stats") {

// Reference values below were computed once with an independent statistics
// package and frozen here as literals.

TEST_CASE("ln_gamma reference values") {
  CHECK(stats::ln_gamma(0.5) == doctest::Approx(0.5723649429247).epsilon(1e-12));
  CHECK(stats::ln_gamma(1.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(stats::ln_gamma(2.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(stats::ln_gamma(12.3) == doctest::Approx(18.238983407092245).epsilon(1e-13));
  // Factorial identity.
  CHECK(stats::ln_gamma(6.0) == doctest::Approx(std::log(120.0)).epsilon(1e-13));
}

TEST_CASE("regularized_beta reference values") {
  CHECK(stats::regularized_beta(4.0 / 17.5, 2.0, 0.5) ==
        doctest::Approx(0.021311641128756713).epsilon(1e-11));
  CHECK(stats::regularized_beta(0.7, 3.5, 1.2) ==
        doctest::Approx(0.3523815711382463).epsilon(1e-11));
  CHECK(stats::regularized_beta(0.0, 2.0, 3.0) == 0.0);
  CHECK(stats::regularized_beta(1.0, 2.0, 3.0) == 1.0);
  // Symmetry identity I_x(a,b) = 1 - I_{1-x}(b,a).
  CHECK(stats::regularized_beta(0.3, 2.5, 4.5) ==
        doctest::Approx(1.0 - stats::regularized_beta(0.7, 4.5, 2.5)).epsilon(1e-12));
}

TEST_CASE("normal_cdf basics") {
  CHECK(stats::normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(stats::normal_cdf(1.6448536269514722) == doctest::Approx(0.95).epsilon(1e-9));
  CHECK(stats::normal_cdf(-1.96) == doctest::Approx(0.024997895148220435).epsilon(1e-9));
}

TEST_CASE("t_cdf reference values") {
  CHECK(stats::t_cdf(1.3, 7) == doctest::Approx(0.8826160823038114).epsilon(1e-11));
  CHECK(stats::t_cdf(-2.1, 23) == doctest::Approx(0.023448756073974904).epsilon(1e-11));
  CHECK(stats::t_cdf(0.0, 5) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("f_cdf reference values") {
  CHECK(stats::f_cdf(2.7, 3, 17) == doctest::Approx(0.9217246733762305).epsilon(1e-11));
  CHECK(stats::f_cdf(0.4, 8, 2) == doctest::Approx(0.14341234550610976).epsilon(1e-11));
  CHECK(stats::f_cdf(13.5, 1, 4) == doctest::Approx(1.0 - 0.02131164112875672).epsilon(1e-10));
}

TEST_CASE("f_cdf Monte Carlo oracle") {
  // Empirical F(3, 17) distribution from normal draws.
  RandomStream rng(99, "f.mc");
  const int n = 200000;
  int below = 0;
  for (int i = 0; i < n; ++i) {
    double num = 0.0, den = 0.0;
    for (int j = 0; j < 3; ++j) {
      double z = rng.normal();
      num += z * z;
    }
    for (int j = 0; j < 17; ++j) {
      double z = rng.normal();
      den += z * z;
    }
    double f = (num / 3.0) / (den / 17.0);
    below += f <= 2.7;
  }
  CHECK(double(below) / n == doctest::Approx(stats::f_cdf(2.7, 3, 17)).scale(1.0).epsilon(2e-3));
}

TEST_CASE("t_cdf Monte Carlo oracle") {
  RandomStream rng(99, "t.mc");
  const int n = 200000;
  int below = 0;
  for (int i = 0; i < n; ++i) {
    double z = rng.normal();
    double chi = 0.0;
    for (int j = 0; j < 7; ++j) {
      double u = rng.normal();
      chi += u * u;
    }
    below += z / std::sqrt(chi / 7.0) <= 1.3;
  }
  CHECK(double(below) / n == doctest::Approx(stats::t_cdf(1.3, 7)).scale(1.0).epsilon(2e-3));
}

TEST_CASE("student_range_cdf reference values") {
  CHECK(stats::student_range_cdf(3.88, 3, 10) ==
        doctest::Approx(0.9501860942289231).epsilon(1e-6));
  CHECK(stats::student_range_cdf(3.0, 4, 20) ==
        doctest::Approx(0.8195265485308926).epsilon(1e-6));
  CHECK(stats::student_range_cdf(2.5, 2, 5) ==
        doctest::Approx(0.8626578735659658).epsilon(1e-6));
  CHECK(stats::student_range_cdf(4.2, 6, 60) ==
        doctest::Approx(0.9531958098250104).epsilon(1e-6));
  CHECK(stats::student_range_cdf(3.5, 3, 1000) ==
        doctest::Approx(0.9640529602207105).epsilon(1e-6));
}

TEST_CASE("student_range_cdf Monte Carlo oracle") {
  // Range of k=3 normals over sqrt(chi2_10 / 10).
  RandomStream rng(7, "q.mc");
  const int n = 200000;
  int below = 0;
  for (int i = 0; i < n; ++i) {
    double lo = 1e300, hi = -1e300;
    for (int j = 0; j < 3; ++j) {
      double z = rng.normal();
      lo = std::min(lo, z);
      hi = std::max(hi, z);
    }
    double chi = 0.0;
    for (int j = 0; j < 10; ++j) {
      double u = rng.normal();
      chi += u * u;
    }
    below += (hi - lo) / std::sqrt(chi / 10.0) <= 3.88;
  }
  CHECK(double(below) / n ==
        doctest::Approx(stats::student_range_cdf(3.88, 3, 10)).scale(1.0).epsilon(1e-2));
}

TEST_CASE("student_range_quantile inverts the cdf") {
  double q = stats::student_range_quantile(0.95, 3, 10);
  CHECK(q == doctest::Approx(3.876776750013158).epsilon(1e-5));
  CHECK(stats::student_range_cdf(q, 3, 10) == doctest::Approx(0.95).epsilon(1e-9));
  double q2 = stats::student_range_quantile(0.99, 5, 30);
  CHECK(stats::student_range_cdf(q2, 5, 30) == doctest::Approx(0.99).epsilon(1e-9));
}

TEST_CASE("one_way_anova hand example") {
  // Groups {1,2,3} and {4,5,6}: SSB = 13.5, SSW = 4, F = 13.5.
  auto r = stats::one_way_anova({{1, 2, 3}, {4, 5, 6}});
  CHECK(r.f == doctest::Approx(13.5).epsilon(1e-12));
  CHECK(r.df_between == 1);
  CHECK(r.df_within == 4);
  CHECK(r.eta_squared == doctest::Approx(13.5 / 17.5).epsilon(1e-12));
  CHECK(r.eta_squared == doctest::Approx(0.7714285714285715).epsilon(1e-9));
  CHECK(r.p == doctest::Approx(0.02131164112875672).epsilon(1e-9));
  CHECK(r.ss_between == doctest::Approx(13.5).epsilon(1e-12));
  CHECK(r.ss_within == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("one_way_anova null case keeps F near 1 on average") {
  // No planted effect: p should be spread out, not extreme.
  RandomStream rng(3, "anova.null");
  int rejections = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    std::vector<std::vector<double>> groups(3);
    for (auto& g : groups)
      for (int i = 0; i < 8; ++i) g.push_back(rng.normal());
    auto r = stats::one_way_anova(groups);
    rejections += r.p < 0.05;
  }
  // Binomial(200, 0.05): mean 10, sd ~3.1.
  CHECK(rejections >= 1);
  CHECK(rejections <= 25);
}

TEST_CASE("one_way_anova degenerate and error cases") {
  CHECK_THROWS_AS(stats::one_way_anova({{1.0, 1.0}, {1.0}}), Error);  // all identical
  CHECK_THROWS_AS(stats::one_way_anova({{1.0, 2.0}}), Error);        // one group
  // Zero within-group variance with distinct means: F explodes.
  auto r = stats::one_way_anova({{2.0, 2.0}, {5.0, 5.0}});
  CHECK(std::isinf(r.f));
  CHECK(r.p == 0.0);
  CHECK(r.eta_squared == 1.0);
}

TEST_CASE("tukey_hsd identical groups give p = 1") {
  auto r = stats::tukey_hsd({{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}});
  REQUIRE(r.pairs.size() == 3);
  for (const auto& pair : r.pairs) {
    CHECK(pair.diff == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(pair.p == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("tukey_hsd flags the planted outlier group") {
  // Two groups share a mean; the third sits far away.
  RandomStream rng(21, "tukey");
  std::vector<std::vector<double>> groups(3);
  for (int i = 0; i < 12; ++i) {
    groups[0].push_back(rng.normal(0.0, 1.0));
    groups[1].push_back(rng.normal(0.0, 1.0));
    groups[2].push_back(rng.normal(8.0, 1.0));
  }
  auto r = stats::tukey_hsd(groups, 0.05);
  REQUIRE(r.pairs.size() == 3);
  for (const auto& pair : r.pairs) {
    bool involves_outlier = pair.group_a == 2 || pair.group_b == 2;
    if (involves_outlier) {
      CHECK(pair.p < 0.001);
      // The confidence interval excludes zero.
      CHECK((pair.ci_low > 0.0 || pair.ci_high < 0.0));
    } else {
      CHECK(pair.p > 0.05);
      CHECK(pair.ci_low < 0.0);
      CHECK(pair.ci_high > 0.0);
    }
  }
  CHECK(r.q_critical == doctest::Approx(stats::student_range_quantile(0.95, 3, 33)).epsilon(1e-9));
}

TEST_CASE("ols recovers planted coefficients exactly on noiseless data") {
  // y = 3 + 2 a - 0.5 b over a small grid; exact fit, r^2 = 1.
  std::vector<double> x, y;
  std::size_t n = 0;
  for (double a = 0; a < 4; ++a) {
    for (double b = 0; b < 3; ++b) {
      x.push_back(1.0);
      x.push_back(a);
      x.push_back(b);
      y.push_back(3.0 + 2.0 * a - 0.5 * b);
      ++n;
    }
  }
  auto r = stats::ols(x, n, 3, y, {"intercept", "a", "b"});
  CHECK(r.coef[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(r.coef[1] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(r.coef[2] == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(r.r_squared == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("ols t and p match the textbook computation") {
  // Small fixed dataset, reference values computed independently.
  std::vector<double> x = {
      1, 1.0, 1, 2.0, 1, 3.0, 1, 4.0, 1, 5.0, 1, 6.0,
  };
  std::vector<double> y = {1.1, 1.9, 3.3, 3.8, 5.3, 5.9};
  auto r = stats::ols(x, 6, 2, y, {"intercept", "slope"});
  CHECK(r.coef[1] == doctest::Approx(0.9914285714285714).epsilon(1e-12));
  CHECK(r.coef[0] == doctest::Approx(0.08).scale(1.0).epsilon(1e-10));
  CHECK(r.se[1] == doctest::Approx(0.057782138331876162).epsilon(1e-9));
  CHECK(r.t[1] == doctest::Approx(17.158045722264998).epsilon(1e-9));
  CHECK(r.p[1] == doctest::Approx(6.7687553239416414e-05).epsilon(1e-6));
  CHECK(r.ci_high[1] - r.coef[1] == doctest::Approx(0.16042893513939968).epsilon(1e-8));
  CHECK(r.r_squared == doctest::Approx(0.98659510836166986).epsilon(1e-9));
}

TEST_CASE("ols rejects rank-deficient designs") {
  // Second column is twice the first.
  std::vector<double> x = {1, 2, 2, 4, 3, 6, 4, 8};
  std::vector<double> y = {1, 2, 3, 4};
  CHECK_THROWS_AS(stats::ols(x, 4, 2, y, {"a", "b"}), Error);
}

TEST_CASE("macro_fit recovers planted country coefficients exactly") {
  // mean floor = 12.84 log10(gdp) - 0.42 gini + 6.84, zero noise.
  std::vector<stats::MacroRow> rows;
  double gdps[] = {2000, 8000, 20000, 45000, 60000, 12000};
  double ginis[] = {42, 35, 31, 28, 25, 47};
  for (int i = 0; i < 6; ++i) {
    stats::MacroRow r;
    r.country = "c" + std::to_string(i);
    r.gdp_per_capita_usd = gdps[i];
    r.gini = ginis[i];
    r.mean_floor_hz = 12.84 * std::log10(gdps[i]) - 0.42 * ginis[i] + 6.84;
    rows.push_back(r);
  }
  auto fit = stats::macro_fit(rows);
  REQUIRE(fit.coef.size() == 3);
  CHECK(fit.coef[0] == doctest::Approx(12.84).epsilon(1e-9));
  CHECK(fit.coef[1] == doctest::Approx(-0.42).epsilon(1e-9));
  CHECK(fit.coef[2] == doctest::Approx(6.84).epsilon(1e-9));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(stats::macro_fit({rows[0], rows[1]}), Error);
}

TEST_CASE("gauss_legendre integrates polynomials exactly") {
  const auto& rule = stats::gauss_legendre(16);
  // Degree-9 polynomial over [-1, 1]: odd terms vanish; x^8 integrates to 2/9.
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    double x = rule.nodes[i];
    acc += rule.weights[i] * (std::pow(x, 8) + 3.0 * std::pow(x, 9));
  }
  CHECK(acc == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
}

}  // TEST_SUITE
