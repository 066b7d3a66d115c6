#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace framecast::stats {

// ln Gamma(x) for x > 0, Lanczos approximation (relative error ~1e-13).
double ln_gamma(double x);

// Regularized incomplete beta I_x(a, b), continued fraction evaluation.
// Domain: a > 0, b > 0, 0 <= x <= 1.
double regularized_beta(double x, double a, double b);

double normal_pdf(double z);
double normal_cdf(double z);

// Student t CDF with df > 0; two-sided tail helpers build on it.
double t_cdf(double t, double df);

// F distribution CDF with d1, d2 > 0.
double f_cdf(double x, double d1, double d2);

// CDF of the studentized range statistic with k groups and df error degrees
// of freedom, by nested Gauss-Legendre quadrature (absolute error ~<= 1e-4).
double student_range_cdf(double q, int k, double df);

// Inverse of the above in q, by bisection. p in (0, 1).
double student_range_quantile(double p, int k, double df);

// Gauss-Legendre nodes/weights on [-1, 1]; computed once per order and cached.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const QuadratureRule& gauss_legendre(int order);

struct AnovaResult {
  double f = 0.0;
  std::int64_t df_between = 0;
  std::int64_t df_within = 0;
  double p = 1.0;
  double eta_squared = 0.0;
  double ss_between = 0.0;
  double ss_within = 0.0;
};

// One-way fixed-effects ANOVA over >= 2 groups, each with >= 1 value.
// All-identical input (both sums of squares zero) is a degenerate_input
// error. SSW == 0 with SSB > 0 yields f = +inf, p = 0, eta2 = 1.
AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups);

struct TukeyPair {
  int group_a = 0;
  int group_b = 0;
  double diff = 0.0;      // mean(a) - mean(b)
  double se = 0.0;        // sqrt(MSW/2 * (1/na + 1/nb))
  double q = 0.0;         // |diff| / se
  double p = 1.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct TukeyResult {
  std::vector<TukeyPair> pairs;  // all (a, b) with a < b
  double q_critical = 0.0;
  double alpha = 0.05;
  std::int64_t df_within = 0;
  double ms_within = 0.0;
};

// Tukey HSD on the same grouping as one_way_anova; unbalanced groups use the
// Tukey-Kramer per-pair standard error. alpha in (0, 1).
TukeyResult tukey_hsd(const std::vector<std::vector<double>>& groups, double alpha = 0.05);

struct OlsResult {
  std::vector<std::string> names;
  std::vector<double> coef;
  std::vector<double> se;
  std::vector<double> t;
  std::vector<double> p;        // two-sided
  std::vector<double> ci_low;   // 95%
  std::vector<double> ci_high;
  double r_squared = 0.0;       // on centered totals
  std::size_t n = 0;
};

// Least squares via Householder QR. X is row-major n x p with n > p; the
// caller supplies every column including any intercept. Rank deficiency is a
// rank_deficient error naming the offending column.
OlsResult ols(const std::vector<double>& x, std::size_t rows, std::size_t cols,
              const std::vector<double>& y, const std::vector<std::string>& names);

struct MacroRow {
  std::string country;
  double gdp_per_capita_usd = 0.0;
  double gini = 0.0;
  double mean_floor_hz = 0.0;
};

// Country-level fit: mean floor ~ log10(GDP per capita) + Gini + intercept.
// Needs >= 3 countries with finite values.
OlsResult macro_fit(const std::vector<MacroRow>& rows);

}  // namespace framecast::stats
