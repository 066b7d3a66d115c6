#include "framecast/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "framecast/error.hpp"

namespace framecast::stats {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

double ln_gamma(double x) {
  require(x > 0.0 && std::isfinite(x), "invalid_input", "ln_gamma: x must be > 0");
  // Lanczos, g = 7, 9 terms.
  static const double c[9] = {
      0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,    12.507343278686905,
      -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // Reflection keeps the Lanczos sum in its accurate range.
    return std::log(kPi / std::sin(kPi * x)) - ln_gamma(1.0 - x);
  }
  double z = x - 1.0;
  double sum = c[0];
  for (int i = 1; i < 9; ++i) sum += c[i] / (z + i);
  double t = z + 7.5;
  return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(sum);
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double x, double a, double b) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  fail("invalid_input", "regularized_beta: continued fraction did not converge");
}

}  // namespace

double regularized_beta(double x, double a, double b) {
  require(a > 0.0 && b > 0.0, "invalid_input", "regularized_beta: a, b must be > 0");
  require(x >= 0.0 && x <= 1.0, "invalid_input", "regularized_beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  double ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(x, a, b) / a;
  }
  return 1.0 - front * beta_cf(1.0 - x, b, a) / b;
}

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
}

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double t_cdf(double t, double df) {
  require(df > 0.0, "invalid_input", "t_cdf: df must be > 0");
  if (t == 0.0) return 0.5;
  double x = df / (df + t * t);
  double tail = 0.5 * regularized_beta(x, 0.5 * df, 0.5);
  return t > 0.0 ? 1.0 - tail : tail;
}

double f_cdf(double x, double d1, double d2) {
  require(d1 > 0.0 && d2 > 0.0, "invalid_input", "f_cdf: degrees of freedom must be > 0");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return regularized_beta(d1 * x / (d1 * x + d2), 0.5 * d1, 0.5 * d2);
}

const QuadratureRule& gauss_legendre(int order) {
  require(order >= 2 && order <= 256, "invalid_input", "gauss_legendre: bad order");
  static std::map<int, QuadratureRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev-based initial guess, refined by Newton on P_n.
    double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < order; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = order * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

namespace {

// Integrates fn over [lo, hi] split into `panels` equal panels.
template <class F>
double integrate_panels(double lo, double hi, int panels, int order, F&& fn) {
  const QuadratureRule& rule = gauss_legendre(order);
  double total = 0.0;
  double width = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    double a = lo + p * width;
    double half = 0.5 * width;
    double mid = a + half;
    double acc = 0.0;
    for (int i = 0; i < order; ++i) {
      acc += rule.weights[i] * fn(mid + half * rule.nodes[i]);
    }
    total += acc * half;
  }
  return total;
}

// P(range of k iid standard normals <= u).
double normal_range_cdf(double u, int k) {
  if (u <= 0.0) return 0.0;
  auto integrand = [u, k](double z) {
    double span = normal_cdf(z) - normal_cdf(z - u);
    if (span <= 0.0) return 0.0;
    return normal_pdf(z) * std::pow(span, k - 1);
  };
  double hi = 4.0 + (u < 8.0 ? u : 8.0);
  return static_cast<double>(k) * integrate_panels(-8.0, hi, 10, 32, integrand);
}

}  // namespace

double student_range_cdf(double q, int k, double df) {
  require(k >= 2, "invalid_input", "student_range_cdf: k must be >= 2");
  require(df >= 1.0, "invalid_input", "student_range_cdf: df must be >= 1");
  if (q <= 0.0) return 0.0;
  if (df > 2e5) return normal_range_cdf(q, k);  // scale factor is 1 to ~1e-5 here

  // Outer integral over s = sqrt(chi2_df / df); density evaluated in log space.
  double ln_norm = std::log(2.0) + 0.5 * df * std::log(0.5 * df) - ln_gamma(0.5 * df);
  auto s_density = [&](double s) {
    if (s <= 0.0) return 0.0;
    return std::exp(ln_norm + (df - 1.0) * std::log(s) - 0.5 * df * s * s);
  };
  double sd = 1.0 / std::sqrt(2.0 * df);
  double lo = std::max(0.0, 1.0 - 16.0 * sd - 8.0 / df);
  double hi = 1.0 + 16.0 * sd + std::sqrt(120.0 / df);
  auto integrand = [&](double s) { return s_density(s) * normal_range_cdf(q * s, k); };
  double v = integrate_panels(lo, hi, 16, 40, integrand);
  return std::min(1.0, std::max(0.0, v));
}

double student_range_quantile(double p, int k, double df) {
  require(p > 0.0 && p < 1.0, "invalid_input", "student_range_quantile: p outside (0, 1)");
  double lo = 0.0, hi = 4.0;
  while (student_range_cdf(hi, k, df) < p) {
    hi *= 2.0;
    require(hi < 1e6, "invalid_input", "student_range_quantile: no bracket");
  }
  for (int i = 0; i < 80; ++i) {
    double mid = 0.5 * (lo + hi);
    if (student_range_cdf(mid, k, df) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-8 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

namespace {

struct GroupStats {
  std::vector<double> means;
  std::vector<std::size_t> sizes;
  double grand_mean = 0.0;
  double ssb = 0.0;
  double ssw = 0.0;
  std::size_t n_total = 0;
};

GroupStats group_stats(const std::vector<std::vector<double>>& groups) {
  require(groups.size() >= 2, "degenerate_input", "anova: needs at least 2 groups");
  GroupStats g;
  double total_sum = 0.0;
  for (const auto& grp : groups) {
    require(!grp.empty(), "degenerate_input", "anova: empty group");
    double sum = 0.0;
    for (double v : grp) {
      require(std::isfinite(v), "invalid_input", "anova: non-finite value");
      sum += v;
    }
    g.means.push_back(sum / static_cast<double>(grp.size()));
    g.sizes.push_back(grp.size());
    g.n_total += grp.size();
    total_sum += sum;
  }
  g.grand_mean = total_sum / static_cast<double>(g.n_total);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    double d = g.means[i] - g.grand_mean;
    g.ssb += static_cast<double>(g.sizes[i]) * d * d;
    for (double v : groups[i]) {
      double e = v - g.means[i];
      g.ssw += e * e;
    }
  }
  return g;
}

}  // namespace

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
  GroupStats g = group_stats(groups);
  AnovaResult r;
  r.df_between = static_cast<std::int64_t>(groups.size()) - 1;
  r.df_within = static_cast<std::int64_t>(g.n_total) - static_cast<std::int64_t>(groups.size());
  require(r.df_within >= 1, "degenerate_input", "anova: no within-group degrees of freedom");
  r.ss_between = g.ssb;
  r.ss_within = g.ssw;
  require(g.ssb > 0.0 || g.ssw > 0.0, "degenerate_input",
          "anova: all values identical");
  r.eta_squared = g.ssb / (g.ssb + g.ssw);
  if (g.ssw == 0.0) {
    r.f = std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.f = (g.ssb / static_cast<double>(r.df_between)) /
        (g.ssw / static_cast<double>(r.df_within));
  r.p = 1.0 - f_cdf(r.f, static_cast<double>(r.df_between),
                    static_cast<double>(r.df_within));
  return r;
}

TukeyResult tukey_hsd(const std::vector<std::vector<double>>& groups, double alpha) {
  require(alpha > 0.0 && alpha < 1.0, "invalid_input", "tukey_hsd: alpha outside (0, 1)");
  GroupStats g = group_stats(groups);
  std::int64_t df_within =
      static_cast<std::int64_t>(g.n_total) - static_cast<std::int64_t>(groups.size());
  require(df_within >= 1, "degenerate_input", "tukey_hsd: no within-group degrees of freedom");
  require(g.ssw > 0.0, "degenerate_input", "tukey_hsd: zero within-group variance");
  TukeyResult res;
  res.alpha = alpha;
  res.df_within = df_within;
  res.ms_within = g.ssw / static_cast<double>(df_within);
  int k = static_cast<int>(groups.size());
  res.q_critical = student_range_quantile(1.0 - alpha, k, static_cast<double>(df_within));
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      TukeyPair pr;
      pr.group_a = a;
      pr.group_b = b;
      pr.diff = g.means[a] - g.means[b];
      // Tukey-Kramer: harmonic pair size absorbs imbalance.
      pr.se = std::sqrt(0.5 * res.ms_within *
                        (1.0 / static_cast<double>(g.sizes[a]) +
                         1.0 / static_cast<double>(g.sizes[b])));
      pr.q = std::abs(pr.diff) / pr.se;
      pr.p = 1.0 - student_range_cdf(pr.q, k, static_cast<double>(df_within));
      pr.ci_low = pr.diff - res.q_critical * pr.se;
      pr.ci_high = pr.diff + res.q_critical * pr.se;
      res.pairs.push_back(pr);
    }
  }
  return res;
}

OlsResult ols(const std::vector<double>& x, std::size_t rows, std::size_t cols,
              const std::vector<double>& y, const std::vector<std::string>& names) {
  require(cols >= 1, "invalid_input", "ols: no columns");
  require(rows > cols, "invalid_input", "ols: needs more rows than columns");
  require(x.size() == rows * cols, "shape_mismatch", "ols: X size mismatch");
  require(y.size() == rows, "shape_mismatch", "ols: y size mismatch");
  require(names.size() == cols, "shape_mismatch", "ols: names size mismatch");
  for (double v : x) require(std::isfinite(v), "invalid_input", "ols: non-finite X");
  for (double v : y) require(std::isfinite(v), "invalid_input", "ols: non-finite y");

  // Householder QR of [X | y]: R lands in the top cols x cols block, and the
  // transformed y gives both the coefficients and the residual sum.
  std::vector<double> a = x;       // mutated in place, row-major
  std::vector<double> qy = y;
  std::vector<double> col_norm(cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += a[i * cols + j] * a[i * cols + j];
    col_norm[j] = std::sqrt(s);
  }
  for (std::size_t j = 0; j < cols; ++j) {
    double norm = 0.0;
    for (std::size_t i = j; i < rows; ++i) norm += a[i * cols + j] * a[i * cols + j];
    norm = std::sqrt(norm);
    require(norm > 1e-12 * std::max(1.0, col_norm[j]) && norm > 0.0, "rank_deficient",
            "ols: column '" + names[j] + "' is collinear with preceding columns");
    double alpha = a[j * cols + j] >= 0.0 ? -norm : norm;
    std::vector<double> v(rows - j, 0.0);
    v[0] = a[j * cols + j] - alpha;
    for (std::size_t i = j + 1; i < rows; ++i) v[i - j] = a[i * cols + j];
    double vtv = 0.0;
    for (double t : v) vtv += t * t;
    a[j * cols + j] = alpha;
    for (std::size_t i = j + 1; i < rows; ++i) a[i * cols + j] = 0.0;
    if (vtv <= 0.0) continue;
    for (std::size_t c = j + 1; c < cols; ++c) {
      double dot = 0.0;
      for (std::size_t i = j; i < rows; ++i) dot += v[i - j] * a[i * cols + c];
      double f = 2.0 * dot / vtv;
      for (std::size_t i = j; i < rows; ++i) a[i * cols + c] -= f * v[i - j];
    }
    double dot = 0.0;
    for (std::size_t i = j; i < rows; ++i) dot += v[i - j] * qy[i];
    double f = 2.0 * dot / vtv;
    for (std::size_t i = j; i < rows; ++i) qy[i] -= f * v[i - j];
  }

  // Back-substitution for coefficients.
  std::vector<double> coef(cols, 0.0);
  for (std::size_t jj = cols; jj-- > 0;) {
    double s = qy[jj];
    for (std::size_t c = jj + 1; c < cols; ++c) s -= a[jj * cols + c] * coef[c];
    double r_jj = a[jj * cols + jj];
    require(std::abs(r_jj) > 1e-12 * std::max(1.0, col_norm[jj]), "rank_deficient",
            "ols: column '" + names[jj] + "' is collinear with preceding columns");
    coef[jj] = s / r_jj;
  }

  double ss_res = 0.0;
  for (std::size_t i = cols; i < rows; ++i) ss_res += qy[i] * qy[i];
  double y_mean = 0.0;
  for (double v : y) y_mean += v;
  y_mean /= static_cast<double>(rows);
  double ss_tot = 0.0;
  for (double v : y) ss_tot += (v - y_mean) * (v - y_mean);

  OlsResult out;
  out.names = names;
  out.coef = coef;
  out.n = rows;
  out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;

  double df = static_cast<double>(rows - cols);
  double sigma2 = ss_res / df;

  // (X'X)^-1 = R^-1 R^-T from the stored upper triangle.
  std::vector<double> rinv(cols * cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    rinv[j * cols + j] = 1.0 / a[j * cols + j];
    for (std::size_t i = j; i-- > 0;) {
      double s = 0.0;
      for (std::size_t c = i + 1; c <= j; ++c) s += a[i * cols + c] * rinv[c * cols + j];
      rinv[i * cols + j] = -s / a[i * cols + i];
    }
  }
  out.se.resize(cols);
  out.t.resize(cols);
  out.p.resize(cols);
  out.ci_low.resize(cols);
  out.ci_high.resize(cols);

  // 97.5% t quantile by bisection; one solve covers every column.
  double t_hi = 1.0;
  while (t_cdf(t_hi, df) < 0.975) t_hi *= 2.0;
  double t_lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (t_lo + t_hi);
    (t_cdf(mid, df) < 0.975 ? t_lo : t_hi) = mid;
  }
  double t_crit = 0.5 * (t_lo + t_hi);

  for (std::size_t j = 0; j < cols; ++j) {
    double var = 0.0;
    for (std::size_t c = j; c < cols; ++c) var += rinv[j * cols + c] * rinv[j * cols + c];
    out.se[j] = std::sqrt(sigma2 * var);
    out.t[j] = out.se[j] > 0.0 ? coef[j] / out.se[j] : 0.0;
    out.p[j] = 2.0 * (1.0 - t_cdf(std::abs(out.t[j]), df));
    out.ci_low[j] = coef[j] - t_crit * out.se[j];
    out.ci_high[j] = coef[j] + t_crit * out.se[j];
  }
  return out;
}

OlsResult macro_fit(const std::vector<MacroRow>& rows) {
  require(rows.size() >= 3, "degenerate_input", "macro_fit: needs at least 3 countries");
  std::size_t n = rows.size();
  std::vector<double> x;
  x.reserve(n * 3);
  std::vector<double> y;
  y.reserve(n);
  for (const auto& r : rows) {
    require(std::isfinite(r.gdp_per_capita_usd) && r.gdp_per_capita_usd > 0.0,
            "invalid_input", "macro_fit: GDP per capita must be positive");
    require(std::isfinite(r.gini) && std::isfinite(r.mean_floor_hz), "invalid_input",
            "macro_fit: non-finite input");
    x.push_back(std::log10(r.gdp_per_capita_usd));
    x.push_back(r.gini);
    x.push_back(1.0);
    y.push_back(r.mean_floor_hz);
  }
  return ols(x, n, 3, y, {"log10_gdp_per_capita", "gini", "intercept"});
}

}  // namespace framecast::stats
