#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace grasplearn::stats {

// ---------------------------------------------------------------------------
// Special functions (series / continued-fraction implementations, kept
// in-repo so the statistical tests have no external dependency).
// ---------------------------------------------------------------------------

namespace detail {

constexpr int kMaxIterations = 500;
constexpr double kEps = 3.0e-15;
constexpr double kFpMin = 1.0e-300;

/// Regularized lower incomplete gamma P(a, x) by its power series (x < a+1).
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Regularized upper incomplete gamma Q(a, x) by continued fraction (x >= a+1).
inline double gamma_q_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

/// Continued fraction for the regularized incomplete beta function.
inline double beta_cf(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) {
    throw std::invalid_argument("gamma_p requires a > 0, x >= 0");
  }
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_cf(a, x);
}

/// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || x < 0.0 || x > 1.0) {
    throw std::invalid_argument("incomplete_beta domain error");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_cf(a, b, x) / a;
  }
  return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

inline double chi_square_cdf(double x, double dof) {
  if (x <= 0.0) return 0.0;
  return gamma_p(dof / 2.0, x / 2.0);
}

inline double f_cdf(double x, double dof1, double dof2) {
  if (x <= 0.0) return 0.0;
  return incomplete_beta(dof1 / 2.0, dof2 / 2.0,
                         dof1 * x / (dof1 * x + dof2));
}

/// Two-sided p-value of a t statistic with the given degrees of freedom.
inline double t_two_sided_p(double t, double dof) {
  if (!std::isfinite(t)) return 0.0;
  return incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

// ---------------------------------------------------------------------------
// N-1 chi-square test on two binomial outcomes.
// ---------------------------------------------------------------------------

struct BinomialOutcome {
  long long successes = 0;
  long long trials = 0;
};

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool degenerate = false;
};

/// Two-proportion chi-square with the Pearson statistic scaled by (N-1)/N.
/// A zero-margin table (all successes or all failures overall) is flagged
/// degenerate with statistic 0 and p 1.
inline ChiSquareResult n1_chi_square(const BinomialOutcome& a,
                                     const BinomialOutcome& b) {
  if (a.trials <= 0 || b.trials <= 0) {
    throw std::invalid_argument("n1_chi_square requires trials > 0");
  }
  if (a.successes < 0 || a.successes > a.trials || b.successes < 0 ||
      b.successes > b.trials) {
    throw std::invalid_argument("successes out of range");
  }
  const double n = static_cast<double>(a.trials + b.trials);
  if (n < 2.0) throw std::invalid_argument("combined trials must be >= 2");
  const double a1 = static_cast<double>(a.successes);
  const double a2 = static_cast<double>(a.trials - a.successes);
  const double b1 = static_cast<double>(b.successes);
  const double b2 = static_cast<double>(b.trials - b.successes);
  const double col1 = a1 + b1;
  const double col2 = a2 + b2;
  ChiSquareResult result;
  if (col1 == 0.0 || col2 == 0.0) {
    result.degenerate = true;
    return result;
  }
  const double pearson = n * (a1 * b2 - a2 * b1) * (a1 * b2 - a2 * b1) /
                         ((a1 + a2) * (b1 + b2) * col1 * col2);
  result.statistic = pearson * (n - 1.0) / n;
  result.p_value = 1.0 - chi_square_cdf(result.statistic, 1.0);
  return result;
}

// ---------------------------------------------------------------------------
// One-way ANOVA with LSD pairwise comparisons.
// ---------------------------------------------------------------------------

struct SampleGroup {
  std::string label;
  std::vector<double> values;
};

struct PairwiseComparison {
  std::string label_a;
  std::string label_b;
  double t = 0.0;
  double p_value = 1.0;
};

struct AnovaResult {
  double f = 0.0;
  double p_value = 1.0;
  double ss_between = 0.0;
  double ss_within = 0.0;
  double ss_total = 0.0;
  long long df_between = 0;
  long long df_within = 0;
  bool degenerate = false;
  std::vector<PairwiseComparison> pairwise;
};

inline AnovaResult one_way_anova_lsd(const std::vector<SampleGroup>& groups) {
  if (groups.size() < 2) {
    throw std::invalid_argument("anova requires at least two groups");
  }
  std::size_t n_total = 0;
  for (const auto& g : groups) {
    if (g.values.size() < 2) {
      throw std::invalid_argument("each group needs at least two values");
    }
    n_total += g.values.size();
  }
  const std::size_t k = groups.size();

  double grand_sum = 0.0;
  std::vector<double> means(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    double s = 0.0;
    for (double v : groups[i].values) s += v;
    means[i] = s / static_cast<double>(groups[i].values.size());
    grand_sum += s;
  }
  const double grand_mean = grand_sum / static_cast<double>(n_total);

  AnovaResult result;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = means[i] - grand_mean;
    result.ss_between += static_cast<double>(groups[i].values.size()) * d * d;
    for (double v : groups[i].values) {
      const double w = v - means[i];
      result.ss_within += w * w;
      const double t = v - grand_mean;
      result.ss_total += t * t;
    }
  }
  result.df_between = static_cast<long long>(k) - 1;
  result.df_within =
      static_cast<long long>(n_total) - static_cast<long long>(k);

  const double msb = result.ss_between / static_cast<double>(result.df_between);
  const double msw = result.ss_within / static_cast<double>(result.df_within);

  if (msw <= 0.0) {
    result.degenerate = true;
    const bool separated = result.ss_between > 0.0;
    result.f = separated ? std::numeric_limits<double>::infinity() : 0.0;
    result.p_value = separated ? 0.0 : 1.0;
  } else {
    result.f = msb / msw;
    result.p_value =
        1.0 - f_cdf(result.f, static_cast<double>(result.df_between),
                    static_cast<double>(result.df_within));
  }

  // LSD: uncorrected pairwise t-tests pooled on MSW.
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      PairwiseComparison cmp;
      cmp.label_a = groups[i].label;
      cmp.label_b = groups[j].label;
      const double ni = static_cast<double>(groups[i].values.size());
      const double nj = static_cast<double>(groups[j].values.size());
      if (msw <= 0.0) {
        const bool equal_means = means[i] == means[j];
        cmp.t = equal_means ? 0.0 : std::numeric_limits<double>::infinity();
        cmp.p_value = equal_means ? 1.0 : 0.0;
      } else {
        cmp.t = (means[i] - means[j]) / std::sqrt(msw * (1.0 / ni + 1.0 / nj));
        cmp.p_value =
            t_two_sided_p(cmp.t, static_cast<double>(result.df_within));
      }
      result.pairwise.push_back(cmp);
    }
  }
  return result;
}

}  // namespace grasplearn::stats
