#include "sva/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sva/errors.hpp"

namespace sva {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

double sum_of(std::span<const double> values) {
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum;
}

double squared_deviations(std::span<const double> values, double mean) {
  double sum = 0.0;
  for (const double v : values) sum += (v - mean) * (v - mean);
  return sum;
}

}  // namespace

std::string_view to_string(TestKind kind) {
  switch (kind) {
    case TestKind::TTest: return "T_TEST";
    case TestKind::AnovaF: return "ANOVA_F";
    case TestKind::Chi2Prop: return "CHI2_PROP";
  }
  return "T_TEST";
}

std::vector<double> residualize_fixed_effect(std::span<const double> values,
                                             std::span<const std::string> group_ids) {
  require(!values.empty(), "residualize: empty input");
  require(values.size() == group_ids.size(),
          "residualize: values and group ids differ in length");
  std::map<std::string, std::pair<double, long>> sums;
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& [sum, count] = sums[group_ids[i]];
    sum += values[i];
    count += 1;
  }
  std::vector<double> residuals(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& [sum, count] = sums[group_ids[i]];
    residuals[i] = values[i] - sum / static_cast<double>(count);
  }
  return residuals;
}

StatResult t_test_two_sample(std::span<const double> a, std::span<const double> b) {
  require(a.size() >= 2 && b.size() >= 2, "t-test: each sample needs at least 2 observations");
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  const double mean1 = sum_of(a) / n1;
  const double mean2 = sum_of(b) / n2;
  const double pooled_ss = squared_deviations(a, mean1) + squared_deviations(b, mean2);
  const double df = n1 + n2 - 2.0;
  const double pooled_var = pooled_ss / df;
  require(pooled_var > 0.0, "degenerate-variance: pooled variance is zero");

  StatResult result;
  result.test_kind = TestKind::TTest;
  result.statistic = (mean1 - mean2) / std::sqrt(pooled_var * (1.0 / n1 + 1.0 / n2));
  result.df1 = df;
  result.p_value = 2.0 * student_t_cdf(-std::abs(result.statistic), df);
  return result;
}

StatResult anova_oneway(const std::vector<std::vector<double>>& groups) {
  require(groups.size() >= 2, "anova: needs at least 2 groups");
  double total = 0.0;
  long n = 0;
  for (const auto& group : groups) {
    require(!group.empty(), "anova: empty group");
    total += sum_of(group);
    n += static_cast<long>(group.size());
  }
  const double g = static_cast<double>(groups.size());
  require(n > static_cast<long>(groups.size()), "anova: no within-group degrees of freedom");
  const double grand_mean = total / static_cast<double>(n);

  double between = 0.0;
  double within = 0.0;
  for (const auto& group : groups) {
    const double mean = sum_of(group) / static_cast<double>(group.size());
    between += static_cast<double>(group.size()) * (mean - grand_mean) * (mean - grand_mean);
    within += squared_deviations(group, mean);
  }
  require(within > 0.0, "degenerate-variance: zero within-group variance");

  StatResult result;
  result.test_kind = TestKind::AnovaF;
  result.df1 = g - 1.0;
  result.df2 = static_cast<double>(n) - g;
  result.statistic = (between / result.df1) / (within / *result.df2);
  result.p_value = 1.0 - fisher_f_cdf(result.statistic, result.df1, *result.df2);
  return result;
}

StatResult prop_test_two(long x1, long n1, long x2, long n2) {
  require(n1 > 0 && n2 > 0, "proportion test: empty sample");
  require(x1 >= 0 && x1 <= n1 && x2 >= 0 && x2 <= n2,
          "proportion test: successes must lie in [0, n]");
  const double p1 = static_cast<double>(x1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(x2) / static_cast<double>(n2);

  StatResult result;
  result.test_kind = TestKind::Chi2Prop;
  result.df1 = 1.0;
  if (p1 == p2) {
    result.statistic = 0.0;
    result.p_value = 1.0;
    return result;
  }
  const double pooled =
      static_cast<double>(x1 + x2) / static_cast<double>(n1 + n2);
  const double variance =
      pooled * (1.0 - pooled) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2));
  result.statistic = (p1 - p2) * (p1 - p2) / variance;
  result.p_value = 1.0 - chi_squared_cdf(result.statistic, 1.0);
  return result;
}

std::vector<double> bonferroni(std::vector<double> p_values) {
  const double family = static_cast<double>(p_values.size());
  for (double& p : p_values) {
    require(p >= 0.0 && p <= 1.0, "bonferroni: p-values must lie in [0, 1]");
    p = std::min(1.0, p * family);
  }
  return p_values;
}

Eigen::MatrixXd pearson_residuals(const ContingencyTable& table) {
  const Eigen::Index rows = table.counts.rows();
  const Eigen::Index cols = table.counts.cols();
  require(rows >= 1 && cols >= 1, "residuals: empty table");
  require(static_cast<Eigen::Index>(table.row_labels.size()) == rows &&
              static_cast<Eigen::Index>(table.col_labels.size()) == cols,
          "residuals: label count does not match table shape");
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double v = table.counts(i, j);
      require(v >= 0.0 && v == std::floor(v), "residuals: counts must be nonnegative integers");
    }
  }
  const Eigen::VectorXd row_sums = table.counts.rowwise().sum();
  const Eigen::VectorXd col_sums = table.counts.colwise().sum();
  require(row_sums.minCoeff() > 0.0, "residuals: zero-marginal row");
  require(col_sums.minCoeff() > 0.0, "residuals: zero-marginal column");
  const double total = table.counts.sum();

  Eigen::MatrixXd z(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double expected = row_sums(i) * col_sums(j) / total;
      z(i, j) = (table.counts(i, j) - expected) / std::sqrt(expected);
    }
  }
  return z;
}

double macro_f1(std::span<const int> predictions, std::span<const int> gold, int num_classes) {
  require(!predictions.empty(), "macro-f1: empty input");
  require(predictions.size() == gold.size(), "macro-f1: predictions and gold differ in length");
  require(num_classes >= 1, "macro-f1: needs at least one class");
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    require(predictions[i] >= 0 && predictions[i] < num_classes &&
                gold[i] >= 0 && gold[i] < num_classes,
            "macro-f1: label out of range");
  }
  double f1_sum = 0.0;
  for (int cls = 0; cls < num_classes; ++cls) {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      const bool predicted = predictions[i] == cls;
      const bool actual = gold[i] == cls;
      if (predicted && actual) ++tp;
      if (predicted && !actual) ++fp;
      if (!predicted && actual) ++fn;
    }
    const double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    const double f1 =
        precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    f1_sum += f1;
  }
  return f1_sum / num_classes;
}

namespace special {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kConvergence = 3e-16;
constexpr int kMaxIterations = 500;

// Series expansion of P(a, x), effective for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n <= kMaxIterations; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kConvergence) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) (modified Lentz), effective for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kConvergence) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
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
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kConvergence) break;
  }
  return h;
}

}  // namespace

double reg_lower_gamma(double a, double x) {
  require(a > 0.0, "incomplete gamma: shape must be > 0");
  require(x >= 0.0, "incomplete gamma: argument must be >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double reg_inc_beta(double a, double b, double x) {
  require(a > 0.0 && b > 0.0, "incomplete beta: shapes must be > 0");
  require(x >= 0.0 && x <= 1.0, "incomplete beta: argument must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

}  // namespace special

double student_t_cdf(double x, double df) {
  require(df > 0.0, "t distribution: df must be > 0");
  if (x == 0.0) return 0.5;
  const double tail = 0.5 * special::reg_inc_beta(df / 2.0, 0.5, df / (df + x * x));
  return x > 0.0 ? 1.0 - tail : tail;
}

double fisher_f_cdf(double x, double df1, double df2) {
  require(df1 > 0.0 && df2 > 0.0, "F distribution: dfs must be > 0");
  if (x <= 0.0) return 0.0;
  return special::reg_inc_beta(df1 / 2.0, df2 / 2.0, df1 * x / (df1 * x + df2));
}

double chi_squared_cdf(double x, double df) {
  require(df > 0.0, "chi-squared distribution: df must be > 0");
  if (x <= 0.0) return 0.0;
  return special::reg_lower_gamma(df / 2.0, x / 2.0);
}

double dist_cdf(DistKind kind, double df1, double df2, double x) {
  switch (kind) {
    case DistKind::StudentT: return student_t_cdf(x, df1);
    case DistKind::FisherF: return fisher_f_cdf(x, df1, df2);
    case DistKind::ChiSquared: return chi_squared_cdf(x, df1);
  }
  throw ValidationError("distribution: unknown kind");
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.005) return "**";
  if (p < 0.05) return "*";
  return "";
}

}  // namespace sva
