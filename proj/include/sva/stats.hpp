#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sva {

enum class TestKind { TTest, AnovaF, Chi2Prop };

std::string_view to_string(TestKind kind);

struct StatResult {
  TestKind test_kind = TestKind::TTest;
  double statistic = 0.0;
  double df1 = 0.0;
  std::optional<double> df2;
  double p_value = 1.0;
  std::optional<double> p_adjusted;
};

// Exact least squares on group dummies: residual_i = value_i minus the mean
// of its group. Residuals sum to zero within every group.
std::vector<double> residualize_fixed_effect(std::span<const double> values,
                                             std::span<const std::string> group_ids);

// Pooled-variance two-sample Student t, df = n1 + n2 - 2, two-sided p.
StatResult t_test_two_sample(std::span<const double> a, std::span<const double> b);

// One-way fixed-effects ANOVA; F = between mean square / within mean square
// with df (g - 1, n - g).
StatResult anova_oneway(const std::vector<std::vector<double>>& groups);

// Pooled two-proportion chi-squared with one degree of freedom, no
// continuity correction.
StatResult prop_test_two(long x1, long n1, long x2, long n2);

// Multiply each p by the family size and clamp to 1.
std::vector<double> bonferroni(std::vector<double> p_values);

struct ContingencyTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  Eigen::MatrixXd counts;  // nonnegative integers
};

// Pearson standardized residuals z_ij = (O_ij - E_ij) / sqrt(E_ij) with
// E_ij = row_i * col_j / total. All-zero rows or columns are an error.
Eigen::MatrixXd pearson_residuals(const ContingencyTable& table);

// Unweighted mean of per-class F1 over `num_classes` classes (labels are
// 0-based indices). A class absent from both sides contributes F1 = 0.
double macro_f1(std::span<const int> predictions, std::span<const int> gold, int num_classes);

enum class DistKind { StudentT, FisherF, ChiSquared };

// CDFs via regularized incomplete beta/gamma functions. df2 is only
// consulted for the F distribution.
double dist_cdf(DistKind kind, double df1, double df2, double x);
double student_t_cdf(double x, double df);
double fisher_f_cdf(double x, double df1, double df2);
double chi_squared_cdf(double x, double df);

namespace special {
// Regularized lower incomplete gamma P(a, x) and regularized incomplete
// beta I_x(a, b).
double reg_lower_gamma(double a, double x);
double reg_inc_beta(double a, double b, double x);
}  // namespace special

// Stars at the 0.05 / 0.005 / 0.001 thresholds.
std::string significance_stars(double p);

}  // namespace sva
