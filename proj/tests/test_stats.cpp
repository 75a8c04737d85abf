#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "sva/errors.hpp"
#include "sva/rng.hpp"
#include "sva/stats.hpp"

namespace {

using namespace sva;

std::vector<double> random_sample(Rng& rng, int n, double lo, double hi) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(rng.uniform(lo, hi));
  return out;
}

}  // namespace

TEST_CASE("residualize_fixed_effect demeans within groups") {
  const std::vector<double> values = {1.0, 3.0, 10.0, 14.0, 5.0};
  const std::vector<std::string> groups = {"a", "a", "b", "b", "c"};
  const std::vector<double> res = residualize_fixed_effect(values, groups);
  REQUIRE(res.size() == 5);
  CHECK(res[0] == doctest::Approx(-1.0));
  CHECK(res[1] == doctest::Approx(1.0));
  CHECK(res[2] == doctest::Approx(-2.0));
  CHECK(res[3] == doctest::Approx(2.0));
  CHECK(res[4] == doctest::Approx(0.0));

  CHECK_THROWS_AS(residualize_fixed_effect(values, std::vector<std::string>{"a"}),
                  ValidationError);
}

TEST_CASE("t_test_two_sample against frozen reference values") {
  const std::vector<double> a = {1.0, 2.0, 3.0};
  const std::vector<double> b = {2.0, 3.0, 4.0};
  const StatResult r = t_test_two_sample(a, b);
  CHECK(r.statistic == doctest::Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(r.df1 == 4.0);
  CHECK(r.p_value == doctest::Approx(0.2878641347266908).epsilon(1e-10));
}

TEST_CASE("t_test_two_sample rejects degenerate inputs") {
  const std::vector<double> singleton = {1.0};
  const std::vector<double> pair = {1.0, 2.0};
  CHECK_THROWS_AS(t_test_two_sample(singleton, pair), ValidationError);
  const std::vector<double> flat_a = {2.0, 2.0, 2.0};
  const std::vector<double> flat_b = {2.0, 2.0};
  CHECK_THROWS_WITH_AS(t_test_two_sample(flat_a, flat_b),
                       doctest::Contains("degenerate-variance"), ValidationError);
}

TEST_CASE("anova_oneway on a hand-checked design") {
  const std::vector<std::vector<double>> groups = {{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
  const StatResult r = anova_oneway(groups);
  CHECK(r.statistic == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(r.df1 == 2.0);
  REQUIRE(r.df2.has_value());
  CHECK(*r.df2 == 3.0);
  const oracle::TestStat ref = oracle::anova(groups);
  CHECK(r.p_value == doctest::Approx(ref.p_value).epsilon(1e-10));

  CHECK_THROWS_AS(anova_oneway({{1.0, 2.0}}), ValidationError);
  CHECK_THROWS_WITH_AS(anova_oneway({{1.0, 1.0}, {1.0, 1.0}}),
                       doctest::Contains("degenerate-variance"), ValidationError);
}

TEST_CASE("anova F equals t^2 on two groups") {
  Rng rng(404);
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<double> a = random_sample(rng, 6, -2.0, 2.0);
    const std::vector<double> b = random_sample(rng, 9, -1.0, 3.0);
    const StatResult t = t_test_two_sample(a, b);
    const StatResult f = anova_oneway({a, b});
    CHECK(f.statistic == doctest::Approx(t.statistic * t.statistic).epsilon(1e-9));
    CHECK(f.p_value == doctest::Approx(t.p_value).epsilon(1e-9));
  }
}

TEST_CASE("prop_test_two against frozen reference values") {
  const StatResult r = prop_test_two(10, 100, 20, 100);
  CHECK(r.statistic == doctest::Approx(3.9215686274509807).epsilon(1e-12));
  CHECK(r.df1 == 1.0);
  CHECK(r.p_value == doctest::Approx(0.0476703806561615).epsilon(1e-10));

  const StatResult equal = prop_test_two(5, 50, 10, 100);
  CHECK(equal.statistic == 0.0);
  CHECK(equal.p_value == 1.0);

  CHECK_THROWS_AS(prop_test_two(5, 0, 1, 10), ValidationError);
  CHECK_THROWS_AS(prop_test_two(11, 10, 1, 10), ValidationError);
  CHECK_THROWS_AS(prop_test_two(-1, 10, 1, 10), ValidationError);
}

TEST_CASE("bonferroni multiplies and clamps") {
  const std::vector<double> adjusted = bonferroni({0.01, 0.2, 0.5});
  REQUIRE(adjusted.size() == 3);
  CHECK(adjusted[0] == doctest::Approx(0.03));
  CHECK(adjusted[1] == doctest::Approx(0.6));
  CHECK(adjusted[2] == 1.0);
  CHECK(bonferroni({}).empty());
}

TEST_CASE("pearson_residuals on a hand-checked 2x2 table") {
  ContingencyTable table;
  table.row_labels = {"r1", "r2"};
  table.col_labels = {"c1", "c2"};
  table.counts = Eigen::MatrixXd(2, 2);
  table.counts << 10, 20, 30, 40;
  const Eigen::MatrixXd z = pearson_residuals(table);
  // E11 = 30*40/100 = 12, z11 = (10-12)/sqrt(12)
  CHECK(z(0, 0) == doctest::Approx((10.0 - 12.0) / std::sqrt(12.0)).epsilon(1e-12));
  CHECK(z(0, 1) == doctest::Approx((20.0 - 18.0) / std::sqrt(18.0)).epsilon(1e-12));
  CHECK(z(1, 0) == doctest::Approx((30.0 - 28.0) / std::sqrt(28.0)).epsilon(1e-12));

  table.counts << 0, 0, 30, 40;
  CHECK_THROWS_WITH_AS(pearson_residuals(table), doctest::Contains("zero"), ValidationError);
  table.counts = Eigen::MatrixXd(2, 2);
  table.counts << 1, 2, 3, 4;
  table.row_labels = {"r1"};  // label shape no longer matches the counts
  CHECK_THROWS_AS(pearson_residuals(table), ValidationError);
}

TEST_CASE("macro_f1 matches the confusion-matrix oracle and zero-fills absent classes") {
  const std::vector<int> gold = {0, 0, 1, 1, 2, 2};
  const std::vector<int> pred = {0, 1, 1, 1, 2, 0};
  CHECK(macro_f1(pred, gold, 3) == doctest::Approx(oracle::macro_f1(pred, gold, 3)).epsilon(1e-12));

  // class 2 absent on both sides -> contributes zero
  const std::vector<int> gold2 = {0, 0, 1, 1};
  const std::vector<int> pred2 = {0, 0, 1, 1};
  CHECK(macro_f1(pred2, gold2, 3) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  CHECK(macro_f1(gold, gold, 3) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(macro_f1(pred, std::vector<int>{0}, 3), ValidationError);
  CHECK_THROWS_AS(macro_f1(std::vector<int>{}, std::vector<int>{}, 3), ValidationError);
  CHECK_THROWS_AS(macro_f1(std::vector<int>{3}, std::vector<int>{0}, 3), ValidationError);
}

TEST_CASE("distribution CDFs against frozen reference values") {
  CHECK(student_t_cdf(1.5, 7.0) == doctest::Approx(0.911350756505015).epsilon(1e-12));
  CHECK(student_t_cdf(-0.8, 2.5) == doctest::Approx(0.24633700492636154).epsilon(1e-12));
  CHECK(fisher_f_cdf(2.5, 3.0, 9.0) == doctest::Approx(0.8744823388037789).epsilon(1e-12));
  CHECK(fisher_f_cdf(0.7, 5.5, 2.25) == doctest::Approx(0.3210997062383521).epsilon(1e-12));
  CHECK(chi_squared_cdf(3.841, 1.0) == doctest::Approx(0.9499863162360432).epsilon(1e-12));
  CHECK(chi_squared_cdf(5.2, 3.7) == doctest::Approx(0.767663907386025).epsilon(1e-12));
  CHECK(chi_squared_cdf(0.3, 1.0) == doctest::Approx(0.416117579229635).epsilon(1e-12));
  // deep tail: survival of chi2 = 20 at 1 df
  CHECK(1.0 - chi_squared_cdf(20.0, 1.0) ==
        doctest::Approx(7.744216431044088e-06).epsilon(1e-9));
}

TEST_CASE("distribution CDFs agree with quadrature over a grid") {
  for (double df : {1.0, 2.0, 4.0, 11.5, 30.0}) {
    for (double x : {-3.0, -0.7, 0.0, 0.4, 1.9, 6.0}) {
      CHECK(student_t_cdf(x, df) == doctest::Approx(oracle::t_cdf(x, df)).epsilon(1e-10));
    }
  }
  for (double df : {0.5, 1.0, 2.0, 3.7, 9.0}) {
    for (double x : {0.0, 0.05, 0.9, 2.5, 8.0, 25.0}) {
      CHECK(chi_squared_cdf(x, df) == doctest::Approx(oracle::chi2_cdf(x, df)).epsilon(1e-10));
    }
  }
  for (double d1 : {1.0, 2.5, 6.0}) {
    for (double d2 : {1.5, 4.0, 12.0}) {
      for (double x : {0.0, 0.2, 1.0, 3.3, 10.0}) {
        CHECK(fisher_f_cdf(x, d1, d2) ==
              doctest::Approx(oracle::f_cdf(x, d1, d2)).epsilon(1e-10));
      }
    }
  }
  CHECK(dist_cdf(DistKind::StudentT, 5.0, 0.0, 1.2) == student_t_cdf(1.2, 5.0));
  CHECK(dist_cdf(DistKind::FisherF, 3.0, 7.0, 1.2) == fisher_f_cdf(1.2, 3.0, 7.0));
  CHECK(dist_cdf(DistKind::ChiSquared, 2.0, 0.0, 1.2) == chi_squared_cdf(1.2, 2.0));
}

TEST_CASE("special functions stay in range and hit the endpoints") {
  CHECK(special::reg_lower_gamma(1.5, 0.0) == 0.0);
  CHECK(special::reg_lower_gamma(1.5, 1e8) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(special::reg_inc_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(special::reg_inc_beta(2.0, 3.0, 1.0) == 1.0);
  // I_x(1, b) = 1 - (1-x)^b in closed form
  CHECK(special::reg_inc_beta(1.0, 4.0, 0.3) ==
        doctest::Approx(1.0 - std::pow(0.7, 4.0)).epsilon(1e-12));
  CHECK_THROWS_AS(special::reg_lower_gamma(-1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(special::reg_inc_beta(2.0, 3.0, 1.5), ValidationError);
}

TEST_CASE("randomized battery: t, anova and proportion tests track the oracle") {
  Rng rng(2026);
  for (int trial = 0; trial < 50; ++trial) {
    const int n1 = 3 + static_cast<int>(rng.below(10));
    const int n2 = 3 + static_cast<int>(rng.below(10));
    const std::vector<double> a = random_sample(rng, n1, -1.0, 1.0);
    const std::vector<double> b = random_sample(rng, n2, -0.5, 1.5);

    const StatResult t = t_test_two_sample(a, b);
    const oracle::TestStat t_ref = oracle::t_test(a, b);
    CHECK(t.statistic == doctest::Approx(t_ref.statistic).epsilon(1e-10));
    CHECK(t.p_value == doctest::Approx(t_ref.p_value).epsilon(1e-8));

    const std::vector<double> c = random_sample(rng, 4 + static_cast<int>(rng.below(6)), 0.0, 2.0);
    const StatResult f = anova_oneway({a, b, c});
    const oracle::TestStat f_ref = oracle::anova({a, b, c});
    CHECK(f.statistic == doctest::Approx(f_ref.statistic).epsilon(1e-10));
    CHECK(f.p_value == doctest::Approx(f_ref.p_value).epsilon(1e-8));

    const long size1 = 20 + static_cast<long>(rng.below(80));
    const long size2 = 20 + static_cast<long>(rng.below(80));
    const long hits1 = 1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(size1 - 1)));
    const long hits2 = 1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(size2 - 1)));
    const StatResult p = prop_test_two(hits1, size1, hits2, size2);
    const oracle::TestStat p_ref = oracle::prop_test(hits1, size1, hits2, size2);
    CHECK(p.statistic == doctest::Approx(p_ref.statistic).epsilon(1e-10));
    CHECK(p.p_value == doctest::Approx(p_ref.p_value).epsilon(1e-8));
  }
}

TEST_CASE("significance stars at the conventional thresholds") {
  CHECK(significance_stars(0.2) == "");
  CHECK(significance_stars(0.05) == "");
  CHECK(significance_stars(0.049) == "*");
  CHECK(significance_stars(0.005) == "*");
  CHECK(significance_stars(0.0049) == "**");
  CHECK(significance_stars(0.001) == "**");
  CHECK(significance_stars(0.0009) == "***");
}
