#include <cmath>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dms/diagnostics.hpp"
#include "dms/threshold.hpp"

namespace dms {
namespace {

Problem sextic(double d_av = 1.0) {
  Problem pr;
  pr.d_av = d_av;
  pr.nonlinearity = NonlinearitySpec::power(1.0 / 6.0, 6.0);
  return pr;
}

SolveConfig fast() {
  SolveConfig c;
  c.grad_tol = 1e-9;
  c.box.box_radius = 24;
  return c;
}

TEST(Quotient, SexticWithinSingleSiteAndWeinsteinBounds) {
  const auto q = r_quotient_max(sextic(), 1.0, fast());
  EXPECT_GE(q.value, 1.0 / 12.0);
  EXPECT_LE(q.value, 1.0 / 6.0);
  for (std::size_t i = 1; i < q.history.size(); ++i) {
    EXPECT_GE(q.history[i], q.history[i - 1] - 1e-14);
  }
}

TEST(Quotient, PurePowerScaling) {
  std::vector<double> lam{0.5, 1.0, 2.0}, r;
  for (double l : lam) r.push_back(r_quotient_max(sextic(), l, fast()).value / (l * l));
  for (double v : r) EXPECT_NEAR(v / r[1], 1.0, 0.02);
}

TEST(Quotient, NonpositivePotential) {
  auto pr = sextic();
  pr.nonlinearity = NonlinearitySpec::from_terms({{-1.0, 4.0}, {-1.0, 6.0}}, 4.0);
  EXPECT_LE(r_quotient_max(pr, 1.0, fast()).value, 0.0);
}

TEST(Quotient, SubcriticalPowerGrowsWithBox) {
  Problem pr;
  auto c = fast();
  c.box.box_radius = 16;
  const double small = r_quotient_max(pr, 1.0, c).value;
  c.box.box_radius = 32;
  const double large = r_quotient_max(pr, 1.0, c).value;
  EXPECT_GT(large, 1.2 * small);
}

TEST(Quotient, SupercriticalVanishesAtSmallPower) {
  const auto c = fast();
  double prev = r_quotient_max(sextic(), 0.4, c).value;
  for (double l : {0.2, 0.1}) {
    const double cur = r_quotient_max(sextic(), l, c).value;
    EXPECT_LT(cur, prev);
    prev = cur;
  }
  EXPECT_LT(prev, 2e-3);
}

TEST(ScalingChecks, PurePowerRatiosAndEquality) {
  const std::vector<double> lam{0.5, 1.0, 2.0, 2.0};
  const std::vector<double> r{0.25 * 0.1, 0.1, 0.4, 0.4};
  const auto rep = scaling_checks(lam, r, 6.0);
  EXPECT_TRUE(rep.all_pass);
  for (const auto& p : rep.pairs) EXPECT_NEAR(p.ratio, 1.0, 1e-12);
  const auto bad = scaling_checks({1.0, 2.0}, {0.1, 0.2}, 6.0);
  EXPECT_FALSE(bad.all_pass);
}

TEST(ScalingChecks, ThresholdSandwich) {
  // R(λ) = 0.1 λ², d_av = 1: λ_cr = sqrt(5).
  const std::vector<double> lam{0.5, 1.0, 4.0};
  std::vector<double> r;
  for (double l : lam) r.push_back(0.1 * l * l);
  const auto rep = scaling_checks(lam, r, 6.0, 1e-9, 1.0, std::sqrt(5.0));
  ASSERT_EQ(rep.sandwich.size(), 3u);
  EXPECT_TRUE(rep.all_pass);
  for (const auto& c : rep.sandwich) {
    EXPECT_NEAR(c.lower, std::min(c.lambda0, std::sqrt(5.0)), 1e-12);
  }
}

TEST(LambdaCr, SexticMatchesPurePowerFormula) {
  auto c = fast();
  const double r0 = r_quotient_max(sextic(), 1.0, c).value;
  const auto est = lambda_cr_estimate(sextic(), 1.0, 0.5, 4.0, c, 1e-2, false);
  EXPECT_NEAR(est.lambda_cr, std::sqrt(1.0 / (2.0 * r0)), 0.02 * est.lambda_cr);
  EXPECT_THROW(lambda_cr_estimate(sextic(), 1.0, 3.0, 4.0, c, 1e-2, false), NumericError);
  EXPECT_THROW(lambda_cr_estimate(sextic(), 0.0, 1.0, 4.0, c), std::invalid_argument);
}

TEST(LambdaCr, IncreasingInAverageDiffraction) {
  auto c = fast();
  double prev = 0.0;
  for (double d : {0.5, 1.0, 2.0}) {
    const auto est = lambda_cr_estimate(sextic(d), d, 0.5, 6.0, c, 1e-2, false);
    EXPECT_GT(est.lambda_cr, prev);
    prev = est.lambda_cr;
  }
}

TEST(ThresholdReport, CsvAndJson) {
  auto c = fast();
  const auto rep = threshold_report(sextic(), {0.5, 1.0, 2.0}, c, std::nullopt);
  ASSERT_TRUE(rep.r0_hat);
  EXPECT_GT(*rep.r0_hat, 1.0 / 12.0);
  std::ostringstream out;
  write_threshold_csv(out, rep);
  EXPECT_EQ(out.str().rfind("lambda,R_hat,E_lambda\n", 0), 0u);
  const auto j = to_json(rep);
  EXPECT_TRUE(j["lambda_cr_hat"].is_null());
  EXPECT_TRUE(j["checks_passed"].get<bool>());
}

}  // namespace
}  // namespace dms
