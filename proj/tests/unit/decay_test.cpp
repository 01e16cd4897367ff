#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "dms/decay.hpp"
#include "dms/diagnostics.hpp"

namespace dms {
namespace {

LatticeField superexp_field(double nu, int radius) {
  LatticeField f(radius);
  for (long x = -radius; x <= radius; ++x) {
    const double s = std::abs(x) + 1.0;
    f.at(x) = std::exp(-nu * s * std::log(s));
  }
  return f;
}

TEST(TailDistribution, BasicValues) {
  const auto f = delta(5, 0, Complex{0, -3});
  const auto b = tail_distribution(f);
  ASSERT_EQ(b.size(), 7u);
  EXPECT_DOUBLE_EQ(b[0], 3.0);
  for (std::size_t n = 1; n < b.size(); ++n) EXPECT_EQ(b[n], 0.0);
}

TEST(TailDistribution, GeometricTail) {
  const double a = 1.3, nu = 0.4;
  const auto f = exp_profile(a, nu, 120);
  const auto b = tail_distribution(f);
  EXPECT_NEAR(b[0], l2_norm(f), 1e-14);
  for (int n : {1, 5, 20, 40}) {
    const double exact = ExpProfileNorms::tail_mass(a, nu, n);
    EXPECT_NEAR(b[n] * b[n], exact, 1e-10 * exact);
  }
  for (std::size_t n = 1; n < b.size(); ++n) EXPECT_LE(b[n], b[n - 1]);
  EXPECT_EQ(b.back(), 0.0);
}

TEST(FitExpRate, ExactOnExponentialProfile) {
  const auto f = exp_profile(1.0, 0.7, 60);
  const auto fit = fit_exp_rate(tail_distribution(f), 1e-13);
  EXPECT_NEAR(fit.rate, 0.7, 1e-10);
  EXPECT_LT(fit.residual, 1e-10);
  EXPECT_GE(fit.window.points(), 8);
}

TEST(FitExpRate, WindowTooSmall) {
  EXPECT_THROW(fit_exp_rate(tail_distribution(delta(20)), 1e-13), NumericError);
}

TEST(FitSuperexpRate, SyntheticField) {
  const auto f = superexp_field(0.9, 40);
  const auto fit = fit_superexp_rate(tail_distribution(f), 0.0);
  EXPECT_NEAR(fit.rate, 0.9, 0.03 * 0.9);
}

TEST(FitSuperexpRate, ExactOnPureTail) {
  // β(n) = H_{-ν}(n) exactly.
  std::vector<double> beta(30);
  for (int n = 0; n < 30; ++n) beta[n] = std::exp(-0.8 * (n + 1.0) * std::log(n + 1.0));
  beta[0] = 10.0;
  const auto fit = fit_superexp_rate(beta, 1e-300);
  EXPECT_NEAR(fit.rate, 0.8, 1e-10);
}

TEST(FitSuperexpRate, ExponentialFieldHasPoorFit) {
  const auto b = tail_distribution(exp_profile(1.0, 0.3, 200));
  const auto fe = fit_exp_rate(b, 1e-13);
  const auto fs = fit_superexp_rate(b, 1e-13);
  EXPECT_LT(fs.rate, 0.1);
  EXPECT_GT(fs.residual, 100 * fe.residual);
}

TEST(HeuristicRate, DefiningIdentity) {
  EXPECT_NEAR(heuristic_rate(-2.0, 1.0), std::acosh(2.0), 1e-15);
  EXPECT_LT(heuristic_rate(-1e-12, 1.0), 1e-5);
  for (double w : {-0.1, -1.0, -7.5}) {
    for (double d : {0.25, 1.0, 3.0}) {
      EXPECT_NEAR(2 * d * (std::cosh(heuristic_rate(w, d)) - 1), -w, 1e-12 * (1 - w));
    }
  }
  EXPECT_THROW(heuristic_rate(1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(heuristic_rate(-1.0, 0.0), std::invalid_argument);
}

TEST(SelfConsistency, SingleSite) {
  const auto b = tail_distribution(delta(10, 0, 2.0));
  const auto r = self_consistency_check(b, 3.0, 0.25, 5, 5);
  EXPECT_EQ(r.arg_n, 0);
  EXPECT_EQ(r.arg_m, 0);
  EXPECT_DOUBLE_EQ(r.c_star, 2.0 / (8.0 + 1.0));
  EXPECT_TRUE(r.stable);
}

TEST(SelfConsistency, GeometricTailGrows) {
  std::vector<double> beta(200);
  for (int n = 0; n < 200; ++n) beta[n] = std::pow(0.8, n);
  const auto r = self_consistency_check(beta, 3.0, 0.25, 80, 80);
  EXPECT_TRUE(r.finite);
  EXPECT_FALSE(r.stable);
  EXPECT_GT(r.c_star, 10 * r.c_star_half);
}

TEST(SelfConsistency, SuperexponentialTailStable) {
  const auto b = tail_distribution(superexp_field(0.9, 40));
  const auto r = self_consistency_check(b, 3.0, 0.25, 30, 30);
  EXPECT_TRUE(r.stable);
}

TEST(TailCsv, HasHeaderAndRows) {
  const auto b = tail_distribution(exp_profile(1.0, 0.7, 50));
  const auto fit = fit_exp_rate(b);
  std::ostringstream out;
  write_tail_csv(out, b, &fit, nullptr);
  const auto s = out.str();
  EXPECT_EQ(s.rfind("n,beta,exp_model\n", 0), 0u);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), static_cast<long>(b.size()) + 1);
}

}  // namespace
}  // namespace dms
