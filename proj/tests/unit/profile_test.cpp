#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dms/profile.hpp"

namespace dms {
namespace {

PiecewiseProfile model_profile() {
  PiecewiseProfile p;
  p.period = 2.0;
  p.segments = {{1.0, 1.0}, {1.0, -1.0}};
  p.mean_zero = true;
  return p;
}

TEST(Measure, ZeroProfileIsDirac) {
  PiecewiseProfile p;
  p.period = 1.0;
  p.segments = {{1.0, 0.0}};
  const auto mu = measure_from_profile(p);
  ASSERT_EQ(mu.size(), 1u);
  EXPECT_EQ(mu.atoms()[0].node, 0.0);
  EXPECT_NEAR(mu.atoms()[0].weight, 1.0, 1e-14);
  EXPECT_EQ(mu.support_bound(), 0.0);
}

TEST(Measure, ModelCaseIsUniformOnUnitInterval) {
  const auto mu = measure_from_profile(model_profile(), 32);
  EXPECT_EQ(mu.size(), 32u);
  EXPECT_NEAR(mu.total_mass(), 1.0, 1e-12);
  EXPECT_EQ(mu.support_bound(), 1.0);
  for (int k = 0; k <= 6; ++k) EXPECT_NEAR(mu.moment(k), 1.0 / (k + 1), 1e-14) << k;
  for (const auto& a : mu.atoms()) {
    EXPECT_GE(a.node, 0.0);
    EXPECT_LE(a.node, 1.0);
  }
}

TEST(Measure, QuadratureRefinementConverges) {
  // ∫₀¹ cos(3r) dr = sin(3)/3
  double prev = 1.0;
  for (int n : {1, 2, 4, 8}) {
    const auto mu = measure_from_profile(model_profile(), n);
    double s = 0.0;
    for (const auto& a : mu.atoms()) s += a.weight * std::cos(3 * a.node);
    const double err = std::abs(s - std::sin(3.0) / 3.0);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-12);
}

TEST(Measure, TotalMassIsOneForAnyProfile) {
  PiecewiseProfile p;
  p.period = 3.0;
  p.segments = {{0.5, 2.0}, {1.5, -0.2}, {1.0, 0.7}};
  const auto mu = measure_from_profile(p, 7);
  EXPECT_NEAR(mu.total_mass(), 1.0, 1e-12);
  EXPECT_NEAR(mu.support_bound(), std::max({1.0, std::abs(1.0 - 0.3), std::abs(0.7 + 0.7)}), 1e-14);
}

TEST(Profile, ValidationAndPrimitive) {
  auto p = model_profile();
  EXPECT_DOUBLE_EQ(p.D(0.5), 0.5);
  EXPECT_DOUBLE_EQ(p.D(1.5), 0.5);
  EXPECT_DOUBLE_EQ(p.D(2.0), 0.0);
  EXPECT_EQ(p.d0(1.2), -1.0);
  EXPECT_EQ(p.d0(3.2), -1.0);
  p.segments[1].value = -0.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.mean_zero = false;
  EXPECT_NO_THROW(p.validate());
  p.segments.clear();
  EXPECT_THROW(measure_from_profile(p), std::invalid_argument);
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (int n : {1, 3, 8, 32}) {
    const GaussLegendre gl(n);
    for (int k = 0; k < 2 * n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += gl.weights[i] * std::pow(gl.nodes[i], k);
      const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
      EXPECT_NEAR(s, exact, 1e-14) << n << " " << k;
    }
  }
}

TEST(Nonlinearity, KerrAndZero) {
  const auto k = NonlinearitySpec::kerr();
  const Complex z{0.3, -1.1};
  EXPECT_LT(std::abs(k.P(z) - std::norm(z) * z), 1e-15);
  EXPECT_EQ(k.V(0.0), 0.0);
  EXPECT_EQ(k.P(0.0), Complex{});
  EXPECT_THROW(k.V(-1.0), std::invalid_argument);
}

TEST(Nonlinearity, POddAndConsistentWithV) {
  const auto spec = NonlinearitySpec::from_terms({{-1.0, 4.0}, {1.0, 6.0}}, 4.0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int t = 0; t < 50; ++t) {
    const Complex z{g(rng), g(rng)};
    EXPECT_EQ(spec.P(-z), -spec.P(z));
    const double a = std::abs(z), h = 1e-6;
    EXPECT_NEAR(spec.dV(a), (spec.V(a + h) - spec.V(a - h)) / (2 * h), 1e-6 * (1 + std::abs(spec.dV(a))));
  }
}

TEST(Nonlinearity, SplitDefectMatchesDirectEvaluation) {
  const auto spec = NonlinearitySpec::from_terms({{0.25, 4.0}, {0.5, 3.0}}, 3.0);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int t = 0; t < 50; ++t) {
    const Complex z{g(rng), g(rng)}, w{g(rng), g(rng)};
    const double direct = spec.V(std::abs(z + w)) - spec.V(std::abs(z)) - spec.V(std::abs(w));
    EXPECT_NEAR(spec.split_defect(z, w), direct, 1e-12 * (1 + std::abs(direct)));
  }
  EXPECT_EQ(spec.split_defect(1.0, 0.0), 0.0);
  EXPECT_EQ(spec.split_defect(0.0, Complex{0, 2}), 0.0);
  // tiny w: first order term 2 Re(z̄w) p(|z|)/2 survives
  const Complex z{1.0, 0.0}, w{1e-20, 0.0};
  EXPECT_NEAR(spec.split_defect(z, w) / 1e-20, spec.dV(1.0), 1e-12);
}

TEST(Assumptions, PurePowerHomogeneityIsExact) {
  const auto grid = amplitude_grid(1e-3, 10.0, 60);
  const auto rep = check_assumptions(NonlinearitySpec::kerr(), grid);
  EXPECT_EQ(rep.homogeneity_min, 0.0);
  EXPECT_TRUE(rep.homogeneity_holds);
  EXPECT_TRUE(rep.positive_somewhere);
  EXPECT_TRUE(rep.scaling_holds);
  EXPECT_NEAR(rep.growth_constant, 0.5, 1e-12);
  ASSERT_TRUE(rep.small_amplitude_constant);
  EXPECT_NEAR(*rep.small_amplitude_constant, 0.25, 1e-12);
}

TEST(Assumptions, SignChangingPotential) {
  const auto grid = amplitude_grid(1e-3, 10.0, 60);
  const auto mixed = NonlinearitySpec::from_terms({{-1.0, 4.0}, {1.0, 6.0}}, 4.0);
  const auto rep = check_assumptions(mixed, grid);
  EXPECT_TRUE(rep.homogeneity_holds);
  EXPECT_GT(rep.homogeneity_min, 0.0);
  EXPECT_NEAR(rep.homogeneity_min, 2 * std::pow(grid.front(), 6), 1e-15);
  EXPECT_TRUE(rep.positive_somewhere);

  const auto neg = NonlinearitySpec::from_terms({{-1.0, 4.0}, {-1.0, 6.0}}, 4.0);
  EXPECT_FALSE(check_assumptions(neg, grid).positive_somewhere);
}

TEST(Assumptions, ScalingStrictAboveGamma0) {
  auto spec = NonlinearitySpec::power(1.0, 6.0);
  spec.gamma0 = 4.0;
  spec.gamma1 = spec.gamma2 = 6.0;
  const auto grid = amplitude_grid(0.1, 2.0, 10);
  const auto rep = check_assumptions(spec, grid);
  EXPECT_EQ(rep.scaling_min, 0.0);  // t = 1
  EXPECT_TRUE(rep.scaling_holds);
  EXPECT_FALSE(spec.kappa.has_value());
}

TEST(Nonlinearity, ValidationRejectsBadExponents) {
  auto s = NonlinearitySpec::kerr();
  s.gamma1 = 2.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = NonlinearitySpec::kerr();
  s.kappa = 7.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = NonlinearitySpec::kerr();
  s.terms[0].exponent = 2.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Nonlinearity, CustomPairIsUsed) {
  NonlinearitySpec s;
  s.custom_v = [](double a) { return std::log1p(a * a * a * a); };
  s.custom_dv = [](double a) { return 4 * a * a * a / (1 + a * a * a * a); };
  EXPECT_FALSE(s.is_power_sum());
  EXPECT_NEAR(s.V(1.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(std::abs(s.P(Complex{0, 1})), 2.0, 1e-15);
}

}  // namespace
}  // namespace dms
