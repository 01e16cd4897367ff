#include <cmath>
#include <limits>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dms/minimizer.hpp"

namespace dms {
namespace {

SolveConfig tight() {
  SolveConfig c;
  c.grad_tol = 1e-10;
  return c;
}

Problem model(double d_av, double lambda) {
  PiecewiseProfile p;
  p.period = 2.0;
  p.segments = {{1.0, 1.0}, {1.0, -1.0}};
  Problem pr;
  pr.d_av = d_av;
  pr.lambda = lambda;
  pr.measure = measure_from_profile(p, 32);
  pr.method.variant = EvolutionVariant::spectral_ring;
  return pr;
}

// Maximize Σ|f|⁴ over real unit vectors on three sites by a fine grid in
// spherical angles; the maximum is 1 (all mass on one site).
TEST(Minimizer, BruteForceThreeSiteOracle) {
  double best = 0.0;
  const int n = 200;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= 2 * n; ++j) {
      const double th = M_PI * i / n, ph = M_PI * j / n;
      const double a = std::sin(th) * std::cos(ph), b = std::sin(th) * std::sin(ph), c = std::cos(th);
      best = std::max(best, std::pow(a, 4) + std::pow(b, 4) + std::pow(c, 4));
    }
  }
  EXPECT_NEAR(best, 1.0, 1e-12);
}

TEST(Minimizer, ExactlySolvableDiracKerr) {
  for (double lambda : {1.0, 2.0, 4.0}) {
    Problem pr;
    pr.lambda = lambda;
    const auto r = minimize(pr, tight());
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.status, SolveStatus::converged);
    EXPECT_NEAR(r.energy, -lambda * lambda / 4, 1e-6 * lambda * lambda / 4);
    EXPECT_NEAR(r.omega, -lambda, 1e-6 * lambda);
    EXPECT_LT(r.residual, 1e-9);
    EXPECT_NEAR(std::norm(r.field[peak_site(r.field)]), lambda, 1e-8);
  }
}

TEST(Minimizer, NegativeMultiplierBelowEnergyRatio) {
  Problem pr;
  pr.d_av = 1.0;
  pr.lambda = 6.0;
  const auto r = minimize(pr, tight());
  ASSERT_TRUE(r.converged);
  EXPECT_LT(r.energy, 0.0);
  EXPECT_LT(r.omega, 2 * r.energy / pr.lambda);
}

TEST(Minimizer, ContractOnModelCase) {
  const auto pr = model(1.0, 4.0);
  auto cfg = tight();
  const auto starts = initial_fields(pr, cfg);
  const auto r = minimize_from(pr, cfg, starts.front().second, starts.front().first);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(power_sum(r.field, 2.0), 4.0, 1e-10);
  EXPECT_LE(r.energy, hamiltonian(pr, starts.front().second.resized(r.field.radius())));
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    EXPECT_LE(r.history[i].energy, r.history[i - 1].energy + 1e-13 * std::abs(r.history[i - 1].energy));
  }
  EXPECT_LT(el_residual(pr, r.field, r.omega), 10 * cfg.grad_tol);
  EXPECT_LT(r.omega, 2 * r.energy / pr.lambda);

  const double e_shift = hamiltonian(pr, shifted(r.field, 1));
  const double e_phase = hamiltonian(pr, std::polar(1.0, 1.3) * r.field);
  EXPECT_NEAR(e_phase, r.energy, 1e-10 * std::abs(r.energy));
  EXPECT_NEAR(e_shift, r.energy, 1e-10 * std::abs(r.energy));
}

TEST(Minimizer, ReproducibleHistory) {
  const auto pr = model(0.5, 2.0);
  auto cfg = tight();
  cfg.seed = 99;
  const auto a = minimize(pr, cfg);
  const auto b = minimize(pr, cfg);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].energy, b.history[i].energy);
    EXPECT_EQ(a.history[i].grad_norm, b.history[i].grad_norm);
  }
  EXPECT_EQ(a.field, b.field);
}

TEST(Minimizer, SubThresholdReportsNoNegativeEnergy) {
  Problem pr;
  pr.d_av = 1.0;
  pr.lambda = 0.5;
  pr.nonlinearity = NonlinearitySpec::power(1.0 / 6.0, 6.0);
  auto cfg = tight();
  cfg.max_iters = 300;
  cfg.restarts = 0;
  cfg.max_box_radius = 200;
  const auto r = minimize(pr, cfg);
  EXPECT_EQ(r.status, SolveStatus::no_negative_energy);
  EXPECT_FALSE(r.status == SolveStatus::converged);
}

TEST(EnergyCurve, PurePowerClosedFormAndSubadditivity) {
  Problem pr;
  const std::vector<double> grid{0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
  const auto c = energy_curve(pr, grid, tight());
  ASSERT_EQ(c.points.size(), grid.size());
  for (const auto& p : c.points) {
    EXPECT_NEAR(p.energy, -p.lambda * p.lambda / 4, 1e-6 * p.lambda * p.lambda);
  }
  EXPECT_TRUE(c.positive_energy.empty());
  EXPECT_TRUE(c.monotone_breaks.empty());
  EXPECT_FALSE(c.pairs.empty());
  EXPECT_TRUE(c.strict_failures.empty());
  const auto j = to_json(c);
  EXPECT_EQ(j["points"].size(), grid.size());
  EXPECT_THROW(energy_curve(pr, {2.0, 1.0}, tight()), std::invalid_argument);
}

TEST(Minimizer, JsonRecord) {
  Problem pr;
  pr.lambda = 2.0;
  const auto r = minimize(pr, tight());
  const auto j = to_json(r, pr, "field.txt");
  EXPECT_EQ(j["field"], "field.txt");
  EXPECT_DOUBLE_EQ(j["E"].get<double>(), r.energy);
  EXPECT_EQ(j["status"], "converged");
}

TEST(Minimizer, ConfigValidation) {
  SolveConfig c;
  c.backtrack = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.grad_tol = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace dms
