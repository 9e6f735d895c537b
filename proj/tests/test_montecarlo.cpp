#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace robustgame;
using fixtures::vec;

namespace {

VectorCurve constant_vector(double v, double T = 1.0) { return VectorCurve::constant(vec({v}), T); }

SimConfig small_config(std::size_t paths, std::size_t steps, std::uint64_t seed = 99) {
  SimConfig cfg;
  cfg.paths = paths;
  cfg.steps = steps;
  cfg.seed = seed;
  return cfg;
}

struct Moments {
  double mean;
  double variance;
  double std_error;
};

Moments moments(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double var = ss / (n - 1.0);
  return {mean, var, std::sqrt(var / n)};
}

MarketModel no_rate_dynamics(double lambda = 0.3, double sigma = 0.2) {
  return fixtures::constant_model(0.5, 0.0, 0.0, vec({lambda}), vec({0.0}),
                                  Matrix::Constant(1, 1, sigma));
}

}  // namespace

TEST(RatePaths, ZeroDynamicsStayPut) {
  const auto m = no_rate_dynamics();
  const auto paths = simulate_rate_paths(m, constant_vector(0.0), {1.0, 0.03, 0.0}, small_config(50, 16));
  for (double r : paths.rates) EXPECT_EQ(r, 0.03);
}

TEST(RatePaths, DeterministicOdeOracle) {
  const double kappa = 0.3, b = 0.02, r0 = 0.07;
  const auto m = fixtures::constant_model(0.5, kappa, b, vec({0.3}), vec({0.0}),
                                          Matrix::Constant(1, 1, 0.2));
  const auto paths = simulate_rate_paths(m, constant_vector(-0.3), {1.0, r0, 0.0}, small_config(4, 32));
  for (std::size_t row = 0; row < paths.rows; ++row) {
    for (std::size_t k = 0; k <= paths.steps; ++k) {
      const double s = paths.times[k];
      const double exact = std::exp(-kappa * s) * (r0 + (b / kappa) * (std::exp(kappa * s) - 1.0));
      EXPECT_NEAR(paths.rate(row, k), exact, 1e-10);
    }
  }
}

TEST(RatePaths, OrnsteinUhlenbeckMoments) {
  const double kappa = 0.5, b = 0.02, a = 0.02, r0 = 0.01;
  const auto m = fixtures::constant_model(0.5, kappa, b, vec({0.3}), vec({a}),
                                          Matrix::Constant(1, 1, 0.2));
  const auto paths = simulate_rate_paths(m, constant_vector(0.0), {1.0, r0, 0.0}, small_config(1000000, 2));
  std::vector<double> terminal(paths.rows);
  for (std::size_t row = 0; row < paths.rows; ++row) terminal[row] = paths.rate(row, paths.steps);
  const auto mo = moments(terminal);
  const double mean = std::exp(-kappa) * r0 + (b / kappa) * (1.0 - std::exp(-kappa));
  const double var = a * a * (1.0 - std::exp(-2.0 * kappa)) / (2.0 * kappa);
  EXPECT_LT(std::abs(mo.mean - mean), 4.0 * mo.std_error);
  EXPECT_LT(std::abs(mo.variance / var - 1.0), 0.02);
}

TEST(RatePaths, KernelShiftsDrift) {
  // Under Q^eta the rate drift gains a.eta.
  const double kappa = 0.5, a = 0.02;
  const auto m = fixtures::constant_model(0.5, kappa, 0.0, vec({0.3}), vec({a}),
                                          Matrix::Constant(1, 1, 0.2));
  const auto paths =
      simulate_rate_paths(m, constant_vector(-2.0), {1.0, 0.0, 0.0}, small_config(200000, 4));
  std::vector<double> terminal(paths.rows);
  for (std::size_t row = 0; row < paths.rows; ++row) terminal[row] = paths.rate(row, paths.steps);
  const auto mo = moments(terminal);
  const double mean = (-2.0 * a / kappa) * (1.0 - std::exp(-kappa));
  EXPECT_LT(std::abs(mo.mean - mean), 4.0 * mo.std_error);
}

TEST(Wealth, BankAccountOnly) {
  const auto m = fixtures::reference();
  const auto cfg = small_config(200, 64);
  const auto zero = constant_vector(0.0);
  const auto eta = constant_vector(-0.1);
  const StatePoint s0{2.0, 0.03, 0.0};
  const auto paths = simulate_rate_paths(m, eta, s0, cfg);
  const auto wealth = simulate_wealth(m, zero, eta, s0, cfg);
  for (std::size_t row = 0; row < paths.rows; ++row) {
    double integral = 0.0;
    for (std::size_t k = 0; k < paths.steps; ++k) {
      integral += 0.5 * (paths.times[k + 1] - paths.times[k]) *
                  (paths.rate(row, k) + paths.rate(row, k + 1));
    }
    EXPECT_NEAR(wealth.terminal_wealth[row], 2.0 * std::exp(integral), 1e-13);
    EXPECT_EQ(wealth.terminal_rate[row], paths.rate(row, paths.steps));
  }
}

TEST(Wealth, GeometricBrownianMoment) {
  const double pi = 0.8, sigma = 0.25, lambda = 0.3;
  const auto m = no_rate_dynamics(lambda, sigma);
  const auto w = simulate_wealth(m, constant_vector(pi), constant_vector(0.0), {1.0, 0.0, 0.0},
                                 small_config(1000000, 4));
  const auto mo = moments(w.terminal_wealth);
  EXPECT_LT(std::abs(mo.mean - std::exp(pi * sigma * lambda)), 4.0 * mo.std_error);
}

TEST(Wealth, AlwaysPositive) {
  const auto m = fixtures::reference();
  const auto w = simulate_wealth(m, constant_vector(25.0), constant_vector(3.0), {1e-3, 0.5, 0.2},
                                 small_config(20000, 16));
  for (double x : w.terminal_wealth) ASSERT_GT(x, 0.0);
  EXPECT_THROW(simulate_wealth(m, constant_vector(0.0), constant_vector(0.0), {0.0, 0.0, 0.0},
                               small_config(1, 1)),
               DomainError);
}

TEST(Wealth, SharesNoiseWithRate) {
  // pi Sigma = a: wealth noise loads on the same direction as the rate.
  const double a = 0.02, sigma = 0.2;
  const auto m = fixtures::constant_model(0.5, 0.0, 0.01, vec({0.3}), vec({a}),
                                          Matrix::Constant(1, 1, sigma), 0.5);
  const auto pi = VectorCurve::constant(vec({a / sigma}), 0.5);
  const auto eta = VectorCurve::constant(vec({0.0}), 0.5);
  const auto cfg = small_config(20000, 32);
  const StatePoint s0{1.0, 0.03, 0.0};
  const auto paths = simulate_rate_paths(m, eta, s0, cfg);
  const auto w = simulate_wealth(m, pi, eta, s0, cfg);
  std::vector<double> lx(paths.rows), noise(paths.rows);
  for (std::size_t row = 0; row < paths.rows; ++row) {
    double s = 0.0;
    for (std::size_t k = 0; k < paths.steps; ++k) s += a * paths.increment(row, k, 0);
    noise[row] = s;
    lx[row] = std::log(w.terminal_wealth[row]);
  }
  const auto ml = moments(lx), mn = moments(noise);
  double cov = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) cov += (lx[i] - ml.mean) * (noise[i] - mn.mean);
  cov /= static_cast<double>(lx.size() - 1);
  EXPECT_GT(cov / std::sqrt(ml.variance * mn.variance), 0.99);
}

TEST(EstimateJ, DeterministicBankAccount) {
  const auto m = no_rate_dynamics();
  const auto est = estimate_J(m, constant_vector(0.0), constant_vector(0.0), {1.0, 0.03, 0.0},
                              small_config(1000, 8));
  EXPECT_NEAR(est.mean, 2.0 * std::exp(0.015), 1e-13);
  EXPECT_NEAR(est.mean, 2.030226, 1e-6);
  EXPECT_LT(est.std_error, 1e-13);
  EXPECT_EQ(est.paths, 1000u);
}

TEST(EstimateJ, MatchesValueAtSaddle) {
  const auto m = fixtures::reference();
  const auto sol = solve(m);
  const StatePoint s0{1.0, 0.03, 0.0};
  const double v = value_function(m, sol, s0);
  const auto cfg = small_config(20000, 64);
  const auto est = estimate_J(m, sol.pi_star, sol.eta_star, s0, cfg);
  EXPECT_LE(std::abs(est.mean - v), 3.0 * est.std_error);
  for (double d : {-0.2, 0.2}) {
    const auto eta = VectorCurve::sample(sol.f.times(), [&](double t) { return Vector(sol.eta_star(t).array() + d); });
    const auto e = estimate_J(m, sol.pi_star, eta, s0, cfg);
    EXPECT_GE(e.mean, v - 3.0 * e.std_error);
    const auto pi = VectorCurve::sample(sol.f.times(), [&](double t) { return Vector(sol.pi_star(t).array() + 5.0 * d); });
    const auto p = estimate_J(m, pi, sol.eta_star, s0, cfg);
    EXPECT_LE(p.mean, v + 3.0 * p.std_error);
  }
}

TEST(EstimateJ, IndependentOfWorkerCount) {
  const auto m = fixtures::stock_bond();
  const auto sol = solve(m, 256);
  const StatePoint s0{1.0, 0.02, 0.1};
  auto cfg = small_config(3001, 16);
  cfg.antithetic = true;
  const auto one = estimate_J(m, sol.pi_star, sol.eta_star, s0, cfg, 1);
  const auto four = estimate_J(m, sol.pi_star, sol.eta_star, s0, cfg, 4);
  EXPECT_EQ(one.mean, four.mean);
  EXPECT_EQ(one.std_error, four.std_error);
  const auto again = estimate_J(m, sol.pi_star, sol.eta_star, s0, cfg, 3);
  EXPECT_EQ(one.mean, again.mean);
  const auto r1 = simulate_rate_paths(m, sol.eta_star, s0, cfg, 1);
  const auto r4 = simulate_rate_paths(m, sol.eta_star, s0, cfg, 4);
  EXPECT_EQ(r1.rates, r4.rates);
  EXPECT_EQ(r1.increments, r4.increments);
  const auto g1 = martingale_gap_mc(m, sol.eta_star, 1.0, cfg, 1);
  const auto g4 = martingale_gap_mc(m, sol.eta_star, 1.0, cfg, 4);
  EXPECT_EQ(g1.mean, g4.mean);
}

TEST(EstimateJ, SeedChangesEstimate) {
  const auto m = fixtures::reference();
  const auto sol = solve(m, 256);
  const auto pi = VectorCurve::constant(vec({1.0}), 1.0);
  const auto a = estimate_J(m, pi, sol.eta_star, {1.0, 0.03, 0.0}, small_config(2000, 8, 1));
  const auto b = estimate_J(m, pi, sol.eta_star, {1.0, 0.03, 0.0}, small_config(2000, 8, 2));
  EXPECT_NE(a.mean, b.mean);
}

TEST(EstimateJ, RefinementSharesBrownianPath) {
  const auto m = fixtures::reference();
  const auto eta = constant_vector(0.0);
  auto coarse = small_config(10, 8);
  coarse.brownian_refinement = 4;
  const auto fine = small_config(10, 32);
  const auto pc = simulate_rate_paths(m, eta, {1.0, 0.03, 0.0}, coarse);
  const auto pf = simulate_rate_paths(m, eta, {1.0, 0.03, 0.0}, fine);
  for (std::size_t row = 0; row < 10; ++row) {
    for (std::size_t k = 0; k < 8; ++k) {
      double sum = 0.0;
      for (std::size_t j = 0; j < 4; ++j) sum += pf.increment(row, 4 * k + j, 0);
      EXPECT_NEAR(pc.increment(row, k, 0), sum, 1e-14);
    }
  }
}

TEST(EstimateJ, DiscretizationConverges) {
  // A large, time-varying pi makes the left-point noise loading the leading
  // error; without rate noise that bias dominates the common-random-number noise.
  const auto m =
      fixtures::constant_model(0.5, 0.1, 0.02, vec({0.3}), vec({0.0}), Matrix::Constant(1, 1, 0.2));
  const VectorCurve pi({0.0, 1.0}, {vec({3.0}), vec({9.0})});
  const auto eta = constant_vector(-0.3);
  std::vector<double> est;
  for (std::size_t steps : {16u, 32u, 64u, 128u}) {
    auto cfg = small_config(20000, steps, 5);
    cfg.brownian_refinement = 128 / steps;
    est.push_back(estimate_J(m, pi, eta, {1.0, 0.03, 0.0}, cfg).mean);
  }
  for (std::size_t i = 0; i + 2 < est.size(); ++i) {
    const double ratio = std::abs(est[i] - est[i + 1]) / std::abs(est[i + 1] - est[i + 2]);
    EXPECT_GT(ratio, 1.6);
    EXPECT_LT(ratio, 2.5);
  }
}

TEST(EstimateJ, BudgetCheckedFirst) {
  const auto m = fixtures::reference();
  auto cfg = small_config(1000000, 1000);
  cfg.budget = 1e8;
  EXPECT_THROW(estimate_J(m, constant_vector(0.0), constant_vector(0.0), {1.0, 0.0, 0.0}, cfg),
               BudgetExceeded);
  EXPECT_THROW(martingale_gap_mc(m, constant_vector(0.0), 1.0, cfg), BudgetExceeded);
}

TEST(MartingaleGapMc, MartingaleMeasureHasNoDrift) {
  const auto m = fixtures::stock_bond();
  const auto minus_lambda =
      VectorCurve::sample(uniform_grid(0.0, 1.0, 8), [&](double t) { return Vector(-m.lambda(t)); });
  auto cfg = small_config(50000, 32);
  const auto est = martingale_gap_mc(m, minus_lambda, 1.0, cfg);
  for (Eigen::Index i = 0; i < 2; ++i) {
    EXPECT_LE(std::abs(est.mean[i]), 3.0 * est.std_error[i]);
  }
}

TEST(MartingaleGapMc, WorstCaseMeasureDrifts) {
  const auto m = fixtures::reference();
  const auto sol = solve(m, 512);
  auto cfg = small_config(50000, 32);
  cfg.antithetic = true;
  const auto est = martingale_gap_mc(m, sol.eta_star, 1.0, cfg);
  EXPECT_GT(std::abs(est.mean[0]), 3.0 * est.std_error[0]);
  // Sign of -(f / gamma) Sigma a.
  EXPECT_LT(est.mean[0], 0.0);
}

TEST(MartingaleGapMc, NoRateVolatilityNoDrift) {
  const auto m =
      fixtures::constant_model(0.5, 0.1, 0.02, vec({0.3}), vec({0.0}), Matrix::Constant(1, 1, 0.2));
  const auto sol = solve(m, 128);
  auto cfg = small_config(50000, 32);
  cfg.antithetic = true;
  const auto est = martingale_gap_mc(m, sol.eta_star, 1.0, cfg);
  EXPECT_LE(std::abs(est.mean[0]), 3.0 * est.std_error[0] + 1e-15);
}
