#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "robustgame/closedform.hpp"
#include "robustgame/errors.hpp"
#include "robustgame/model.hpp"
#include "robustgame/quadrature.hpp"
#include "robustgame/random.hpp"

namespace robustgame {

/// Monte Carlo settings. Identical settings give bit-identical results for
/// any number of worker threads.
struct SimConfig {
  std::size_t paths = 200000;
  std::size_t steps = 128;
  std::uint64_t seed = 20180151;
  bool antithetic = false;
  /// Each step's Brownian increment is the sum of this many finer increments.
  /// Runs with equal steps * brownian_refinement share the same Brownian path.
  std::size_t brownian_refinement = 1;
  /// Upper bound on paths * steps * brownian_refinement.
  double budget = 4e9;
};

struct GameEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
  double elapsed = 0.0;  // seconds
};

/// Rate paths under Q^eta with the Brownian increments that drove them.
/// Row p holds path p; with antithetic sampling rows 2p and 2p+1 are a pair.
struct RatePaths {
  std::size_t rows = 0;
  std::size_t steps = 0;
  std::size_t n = 0;
  std::vector<double> times;        // steps + 1
  std::vector<double> rates;        // rows * (steps + 1)
  std::vector<double> increments;   // rows * steps * n

  double rate(std::size_t row, std::size_t k) const { return rates[row * (steps + 1) + k]; }
  double increment(std::size_t row, std::size_t k, std::size_t i) const {
    return increments[(row * steps + k) * n + i];
  }
};

/// Terminal samples, row layout as in RatePaths.
struct WealthSamples {
  std::vector<double> terminal_rate;
  std::vector<double> terminal_wealth;
};

struct MartingaleGapEstimate {
  Vector mean;       // E[S_T^i exp(-int r)] / S_0^i - 1
  Vector std_error;
  std::size_t paths = 0;
};

/// Worker count: explicit request, else ROBUSTGAME_WORKERS, else hardware threads.
inline unsigned resolve_workers(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ROBUSTGAME_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

template <typename Fn>
void parallel_blocks(std::size_t count, unsigned workers, Fn&& fn) {
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(count, w * chunk);
    const std::size_t end = std::min(count, begin + chunk);
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : pool) th.join();
}

inline void check_budget(const SimConfig& cfg) {
  if (cfg.paths == 0 || cfg.steps == 0 || cfg.brownian_refinement == 0) {
    throw std::invalid_argument("SimConfig: paths, steps and brownian_refinement must be >= 1");
  }
  const double work = static_cast<double>(cfg.paths) * static_cast<double>(cfg.steps) *
                      static_cast<double>(cfg.brownian_refinement);
  if (work > cfg.budget) {
    throw BudgetExceeded("simulation work " + std::to_string(work) + " exceeds budget " +
                         std::to_string(cfg.budget));
  }
}

// Deterministic per-step coefficients shared by all paths.
struct Step {
  double dt = 0.0;
  double decay = 1.0;      // exp(-int kappa)
  double drift = 0.0;      // decay * int E (b + a.eta)
  double residual = 0.0;   // sd of the rate noise not explained by the step's dW
  Vector rate_loading;     // decay * int E a / dt, multiplies dW
  Vector wealth_loading;   // Sigma^T pi at the left point
  double wealth_drift = 0.0;
};

struct Plan {
  std::size_t n = 0;
  std::size_t steps = 0;
  std::size_t refinement = 1;
  std::vector<double> times;
  std::vector<Step> step;

  std::size_t normals_per_path() const { return steps * refinement * n + steps; }
};

inline constexpr std::size_t kRateSubIntervals = 8;

// Over [s0, s1] with E(u) = exp(int_s0^u kappa), the integrating-factor
// process gives the exact transition
//   r1 = e^{-K} ( r0 + int E (b + a.eta) du + int E a.dW ),  K = int_s0^s1 kappa.
// The stochastic integral is split into its regression on the step's dW
// plus an independent Gaussian residual.
inline void rate_coefficients(const MarketModel& m, const VectorCurve& eta, double s0, double s1,
                              Step& st) {
  const std::size_t q = kRateSubIntervals;
  const double du = (s1 - s0) / static_cast<double>(q);
  std::vector<double> u(q + 1), growth(q + 1);
  double cumulative = 0.0;
  for (std::size_t j = 0; j <= q; ++j) {
    u[j] = (j == q) ? s1 : s0 + static_cast<double>(j) * du;
    if (j > 0) {
      cumulative += quadrature::simpson([&](double s) { return m.kappa(s); }, u[j - 1], u[j]);
    }
    growth[j] = std::exp(cumulative);
  }
  const auto dim = static_cast<Eigen::Index>(m.n);
  double drift_integral = 0.0;
  double variance_integral = 0.0;
  Vector loading_integral = Vector::Zero(dim);
  for (std::size_t j = 0; j <= q; ++j) {
    const double w = (j == 0 || j == q) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    const double e = growth[j];
    const Vector a = m.a(u[j]);
    drift_integral += w * e * (m.b(u[j]) + a.dot(eta(u[j])));
    variance_integral += w * e * e * a.squaredNorm();
    loading_integral += (w * e) * a;
  }
  const double scale = du / 3.0;
  drift_integral *= scale;
  variance_integral *= scale;
  loading_integral *= scale;

  st.dt = s1 - s0;
  st.decay = std::exp(-cumulative);
  st.drift = st.decay * drift_integral;
  st.rate_loading = (st.decay / st.dt) * loading_integral;
  const double explained = loading_integral.squaredNorm() / st.dt;
  st.residual = st.decay * std::sqrt(std::max(0.0, variance_integral - explained));
}

inline Plan make_plan(const MarketModel& m, const VectorCurve* pi, const VectorCurve& eta,
                      double t0, const SimConfig& cfg) {
  require_valid(m);
  if (!(t0 >= 0.0 && t0 < m.horizon)) throw DomainError("simulation start must lie in [0, T)");
  Plan plan;
  plan.n = m.n;
  plan.steps = cfg.steps;
  plan.refinement = cfg.brownian_refinement;
  plan.times = uniform_grid(t0, m.horizon, cfg.steps);
  plan.step.resize(cfg.steps);

  auto wealth_rate = [&](double s, Vector& loading) {
    loading = m.sigma(s).transpose() * (*pi)(s);
    return loading.dot(m.lambda(s) + eta(s)) - 0.5 * loading.squaredNorm();
  };
  for (std::size_t k = 0; k < cfg.steps; ++k) {
    Step& st = plan.step[k];
    const double s0 = plan.times[k];
    const double s1 = plan.times[k + 1];
    rate_coefficients(m, eta, s0, s1, st);
    if (pi != nullptr) {
      Vector right;
      const double m0 = wealth_rate(s0, st.wealth_loading);
      const double m1 = wealth_rate(s1, right);
      st.wealth_drift = 0.5 * st.dt * (m0 + m1);
    }
  }
  return plan;
}

// Per-path walk. `on_step(k, r_next, dW)` is called after each step; returns
// the terminal (r, ln X).
template <typename OnStep>
std::pair<double, double> walk(const Plan& plan, const random::NormalStream& rng, double sign,
                               double r0, double log_x0, bool with_wealth,
                               std::vector<double>& z, Vector& dw, OnStep&& on_step) {
  const std::size_t n = plan.n;
  const std::size_t fine = plan.steps * plan.refinement;
  z.resize(plan.normals_per_path());
  rng.fill(z.begin(), z.size());

  double r = r0;
  double log_x = log_x0;
  for (std::size_t k = 0; k < plan.steps; ++k) {
    const Step& st = plan.step[k];
    const double sub_sd = std::sqrt(st.dt / static_cast<double>(plan.refinement));
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < plan.refinement; ++j) sum += z[(k * plan.refinement + j) * n + i];
      dw[static_cast<Eigen::Index>(i)] = sign * sub_sd * sum;
    }
    const double extra = sign * z[fine * n + k];
    const double r_next =
        st.decay * r + st.drift + st.rate_loading.dot(dw) + st.residual * extra;
    if (with_wealth) {
      log_x += 0.5 * st.dt * (r + r_next) + st.wealth_drift + st.wealth_loading.dot(dw);
    }
    r = r_next;
    on_step(k, r, dw);
  }
  return {r, log_x};
}

}  // namespace detail

/// Short-rate paths under Q^eta, with the Brownian increments that drive them.
inline RatePaths simulate_rate_paths(const MarketModel& m, const VectorCurve& eta,
                                     const StatePoint& s0, const SimConfig& cfg,
                                     unsigned workers = 0) {
  detail::check_budget(cfg);
  const detail::Plan plan = detail::make_plan(m, nullptr, eta, s0.t, cfg);
  const std::size_t per = cfg.antithetic ? 2 : 1;
  RatePaths out;
  out.rows = cfg.paths * per;
  out.steps = cfg.steps;
  out.n = m.n;
  out.times = plan.times;
  out.rates.assign(out.rows * (cfg.steps + 1), 0.0);
  out.increments.assign(out.rows * cfg.steps * m.n, 0.0);

  detail::parallel_blocks(cfg.paths, resolve_workers(workers), [&](std::size_t begin, std::size_t end) {
    std::vector<double> z;
    Vector dw(static_cast<Eigen::Index>(m.n));
    for (std::size_t p = begin; p < end; ++p) {
      const random::NormalStream rng(cfg.seed, p);
      for (std::size_t s = 0; s < per; ++s) {
        const std::size_t row = p * per + s;
        out.rates[row * (cfg.steps + 1)] = s0.r;
        detail::walk(plan, rng, s == 0 ? 1.0 : -1.0, s0.r, 0.0, false, z, dw,
                     [&](std::size_t k, double r, const Vector& inc) {
                       out.rates[row * (cfg.steps + 1) + k + 1] = r;
                       for (std::size_t i = 0; i < m.n; ++i) {
                         out.increments[(row * cfg.steps + k) * m.n + i] =
                             inc[static_cast<Eigen::Index>(i)];
                       }
                     });
      }
    }
  });
  return out;
}

/// Terminal wealth of the strategy pi under Q^eta (log-exact scheme, shared
/// Brownian motion with the rate).
inline WealthSamples simulate_wealth(const MarketModel& m, const VectorCurve& pi,
                                     const VectorCurve& eta, const StatePoint& s0,
                                     const SimConfig& cfg, unsigned workers = 0) {
  if (!(s0.x > 0.0)) throw DomainError("simulate_wealth: initial wealth must be positive");
  detail::check_budget(cfg);
  const detail::Plan plan = detail::make_plan(m, &pi, eta, s0.t, cfg);
  const std::size_t per = cfg.antithetic ? 2 : 1;
  WealthSamples out;
  out.terminal_rate.assign(cfg.paths * per, 0.0);
  out.terminal_wealth.assign(cfg.paths * per, 0.0);
  const double log_x0 = std::log(s0.x);

  detail::parallel_blocks(cfg.paths, resolve_workers(workers), [&](std::size_t begin, std::size_t end) {
    std::vector<double> z;
    Vector dw(static_cast<Eigen::Index>(m.n));
    for (std::size_t p = begin; p < end; ++p) {
      const random::NormalStream rng(cfg.seed, p);
      for (std::size_t s = 0; s < per; ++s) {
        const auto [r, lx] = detail::walk(plan, rng, s == 0 ? 1.0 : -1.0, s0.r, log_x0, true, z,
                                          dw, [](std::size_t, double, const Vector&) {});
        out.terminal_rate[p * per + s] = r;
        out.terminal_wealth[p * per + s] = std::exp(lx);
      }
    }
  });
  return out;
}

namespace detail {

inline std::pair<double, double> mean_and_error(const std::vector<double>& samples) {
  const auto count = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / count;
  if (samples.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (count - 1.0) / count)};
}

}  // namespace detail

/// J^{pi,eta}(x, r, t) = E^eta[X_T^gamma / gamma], simulated directly under Q^eta.
inline GameEstimate estimate_J(const MarketModel& m, const VectorCurve& pi, const VectorCurve& eta,
                               const StatePoint& s0, const SimConfig& cfg, unsigned workers = 0) {
  const auto started = std::chrono::steady_clock::now();
  const WealthSamples w = simulate_wealth(m, pi, eta, s0, cfg, workers);
  const std::size_t per = cfg.antithetic ? 2 : 1;
  std::vector<double> samples(cfg.paths);
  for (std::size_t p = 0; p < cfg.paths; ++p) {
    double u = 0.0;
    for (std::size_t s = 0; s < per; ++s) {
      u += std::pow(w.terminal_wealth[p * per + s], m.gamma) / m.gamma;
    }
    samples[p] = u / static_cast<double>(per);
  }
  GameEstimate est;
  std::tie(est.mean, est.std_error) = detail::mean_and_error(samples);
  est.paths = cfg.paths;
  est.elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return est;
}

/// Monte Carlo estimate of E^eta[S_T^i exp(-int_0^T r)] / S_0^i - 1 for each
/// asset, T = `maturity`. The discount factor cancels the rate in the asset
/// drift, so the discounted log-price is advanced directly:
///   d ln S~^i = ((Sigma (lambda + eta))_i - |sigma_i|^2 / 2) dt + sigma_i . dW.
inline MartingaleGapEstimate martingale_gap_mc(const MarketModel& m, const VectorCurve& eta,
                                               double maturity, const SimConfig& cfg,
                                               unsigned workers = 0) {
  require_valid(m);
  detail::check_budget(cfg);
  if (!(maturity > 0.0 && maturity <= m.horizon + detail::horizon_slack(m.horizon))) {
    throw DomainError("martingale_gap_mc: maturity must lie in (0, T]");
  }
  const std::size_t n = m.n;
  const auto dim = static_cast<Eigen::Index>(n);
  const auto times = uniform_grid(0.0, std::min(maturity, m.horizon), cfg.steps);

  auto excess = [&](double s) {
    const Matrix sig = m.sigma(s);
    Vector e = sig * (m.lambda(s) + eta(s));
    for (Eigen::Index i = 0; i < dim; ++i) e[i] -= 0.5 * sig.row(i).squaredNorm();
    return e;
  };
  std::vector<Matrix> loadings(cfg.steps);
  std::vector<Vector> drifts(cfg.steps);
  for (std::size_t k = 0; k < cfg.steps; ++k) {
    const double dt = times[k + 1] - times[k];
    loadings[k] = m.sigma(times[k]);
    drifts[k] = 0.5 * dt * (excess(times[k]) + excess(times[k + 1]));
  }

  const std::size_t per = cfg.antithetic ? 2 : 1;
  const std::size_t fine = cfg.steps * cfg.brownian_refinement;
  std::vector<double> samples(cfg.paths * n);
  detail::parallel_blocks(cfg.paths, resolve_workers(workers), [&](std::size_t begin, std::size_t end) {
    std::vector<double> z(fine * n);
    Vector dw(dim), log_s(dim);
    for (std::size_t p = begin; p < end; ++p) {
      const random::NormalStream rng(cfg.seed, p);
      rng.fill(z.begin(), z.size());
      Vector acc = Vector::Zero(dim);
      for (std::size_t s = 0; s < per; ++s) {
        const double sign = s == 0 ? 1.0 : -1.0;
        log_s.setZero();
        for (std::size_t k = 0; k < cfg.steps; ++k) {
          const double dt = times[k + 1] - times[k];
          const double sub_sd = std::sqrt(dt / static_cast<double>(cfg.brownian_refinement));
          for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < cfg.brownian_refinement; ++j) {
              sum += z[(k * cfg.brownian_refinement + j) * n + i];
            }
            dw[static_cast<Eigen::Index>(i)] = sign * sub_sd * sum;
          }
          log_s += drifts[k] + loadings[k] * dw;
        }
        acc += (log_s.array().exp() - 1.0).matrix();
      }
      acc /= static_cast<double>(per);
      for (std::size_t i = 0; i < n; ++i) samples[p * n + i] = acc[static_cast<Eigen::Index>(i)];
    }
  });

  MartingaleGapEstimate out;
  out.paths = cfg.paths;
  out.mean = Vector::Zero(dim);
  out.std_error = Vector::Zero(dim);
  std::vector<double> column(cfg.paths);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < cfg.paths; ++p) column[p] = samples[p * n + i];
    const auto [mean, se] = detail::mean_and_error(column);
    out.mean[static_cast<Eigen::Index>(i)] = mean;
    out.std_error[static_cast<Eigen::Index>(i)] = se;
  }
  return out;
}

}  // namespace robustgame
