// Command line front end: solve | certify | simulate | restricted.
//
// Exit codes: 0 success/pass, 1 certification failure, 2 invalid config,
// 3 simulation budget exceeded, 4 unexpected internal error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "robustgame/config.hpp"
#include "robustgame/robustgame.hpp"

namespace fs = std::filesystem;
using namespace robustgame;
using config::json;

namespace {

enum ExitCode : int { kOk = 0, kCertifyFailed = 1, kBadConfig = 2, kBudget = 3, kInternal = 4 };

struct Options {
  std::string config_path;
  std::optional<std::string> output;
  std::optional<std::size_t> paths;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> nodes;
  bool dump_paths = false;
};

config::RunConfig load(const Options& opt) {
  std::ifstream in(opt.config_path);
  if (!in) throw config::ConfigError({"cannot open config file '" + opt.config_path + "'"});
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw config::ConfigError({std::string("malformed JSON: ") + e.what()});
  }
  if (opt.paths) j["sim"]["paths"] = *opt.paths;
  if (opt.seed) j["sim"]["seed"] = *opt.seed;
  if (opt.nodes) j["quadrature_nodes"] = *opt.nodes;
  if (opt.output) j["output_dir"] = *opt.output;
  return config::parse_run_config(j);
}

fs::path prepare_output(const config::RunConfig& c) {
  fs::path dir(c.output_dir);
  fs::create_directories(dir);
  return dir;
}

template <typename Curve>
void write_curve(const fs::path& dir, const std::string& file, const std::string& column,
                 const Curve& curve) {
  std::ofstream os(dir / file);
  config::write_csv(os, column, curve);
}

void write_json(const fs::path& dir, const std::string& file, const json& j) {
  std::ofstream os(dir / file);
  os << j.dump(2) << "\n";
}

json state_json(const StatePoint& s) { return {{"x", s.x}, {"r", s.r}, {"t", s.t}}; }

json certificate_json(const SaddleCertificate& c) {
  json j = {{"passed", c.passed},
            {"degenerate", c.degenerate},
            {"max_violation_upper", c.max_violation_upper},
            {"max_violation_lower", c.max_violation_lower},
            {"h_at_saddle_max_abs", c.h_at_saddle_max_abs},
            {"evaluations", c.evaluations},
            {"tolerances", {{"slack", kSaddleSlackTolerance}, {"saddle_value", kSaddleValueTolerance}}},
            {"grid",
             {{"t_points", c.grid.t_points},
              {"r_points", c.grid.r_points},
              {"pi_points", c.grid.pi_points},
              {"eta_points", c.grid.eta_points},
              {"r_range", {c.grid.r_lo, c.grid.r_hi}},
              {"pi_half_width", c.grid.pi_half_width},
              {"eta_half_width", c.grid.eta_half_width}}}};
  if (c.degenerate) j["note"] = "a == 0: deterministic-rate limit, eta* = -lambda and pi* = 0";
  if (c.worst) {
    j["worst"] = {{"t", c.worst->t},
                  {"r", c.worst->r},
                  {"pi", config::to_json(c.worst->pi)},
                  {"eta", config::to_json(c.worst->eta)},
                  {"violation", c.worst->violation}};
  }
  return j;
}

json isaacs_json(const IsaacsReport& r) {
  return {{"passed", r.passed},
          {"max_gap", r.max_gap},
          {"max_abs_value", r.max_abs_value},
          {"tolerance", kIsaacsTolerance},
          {"gamma_grid_size", r.gamma_grid_size},
          {"pi_grid_size", r.pi_grid_size},
          {"t_points", r.grid.t_points},
          {"r_points", r.grid.r_points}};
}

int cmd_solve(const config::RunConfig& c) {
  const auto dir = prepare_output(c);
  const SolutionPair sol = solve(c.model, c.quadrature_nodes);
  write_curve(dir, "f.csv", "f", sol.f);
  write_curve(dir, "g.csv", "g", sol.g);
  write_curve(dir, "pi_star.csv", "pi_star", sol.pi_star);
  write_curve(dir, "eta_star.csv", "eta_star", sol.eta_star);

  const double t0 = c.initial_state.t;
  json j = {{"config_hash", c.hash},
            {"model_hash", c.model_hash},
            {"quadrature_nodes", sol.quadrature_nodes},
            {"state", state_json(c.initial_state)},
            {"value", value_function(c.model, sol, c.initial_state)},
            {"f", sol.f(t0)},
            {"g", sol.g(t0)},
            {"pi_star", config::to_json(sol.pi_star(t0))},
            {"eta_star", config::to_json(sol.eta_star(t0))},
            {"martingale_gap", config::to_json(martingale_gap(c.model, sol.eta_star, t0))}};
  write_json(dir, "value.json", j);
  std::cout << "V(" << c.initial_state.x << ", " << c.initial_state.r << ", " << t0
            << ") = " << config::format_number(j["value"].get<double>()) << "\n";
  return kOk;
}

int cmd_certify(const config::RunConfig& c) {
  const auto dir = prepare_output(c);
  const SolutionPair sol = solve(c.model, c.quadrature_nodes);
  const Candidate cand =
      c.robust ? saddle_candidate(c.model, sol) : traditional_candidate(c.model, sol);
  const SaddleCertificate cert = certify_candidate(c.model, sol, cand, c.certify);

  json j = {{"config_hash", c.hash},
            {"candidate", c.robust ? "robust" : "traditional"},
            {"certificate", certificate_json(cert)}};
  bool passed = cert.passed;
  if (c.gamma_set) {
    const SolutionPair rsol = solve_restricted(c.model, *c.gamma_set, c.quadrature_nodes);
    const SaddleCertificate rcert = certify_saddle(c.model, rsol, c.certify);
    const IsaacsReport isaacs =
        check_isaacs_equality(c.model, rsol.f, rsol.g, *c.gamma_set, c.isaacs);
    j["restricted_certificate"] = certificate_json(rcert);
    j["isaacs"] = isaacs_json(isaacs);
    passed = passed && rcert.passed && isaacs.passed;
  }
  j["passed"] = passed;
  write_json(dir, "certificate.json", j);

  if (!passed) {
    std::cerr << "certification failed\n";
    if (cert.worst) {
      std::cerr << "  worst grid point: t = " << cert.worst->t << ", r = " << cert.worst->r
                << ", pi = " << cert.worst->pi.transpose() << ", eta = " << cert.worst->eta.transpose()
                << ", violation = " << cert.worst->violation << "\n";
    }
    return kCertifyFailed;
  }
  std::cout << "certificate passed (max |H*| = " << cert.h_at_saddle_max_abs << ")\n";
  return kOk;
}

VectorCurve shifted(const VectorCurve& c, double shift) {
  std::vector<Vector> values = c.values();
  for (auto& v : values) v.array() += shift;
  return VectorCurve(c.times(), std::move(values), c.interpolation());
}

json estimate_json(const GameEstimate& e) {
  return {{"mean", e.mean}, {"std_error", e.std_error}, {"paths", e.paths}};
}

json gap_json(const MartingaleGapEstimate& g) {
  bool rejects = false;
  for (Eigen::Index i = 0; i < g.mean.size(); ++i) {
    rejects = rejects || std::abs(g.mean[i]) > 3.0 * g.std_error[i];
  }
  return {{"mean", config::to_json(g.mean)},
          {"std_error", config::to_json(g.std_error)},
          {"rejects_zero_drift", rejects}};
}

int cmd_simulate(const config::RunConfig& c, bool dump_paths) {
  try {
    detail::check_budget(c.sim);
  } catch (const BudgetExceeded& e) {
    std::cerr << e.what() << "\n";
    return kBudget;
  }
  const auto dir = prepare_output(c);
  const SolutionPair sol = solve(c.model, c.quadrature_nodes);
  const StatePoint& s0 = c.initial_state;
  const double v = value_function(c.model, sol, s0);

  const GameEstimate saddle = estimate_J(c.model, sol.pi_star, sol.eta_star, s0, c.sim);
  json j = {{"config_hash", c.hash},
            {"sim",
             {{"paths", c.sim.paths},
              {"steps", c.sim.steps},
              {"seed", c.sim.seed},
              {"antithetic", c.sim.antithetic}}},
            {"value", v}};
  json sj = estimate_json(saddle);
  sj["pass"] = std::abs(saddle.mean - v) <= 3.0 * saddle.std_error;
  j["saddle"] = sj;

  json etas = json::array();
  for (double d : c.eta_perturbations) {
    const auto e = estimate_J(c.model, sol.pi_star, shifted(sol.eta_star, d), s0, c.sim);
    json ej = estimate_json(e);
    ej["shift"] = d;
    ej["pass"] = e.mean >= v - 3.0 * e.std_error;
    etas.push_back(ej);
  }
  j["eta_perturbations"] = etas;

  json pis = json::array();
  for (double d : c.pi_perturbations) {
    const auto e = estimate_J(c.model, shifted(sol.pi_star, d), sol.eta_star, s0, c.sim);
    json pj = estimate_json(e);
    pj["shift"] = d;
    pj["pass"] = e.mean <= v + 3.0 * e.std_error;
    pis.push_back(pj);
  }
  j["pi_perturbations"] = pis;

  SimConfig gap_cfg = c.sim;
  gap_cfg.antithetic = true;
  const VectorCurve neg_lambda = VectorCurve::sample(
      sol.eta_star.times(), [&](double t) { return Vector(-c.model.lambda(t)); });
  const auto worst = martingale_gap_mc(c.model, sol.eta_star, c.model.horizon, gap_cfg);
  const auto mart = martingale_gap_mc(c.model, neg_lambda, c.model.horizon, gap_cfg);
  j["martingale_gap"] = {{"worst_case_measure", gap_json(worst)},
                         {"martingale_measure", gap_json(mart)},
                         {"antithetic", true}};
  j["non_martingale_worst_case"] = j["martingale_gap"]["worst_case_measure"]["rejects_zero_drift"];
  write_json(dir, "estimates.json", j);

  if (dump_paths) {
    const auto w = simulate_wealth(c.model, sol.pi_star, sol.eta_star, s0, c.sim);
    std::ofstream os(dir / "paths.csv");
    os << "path,r_T,X_T,U_X_T\n";
    for (std::size_t p = 0; p < w.terminal_wealth.size(); ++p) {
      const double x = w.terminal_wealth[p];
      os << p << "," << config::format_number(w.terminal_rate[p]) << ","
         << config::format_number(x) << ","
         << config::format_number(std::pow(x, c.model.gamma) / c.model.gamma) << "\n";
    }
  }
  std::cout << "J(pi*, eta*) = " << saddle.mean << " +/- " << saddle.std_error << ", V = " << v
            << "\n";
  return kOk;
}

int cmd_restricted(const config::RunConfig& c) {
  if (!c.gamma_set) {
    std::cerr << "invalid configuration:\n  gamma_set: required by the restricted command\n";
    return kBadConfig;
  }
  const auto dir = prepare_output(c);
  const GammaSet& set = *c.gamma_set;
  const ScalarCurve f = solve_f(c.model, c.quadrature_nodes);
  const RestrictedSolution rs = restricted_saddle(c.model, f, set);
  const ScalarCurve g = restricted_g(c.model, f, set, c.quadrature_nodes);
  write_curve(dir, "restricted_eta_star.csv", "eta_star", rs.eta_star);
  write_curve(dir, "restricted_pi_star.csv", "pi_star", rs.pi_star);
  write_curve(dir, "restricted_g.csv", "g", g);
  {
    std::ofstream os(dir / "restricted_objective.csv");
    os << "t,objective,active\n";
    for (std::size_t i = 0; i < rs.objective.size(); ++i) {
      os << config::format_number(rs.objective.times()[i]) << ","
         << config::format_number(rs.objective.values()[i]) << "," << (rs.active[i] ? 1 : 0)
         << "\n";
    }
  }
  const IsaacsReport isaacs = check_isaacs_equality(c.model, f, g, set, c.isaacs);
  SolutionPair sol;
  sol.f = f;
  sol.g = g;
  sol.constraint = set;
  sol.quadrature_nodes = c.quadrature_nodes;
  const double t0 = c.initial_state.t;
  json j = {{"config_hash", c.hash},
            {"isaacs", isaacs_json(isaacs)},
            {"value", value_function(c.model, sol, c.initial_state)},
            {"state", state_json(c.initial_state)},
            {"eta_star", config::to_json(rs.eta_star(t0))},
            {"pi_star", config::to_json(rs.pi_star(t0))},
            {"passed", isaacs.passed}};
  write_json(dir, "restricted.json", j);
  if (!isaacs.passed) {
    std::cerr << "upper and lower Isaacs values differ: gap " << isaacs.max_gap << ", |value| "
              << isaacs.max_abs_value << "\n";
    return kCertifyFailed;
  }
  std::cout << "Isaacs gap " << isaacs.max_gap << ", |value| " << isaacs.max_abs_value << "\n";
  return kOk;
}

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("--config", opt.config_path, "Run configuration (JSON)")->required();
  sub->add_option("--output", opt.output, "Output directory");
  sub->add_option("--paths", opt.paths, "Monte Carlo paths");
  sub->add_option("--seed", opt.seed, "Monte Carlo seed");
  sub->add_option("--nodes", opt.nodes, "Quadrature nodes");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust portfolio game under a Hull-White short rate"};
  app.require_subcommand(1);
  Options opt;
  auto* solve_cmd = app.add_subcommand("solve", "Closed-form f, g, pi*, eta* and V");
  auto* certify_cmd = app.add_subcommand("certify", "Grid certification of the saddle inequalities");
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo game payoffs and martingale gap");
  auto* restricted_cmd = app.add_subcommand("restricted", "Game with a restricted uncertainty set");
  for (auto* sub : {solve_cmd, certify_cmd, simulate_cmd, restricted_cmd}) add_common(sub, opt);
  simulate_cmd->add_flag("--dump-paths", opt.dump_paths, "Write per-path terminal states");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kBadConfig;
  }

  try {
    const config::RunConfig cfg = load(opt);
    if (solve_cmd->parsed()) return cmd_solve(cfg);
    if (certify_cmd->parsed()) return cmd_certify(cfg);
    if (simulate_cmd->parsed()) return cmd_simulate(cfg, opt.dump_paths);
    if (restricted_cmd->parsed()) return cmd_restricted(cfg);
  } catch (const config::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kBadConfig;
  } catch (const BudgetExceeded& e) {
    std::cerr << e.what() << "\n";
    return kBudget;
  } catch (const NumericalError& e) {
    std::cerr << "invalid model: " << e.what() << "\n";
    return kBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kOk;
}
