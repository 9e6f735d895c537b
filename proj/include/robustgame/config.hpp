#pragma once

// JSON run configuration and plain-text output helpers for the command line tool.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "robustgame/closedform.hpp"
#include "robustgame/gamma_set.hpp"
#include "robustgame/hjbi.hpp"
#include "robustgame/isaacs.hpp"
#include "robustgame/model.hpp"
#include "robustgame/montecarlo.hpp"

namespace robustgame::config {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& ps) {
    std::string s = "invalid configuration:";
    for (const auto& p : ps) s += "\n  " + p;
    return s;
  }
  std::vector<std::string> problems_;
};

struct RunConfig {
  MarketModel model;
  StatePoint initial_state;
  std::size_t quadrature_nodes = kDefaultQuadratureNodes;
  SimConfig sim;
  std::optional<GammaSet> gamma_set;
  CertifyGrid certify;
  IsaacsGrid isaacs;
  bool robust = true;  // false: certify the traditional strategy against eta*
  std::vector<double> eta_perturbations{-0.2, -0.1, 0.05, 0.1, 0.2};
  std::vector<double> pi_perturbations{-0.5, -0.25, 0.1, 0.25, 0.5};
  std::string output_dir = "out";
  std::string hash;        // of the effective configuration
  std::string model_hash;  // of its "model" section
};

/// FNV-1a 64-bit, as 16 hex digits.
inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string hash_of(const json& j) { return fnv1a_hex(j.dump()); }

/// 17 significant digits: round-trips every double.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline Interpolation parse_interpolation(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "linear") return Interpolation::linear;
  if (s == "constant_left") return Interpolation::constant_left;
  throw std::invalid_argument("unknown interpolation '" + s + "'");
}

inline Vector to_vector(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Matrix to_matrix(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw std::invalid_argument("empty matrix");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw std::invalid_argument("ragged matrix");
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  return m;
}

template <typename Value, typename Convert>
Curve<Value> parse_curve(const json& j, double horizon, Convert&& convert, bool is_constant) {
  if (is_constant) return Curve<Value>::constant(convert(j), horizon);
  const auto times = j.at("times").get<std::vector<double>>();
  std::vector<Value> values;
  for (const auto& v : j.at("values")) values.push_back(convert(v));
  const auto interp = j.contains("interpolation") ? parse_interpolation(j.at("interpolation"))
                                                  : Interpolation::linear;
  return Curve<Value>(times, std::move(values), interp);
}

inline ScalarCurve parse_scalar_curve(const json& j, double horizon) {
  return parse_curve<double>(j, horizon, [](const json& v) { return v.get<double>(); },
                             j.is_number());
}

inline VectorCurve parse_vector_curve(const json& j, double horizon) {
  return parse_curve<Vector>(j, horizon, to_vector, j.is_array());
}

// A matrix curve; "bond_entries" overwrite single entries with the volatility of
// a zero-coupon bond, evaluated at every breakpoint.
inline MatrixCurve parse_matrix_curve(const json& j, double horizon) {
  MatrixCurve c = parse_curve<Matrix>(j, horizon, to_matrix, j.is_array());
  if (!j.is_object() || !j.contains("bond_entries")) return c;
  std::vector<Matrix> values = c.values();
  for (const auto& e : j.at("bond_entries")) {
    const auto row = e.at("row").get<Eigen::Index>();
    const auto col = e.at("col").get<Eigen::Index>();
    const double kappa = e.at("kappa").get<double>();
    const double a_level = e.at("a").get<double>();
    const double maturity = e.at("maturity").get<double>();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (row < 0 || col < 0 || row >= values[i].rows() || col >= values[i].cols()) {
        throw std::invalid_argument("bond entry outside the matrix");
      }
      values[i](row, col) = bond_volatility(kappa, a_level, maturity, c.times()[i]);
    }
  }
  return MatrixCurve(c.times(), std::move(values), c.interpolation());
}

inline GammaSet parse_gamma_set(const json& j) {
  const auto shape = j.at("shape").get<std::string>();
  if (shape == "box") return GammaSet::box(to_vector(j.at("lo")), to_vector(j.at("hi")));
  if (shape == "ball") return GammaSet::ball(to_vector(j.at("center")), j.at("radius").get<double>());
  throw std::invalid_argument("unknown Gamma shape '" + shape + "'");
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline MarketModel parse_model(const json& j) {
  MarketModel m;
  m.n = j.at("n").get<std::size_t>();
  m.horizon = j.at("horizon").get<double>();
  m.gamma = j.at("gamma").get<double>();
  m.kappa = detail::parse_scalar_curve(j.at("kappa"), m.horizon);
  m.b = detail::parse_scalar_curve(j.at("b"), m.horizon);
  m.lambda = detail::parse_vector_curve(j.at("lambda"), m.horizon);
  m.a = detail::parse_vector_curve(j.at("a"), m.horizon);
  m.sigma = detail::parse_matrix_curve(j.at("sigma"), m.horizon);
  return m;
}

/// Parses and validates a run configuration. Throws ConfigError listing
/// every problem found.
inline RunConfig parse_run_config(const json& j) {
  RunConfig c;
  try {
    c.model = parse_model(j.at("model"));
    if (j.contains("initial_state")) {
      const auto& s = j.at("initial_state");
      detail::maybe(s, "x", c.initial_state.x);
      detail::maybe(s, "r", c.initial_state.r);
      detail::maybe(s, "t", c.initial_state.t);
    }
    detail::maybe(j, "quadrature_nodes", c.quadrature_nodes);
    detail::maybe(j, "robust", c.robust);
    detail::maybe(j, "output_dir", c.output_dir);
    if (j.contains("sim")) {
      const auto& s = j.at("sim");
      detail::maybe(s, "paths", c.sim.paths);
      detail::maybe(s, "steps", c.sim.steps);
      detail::maybe(s, "seed", c.sim.seed);
      detail::maybe(s, "antithetic", c.sim.antithetic);
      detail::maybe(s, "brownian_refinement", c.sim.brownian_refinement);
      detail::maybe(s, "budget", c.sim.budget);
      detail::maybe(s, "eta_perturbations", c.eta_perturbations);
      detail::maybe(s, "pi_perturbations", c.pi_perturbations);
    }
    if (j.contains("gamma_set") && !j.at("gamma_set").is_null()) {
      c.gamma_set = detail::parse_gamma_set(j.at("gamma_set"));
    }
    c.isaacs = IsaacsGrid::for_dimension(c.model.n);
    if (j.contains("certify")) {
      const auto& g = j.at("certify");
      detail::maybe(g, "t_points", c.certify.t_points);
      detail::maybe(g, "r_points", c.certify.r_points);
      detail::maybe(g, "pi_points", c.certify.pi_points);
      detail::maybe(g, "eta_points", c.certify.eta_points);
      detail::maybe(g, "r_lo", c.certify.r_lo);
      detail::maybe(g, "r_hi", c.certify.r_hi);
      detail::maybe(g, "pi_half_width", c.certify.pi_half_width);
      detail::maybe(g, "eta_half_width", c.certify.eta_half_width);
    }
    if (j.contains("isaacs")) {
      const auto& g = j.at("isaacs");
      detail::maybe(g, "t_points", c.isaacs.t_points);
      detail::maybe(g, "r_points", c.isaacs.r_points);
      detail::maybe(g, "gamma_points", c.isaacs.gamma_points);
      detail::maybe(g, "pi_points", c.isaacs.pi_points);
      detail::maybe(g, "pi_half_width", c.isaacs.pi_half_width);
      detail::maybe(g, "pi_shift", c.isaacs.pi_shift);
      detail::maybe(g, "include_candidate", c.isaacs.include_candidate);
    }
  } catch (const std::exception& e) {
    throw ConfigError({e.what()});
  }

  std::vector<std::string> problems;
  for (const auto& v : validate_model(c.model)) problems.push_back("model." + to_string(v));
  const auto& s = c.initial_state;
  if (!(s.x > 0.0)) problems.push_back("initial_state.x: wealth must be positive");
  if (!(s.t >= 0.0 && s.t < c.model.horizon)) problems.push_back("initial_state.t: must lie in [0, T)");
  if (c.quadrature_nodes < kMinQuadratureNodes) {
    problems.push_back("quadrature_nodes: must be >= " + std::to_string(kMinQuadratureNodes));
  }
  if (c.sim.paths == 0 || c.sim.steps == 0 || c.sim.brownian_refinement == 0) {
    problems.push_back("sim: paths, steps and brownian_refinement must be >= 1");
  }
  if (c.gamma_set && c.gamma_set->dimension() != static_cast<Eigen::Index>(c.model.n)) {
    problems.push_back("gamma_set: dimension differs from model.n");
  }
  if (!problems.empty()) throw ConfigError(problems);
  json hashed = j;
  hashed.erase("output_dir");  // where results go does not change them
  c.hash = hash_of(hashed);
  c.model_hash = hash_of(j.at("model"));
  return c;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline void write_csv(std::ostream& os, const std::string& name, const ScalarCurve& c) {
  os << "t," << name << "\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    os << format_number(c.times()[i]) << "," << format_number(c.values()[i]) << "\n";
  }
}

inline void write_csv(std::ostream& os, const std::string& name, const VectorCurve& c) {
  os << "t";
  for (Eigen::Index k = 0; k < c.rows(); ++k) os << "," << name << "_" << (k + 1);
  os << "\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    os << format_number(c.times()[i]);
    for (Eigen::Index k = 0; k < c.rows(); ++k) os << "," << format_number(c.values()[i][k]);
    os << "\n";
  }
}

inline json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace robustgame::config
