// JSON experiment configuration. Unknown keys are rejected so typos fail
// loudly; every field has the library default when omitted. The schema is
// documented in the README.
#pragma once

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "regastro/harness.hpp"

namespace regastro {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline void require_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

inline void read_vector(const json& j, const char* key, Vector& out) {
  if (!j.contains(key)) return;
  std::vector<double> v;
  read(j, key, v);
  out = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline SolverConfig parse_reg_solver(const nlohmann::json& j) {
  using detail::read;
  detail::require_keys(
      j,
      {"name", "kind", "delta0_pre", "delta_max_pre", "sigma0", "lambda_min",
       "eta", "mu", "theta", "gamma1", "gamma2", "kappa_a", "c_g",
       "eps_lambda", "kappa_lambda", "c_star", "shift_multiplier", "tau_cap",
       "n_min", "n_max", "max_iterations", "stop_grad_tol"},
      "solver");
  SolverConfig c;
  read(j, "delta0_pre", c.delta0_pre);
  read(j, "delta_max_pre", c.delta_max_pre);
  read(j, "sigma0", c.sigma0);
  read(j, "lambda_min", c.lambda_min);
  read(j, "eta", c.eta);
  read(j, "mu", c.mu);
  read(j, "theta", c.theta);
  read(j, "gamma1", c.gamma1);
  read(j, "gamma2", c.gamma2);
  read(j, "kappa_a", c.kappa_a);
  read(j, "c_g", c.c_g);
  read(j, "eps_lambda", c.eps_lambda);
  read(j, "kappa_lambda", c.kappa_lambda);
  read(j, "c_star", c.c_star);
  read(j, "shift_multiplier", c.shift_multiplier);
  read(j, "tau_cap", c.tau_cap);
  read(j, "n_min", c.n_min);
  read(j, "n_max", c.n_max);
  read(j, "max_iterations", c.max_iterations);
  read(j, "stop_grad_tol", c.stop_grad_tol);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  return c;
}

inline AstroClassicConfig parse_astro_config(const nlohmann::json& j) {
  using detail::read;
  detail::require_keys(
      j,
      {"name", "kind", "delta0", "delta_max", "eta1", "gamma_inc", "gamma_dec",
       "mu_crit", "kappa_a", "eps_lambda", "kappa_lambda", "sigma0", "n_min",
       "n_max", "max_iterations", "stop_grad_tol"},
      "solver");
  AstroClassicConfig c;
  read(j, "delta0", c.delta0);
  read(j, "delta_max", c.delta_max);
  read(j, "eta1", c.eta1);
  read(j, "gamma_inc", c.gamma_inc);
  read(j, "gamma_dec", c.gamma_dec);
  read(j, "mu_crit", c.mu_crit);
  read(j, "kappa_a", c.kappa_a);
  read(j, "eps_lambda", c.eps_lambda);
  read(j, "kappa_lambda", c.kappa_lambda);
  read(j, "sigma0", c.sigma0);
  read(j, "n_min", c.n_min);
  read(j, "n_max", c.n_max);
  read(j, "max_iterations", c.max_iterations);
  read(j, "stop_grad_tol", c.stop_grad_tol);
  if (!(c.gamma_inc > 1.0 && c.gamma_dec > 0.0 && c.gamma_dec < 1.0))
    throw ConfigError("solver: gamma_inc/gamma_dec");
  return c;
}

inline AdamConfig parse_adam_config(const nlohmann::json& j) {
  using detail::read;
  detail::require_keys(j,
                       {"name", "kind", "lr", "beta1", "beta2", "eps_hat",
                        "batch", "max_iterations", "stop_grad_tol"},
                       "solver");
  AdamConfig c;
  read(j, "lr", c.lr);
  read(j, "beta1", c.beta1);
  read(j, "beta2", c.beta2);
  read(j, "eps_hat", c.eps_hat);
  read(j, "batch", c.batch);
  read(j, "max_iterations", c.max_iterations);
  read(j, "stop_grad_tol", c.stop_grad_tol);
  if (c.batch < 1) throw ConfigError("solver: batch must be >= 1");
  return c;
}

inline SolverSpec parse_solver_spec(const nlohmann::json& j) {
  SolverSpec spec;
  std::string kind = "reg-astro";
  detail::read(j, "kind", kind);
  if (kind == "reg-astro") {
    spec.kind = SolverKind::RegAstro;
    spec.reg = parse_reg_solver(j);
  } else if (kind == "reg-astro-crn") {
    spec.kind = SolverKind::RegAstroCrn;
    spec.reg = parse_reg_solver(j);
  } else if (kind == "astro") {
    spec.kind = SolverKind::AstroClassic;
    spec.astro = parse_astro_config(j);
  } else if (kind == "adam") {
    spec.kind = SolverKind::Adam;
    spec.adam = parse_adam_config(j);
  } else {
    throw ConfigError("solver: unknown kind '" + kind + "'");
  }
  spec.name = kind;
  detail::read(j, "name", spec.name);
  return spec;
}

inline ProblemSpec parse_problem_spec(const nlohmann::json& j) {
  using detail::read;
  detail::require_keys(j, {"name", "rosenbrock", "quadratic", "ambulance"},
                       "problem");
  ProblemSpec spec;
  std::string name = "rosenbrock";
  read(j, "name", name);
  if (name == "rosenbrock") {
    spec.kind = ProblemKind::Rosenbrock;
    if (j.contains("rosenbrock")) {
      const auto& p = j.at("rosenbrock");
      detail::require_keys(p, {"d", "noiseless"}, "problem.rosenbrock");
      read(p, "d", spec.d);
      read(p, "noiseless", spec.noiseless);
    }
  } else if (name == "quadratic") {
    spec.kind = ProblemKind::Quadratic;
    if (j.contains("quadratic")) {
      const auto& p = j.at("quadratic");
      detail::require_keys(p, {"d", "sigma", "diag", "noiseless"},
                           "problem.quadratic");
      read(p, "d", spec.d);
      read(p, "sigma", spec.sigma);
      read(p, "noiseless", spec.noiseless);
      detail::read_vector(p, "diag", spec.quad_diag);
      if (spec.quad_diag.size() != 0 && spec.quad_diag.size() != spec.d)
        throw ConfigError("problem.quadratic: diag length != d");
    }
  } else if (name == "ambulance") {
    spec.kind = ProblemKind::Ambulance;
    if (j.contains("ambulance")) {
      const auto& p = j.at("ambulance");
      detail::require_keys(p,
                           {"n_var_bases", "region", "arrival_rate",
                            "mean_service", "speed", "horizon", "warmup"},
                           "problem.ambulance");
      read(p, "n_var_bases", spec.ambulance.n_var_bases);
      read(p, "region", spec.ambulance.region);
      read(p, "arrival_rate", spec.ambulance.arrival_rate);
      read(p, "mean_service", spec.ambulance.mean_service);
      read(p, "speed", spec.ambulance.speed);
      read(p, "horizon", spec.ambulance.horizon);
      read(p, "warmup", spec.ambulance.warmup);
    }
  } else {
    throw ConfigError("problem: unknown name '" + name + "'");
  }
  if (spec.d < 2) throw ConfigError("problem: d must be >= 2");
  return spec;
}

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  using detail::read;
  detail::require_keys(
      j,
      {"problem", "solvers", "starts", "n_starts", "start_box", "n_macroreps",
       "budget", "budget_grid", "gap_threshold", "output_dir", "seed"},
      "config");
  ExperimentConfig cfg;
  if (j.contains("problem")) cfg.problem = parse_problem_spec(j.at("problem"));
  if (j.contains("solvers")) {
    if (!j.at("solvers").is_array())
      throw ConfigError("solvers: expected an array");
    for (const auto& s : j.at("solvers"))
      cfg.solvers.push_back(parse_solver_spec(s));
  } else {
    SolverSpec def;
    def.name = "reg-astro";
    cfg.solvers.push_back(def);
  }
  if (j.contains("starts")) {
    std::vector<std::vector<double>> raw;
    read(j, "starts", raw);
    for (const auto& s : raw) {
      if (static_cast<int>(s.size()) != cfg.problem.dim())
        throw ConfigError("starts: point dimension != problem dimension");
      cfg.starts.push_back(Eigen::Map<const Vector>(
          s.data(), static_cast<Eigen::Index>(s.size())));
    }
  }
  read(j, "n_starts", cfg.n_starts);
  if (j.contains("start_box")) {
    std::vector<double> box;
    read(j, "start_box", box);
    if (box.size() != 2 || !(box[0] < box[1]))
      throw ConfigError("start_box: expected [lo, hi] with lo < hi");
    cfg.start_lo = box[0];
    cfg.start_hi = box[1];
  }
  read(j, "n_macroreps", cfg.n_macroreps);
  read(j, "budget", cfg.budget);
  read(j, "budget_grid", cfg.budget_grid);
  read(j, "gap_threshold", cfg.gap_threshold);
  read(j, "output_dir", cfg.output_dir);
  read(j, "seed", cfg.seed);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_experiment_config(j);
}

}  // namespace regastro
