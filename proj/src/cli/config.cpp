#include "gs/cli.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gs::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ConfigError("config: " + what); }

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail("unknown key '" + key + "' in " + where);
  }
}

double get_real(const json& obj, const std::string& key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(where + "." + key + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(where + "." + key + " must be finite");
  return x;
}

long long get_int(const json& obj, const std::string& key, const std::string& where, long long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(where + "." + key + " must be an integer");
  return v.get<long long>();
}

bool get_bool(const json& obj, const std::string& key, const std::string& where, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(where + "." + key + " must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& where,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(where + "." + key + " must be a string");
  return v.get<std::string>();
}

problems::PotentialKind parse_potential(const std::string& s) {
  if (s == "none") return problems::PotentialKind::none;
  if (s == "harmonic") return problems::PotentialKind::harmonic;
  if (s == "disorder") return problems::PotentialKind::disorder;
  if (s == "both") return problems::PotentialKind::both;
  fail("unknown potential '" + s + "' (expected harmonic, disorder, both or none)");
}

// Mirrors the checks of the disorder-field builder so that they fire before
// any allocation.
void check_disorder(double epsilon, int cells) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail("problem.epsilon must lie in (0, 1)");
  const double inv = 1.0 / epsilon;
  const long long coarse = std::llround(inv);
  if (std::abs(inv - static_cast<double>(coarse)) > 1e-9 || (coarse & (coarse - 1)) != 0) {
    fail("problem.epsilon must be a power of two");
  }
  if (cells % coarse != 0) {
    fail("cells_per_dim " + std::to_string(cells) + " is not a multiple of the disorder grid " +
         std::to_string(coarse));
  }
}

void check_gpe_mesh(const ProblemConfig& p, int cells) {
  if (cells < 2) fail("cells_per_dim must be at least 2");
  const long long interior = static_cast<long long>(p.gpe.order) * cells - 1;
  if (p.p > interior * interior) fail("problem.p exceeds the number of degrees of freedom");
  if (p.gpe.potential == problems::PotentialKind::disorder || p.gpe.potential == problems::PotentialKind::both) {
    check_disorder(p.gpe.epsilon, cells);
  }
}

ProblemConfig parse_problem(const json& j) {
  const std::string w = "problem";
  check_keys(j, w, {"type", "L", "cells_per_dim", "order", "kappa", "potential", "epsilon", "seed", "p", "ks"});
  ProblemConfig p;
  p.type = get_string(j, "type", w, p.type);
  if (p.type != "gpe" && p.type != "ks") fail("problem.type must be 'gpe' or 'ks'");
  p.p = static_cast<int>(get_int(j, "p", w, p.p));
  if (p.p < 1) fail("problem.p must be at least 1");
  const long long seed = get_int(j, "seed", w, 1);
  if (seed < 0) fail("problem.seed must be non-negative");
  p.seed = static_cast<std::uint64_t>(seed);
  p.gpe.seed = p.seed;

  p.gpe.half_width = get_real(j, "L", w, p.gpe.half_width);
  if (!(p.gpe.half_width > 0.0)) fail("problem.L must be positive");
  p.gpe.cells_per_dim = static_cast<int>(get_int(j, "cells_per_dim", w, p.gpe.cells_per_dim));
  p.gpe.order = static_cast<int>(get_int(j, "order", w, p.gpe.order));
  if (p.gpe.order != 1 && p.gpe.order != 2) fail("problem.order must be 1 or 2");
  p.gpe.kappa = get_real(j, "kappa", w, p.gpe.kappa);
  if (p.gpe.kappa < 0.0) fail("problem.kappa must be non-negative");
  p.gpe.potential = parse_potential(get_string(j, "potential", w, "harmonic"));
  p.gpe.epsilon = get_real(j, "epsilon", w, p.gpe.epsilon);
  if (p.type == "gpe") check_gpe_mesh(p, p.gpe.cells_per_dim);

  if (j.contains("ks")) {
    const json& k = j.at("ks");
    const std::string wk = "problem.ks";
    check_keys(k, wk, {"grid", "half_width", "atoms", "ion_depth", "ion_width"});
    p.ks.grid = static_cast<int>(get_int(k, "grid", wk, p.ks.grid));
    p.ks.half_width = get_real(k, "half_width", wk, p.ks.half_width);
    p.ks.ion_depth = get_real(k, "ion_depth", wk, p.ks.ion_depth);
    p.ks.ion_width = get_real(k, "ion_width", wk, p.ks.ion_width);
    if (k.contains("atoms")) {
      const json& atoms = k.at("atoms");
      if (!atoms.is_array()) fail("problem.ks.atoms must be an array of [x, y, z] triples");
      p.ks.atoms.clear();
      for (const json& a : atoms) {
        if (!a.is_array() || a.size() != 3) fail("problem.ks.atoms entries must be [x, y, z]");
        problems::Atom atom;
        for (std::size_t d = 0; d < 3; ++d) {
          if (!a[d].is_number()) fail("problem.ks.atoms coordinates must be numbers");
          atom.center[d] = a[d].get<double>();
        }
        p.ks.atoms.push_back(atom);
      }
    }
  }
  if (p.type == "ks") {
    if (p.ks.grid < 2) fail("problem.ks.grid must be at least 2");
    if (!(p.ks.half_width > 0.0)) fail("problem.ks.half_width must be positive");
    if (!(p.ks.ion_width > 0.0)) fail("problem.ks.ion_width must be positive");
    const long long n = static_cast<long long>(p.ks.grid) * p.ks.grid * p.ks.grid;
    if (p.p > n) fail("problem.p exceeds the number of grid points");
  }
  return p;
}

void parse_solver(const json& j, RunConfig& rc) {
  const std::string w = "solver";
  check_keys(j, w,
             {"methods", "outer_tol", "max_outer", "inner_max_iter", "eta", "delta", "sigma", "nonmonotone_window",
              "max_backtracks", "retraction", "scf_mixing", "preconditioner", "initial_tol", "initial_max_iter",
              "eigen_method", "eigen_max_iter"});
  if (j.contains("methods")) {
    const json& m = j.at("methods");
    std::vector<std::string> names;
    if (m.is_string()) {
      names.push_back(m.get<std::string>());
    } else if (m.is_array()) {
      for (const json& e : m) {
        if (!e.is_string()) fail("solver.methods entries must be strings");
        names.push_back(e.get<std::string>());
      }
    } else {
      fail("solver.methods must be a string or an array of strings");
    }
    if (names.empty()) fail("solver.methods must not be empty");
    rc.methods.clear();
    for (const auto& name : names) {
      const auto method = solvers::parse_method(name);
      if (!method) fail("unknown solver '" + name + "' (expected newton_grassmann, newton_stiefel, scf or rgd)");
      rc.methods.push_back(*method);
    }
  }
  solvers::SolverConfig& s = rc.solver;
  s.outer_tol = get_real(j, "outer_tol", w, s.outer_tol);
  s.max_outer = static_cast<int>(get_int(j, "max_outer", w, s.max_outer));
  s.inner_max_iter = static_cast<int>(get_int(j, "inner_max_iter", w, s.inner_max_iter));
  s.eta = get_real(j, "eta", w, s.eta);
  s.delta = get_real(j, "delta", w, s.delta);
  s.sigma = get_real(j, "sigma", w, s.sigma);
  s.nonmonotone_window = static_cast<int>(get_int(j, "nonmonotone_window", w, s.nonmonotone_window));
  s.max_backtracks = static_cast<int>(get_int(j, "max_backtracks", w, s.max_backtracks));
  s.scf_mixing = get_real(j, "scf_mixing", w, s.scf_mixing);
  s.preconditioner = get_bool(j, "preconditioner", w, s.preconditioner);
  s.initial_tol = get_real(j, "initial_tol", w, s.initial_tol);
  s.initial_max_iter = static_cast<int>(get_int(j, "initial_max_iter", w, s.initial_max_iter));
  const std::string retraction = get_string(j, "retraction", w, "qr");
  if (retraction == "qr") {
    s.retraction = manifold::Retraction::qr;
  } else if (retraction == "polar") {
    s.retraction = manifold::Retraction::polar;
  } else {
    fail("solver.retraction must be 'qr' or 'polar'");
  }
  const std::string eig = get_string(j, "eigen_method", w, "automatic");
  if (eig == "automatic") {
    s.eigen.method = linalg::EigenMethod::automatic;
  } else if (eig == "dense") {
    s.eigen.method = linalg::EigenMethod::dense;
  } else if (eig == "iterative") {
    s.eigen.method = linalg::EigenMethod::iterative;
  } else {
    fail("solver.eigen_method must be 'automatic', 'dense' or 'iterative'");
  }
  s.eigen.max_iter = static_cast<int>(get_int(j, "eigen_max_iter", w, s.eigen.max_iter));
  if (s.eigen.max_iter < 1) fail("solver.eigen_max_iter must be at least 1");
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  check_keys(j, "top level", {"problem", "solver", "mesh_study", "output"});
  RunConfig rc;
  if (!j.contains("problem")) fail("missing 'problem' section");
  rc.problem = parse_problem(j.at("problem"));
  if (j.contains("solver")) parse_solver(j.at("solver"), rc);

  if (j.contains("mesh_study")) {
    const json& m = j.at("mesh_study");
    check_keys(m, "mesh_study", {"levels"});
    if (m.contains("levels")) {
      const json& levels = m.at("levels");
      if (!levels.is_array()) fail("mesh_study.levels must be an array of cells_per_dim values");
      for (const json& l : levels) {
        if (!l.is_number_integer()) fail("mesh_study.levels entries must be integers");
        const int cells = l.get<int>();
        if (rc.problem.type == "gpe") check_gpe_mesh(rc.problem, cells);
        rc.levels.push_back(cells);
      }
    }
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    const std::string w = "output";
    check_keys(o, w, {"csv", "summary", "field", "precision"});
    rc.output.csv = get_string(o, "csv", w, rc.output.csv);
    rc.output.summary = get_string(o, "summary", w, rc.output.summary);
    rc.output.field = get_string(o, "field", w, rc.output.field);
    rc.output.precision = static_cast<int>(get_int(o, "precision", w, rc.output.precision));
    if (rc.output.precision < 1 || rc.output.precision > 17) fail("output.precision must lie in [1, 17]");
    if (rc.output.csv.empty()) fail("output.csv must not be empty");
    if (rc.output.summary.empty()) fail("output.summary must not be empty");
  }
  return rc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::unique_ptr<problems::Problem> build_problem(const ProblemConfig& cfg) {
  if (cfg.type == "ks") return std::make_unique<problems::KsProblem>(cfg.ks);
  return std::make_unique<problems::GpeProblem>(cfg.gpe);
}

}  // namespace gs::cli
