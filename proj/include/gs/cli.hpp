#pragma once

// JSON-configured front end: solve, compare and mesh-study commands with
// CSV output.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gs/problems.hpp"
#include "gs/solvers.hpp"

namespace gs::cli {

/// Invalid or unreadable configuration. Raised before anything is written.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  std::string type = "gpe";  // gpe | ks
  problems::GpeSettings gpe;
  problems::KsSettings ks;
  int p = 1;
  std::uint64_t seed = 1;
};

struct OutputConfig {
  std::string csv = "convergence.csv";
  std::string summary = "summary.csv";
  std::string field;  // empty: no field dump
  int precision = 17;  // significant digits
};

struct RunConfig {
  ProblemConfig problem;
  std::vector<solvers::Method> methods{solvers::Method::newton_grassmann};
  solvers::SolverConfig solver;
  std::vector<int> levels;  // cells_per_dim values for mesh-study
  OutputConfig output;
};

/// Parses and validates a JSON document. Unknown keys are rejected.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

std::unique_ptr<problems::Problem> build_problem(const ProblemConfig& cfg);

struct SummaryRow {
  std::string solver;
  double energy = 0.0;
  double final_residual = 0.0;
  int outer_iters = 0;
  std::uint64_t operator_applies = 0;
  double wall_time = 0.0;
};

struct MeshRow {
  int level = 0;  // cells per dimension
  double h = 0.0;
  Index n_dofs = 0;
  int outer_iters = 0;
  double energy = 0.0;
  double energy_error_vs_finest = 0.0;
};

std::string format_number(double v, int precision = 17);

std::string convergence_csv(const std::vector<solvers::ConvergenceRecord>& records, int precision = 17);
std::string summary_csv(const std::vector<SummaryRow>& rows, int precision = 17);
std::string mesh_csv(const std::vector<MeshRow>& rows, int precision = 17);

struct CliOptions {
  std::string output_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

/// Exit codes: 0 converged, 2 not converged (iteration limit or
/// stagnation), 1 configuration or I/O error.
int cmd_solve(const std::string& config_path, const CliOptions& opts);
int cmd_compare(const std::string& config_path, const CliOptions& opts);
int cmd_mesh_study(const std::string& config_path, const CliOptions& opts);

/// Log level from GS_LOG (trace, debug, info, warn, error, off).
void setup_logging();

int main(int argc, char** argv);

}  // namespace gs::cli
