#include "gs/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <memory>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "gs/io.hpp"

namespace gs::cli {

namespace fs = std::filesystem;

std::string format_number(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", precision - 1, v);
  return buf;
}

std::string convergence_csv(const std::vector<solvers::ConvergenceRecord>& records, int precision) {
  std::string out = "iter,residual,energy,step,inner_iters,wall_time\n";
  for (const auto& r : records) {
    out += std::to_string(r.iter) + "," + format_number(r.residual, precision) + "," +
           format_number(r.energy, precision) + "," + format_number(r.step, precision) + "," +
           std::to_string(r.inner_iters) + "," + format_number(r.wall_time, precision) + "\n";
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows, int precision) {
  std::string out = "solver,energy,final_residual,outer_iters,operator_applies,wall_time\n";
  for (const auto& r : rows) {
    out += r.solver + "," + format_number(r.energy, precision) + "," + format_number(r.final_residual, precision) +
           "," + std::to_string(r.outer_iters) + "," + std::to_string(r.operator_applies) + "," +
           format_number(r.wall_time, precision) + "\n";
  }
  return out;
}

std::string mesh_csv(const std::vector<MeshRow>& rows, int precision) {
  std::string out = "level,h,n_dofs,outer_iters,energy,energy_error_vs_finest\n";
  for (const auto& r : rows) {
    out += std::to_string(r.level) + "," + format_number(r.h, precision) + "," + std::to_string(r.n_dofs) + "," +
           std::to_string(r.outer_iters) + "," + format_number(r.energy, precision) + "," +
           format_number(r.energy_error_vs_finest, precision) + "\n";
  }
  return out;
}

namespace {

std::string resolve(const CliOptions& opts, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p.string() : (fs::path(opts.output_dir) / p).string();
}

// "conv.csv" + "scf" -> "conv_scf.csv"
std::string with_suffix(const std::string& path, const std::string& suffix) {
  const fs::path p(path);
  return (p.parent_path() / (p.stem().string() + "_" + suffix + p.extension().string())).string();
}

RunConfig load(const std::string& path, const CliOptions& opts) {
  RunConfig rc = load_config(path);
  if (opts.seed) {
    rc.problem.seed = *opts.seed;
    rc.problem.gpe.seed = *opts.seed;
  }
  if (opts.threads < 1) throw ConfigError("--threads must be at least 1");
  return rc;
}

bool converged(const solvers::SolverResult& r) { return r.status == solvers::Status::converged; }

void report(const std::string& label, const solvers::SolverResult& r) {
  const char* status = r.status == solvers::Status::converged        ? "converged"
                       : r.status == solvers::Status::max_iterations ? "max_iterations"
                                                                      : "stagnation";
  spdlog::info("{}: {} after {} iterations, energy {:.15e}, residual {:.3e}, {} operator applies", label, status,
               r.records.size(), r.energy, r.residual, r.operator_applies);
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("run failed: {}", e.what());
    return 1;
  }
}

}  // namespace

int cmd_solve(const std::string& config_path, const CliOptions& opts) {
  return guarded([&] {
    const RunConfig rc = load(config_path, opts);
    const auto problem = build_problem(rc.problem);
    const solvers::Method method = rc.methods.front();
    const auto guess = solvers::initial_guess(*problem, rc.problem.p, rc.problem.seed, rc.solver);
    const auto result = solvers::run(method, *problem, guess.point, rc.solver);
    report(solvers::method_name(method), result);
    io::write_file_atomic(resolve(opts, rc.output.csv), convergence_csv(result.records, rc.output.precision));
    if (!rc.output.field.empty()) problem->write_field(result.point.frame(), resolve(opts, rc.output.field));
    return converged(result) ? 0 : 2;
  });
}

int cmd_compare(const std::string& config_path, const CliOptions& opts) {
  return guarded([&] {
    const RunConfig rc = load(config_path, opts);
    if (rc.methods.size() < 2) throw ConfigError("config: compare needs at least two solvers");
    const auto problem = build_problem(rc.problem);
    const auto guess = solvers::initial_guess(*problem, rc.problem.p, rc.problem.seed, rc.solver);

    // Every run gets its own problem instance so counters and caches are
    // independent; the shared initial guess is re-attached to its metric.
    auto run_one = [&](solvers::Method m) {
      std::shared_ptr<const problems::Problem> own = build_problem(rc.problem);
      const manifold::ManifoldPoint start(guess.point.frame(), own->metric());
      auto r = solvers::run(m, *own, start, rc.solver);
      return std::make_pair(std::move(r), own);
    };

    std::vector<std::pair<solvers::SolverResult, std::shared_ptr<const problems::Problem>>> results;
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(opts.threads, rc.methods.size()));
    for (std::size_t first = 0; first < rc.methods.size(); first += workers) {
      std::vector<std::future<decltype(run_one(rc.methods[0]))>> batch;
      for (std::size_t i = first; i < std::min(first + workers, rc.methods.size()); ++i) {
        batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, run_one, rc.methods[i]));
      }
      for (auto& f : batch) results.push_back(f.get());
    }

    std::vector<SummaryRow> rows;
    bool all_converged = true;
    for (std::size_t i = 0; i < rc.methods.size(); ++i) {
      const std::string name = solvers::method_name(rc.methods[i]);
      const auto& [r, own] = results[i];
      report(name, r);
      all_converged = all_converged && converged(r);
      io::write_file_atomic(resolve(opts, with_suffix(rc.output.csv, name)),
                            convergence_csv(r.records, rc.output.precision));
      if (!rc.output.field.empty()) own->write_field(r.point.frame(), resolve(opts, with_suffix(rc.output.field, name)));
      rows.push_back({name, r.energy, r.residual, static_cast<int>(r.records.size()), r.operator_applies, r.wall_time});
    }
    io::write_file_atomic(resolve(opts, rc.output.summary), summary_csv(rows, rc.output.precision));
    return all_converged ? 0 : 2;
  });
}

int cmd_mesh_study(const std::string& config_path, const CliOptions& opts) {
  return guarded([&] {
    RunConfig rc = load(config_path, opts);
    if (rc.problem.type != "gpe") throw ConfigError("config: mesh-study needs a gpe problem");
    if (rc.levels.size() < 2) throw ConfigError("config: mesh-study needs at least two levels");
    const solvers::Method method = rc.methods.front();
    std::vector<MeshRow> rows;
    bool all_converged = true;
    for (int cells : rc.levels) {
      ProblemConfig pc = rc.problem;
      pc.gpe.cells_per_dim = cells;
      const auto problem = build_problem(pc);
      const auto guess = solvers::initial_guess(*problem, pc.p, pc.seed, rc.solver);
      const auto r = solvers::run(method, *problem, guess.point, rc.solver);
      report(solvers::method_name(method) + " at " + std::to_string(cells) + " cells", r);
      all_converged = all_converged && converged(r);
      rows.push_back({cells, 2.0 * pc.gpe.half_width / cells, problem->n(), static_cast<int>(r.records.size()),
                      r.energy, 0.0});
    }
    const auto finest = std::max_element(rows.begin(), rows.end(),
                                         [](const MeshRow& a, const MeshRow& b) { return a.level < b.level; });
    const double e_ref = finest->energy;
    for (auto& row : rows) row.energy_error_vs_finest = row.energy - e_ref;
    io::write_file_atomic(resolve(opts, rc.output.csv), mesh_csv(rows, rc.output.precision));
    return all_converged ? 0 : 2;
  });
}

void setup_logging() {
  spdlog::set_level(spdlog::level::info);
  const char* env = std::getenv("GS_LOG");
  if (!env || !*env) return;
  const std::string name(env);
  const auto level = spdlog::level::from_str(name);
  if (level == spdlog::level::off && name != "off") {
    spdlog::warn("GS_LOG: unknown level '{}', using info", name);
    return;
  }
  spdlog::set_level(level);
}

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Ground-state workbench: Riemannian Newton, SCF and gradient descent for nonlinear eigenvector problems"};
  app.require_subcommand(1);
  CliOptions opts;
  std::uint64_t seed = 0;
  app.add_option("--output-dir", opts.output_dir, "Directory for CSV and field files")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Override the seed of the configuration");
  app.add_option("--threads", opts.threads, "Worker threads for compare")->check(CLI::PositiveNumber);

  std::string config;
  auto* solve = app.add_subcommand("solve", "Run the first listed solver");
  auto* compare = app.add_subcommand("compare", "Run all listed solvers from a shared initial guess");
  auto* mesh = app.add_subcommand("mesh-study", "Run the first solver on a sequence of meshes");
  for (auto* sub : {solve, compare, mesh}) {
    sub->add_option("config", config, "JSON configuration file")->required();
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (seed_opt->count() > 0) opts.seed = seed;

  if (solve->parsed()) return cmd_solve(config, opts);
  if (compare->parsed()) return cmd_compare(config, opts);
  return cmd_mesh_study(config, opts);
}

}  // namespace gs::cli
