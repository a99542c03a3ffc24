// Command-line front end: convergence studies, mesh generation, mesh audit.
//
// Exit codes: 0 success, 2 configuration error, 3 mesh or regularity
// failure, 4 solver failure, 1 anything else.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vem/vem.hpp"

namespace {

enum Exit { ok = 0, other = 1, config = 2, mesh = 3, solver = 4 };

struct StudyArgs {
  std::string problem = "square";
  std::string family = "hex";
  int k = 1;
  int m = -1;
  int levels = 4;
  std::uint64_t seed = 1;
  std::string solver = "auto";
  double tol = 1e-12;
  bool deterministic = false;
  std::string out = "results";
  std::size_t lloyd = vem::default_lloyd_iterations;
  bool quiet = false;
};

struct MeshArgs {
  std::string domain = "square";
  std::string family = "hex";
  int level = 1;
  std::uint64_t seed = 1;
  std::size_t lloyd = vem::default_lloyd_iterations;
  std::string out;
};

struct CheckArgs {
  std::string file;
  double gamma0 = 0.05;
  double gamma1 = 0.05;
  double max_ratio = 4.0;
};

vem::SolverKind parse_solver(const std::string& s) {
  if (s == "direct")
    return vem::SolverKind::direct;
  if (s == "cg")
    return vem::SolverKind::cg;
  if (s == "auto")
    return vem::SolverKind::automatic;
  throw vem::config_error("unknown solver '" + s + "' (expected direct|cg)");
}

int run_study(const StudyArgs& a) {
  vem::StudyConfig cfg;
  cfg.problem = a.problem;
  cfg.family = vem::parse_mesh_family(a.family);
  cfg.orders = {a.k, a.m < 0 ? a.k : a.m};
  cfg.levels = a.levels;
  cfg.seed = a.seed;
  cfg.solver = parse_solver(a.solver);
  cfg.tol = a.tol;
  cfg.deterministic = a.deterministic;
  cfg.out_dir = a.out;
  cfg.lloyd_iters = a.lloyd;
  if (!a.quiet)
    std::cout << vem::csv_header() << '\n';
  const vem::ConvergenceTable t = vem::run_study(cfg, a.quiet ? nullptr : &std::cout);
  std::cout << vem::format_slopes(t) << '\n';
  if (!cfg.out_dir.empty())
    std::cout << "wrote " << (std::filesystem::path(cfg.out_dir) / (cfg.stem() + ".csv")).string() << '\n';
  return ok;
}

int run_mesh(const MeshArgs& a) {
  const vem::Domain domain = vem::Domain::parse(a.domain);
  const vem::MeshFamily family = vem::parse_mesh_family(a.family);
  const vem::Mesh m = vem::make_family_mesh(domain, family, a.level, a.seed, a.lloyd);
  vem::write_mesh(a.out, m);
  std::printf("%zu cells, %zu vertices, h = %.6g -> %s\n", m.n_cells(), m.vertices.size(), m.h, a.out.c_str());
  return ok;
}

int run_check(const CheckArgs& a) {
  const vem::Mesh m = vem::read_mesh(a.file);
  const vem::RegularityReport r = vem::check_regularity(m, a.gamma0, a.gamma1);
  std::printf("cells %zu\nh %.6g\ngamma0_observed %.6g\ngamma1_observed %.6g\nquasi_uniformity %.6g\nviolations %zu\n",
              m.n_cells(), m.h, r.gamma0_observed, r.gamma1_observed, r.quasi_uniformity, r.violations.size());
  for (std::size_t i = 0; i < r.violations.size() && i < 20; ++i)
    std::printf("  violating cell %zu\n", r.violations[i]);
  if (!r.ok() || r.quasi_uniformity > a.max_ratio) {
    std::fprintf(stderr, "error: mesh fails the regularity audit\n");
    return mesh;
  }
  return ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual element Poisson solver and convergence studies"};
  app.require_subcommand(1);

  StudyArgs sa;
  CLI::App* study = app.add_subcommand("study", "run a convergence study and write CSV/SVG");
  study->add_option("--problem", sa.problem, "square | lshape | smooth")->capture_default_str();
  study->add_option("--mesh", sa.family, "hex | voronoi")->capture_default_str();
  study->add_option("--k", sa.k, "boundary polynomial order (1..4)")->capture_default_str();
  study->add_option("--m", sa.m, "internal moment order, max(0,k-2) <= m <= k (default k)");
  study->add_option("--levels", sa.levels, "number of refinement levels (>= 3)")->capture_default_str();
  study->add_option("--seed", sa.seed, "seed for Voronoi meshes")->capture_default_str();
  study->add_option("--solver", sa.solver, "direct | cg (default: direct below 1e6 unknowns)")->capture_default_str();
  study->add_option("--tol", sa.tol, "solver tolerance on the relative residual")->capture_default_str();
  study->add_flag("--deterministic", sa.deterministic, "sequential run, runtime column written as 0");
  study->add_option("--out", sa.out, "output directory")->capture_default_str();
  study->add_option("--lloyd", sa.lloyd, "Lloyd sweeps for Voronoi meshes")->capture_default_str();
  study->add_flag("--quiet", sa.quiet, "print only the slope line");

  MeshArgs ma;
  CLI::App* meshcmd = app.add_subcommand("mesh", "generate a mesh file");
  meshcmd->add_option("--domain", ma.domain, "square | lshape")->capture_default_str();
  meshcmd->add_option("--family", ma.family, "hex | voronoi")->capture_default_str();
  meshcmd->add_option("--level", ma.level, "refinement level")->capture_default_str();
  meshcmd->add_option("--seed", ma.seed, "seed for Voronoi meshes")->capture_default_str();
  meshcmd->add_option("--lloyd", ma.lloyd, "Lloyd sweeps for Voronoi meshes")->capture_default_str();
  meshcmd->add_option("--out", ma.out, "output file")->required();

  CheckArgs ca;
  CLI::App* check = app.add_subcommand("check-mesh", "validate a mesh file and audit shape regularity");
  check->add_option("file", ca.file, "mesh file")->required();
  check->add_option("--gamma0", ca.gamma0, "lower bound on rho_K / h_K")->capture_default_str();
  check->add_option("--gamma1", ca.gamma1, "lower bound on vertex distance / h_K")->capture_default_str();
  check->add_option("--max-ratio", ca.max_ratio, "upper bound on max h_K / min h_K")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return config;
  }

  try {
    if (*study)
      return run_study(sa);
    if (*meshcmd)
      return run_mesh(ma);
    if (*check)
      return run_check(ca);
  } catch (const vem::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config;
  } catch (const vem::mesh_error& e) {
    std::cerr << "mesh error: " << e.what() << '\n';
    return mesh;
  } catch (const vem::solver_error& e) {
    std::cerr << "solver error: " << e.what() << " (residual " << e.residual() << ")\n";
    return solver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return other;
  }
  return other;
}
