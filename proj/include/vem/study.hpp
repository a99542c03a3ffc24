#pragma once

// Convergence studies: mesh sequence, solve, errors, slopes, CSV and SVG.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "vem/element.hpp"
#include "vem/errors.hpp"
#include "vem/mesh.hpp"
#include "vem/mesh_generators.hpp"
#include "vem/postproc.hpp"
#include "vem/problems.hpp"
#include "vem/system.hpp"

namespace vem {

enum class MeshFamily { hex, voronoi };

inline MeshFamily parse_mesh_family(const std::string& s) {
  if (s == "hex")
    return MeshFamily::hex;
  if (s == "voronoi")
    return MeshFamily::voronoi;
  throw config_error("unknown mesh family '" + s + "' (expected hex|voronoi)");
}

inline std::string to_string(MeshFamily f) { return f == MeshFamily::hex ? "hex" : "voronoi"; }

inline constexpr std::size_t default_lloyd_iterations = 50;

/// Level-th member of a mesh family. Voronoi meshes depend on the seed.
inline Mesh make_family_mesh(const Domain& domain, MeshFamily family, int level, std::uint64_t seed,
                             std::size_t lloyd_iters = default_lloyd_iterations) {
  if (family == MeshFamily::hex)
    return generate_hex_mesh(domain, level);
  return generate_voronoi_mesh(domain, voronoi_seed_count(domain, level), lloyd_iters, seed);
}

struct StudyConfig {
  std::string problem = "square";
  MeshFamily family = MeshFamily::hex;
  OrderPair orders{1, 1};
  int levels = 4;
  std::uint64_t seed = 1;
  SolverKind solver = SolverKind::automatic;
  double tol = 1e-12;
  bool deterministic = false;
  std::string out_dir;          // empty: no files
  int rate_window = 3;
  int error_quad_offset = 4;
  std::size_t lloyd_iters = default_lloyd_iterations;
  double gamma0 = 0.05;
  double gamma1 = 0.05;

  void validate() const {
    orders.validate();
    if (orders.k > 4)
      throw config_error("studies support 1 <= k <= 4");
    if (levels < 3)
      throw config_error("a study needs at least 3 levels");
    if (!(tol > 0.0 && tol < 1.0))
      throw config_error("solver tolerance must lie in (0, 1)");
    if (rate_window < 2)
      throw config_error("rate window must cover at least 2 levels");
    make_test_problem(problem);
  }

  std::string stem() const {
    return "study_" + problem + "_" + to_string(family) + "_k" + std::to_string(orders.k) + "_m" +
           std::to_string(orders.m);
  }
};

struct StudyRow {
  int level = 0;
  double h = 0.0;
  int ndof = 0;
  double e1_global = 0.0;
  double e1_inner = 0.0;
  double e1_outer = 0.0;
  double runtime_s = 0.0;
  double l2_global = 0.0;
  std::size_t n_cells = 0;
  RegularityReport regularity;
};

struct ConvergenceTable {
  std::vector<StudyRow> rows;
  double slope_global = std::nan("");
  double slope_inner = std::nan("");
  double slope_outer = std::nan("");
};

/// Least-squares slope of log e against log h.
inline double estimate_rate(const std::vector<double>& h, const std::vector<double>& e) {
  if (h.size() != e.size() || h.size() < 2)
    throw config_error("rate estimation needs at least two (h, e) pairs");
  const auto n = static_cast<double>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !(e[i] > 0.0))
      throw evaluation_error("rate estimation needs positive mesh sizes and errors");
    const double x = std::log(h[i]);
    const double y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (!(std::abs(den) > 0.0))
    throw evaluation_error("rate estimation needs distinct mesh sizes");
  return (n * sxy - sx * sy) / den;
}

/// Slope over the finest `window` rows of the column selected by `pick`.
template <class Pick>
double estimate_rate(const std::vector<StudyRow>& rows, int window, Pick pick) {
  const std::size_t w = std::min(rows.size(), static_cast<std::size_t>(std::max(window, 2)));
  std::vector<double> h, e;
  for (std::size_t i = rows.size() - w; i < rows.size(); ++i) {
    h.push_back(rows[i].h);
    e.push_back(pick(rows[i]));
  }
  return estimate_rate(h, e);
}

inline void fit_slopes(ConvergenceTable& t, int window) {
  t.slope_global = estimate_rate(t.rows, window, [](const StudyRow& r) { return r.e1_global; });
  t.slope_inner = estimate_rate(t.rows, window, [](const StudyRow& r) { return r.e1_inner; });
  t.slope_outer = estimate_rate(t.rows, window, [](const StudyRow& r) { return r.e1_outer; });
}

inline const char* csv_header() { return "level,h,ndof,e1_global,e1_inner,e1_outer,runtime_s"; }

inline std::string format_csv_row(const StudyRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%.10e,%d,%.10e,%.10e,%.10e,%.6f", r.level, r.h, r.ndof, r.e1_global,
                r.e1_inner, r.e1_outer, r.runtime_s);
  return buf;
}

inline std::string format_slopes(const ConvergenceTable& t) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "# slopes global=%.4f inner=%.4f outer=%.4f", t.slope_global, t.slope_inner,
                t.slope_outer);
  return buf;
}

inline void write_csv(std::ostream& os, const ConvergenceTable& t) {
  os << csv_header() << '\n';
  for (const auto& r : t.rows)
    os << format_csv_row(r) << '\n';
  if (!std::isnan(t.slope_global))
    os << format_slopes(t) << '\n';
}

/// Log-log plot of the three error columns with reference slopes anchored at
/// the finest level.
inline void write_svg(std::ostream& os, const ConvergenceTable& t, double ref_global, double ref_local,
                      const std::string& title) {
  const double W = 640, H = 480, L = 80, R = 30, T = 40, B = 60;
  double hmin = 1e300, hmax = 0, emin = 1e300, emax = 0;
  for (const auto& r : t.rows) {
    hmin = std::min(hmin, r.h);
    hmax = std::max(hmax, r.h);
    for (double e : {r.e1_global, r.e1_inner, r.e1_outer})
      if (e > 0) {
        emin = std::min(emin, e);
        emax = std::max(emax, e);
      }
  }
  const double lx0 = std::floor(std::log10(hmin) * 4) / 4 - 0.05, lx1 = std::ceil(std::log10(hmax) * 4) / 4 + 0.05;
  const double ly0 = std::floor(std::log10(emin)) - 0.2, ly1 = std::ceil(std::log10(emax)) + 0.2;
  auto X = [&](double h) { return L + (std::log10(h) - lx0) / (lx1 - lx0) * (W - L - R); };
  auto Y = [&](double e) { return H - B - (std::log10(e) - ly0) / (ly1 - ly0) * (H - T - B); };
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << title << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(std::ceil(ly0)); d <= static_cast<int>(std::floor(ly1)); ++d)
    os << "<text x=\"" << L - 8 << "\" y=\"" << Y(std::pow(10.0, d)) + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << d << "</text>\n";
  for (const auto& r : t.rows)
    os << "<text x=\"" << X(r.h) << "\" y=\"" << H - B + 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << r.h << "</text>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 16
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">h</text>\n";
  if (!t.rows.empty()) {
    const StudyRow& f = t.rows.back();
    const double h0 = t.rows.front().h;
    auto ref = [&](double slope, double e_anchor, const char* color) {
      const double e0 = e_anchor * std::pow(h0 / f.h, slope);
      os << "<line x1=\"" << X(f.h) << "\" y1=\"" << Y(e_anchor) << "\" x2=\"" << X(h0) << "\" y2=\"" << Y(e0)
         << "\" stroke=\"" << color << "\" stroke-dasharray=\"2,4\"/>\n";
    };
    if (f.e1_global > 0)
      ref(ref_global, f.e1_global * 0.7, "#1f4e9c");
    if (f.e1_inner > 0)
      ref(ref_local, f.e1_inner * 0.7, "#d9822b");
  }
  auto series = [&](auto pick, const char* color, bool diamond) {
    std::ostringstream path;
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      path << (i ? " L " : "M ") << X(t.rows[i].h) << ' ' << Y(pick(t.rows[i]));
    os << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color << "\"/>\n";
    for (const auto& r : t.rows) {
      const double x = X(r.h), y = Y(pick(r)), s = 5;
      if (diamond)
        os << "<polygon points=\"" << x << ',' << y - s << ' ' << x + s << ',' << y << ' ' << x << ',' << y + s
           << ' ' << x - s << ',' << y << "\" fill=\"" << color << "\"/>\n";
      else
        os << "<rect x=\"" << x - s << "\" y=\"" << y - s << "\" width=\"" << 2 * s << "\" height=\"" << 2 * s
           << "\" fill=\"" << color << "\"/>\n";
    }
  };
  series([](const StudyRow& r) { return r.e1_global; }, "#1f4e9c", false);
  series([](const StudyRow& r) { return r.e1_outer; }, "#d9822b", true);
  series([](const StudyRow& r) { return r.e1_inner; }, "#f2c12e", true);
  os << "</svg>\n";
}

struct LevelResult {
  Mesh mesh;
  GlobalDofMap dofmap;
  Eigen::VectorXd u;
  ErrorReport errors;
  SolveReport solve;
};

/// Discretize, solve and measure errors on one mesh.
inline LevelResult solve_on_mesh(const Mesh& mesh, const TestProblem& prob, OrderPair orders,
                                 const SolverOptions& sopt = {}, int error_quad_offset = 4) {
  LevelResult res;
  res.mesh = mesh;
  Assembly asmb = assemble(mesh, orders, prob.f);
  const SparseSystem sys = apply_dirichlet(asmb.A, asmb.b, asmb.dofmap, prob.g);
  res.u = solve(sys, sopt, &res.solve);
  res.dofmap = std::move(asmb.dofmap);
  ErrorOptions eopt;
  eopt.quad_degree_offset = error_quad_offset;
  eopt.singular_point = prob.singular_point;
  res.errors = compute_errors(mesh, res.dofmap, res.u, prob.exact(), prob.subdomain, eopt);
  return res;
}

/// Runs the level sequence 1..levels. When out_dir is set, the CSV is
/// rewritten after every level so a failure leaves the completed rows.
inline ConvergenceTable run_study(const StudyConfig& cfg, std::ostream* log = nullptr) {
  cfg.validate();
  const TestProblem prob = make_test_problem(cfg.problem);
  SolverOptions sopt;
  sopt.kind = cfg.solver;
  sopt.rel_tol = cfg.tol;

  std::filesystem::path csv_path, svg_path;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    csv_path = std::filesystem::path(cfg.out_dir) / (cfg.stem() + ".csv");
    svg_path = std::filesystem::path(cfg.out_dir) / (cfg.stem() + ".svg");
  }
  auto flush_csv = [&](const ConvergenceTable& t) {
    if (csv_path.empty())
      return;
    std::ofstream os(csv_path);
    if (!os)
      throw config_error("cannot write " + csv_path.string());
    write_csv(os, t);
  };

  ConvergenceTable table;
  for (int level = 1; level <= cfg.levels; ++level) {
    const auto t0 = std::chrono::steady_clock::now();
    StudyRow row;
    row.level = level;
    LevelResult res;
    try {
      const Mesh mesh = make_family_mesh(prob.domain, cfg.family, level, cfg.seed, cfg.lloyd_iters);
      row.regularity = check_regularity(mesh, cfg.gamma0, cfg.gamma1);
      if (log && !row.regularity.ok())
        *log << "warning: level " << level << ": " << row.regularity.violations.size()
             << " cells violate the regularity bounds\n";
      res = solve_on_mesh(mesh, prob, cfg.orders, sopt, cfg.error_quad_offset);
    } catch (const solver_error& e) {
      flush_csv(table);
      throw solver_error("level " + std::to_string(level) + ": " + e.what(), e.residual());
    } catch (const mesh_error& e) {
      flush_csv(table);
      throw mesh_error("level " + std::to_string(level) + ": " + e.what());
    }
    const auto t1 = std::chrono::steady_clock::now();
    row.h = res.mesh.h;
    row.ndof = res.dofmap.n_global;
    row.n_cells = res.mesh.n_cells();
    row.e1_global = res.errors.e1_global;
    row.e1_inner = res.errors.e1_inner;
    row.e1_outer = res.errors.e1_outer;
    row.l2_global = res.errors.l2_global;
    row.runtime_s = cfg.deterministic ? 0.0 : std::chrono::duration<double>(t1 - t0).count();
    if (!table.rows.empty() && !(row.h < table.rows.back().h))
      throw mesh_error("mesh size did not decrease at level " + std::to_string(level));
    table.rows.push_back(row);
    if (log)
      *log << format_csv_row(row) << '\n';
    flush_csv(table);
  }
  fit_slopes(table, cfg.rate_window);
  flush_csv(table);
  if (!svg_path.empty()) {
    std::ofstream os(svg_path);
    write_svg(os, table, prob.expected_global_rate(cfg.orders.k), prob.expected_local_rate(cfg.orders.k),
              cfg.problem + " / " + to_string(cfg.family) + " / k=" + std::to_string(cfg.orders.k) +
                  " m=" + std::to_string(cfg.orders.m));
  }
  return table;
}

} // namespace vem
