#pragma once

// H1-type errors e1 = (|u - Pi0_k u_h|_0^2 + |grad u - Pi0_{k-1} grad u_h|_0^2)^(1/2)
// over the whole mesh and over the cells inside / touching an interior disk.

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "vem/element.hpp"
#include "vem/errors.hpp"
#include "vem/mesh.hpp"
#include "vem/quadrature.hpp"
#include "vem/system.hpp"

namespace vem {

using VectorFunction = std::function<Point(const Point&)>;

struct Subdomain {
  Point center = Point(0.5, 0.5);
  double radius = 0.25;

  bool contains(const Point& p) const { return (p - center).norm() <= radius; }
};

struct CellClassification {
  std::vector<std::size_t> inner; // cells inside the closed disk
  std::vector<std::size_t> outer; // cells meeting the closed disk
};

inline CellClassification classify_elements(const Mesh& mesh, const Subdomain& sub) {
  CellClassification out;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const Polygon poly = mesh.cell_polygon(c);
    bool all_in = true;
    bool meets = point_in_polygon(sub.center, poly);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      all_in = all_in && sub.contains(poly[i]);
      meets = meets || segment_distance(sub.center, poly[i], poly[(i + 1) % poly.size()]) <= sub.radius;
    }
    if (all_in)
      out.inner.push_back(c);
    if (all_in || meets)
      out.outer.push_back(c);
  }
  return out;
}

struct ExactSolution {
  ScalarFunction u;
  VectorFunction grad;
};

struct ErrorOptions {
  int quad_degree_offset = 4;               // error rule exact to degree 2k + offset
  std::optional<Point> singular_point;      // graded integration toward this point
  int singular_levels = 4;
};

struct ErrorReport {
  double e1_global = 0.0;
  double e1_inner = 0.0;
  double e1_outer = 0.0;
  double l2_global = 0.0;
  std::size_t n_inner_cells = 0;
  std::size_t n_outer_cells = 0;
  std::vector<double> cell_e1_squared;
};

/// Squared L2 error of Pi0_k u_h and of Pi0_{k-1} grad u_h on one cell.
inline std::pair<double, double> cell_errors_squared(const ElementContext& ctx, const Eigen::VectorXd& local_dofs,
                                                     const ExactSolution& exact, const ErrorOptions& opt) {
  const int k = ctx.orders.k;
  const ProjectorNabla P = build_projector_nabla(ctx);
  const Eigen::VectorXd cu = build_l2_projection_of_vh(ctx, P.Pi_star) * local_dofs;
  const GradProjection gp = build_grad_projection(ctx);
  const Eigen::VectorXd cgx = gp.x * local_dofs;
  const Eigen::VectorXd cgy = gp.y * local_dofs;
  const MonomialBasis low{k - 1, ctx.basis.center, ctx.basis.scale};

  std::optional<SingularGrading> grading;
  if (opt.singular_point) {
    const double tol = 1e-12 * ctx.geometry.h;
    for (const Point& v : ctx.polygon)
      if ((v - *opt.singular_point).norm() <= tol)
        grading = SingularGrading{v, opt.singular_levels};
  }
  const QuadratureRule rule =
      polygon_quadrature(ctx.polygon, std::max(0, 2 * k + opt.quad_degree_offset), grading);

  double l2 = 0.0, h1 = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Point& x = rule.points[q];
    double u = 0.0;
    Point gu;
    try {
      u = exact.u(x);
      gu = exact.grad(x);
    } catch (const evaluation_error& e) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "exact solution not evaluable at quadrature node (" << x.x() << ", " << x.y() << "): " << e.what();
      throw evaluation_error(msg.str());
    }
    const double du = u - cu.dot(ctx.basis.values(x));
    const Eigen::VectorXd lv = low.values(x);
    const double dx = gu.x() - cgx.dot(lv);
    const double dy = gu.y() - cgy.dot(lv);
    l2 += rule.weights[q] * du * du;
    h1 += rule.weights[q] * (dx * dx + dy * dy);
  }
  return {l2, h1};
}

inline ErrorReport compute_errors(const Mesh& mesh, const GlobalDofMap& dofmap, const Eigen::VectorXd& u_dofs,
                                  const ExactSolution& exact, const Subdomain& sub, const ErrorOptions& opt = {}) {
  ErrorReport r;
  const CellClassification cls = classify_elements(mesh, sub);
  r.n_inner_cells = cls.inner.size();
  r.n_outer_cells = cls.outer.size();
  r.cell_e1_squared.resize(mesh.cells.size());
  double l2 = 0.0, e1 = 0.0;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const ElementContext ctx(mesh.cell_polygon(c), dofmap.orders);
    const auto& map = dofmap.cell_dofs[c];
    Eigen::VectorXd local(static_cast<Eigen::Index>(map.size()));
    for (std::size_t i = 0; i < map.size(); ++i)
      local[static_cast<Eigen::Index>(i)] = u_dofs[map[i]];
    const auto [a, b] = cell_errors_squared(ctx, local, exact, opt);
    r.cell_e1_squared[c] = a + b;
    l2 += a;
    e1 += a + b;
  }
  double inner = 0.0, outer = 0.0;
  for (auto c : cls.inner)
    inner += r.cell_e1_squared[c];
  for (auto c : cls.outer)
    outer += r.cell_e1_squared[c];
  r.e1_global = std::sqrt(e1);
  r.l2_global = std::sqrt(l2);
  r.e1_inner = std::sqrt(inner);
  r.e1_outer = std::sqrt(outer);
  return r;
}

} // namespace vem
