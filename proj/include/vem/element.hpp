#pragma once

// Local virtual element space V^k_m(K): degrees of freedom, the energy
// projector, computable L2 projections of discrete functions, stiffness
// with dofi-dofi stabilization, and load.
//
// Local dof numbering: boundary values first, edge by edge counterclockwise
// (vertex i, then the k-1 interior Gauss-Lobatto nodes of edge i), then the
// scaled moments (1/|K|) int_K v m_a, |a| <= m, in graded order.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vem/errors.hpp"
#include "vem/geometry.hpp"
#include "vem/monomial.hpp"
#include "vem/projection.hpp"
#include "vem/quadrature.hpp"

namespace vem {

inline constexpr int max_order = 6;

struct OrderPair {
  int k = 1;
  int m = 1;

  bool valid() const { return k >= 1 && k <= max_order && m >= std::max(0, k - 2) && m <= k; }

  void validate() const {
    if (!valid())
      throw config_error("invalid order pair (k=" + std::to_string(k) + ", m=" + std::to_string(m) +
                         "): need 1 <= k <= " + std::to_string(max_order) + " and max(0,k-2) <= m <= k");
  }

  friend bool operator==(const OrderPair&, const OrderPair&) = default;
};

struct DofMap {
  OrderPair orders;
  int n_edges = 0;
  int n_boundary = 0;
  int n_internal = 0;
  std::vector<Point> nodes; // boundary dof locations

  int size() const { return n_boundary + n_internal; }
  int internal(int alpha) const { return n_boundary + alpha; }
  /// Local index of Gauss-Lobatto node j (0..k) on edge e.
  int edge_node(int e, int j) const {
    const int k = orders.k;
    return j < k ? e * k + j : ((e + 1) % n_edges) * k;
  }
};

inline DofMap dof_layout(std::span<const Point> cell, OrderPair orders) {
  orders.validate();
  if (cell.size() < 3)
    throw mesh_error("cell has fewer than 3 vertices");
  DofMap d;
  d.orders = orders;
  d.n_edges = static_cast<int>(cell.size());
  d.n_boundary = d.n_edges * orders.k;
  d.n_internal = poly_dim(orders.m);
  const Rule1D gl = gauss_lobatto(orders.k + 1);
  d.nodes.reserve(static_cast<std::size_t>(d.n_boundary));
  for (std::size_t e = 0; e < cell.size(); ++e) {
    const Point& a = cell[e];
    const Point& b = cell[(e + 1) % cell.size()];
    d.nodes.push_back(a);
    for (int j = 1; j < orders.k; ++j)
      d.nodes.push_back(a + 0.5 * (1.0 + gl.nodes[static_cast<std::size_t>(j)]) * (b - a));
  }
  return d;
}

struct ProjectorNabla {
  Eigen::MatrixXd D;       // N_K x n_k
  Eigen::MatrixXd B;       // n_k x N_K
  Eigen::MatrixXd G;       // n_k x n_k, first row is the mean constraint
  Eigen::MatrixXd Pi_star; // n_k x N_K
  Eigen::MatrixXd Pi;      // N_K x N_K
};

/// Everything computed once per cell and shared by the local builders.
struct ElementContext {
  Polygon polygon;
  ElementGeometry geometry;
  OrderPair orders;
  DofMap dofs;
  MonomialBasis basis;
  QuadratureRule rule;     // exact to degree 2k
  Eigen::MatrixXd mass;    // int m_a m_b, |a|,|b| <= k
  Eigen::MatrixXd stiff;   // int grad m_a . grad m_b
  Rule1D gl;

  ElementContext(std::span<const Point> cell, OrderPair op)
      : polygon(cell.begin(), cell.end()), geometry(compute_geometry(cell)), orders(op),
        dofs(dof_layout(cell, op)), basis{op.k, geometry.centroid, geometry.h},
        rule(polygon_quadrature(cell, 2 * op.k)), gl(gauss_lobatto(op.k + 1)) {
    const int nk = basis.size();
    mass = Eigen::MatrixXd::Zero(nk, nk);
    stiff = Eigen::MatrixXd::Zero(nk, nk);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const MonomialEval ev = basis.eval(rule.points[q]);
      mass.noalias() += rule.weights[q] * ev.values * ev.values.transpose();
      stiff.noalias() += rule.weights[q] * ev.gradients * ev.gradients.transpose();
    }
  }

  int n_edges() const { return dofs.n_edges; }

  /// Calls fn(local_dof, point, weight * |e| / 2, outward unit normal) for
  /// every Gauss-Lobatto node of every edge; the sum is exact for edge
  /// integrands of degree <= 2k - 1.
  template <class Fn>
  void for_each_edge_node(Fn&& fn) const {
    const std::size_t n = polygon.size();
    for (std::size_t e = 0; e < n; ++e) {
      const Point& a = polygon[e];
      const Point& b = polygon[(e + 1) % n];
      const Point t = b - a;
      const double len = t.norm();
      const Point normal(t.y() / len, -t.x() / len);
      for (int j = 0; j <= orders.k; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        const Point x = a + 0.5 * (1.0 + gl.nodes[jj]) * t;
        fn(dofs.edge_node(static_cast<int>(e), j), x, 0.5 * len * gl.weights[jj], normal);
      }
    }
  }
};

inline ProjectorNabla build_projector_nabla(const ElementContext& ctx) {
  const int k = ctx.orders.k;
  const int nk = poly_dim(k);
  const int N = ctx.dofs.size();
  const double area = ctx.geometry.area;
  const double h = ctx.geometry.h;
  ProjectorNabla P;

  P.D = Eigen::MatrixXd::Zero(N, nk);
  for (int i = 0; i < ctx.dofs.n_boundary; ++i)
    P.D.row(i) = ctx.basis.values(ctx.dofs.nodes[static_cast<std::size_t>(i)]).transpose();
  for (int a = 0; a < ctx.dofs.n_internal; ++a)
    P.D.row(ctx.dofs.internal(a)) = ctx.mass.row(a) / area;

  P.B = Eigen::MatrixXd::Zero(nk, N);
  P.B(0, ctx.dofs.internal(0)) = 1.0;
  for (int alpha = 1; alpha < nk; ++alpha) {
    const auto [ax, ay] = monomial_exponent(alpha);
    const double s = -area / (h * h);
    if (ax >= 2)
      P.B(alpha, ctx.dofs.internal(monomial_index(ax - 2, ay))) += s * ax * (ax - 1);
    if (ay >= 2)
      P.B(alpha, ctx.dofs.internal(monomial_index(ax, ay - 2))) += s * ay * (ay - 1);
  }
  ctx.for_each_edge_node([&](int dof, const Point& x, double w, const Point& n) {
    const GradientMatrix grad = ctx.basis.eval(x).gradients;
    P.B.col(dof).tail(nk - 1) += w * (grad.bottomRows(nk - 1) * n);
  });

  P.G = ctx.stiff;
  P.G.row(0) = P.D.row(ctx.dofs.internal(0));

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(P.G);
  if (!(lu.rcond() > 1e-13))
    throw mesh_error("degenerate cell: projector matrix is singular");
  P.Pi_star = lu.solve(P.B);
  P.Pi = P.D * P.Pi_star;
  return P;
}

inline ProjectorNabla build_projector_nabla(std::span<const Point> cell, OrderPair orders) {
  return build_projector_nabla(ElementContext(cell, orders));
}

/// Monomial coefficients of Pi^0_k v_h: moments up to degree m come from the
/// dofs, higher moments from Pi^nabla v_h.
inline Eigen::MatrixXd build_l2_projection_of_vh(const ElementContext& ctx, const Eigen::MatrixXd& Pi_star) {
  const int nk = poly_dim(ctx.orders.k);
  const int nm = poly_dim(ctx.orders.m);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nk, ctx.dofs.size());
  for (int a = 0; a < nm; ++a)
    rhs(a, ctx.dofs.internal(a)) = ctx.geometry.area;
  if (nm < nk)
    rhs.bottomRows(nk - nm) = ctx.mass.bottomRows(nk - nm) * Pi_star;
  return ctx.mass.llt().solve(rhs);
}

inline Eigen::MatrixXd build_l2_projection_of_vh(std::span<const Point> cell, OrderPair orders,
                                                 const Eigen::MatrixXd& Pi_star) {
  return build_l2_projection_of_vh(ElementContext(cell, orders), Pi_star);
}

struct GradProjection {
  Eigen::MatrixXd x; // n_{k-1} x N_K
  Eigen::MatrixXd y;
};

/// Monomial coefficients (degree k-1) of Pi^0_{k-1} of both components of
/// grad v_h, via integration by parts.
inline GradProjection build_grad_projection(const ElementContext& ctx) {
  const int k = ctx.orders.k;
  const int n1 = poly_dim(k - 1);
  const int N = ctx.dofs.size();
  const double area = ctx.geometry.area;
  const double h = ctx.geometry.h;
  Eigen::MatrixXd rx = Eigen::MatrixXd::Zero(n1, N);
  Eigen::MatrixXd ry = Eigen::MatrixXd::Zero(n1, N);
  for (int beta = 0; beta < n1; ++beta) {
    const auto [bx, by] = monomial_exponent(beta);
    if (bx >= 1)
      rx(beta, ctx.dofs.internal(monomial_index(bx - 1, by))) -= area * bx / h;
    if (by >= 1)
      ry(beta, ctx.dofs.internal(monomial_index(bx, by - 1))) -= area * by / h;
  }
  const MonomialBasis low{k - 1, ctx.basis.center, ctx.basis.scale};
  ctx.for_each_edge_node([&](int dof, const Point& x, double w, const Point& n) {
    const Eigen::VectorXd v = low.values(x);
    rx.col(dof) += w * n.x() * v;
    ry.col(dof) += w * n.y() * v;
  });
  const Eigen::LLT<Eigen::MatrixXd> llt(ctx.mass.topLeftCorner(n1, n1));
  return {llt.solve(rx), llt.solve(ry)};
}

inline GradProjection build_grad_projection(std::span<const Point> cell, OrderPair orders) {
  return build_grad_projection(ElementContext(cell, orders));
}

/// Consistency term plus the dofi-dofi stabilization (I - Pi)^T (I - Pi).
inline Eigen::MatrixXd local_stiffness(const ElementContext& ctx, const ProjectorNabla& P) {
  const Eigen::MatrixXd consistency = P.Pi_star.transpose() * ctx.stiff * P.Pi_star;
  const Eigen::MatrixXd R = Eigen::MatrixXd::Identity(P.Pi.rows(), P.Pi.cols()) - P.Pi;
  const Eigen::MatrixXd K = consistency + R.transpose() * R;
  return 0.5 * (K + K.transpose());
}

inline Eigen::MatrixXd local_stiffness(std::span<const Point> cell, OrderPair orders) {
  const ElementContext ctx(cell, orders);
  return local_stiffness(ctx, build_projector_nabla(ctx));
}

/// Load vector of int_K (Pi^0_m f) v_h; only moment dofs receive entries.
inline Eigen::VectorXd local_load(const ElementContext& ctx, const ScalarFunction& f, int quad_degree = -1,
                                  const std::optional<SingularGrading>& grading = std::nullopt) {
  const int m = ctx.orders.m;
  const int nm = poly_dim(m);
  if (quad_degree < 0)
    quad_degree = 2 * ctx.orders.k + 2;
  const QuadratureRule rule = polygon_quadrature(ctx.polygon, std::max(quad_degree, 2 * m), grading);
  const MonomialBasis bm{m, ctx.basis.center, ctx.basis.scale};
  const Eigen::VectorXd c = solve_gram(ctx.mass.topLeftCorner(nm, nm), moments(bm, rule, f));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ctx.dofs.size());
  out.tail(nm) = ctx.geometry.area * c;
  return out;
}

inline Eigen::VectorXd local_load(std::span<const Point> cell, OrderPair orders, const ScalarFunction& f) {
  return local_load(ElementContext(cell, orders), f);
}

/// Dof interpolant: point values at boundary nodes and scaled moments.
inline Eigen::VectorXd interpolate(const ElementContext& ctx, const ScalarFunction& v, int quad_degree = -1,
                                   const std::optional<SingularGrading>& grading = std::nullopt) {
  if (quad_degree < 0)
    quad_degree = 2 * ctx.orders.k + 4;
  Eigen::VectorXd out(ctx.dofs.size());
  for (int i = 0; i < ctx.dofs.n_boundary; ++i)
    out[i] = v(ctx.dofs.nodes[static_cast<std::size_t>(i)]);
  const int m = ctx.orders.m;
  const QuadratureRule rule = polygon_quadrature(ctx.polygon, std::max(quad_degree, 2 * m), grading);
  const MonomialBasis bm{m, ctx.basis.center, ctx.basis.scale};
  out.tail(poly_dim(m)) = moments(bm, rule, v) / ctx.geometry.area;
  return out;
}

inline Eigen::VectorXd interpolate(std::span<const Point> cell, OrderPair orders, const ScalarFunction& v) {
  return interpolate(ElementContext(cell, orders), v);
}

/// All local operators of one cell.
struct LocalOperators {
  ProjectorNabla nabla;
  Eigen::MatrixXd Pi0k_star;
  GradProjection Pi0grad;
  Eigen::MatrixXd K_loc;
};

inline LocalOperators build_local_operators(const ElementContext& ctx) {
  LocalOperators L;
  L.nabla = build_projector_nabla(ctx);
  L.Pi0k_star = build_l2_projection_of_vh(ctx, L.nabla.Pi_star);
  L.Pi0grad = build_grad_projection(ctx);
  L.K_loc = local_stiffness(ctx, L.nabla);
  return L;
}

} // namespace vem
