#pragma once

// Global dof numbering, assembly, Dirichlet elimination and linear solve.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "vem/element.hpp"
#include "vem/errors.hpp"
#include "vem/mesh.hpp"

namespace vem {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Global numbering: mesh vertices, then edge-interior nodes edge by edge,
/// then the moment dofs of each cell.
struct GlobalDofMap {
  OrderPair orders;
  std::vector<std::vector<int>> cell_dofs; // local -> global, per cell
  int n_global = 0;
  int n_values = 0;                        // vertex and edge-node dofs
  std::vector<bool> boundary;              // size n_global
  std::vector<Point> nodes;                // size n_values

  int n_boundary() const { return static_cast<int>(std::count(boundary.begin(), boundary.end(), true)); }
};

inline GlobalDofMap build_global_dofmap(const Mesh& mesh, OrderPair orders) {
  orders.validate();
  const int k = orders.k;
  const int nv = static_cast<int>(mesh.vertices.size());
  const double h = mesh.h > 0 ? mesh.h : compute_mesh_size(mesh);
  const double tol = 1e-12 * std::max(h, 1e-300) + 1e-15;

  GlobalDofMap g;
  g.orders = orders;
  g.nodes = mesh.vertices;

  std::map<std::pair<std::size_t, std::size_t>, std::pair<int, int>> edges; // base index, uses
  for (const auto& cell : mesh.cells)
    for (std::size_t i = 0; i < cell.size(); ++i) {
      const auto key = std::minmax(cell[i], cell[(i + 1) % cell.size()]);
      auto [it, inserted] = edges.try_emplace({key.first, key.second}, 0, 0);
      if (inserted) {
        it->second.first = static_cast<int>(g.nodes.size());
        g.nodes.resize(g.nodes.size() + static_cast<std::size_t>(k - 1), Point::Constant(std::nan("")));
      }
      ++it->second.second;
    }
  g.n_values = static_cast<int>(g.nodes.size());
  std::vector<bool> node_set(g.nodes.size(), false);
  std::fill(node_set.begin(), node_set.begin() + nv, true);

  int next = g.n_values;
  g.cell_dofs.resize(mesh.cells.size());
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& cell = mesh.cells[c];
    const Polygon poly = mesh.cell_polygon(c);
    const DofMap local = dof_layout(poly, orders);
    auto& map = g.cell_dofs[c];
    map.resize(static_cast<std::size_t>(local.size()));
    for (std::size_t e = 0; e < cell.size(); ++e) {
      const std::size_t a = cell[e];
      const std::size_t b = cell[(e + 1) % cell.size()];
      const int base = edges.at({std::min(a, b), std::max(a, b)}).first;
      map[e * static_cast<std::size_t>(k)] = static_cast<int>(a);
      for (int j = 1; j < k; ++j) {
        const int gid = a < b ? base + j - 1 : base + k - 1 - j;
        const Point& x = local.nodes[e * static_cast<std::size_t>(k) + static_cast<std::size_t>(j)];
        const auto gi = static_cast<std::size_t>(gid);
        if (!node_set[gi]) {
          g.nodes[gi] = x;
          node_set[gi] = true;
        } else if ((g.nodes[gi] - x).norm() > tol) {
          throw mesh_error("non-conforming edge nodes between cells sharing edge (" + std::to_string(a) + "," +
                           std::to_string(b) + ")");
        }
        map[e * static_cast<std::size_t>(k) + static_cast<std::size_t>(j)] = gid;
      }
    }
    for (int alpha = 0; alpha < local.n_internal; ++alpha)
      map[static_cast<std::size_t>(local.internal(alpha))] = next++;
  }
  g.n_global = next;

  g.boundary.assign(static_cast<std::size_t>(g.n_global), false);
  for (const auto& [key, info] : edges) {
    if (info.second != 1)
      continue;
    g.boundary[key.first] = true;
    g.boundary[key.second] = true;
    for (int j = 0; j < k - 1; ++j)
      g.boundary[static_cast<std::size_t>(info.first + j)] = true;
  }
  return g;
}

struct AssemblyOptions {
  int load_quad_degree = -1; // default 2k + 2
};

struct Assembly {
  GlobalDofMap dofmap;
  SparseMatrix A;
  Eigen::VectorXd b;
};

/// Sums local stiffness matrices and load vectors in fixed cell order.
inline Assembly assemble(const Mesh& mesh, OrderPair orders, const ScalarFunction& f,
                         const AssemblyOptions& opt = {}) {
  Assembly out;
  out.dofmap = build_global_dofmap(mesh, orders);
  const int n = out.dofmap.n_global;
  out.b = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const ElementContext ctx(mesh.cell_polygon(c), orders);
    const Eigen::MatrixXd K = local_stiffness(ctx, build_projector_nabla(ctx));
    const Eigen::VectorXd fl = f ? local_load(ctx, f, opt.load_quad_degree) : Eigen::VectorXd::Zero(K.rows());
    const auto& map = out.dofmap.cell_dofs[c];
    if (c == 0)
      trips.reserve(mesh.cells.size() * static_cast<std::size_t>(K.size()));
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
      const int gi = map[static_cast<std::size_t>(i)];
      out.b[gi] += fl[i];
      for (Eigen::Index j = 0; j < K.cols(); ++j)
        trips.emplace_back(gi, map[static_cast<std::size_t>(j)], K(i, j));
    }
  }
  out.A.resize(n, n);
  out.A.setFromTriplets(trips.begin(), trips.end());
  out.A.makeCompressed();
  return out;
}

struct SparseSystem {
  SparseMatrix A;                 // n_free x n_free
  Eigen::VectorXd b;
  std::vector<int> free_to_global;
  std::vector<int> global_to_free; // -1 for Dirichlet dofs
  Eigen::VectorXd lift;            // full-length, Dirichlet values at boundary dofs

  int n_free() const { return static_cast<int>(free_to_global.size()); }
};

/// Symmetric elimination of Dirichlet dofs carrying the nodal values of g.
inline SparseSystem apply_dirichlet(const SparseMatrix& A_full, const Eigen::VectorXd& b_full,
                                    const GlobalDofMap& dofmap, const ScalarFunction& g) {
  const int n = dofmap.n_global;
  SparseSystem s;
  s.lift = Eigen::VectorXd::Zero(n);
  s.global_to_free.assign(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    if (dofmap.boundary[static_cast<std::size_t>(i)]) {
      s.lift[i] = g ? g(dofmap.nodes[static_cast<std::size_t>(i)]) : 0.0;
    } else {
      s.global_to_free[static_cast<std::size_t>(i)] = static_cast<int>(s.free_to_global.size());
      s.free_to_global.push_back(i);
    }
  }
  const Eigen::VectorXd rhs = b_full - A_full * s.lift;
  const int nf = s.n_free();
  s.b.resize(nf);
  for (int i = 0; i < nf; ++i)
    s.b[i] = rhs[s.free_to_global[static_cast<std::size_t>(i)]];
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(A_full.nonZeros()));
  for (int col = 0; col < A_full.outerSize(); ++col) {
    const int fc = s.global_to_free[static_cast<std::size_t>(col)];
    if (fc < 0)
      continue;
    for (SparseMatrix::InnerIterator it(A_full, col); it; ++it) {
      const int fr = s.global_to_free[static_cast<std::size_t>(it.row())];
      if (fr >= 0)
        trips.emplace_back(fr, fc, it.value());
    }
  }
  s.A.resize(nf, nf);
  s.A.setFromTriplets(trips.begin(), trips.end());
  s.A.makeCompressed();
  return s;
}

enum class SolverKind { automatic, direct, cg };

struct SolverOptions {
  SolverKind kind = SolverKind::automatic;
  double rel_tol = 1e-12;
  int max_iterations = -1; // CG cap; default 20 n
  int direct_limit = 1000000;
};

struct SolveReport {
  SolverKind used = SolverKind::direct;
  double relative_residual = 0.0;
  int iterations = 0;
};

inline double inf_norm(const SparseMatrix& A) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
  for (int col = 0; col < A.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(A, col); it; ++it)
      rows[it.row()] += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

/// Normwise backward error |b - A x| / (|A| |x| + |b|) in the max norm. In
/// double precision this is the attainable notion of a small residual: the
/// plain ratio |b - A x| / |b| stalls near eps * cond(A) for high orders.
inline double relative_residual(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b,
                                double a_norm = -1.0) {
  if (a_norm < 0.0)
    a_norm = inf_norm(A);
  const double den = a_norm * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
  const double r = (b - A * x).lpNorm<Eigen::Infinity>();
  return den > 0.0 ? r / den : r;
}

namespace detail {

/// Diagonally preconditioned conjugate gradients stopping on the backward
/// error used by solve().
inline Eigen::VectorXd jacobi_cg(const SparseMatrix& A, const Eigen::VectorXd& b, double tol, double a_norm,
                                 int max_iterations, SolveReport& rep) {
  const Eigen::VectorXd inv_diag = A.diagonal().cwiseInverse();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const double b_inf = b.lpNorm<Eigen::Infinity>();
  auto backward = [&] { return r.lpNorm<Eigen::Infinity>() / (a_norm * x.lpNorm<Eigen::Infinity>() + b_inf); };
  int it = 0;
  for (; it < max_iterations && backward() > tol; ++it) {
    const Eigen::VectorXd q = A * p;
    const double alpha = rz / p.dot(q);
    x += alpha * p;
    r -= alpha * q;
    if (it % 50 == 49)
      r = b - A * x; // limit drift of the recursive residual
    z = inv_diag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  rep.iterations = it;
  rep.relative_residual = relative_residual(A, x, b, a_norm);
  return x;
}

} // namespace detail

/// Solves the reduced system and returns the full dof vector with the
/// Dirichlet values in place.
inline Eigen::VectorXd solve(const SparseSystem& sys, const SolverOptions& opt = {}, SolveReport* report = nullptr) {
  const int nf = sys.n_free();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nf);
  SolveReport rep;
  if (nf > 0) {
    SolverKind kind = opt.kind;
    if (kind == SolverKind::automatic)
      kind = nf < opt.direct_limit ? SolverKind::direct : SolverKind::cg;
    rep.used = kind;
    const double a_norm = inf_norm(sys.A);
    if (kind == SolverKind::direct) {
      Eigen::SimplicialLDLT<SparseMatrix> ldlt(sys.A);
      if (ldlt.info() != Eigen::Success)
        throw solver_error("sparse factorization failed", std::nan(""));
      if ((ldlt.vectorD().array() <= 0.0).any())
        throw solver_error("reduced matrix is not positive definite", std::nan(""));
      x = ldlt.solve(sys.b);
      rep.relative_residual = relative_residual(sys.A, x, sys.b, a_norm);
      for (int it = 0; it < 3 && rep.relative_residual > opt.rel_tol; ++it) {
        x += ldlt.solve(Eigen::VectorXd(sys.b - sys.A * x));
        rep.relative_residual = relative_residual(sys.A, x, sys.b, a_norm);
        rep.iterations = it + 1;
      }
    } else {
      x = detail::jacobi_cg(sys.A, sys.b, opt.rel_tol, a_norm,
                            opt.max_iterations > 0 ? opt.max_iterations : 20 * nf, rep);
    }
    if (!(rep.relative_residual <= opt.rel_tol)) {
      char msg[160];
      std::snprintf(msg, sizeof msg, "linear solve stopped at relative residual %.3e (tolerance %.3e)",
                    rep.relative_residual, opt.rel_tol);
      throw solver_error(msg, rep.relative_residual);
    }
  }
  if (report)
    *report = rep;
  Eigen::VectorXd u = sys.lift;
  for (int i = 0; i < nf; ++i)
    u[sys.free_to_global[static_cast<std::size_t>(i)]] = x[i];
  return u;
}

} // namespace vem
