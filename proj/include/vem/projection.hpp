#pragma once

// Polynomial L2 projections on a single cell.

#include <functional>
#include <span>

#include <Eigen/Dense>

#include "vem/errors.hpp"
#include "vem/monomial.hpp"
#include "vem/quadrature.hpp"

namespace vem {

using ScalarFunction = std::function<double(const Point&)>;

/// Gram matrix M(a,b) = int_K m_a m_b for the given basis and rule.
inline Eigen::MatrixXd mass_matrix(const MonomialBasis& basis, const QuadratureRule& rule) {
  const int n = basis.size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd v = basis.values(rule.points[q]);
    M.noalias() += rule.weights[q] * v * v.transpose();
  }
  return M;
}

/// Moments b(a) = int_K f m_a.
inline Eigen::VectorXd moments(const MonomialBasis& basis, const QuadratureRule& rule, const ScalarFunction& f) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(basis.size());
  for (std::size_t q = 0; q < rule.size(); ++q)
    b.noalias() += rule.weights[q] * f(rule.points[q]) * basis.values(rule.points[q]);
  return b;
}

/// Solves M x = b for a symmetric positive definite Gram matrix, throwing
/// evaluation_error when M is numerically singular.
inline Eigen::VectorXd solve_gram(const Eigen::MatrixXd& M, const Eigen::VectorXd& b) {
  const Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw evaluation_error("singular mass matrix");
  const Eigen::VectorXd d = llt.matrixL().toDenseMatrix().diagonal();
  if (d.minCoeff() < 1e-7 * d.maxCoeff())
    throw evaluation_error("ill-conditioned mass matrix");
  return llt.solve(b);
}

/// Coefficients of the L2 projection of f onto P_m(K) in the scaled
/// monomial basis of the cell.
inline Eigen::VectorXd l2_project_function(const ScalarFunction& f, std::span<const Point> polygon, int m,
                                           int quad_degree) {
  if (m < 0)
    throw config_error("projection degree must be nonnegative");
  const ElementGeometry g = compute_geometry(polygon);
  const MonomialBasis basis{m, g.centroid, g.h};
  const QuadratureRule rule = polygon_quadrature(polygon, std::max(quad_degree, 2 * m));
  return solve_gram(mass_matrix(basis, rule), moments(basis, rule, f));
}

} // namespace vem
