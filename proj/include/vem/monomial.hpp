#pragma once

// Scaled monomials m_a(x) = ((x - x_K) / h_K)^a on a cell, in graded order:
// (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...

#include <array>
#include <cassert>

#include <Eigen/Dense>

#include "vem/geometry.hpp"

namespace vem {

/// Dimension of P_k in two variables; zero for k < 0.
constexpr int poly_dim(int k) { return k < 0 ? 0 : (k + 1) * (k + 2) / 2; }

constexpr int monomial_index(int ax, int ay) {
  const int d = ax + ay;
  return d * (d + 1) / 2 + ay;
}

constexpr std::array<int, 2> monomial_exponent(int index) {
  int d = 0;
  while (poly_dim(d) <= index)
    ++d;
  const int ay = index - poly_dim(d - 1);
  return {d - ay, ay};
}

constexpr int monomial_degree(int index) {
  const auto e = monomial_exponent(index);
  return e[0] + e[1];
}

using GradientMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

struct MonomialEval {
  Eigen::VectorXd values;
  GradientMatrix gradients;
};

struct MonomialBasis {
  int degree = 0;
  Point center = Point::Zero();
  double scale = 1.0;

  int size() const { return poly_dim(degree); }

  Eigen::VectorXd values(const Point& x) const {
    Eigen::VectorXd v(size());
    std::array<double, 16> px{}, py{};
    fill_powers(x, px, py);
    for (int d = 0, i = 0; d <= degree; ++d)
      for (int ay = 0; ay <= d; ++ay, ++i)
        v[i] = px[d - ay] * py[ay];
    return v;
  }

  /// Values and exact gradients; each derivative carries a 1/h_K factor.
  MonomialEval eval(const Point& x) const {
    MonomialEval r{Eigen::VectorXd(size()), GradientMatrix(size(), 2)};
    std::array<double, 16> px{}, py{};
    fill_powers(x, px, py);
    const double inv = 1.0 / scale;
    for (int d = 0, i = 0; d <= degree; ++d)
      for (int ay = 0; ay <= d; ++ay, ++i) {
        const int ax = d - ay;
        r.values[i] = px[ax] * py[ay];
        r.gradients(i, 0) = ax > 0 ? ax * px[ax - 1] * py[ay] * inv : 0.0;
        r.gradients(i, 1) = ay > 0 ? ay * px[ax] * py[ay - 1] * inv : 0.0;
      }
    return r;
  }

private:
  void fill_powers(const Point& x, std::array<double, 16>& px, std::array<double, 16>& py) const {
    assert(degree < 15);
    const double xi = (x.x() - center.x()) / scale;
    const double eta = (x.y() - center.y()) / scale;
    px[0] = py[0] = 1.0;
    for (int i = 1; i <= degree; ++i) {
      px[i] = px[i - 1] * xi;
      py[i] = py[i - 1] * eta;
    }
  }
};

inline MonomialEval monomial_eval(const MonomialBasis& basis, const Point& x) { return basis.eval(x); }

/// Evaluates sum_a c_a m_a(x).
inline double eval_polynomial(const MonomialBasis& basis, const Eigen::VectorXd& coeffs, const Point& x) {
  return coeffs.dot(basis.values(x));
}

} // namespace vem
