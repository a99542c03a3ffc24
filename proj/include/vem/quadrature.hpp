#pragma once

// One-dimensional Gauss and Gauss-Lobatto rules, collapsed-coordinate rules
// on triangles, and composite rules on polygons.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vem/errors.hpp"
#include "vem/geometry.hpp"

namespace vem {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

/// Returns {P_n(x), P_{n-1}(x)} by the three-term recurrence, n >= 1.
inline std::pair<double, double> legendre_pair(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, p0};
}

} // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1], exact to degree 2n - 1.
inline Rule1D gauss_legendre(int n) {
  if (n < 1)
    throw config_error("gauss_legendre needs at least one point");
  Rule1D r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  auto derivative = [n](double x) {
    const auto [pn, pm] = detail::legendre_pair(n, x);
    return n * (x * pn - pm) / (x * x - 1.0);
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const double dx = detail::legendre_pair(n, x).first / derivative(x);
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    if (n % 2 == 1 && i == n / 2)
      x = 0.0;
    const double dp = derivative(x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    r.nodes[lo] = -x;
    r.nodes[hi] = x;
    r.weights[lo] = r.weights[hi] = w;
  }
  return r;
}

/// n-point Gauss-Lobatto rule on [-1, 1] (endpoints included), exact to
/// degree 2n - 3. Nodes in increasing order.
inline Rule1D gauss_lobatto(int n) {
  if (n < 2)
    throw config_error("gauss_lobatto needs at least two points");
  const int N = n - 1;
  Rule1D r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = -std::cos(std::numbers::pi * i / N);
    for (int it = 0; it < 200; ++it) {
      const auto [pn, pm] = detail::legendre_pair(N, x);
      const double dx = (x * pn - pm) / (n * pn);
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    const double pn = detail::legendre_pair(N, x).first;
    r.nodes[static_cast<std::size_t>(i)] = x;
    r.weights[static_cast<std::size_t>(i)] = 2.0 / (N * n * pn * pn);
  }
  r.nodes.front() = -1.0;
  r.nodes.back() = 1.0;
  return r;
}

/// Edge rules for boundary order k: the (k+1)-point Gauss-Lobatto rule that
/// carries the boundary degrees of freedom, and a (k+2)-point Gauss rule.
struct EdgeRule {
  Rule1D gauss_lobatto;
  Rule1D gauss;
};

inline EdgeRule edge_rules(int k) {
  if (k < 1 || k > 6)
    throw config_error("edge rules are available for 1 <= k <= 6, got " + std::to_string(k));
  return {vem::gauss_lobatto(k + 1), gauss_legendre(k + 2)};
}

struct QuadratureRule {
  std::vector<Point> points;
  std::vector<double> weights;
  int exactness_degree = 0;

  std::size_t size() const { return points.size(); }

  double weight_sum() const {
    double s = 0.0;
    for (double w : weights)
      s += w;
    return s;
  }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t q = 0; q < points.size(); ++q)
      s += weights[q] * f(points[q]);
    return s;
  }
};

/// Collapsed (Duffy) Gauss rule on the triangle (a, b, c), exact for
/// polynomials of the given degree. The collapsed vertex is a, so integrands
/// with an integrable point singularity at a are handled gracefully.
inline void append_triangle_rule(QuadratureRule& rule, const Point& a, const Point& b, const Point& c,
                                 int degree) {
  const double area2 = std::abs(cross(b - a, c - a));
  const Rule1D gu = gauss_legendre((degree + 3) / 2);
  const Rule1D gv = gauss_legendre((degree + 2) / 2);
  for (std::size_t i = 0; i < gu.nodes.size(); ++i) {
    const double u = 0.5 * (gu.nodes[i] + 1.0);
    const double wu = 0.5 * gu.weights[i];
    for (std::size_t j = 0; j < gv.nodes.size(); ++j) {
      const double v = 0.5 * (gv.nodes[j] + 1.0);
      const double wv = 0.5 * gv.weights[j];
      rule.points.push_back((1.0 - u) * a + u * ((1.0 - v) * b + v * c));
      rule.weights.push_back(wu * wv * u * area2);
    }
  }
}

namespace detail {

/// Ear clipping for a simple counterclockwise polygon.
inline std::vector<std::array<std::size_t, 3>> ear_clip(std::span<const Point> poly) {
  std::vector<std::size_t> idx(poly.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    idx[i] = i;
  std::vector<std::array<std::size_t, 3>> tris;
  const double scale = polygon_diameter(poly);
  const double eps = 1e-14 * scale * scale;
  std::size_t guard = 0;
  while (idx.size() > 3) {
    bool clipped = false;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const std::size_t ip = idx[(i + idx.size() - 1) % idx.size()];
      const std::size_t ic = idx[i];
      const std::size_t in = idx[(i + 1) % idx.size()];
      const Point& a = poly[ip];
      const Point& b = poly[ic];
      const Point& c = poly[in];
      if (cross(b - a, c - b) <= eps)
        continue;
      bool contains = false;
      for (std::size_t j : idx) {
        if (j == ip || j == ic || j == in)
          continue;
        const Point& p = poly[j];
        if (cross(b - a, p - a) >= -eps && cross(c - b, p - b) >= -eps && cross(a - c, p - c) >= -eps) {
          contains = true;
          break;
        }
      }
      if (contains)
        continue;
      tris.push_back({ip, ic, in});
      idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(i));
      clipped = true;
      break;
    }
    if (!clipped || ++guard > 10 * poly.size())
      throw mesh_error("ear clipping failed: polygon is not simple");
  }
  tris.push_back({idx[0], idx[1], idx[2]});
  return tris;
}

inline void append_refined_triangle(QuadratureRule& rule, const Point& s, const Point& b, const Point& c,
                                    int degree, int levels) {
  if (levels <= 0) {
    append_triangle_rule(rule, s, b, c, degree);
    return;
  }
  const Point bm = 0.5 * (s + b);
  const Point cm = 0.5 * (s + c);
  append_triangle_rule(rule, bm, b, c, degree);
  append_triangle_rule(rule, bm, c, cm, degree);
  append_refined_triangle(rule, s, bm, cm, degree, levels - 1);
}

} // namespace detail

/// Point toward which a polygon rule is graded, with the number of dyadic
/// refinement levels.
struct SingularGrading {
  Point point = Point::Zero();
  int levels = 4;
};

/// Composite rule on a simple polygon exact to the given degree: a fan from
/// the centroid for convex cells, ear clipping otherwise. Sub-triangles
/// having the grading point as a vertex are refined dyadically toward it.
inline QuadratureRule polygon_quadrature(std::span<const Point> poly, int degree,
                                         const std::optional<SingularGrading>& grading = std::nullopt) {
  if (poly.size() < 3)
    throw mesh_error("quadrature on a polygon with fewer than 3 vertices");
  QuadratureRule rule;
  rule.exactness_degree = degree;
  const double scale = polygon_diameter(poly);
  auto add = [&](const Point& a, const Point& b, const Point& c) {
    if (grading) {
      const double tol = 1e-12 * scale;
      const Point& s = grading->point;
      if ((a - s).norm() <= tol)
        return detail::append_refined_triangle(rule, a, b, c, degree, grading->levels);
      if ((b - s).norm() <= tol)
        return detail::append_refined_triangle(rule, b, c, a, degree, grading->levels);
      if ((c - s).norm() <= tol)
        return detail::append_refined_triangle(rule, c, a, b, degree, grading->levels);
    }
    append_triangle_rule(rule, a, b, c, degree);
  };
  if (is_convex(poly)) {
    const Point g = polygon_centroid(poly);
    for (std::size_t i = 0; i < poly.size(); ++i)
      add(g, poly[i], poly[(i + 1) % poly.size()]);
  } else {
    if (!is_simple(poly))
      throw mesh_error("cannot triangulate a self-intersecting polygon");
    for (const auto& t : detail::ear_clip(poly))
      add(poly[t[0]], poly[t[1]], poly[t[2]]);
  }
  return rule;
}

} // namespace vem
