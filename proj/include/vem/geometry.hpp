#pragma once

// Planar polygon utilities shared by the mesh generators, the quadrature
// and the element code. Polygons are vertex cycles, counterclockwise
// unless stated otherwise, with no repeated closing vertex.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vem/errors.hpp"

namespace vem {

using Point = Eigen::Vector2d;
using Polygon = std::vector<Point>;

inline double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

inline double signed_area(std::span<const Point> poly) {
  const std::size_t n = poly.size();
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    twice += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * twice;
}

/// Area centroid by the shoelace formula. Coordinates are shifted to the
/// first vertex to limit cancellation on small cells far from the origin.
inline Point polygon_centroid(std::span<const Point> poly) {
  const std::size_t n = poly.size();
  const Point o = poly[0];
  double a2 = 0.0;
  Point c = Point::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Point p = poly[i] - o;
    const Point q = poly[(i + 1) % n] - o;
    const double w = cross(p, q);
    a2 += w;
    c += w * (p + q);
  }
  return o + c / (3.0 * a2);
}

inline double polygon_diameter(std::span<const Point> poly) {
  double d = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    for (std::size_t j = i + 1; j < poly.size(); ++j)
      d = std::max(d, (poly[i] - poly[j]).norm());
  return d;
}

inline double min_vertex_distance(std::span<const Point> poly) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i)
    for (std::size_t j = i + 1; j < poly.size(); ++j)
      d = std::min(d, (poly[i] - poly[j]).norm());
  return d;
}

/// Distance from p to the infinite line through a and b.
inline double line_distance(const Point& p, const Point& a, const Point& b) {
  const Point t = b - a;
  return std::abs(cross(t, p - a)) / t.norm();
}

inline double segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point t = b - a;
  const double len2 = t.squaredNorm();
  double s = len2 > 0.0 ? (p - a).dot(t) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (a + s * t - p).norm();
}

/// Convexity of a counterclockwise polygon; collinear vertices are allowed.
inline bool is_convex(std::span<const Point> poly, double tol = 1e-12) {
  const std::size_t n = poly.size();
  const double scale = polygon_diameter(poly);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    const Point& c = poly[(i + 2) % n];
    if (cross(b - a, c - b) < -tol * scale * scale)
      return false;
  }
  return true;
}

namespace detail {

inline int orientation(const Point& a, const Point& b, const Point& c, double eps) {
  const double v = cross(b - a, c - a);
  return v > eps ? 1 : (v < -eps ? -1 : 0);
}

inline bool on_segment(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

inline bool segments_intersect(const Point& a, const Point& b, const Point& c, const Point& d,
                               double eps) {
  const int o1 = orientation(a, b, c, eps);
  const int o2 = orientation(a, b, d, eps);
  const int o3 = orientation(c, d, a, eps);
  const int o4 = orientation(c, d, b, eps);
  if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0)
    return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

} // namespace detail

/// True if no two non-adjacent edges touch and no vertex is repeated.
inline bool is_simple(std::span<const Point> poly) {
  const std::size_t n = poly.size();
  if (n < 3)
    return false;
  const double scale = polygon_diameter(poly);
  if (!(scale > 0.0))
    return false;
  const double eps = 1e-14 * scale * scale;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if ((poly[i] - poly[j]).norm() <= 1e-14 * scale)
        return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent)
        continue;
      if (detail::segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n], eps))
        return false;
    }
  }
  return true;
}

/// Even-odd point location; points on the boundary may go either way.
inline bool point_in_polygon(const Point& p, std::span<const Point> poly) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x)
        inside = !inside;
    }
  }
  return inside;
}

/// Sutherland-Hodgman step: keeps {x : normal . x <= offset}.
inline Polygon clip_halfplane(const Polygon& poly, const Point& normal, double offset) {
  Polygon out;
  const std::size_t n = poly.size();
  if (n == 0)
    return out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& s = poly[i];
    const Point& e = poly[(i + 1) % n];
    const double ds = normal.dot(s) - offset;
    const double de = normal.dot(e) - offset;
    if (ds <= 0.0)
      out.push_back(s);
    if ((ds < 0.0 && de > 0.0) || (ds > 0.0 && de < 0.0)) {
      const double t = ds / (ds - de);
      out.push_back(s + t * (e - s));
    }
  }
  return out;
}

/// Drops consecutive vertices closer than tol (cyclically).
inline Polygon remove_duplicate_vertices(const Polygon& poly, double tol) {
  Polygon out;
  for (const Point& p : poly)
    if (out.empty() || (p - out.back()).norm() > tol)
      out.push_back(p);
  while (out.size() > 1 && (out.front() - out.back()).norm() <= tol)
    out.pop_back();
  return out;
}

/// Drops vertices whose distance to the chord joining their neighbours is
/// below tol.
inline Polygon remove_collinear_vertices(const Polygon& poly, double tol) {
  Polygon cur = poly;
  bool changed = true;
  while (changed && cur.size() > 3) {
    changed = false;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const Point& a = cur[(i + cur.size() - 1) % cur.size()];
      const Point& b = cur[i];
      const Point& c = cur[(i + 1) % cur.size()];
      if ((c - a).norm() > 0.0 && line_distance(b, a, c) <= tol && (b - a).dot(c - b) > 0.0) {
        cur.erase(cur.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return cur;
}

/// Per-cell geometric data. rho is a lower bound for the radius of a disk,
/// centred at the centroid, with respect to which the cell is star shaped:
/// the smallest distance from the centroid to an edge line.
struct ElementGeometry {
  double h = 0.0;
  Point centroid = Point::Zero();
  double area = 0.0;
  double rho = 0.0;
  std::size_t n_edges = 0;
};

inline ElementGeometry compute_geometry(std::span<const Point> poly) {
  if (poly.size() < 3)
    throw mesh_error("polygon with fewer than 3 vertices");
  ElementGeometry g;
  g.n_edges = poly.size();
  g.area = signed_area(poly);
  g.h = polygon_diameter(poly);
  if (!(g.area > 1e-14 * g.h * g.h))
    throw mesh_error("degenerate or clockwise polygon (area " + std::to_string(g.area) + ")");
  g.centroid = polygon_centroid(poly);
  double rho = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i)
    rho = std::min(rho, line_distance(g.centroid, poly[i], poly[(i + 1) % poly.size()]));
  g.rho = std::min(rho, 0.5 * g.h);
  return g;
}

} // namespace vem
