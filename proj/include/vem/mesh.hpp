#pragma once

// Polygonal meshes of the two test domains: storage, validation,
// per-cell geometry and shape-regularity audit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vem/errors.hpp"
#include "vem/geometry.hpp"

namespace vem {

enum class DomainKind { unit_square, l_shape };

/// UnitSquare = (0,1)^2, LShape = (-1,1)^2 minus [0,1]^2.
struct Domain {
  DomainKind kind = DomainKind::unit_square;

  static Domain unit_square() { return {DomainKind::unit_square}; }
  static Domain l_shape() { return {DomainKind::l_shape}; }

  static Domain parse(std::string_view name) {
    if (name == "square")
      return unit_square();
    if (name == "lshape")
      return l_shape();
    throw config_error("unknown domain '" + std::string(name) + "' (expected square|lshape)");
  }

  std::string name() const { return kind == DomainKind::unit_square ? "square" : "lshape"; }

  double area() const { return kind == DomainKind::unit_square ? 1.0 : 3.0; }

  /// Counterclockwise boundary cycle.
  Polygon boundary() const {
    if (kind == DomainKind::unit_square)
      return {Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)};
    return {Point(-1, -1), Point(1, -1), Point(1, 0), Point(0, 0), Point(0, 1), Point(-1, 1)};
  }

  Point lower_left() const { return kind == DomainKind::unit_square ? Point(0, 0) : Point(-1, -1); }
  Point upper_right() const { return Point(1, 1); }

  /// Closed-domain membership with tolerance.
  bool contains(const Point& p, double tol = 1e-12) const {
    const Point lo = lower_left();
    const Point hi = upper_right();
    if (p.x() < lo.x() - tol || p.x() > hi.x() + tol || p.y() < lo.y() - tol || p.y() > hi.y() + tol)
      return false;
    if (kind == DomainKind::l_shape && p.x() > tol && p.y() > tol)
      return false;
    return true;
  }

  double boundary_distance(const Point& p) const {
    const Polygon b = boundary();
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < b.size(); ++i)
      d = std::min(d, segment_distance(p, b[i], b[(i + 1) % b.size()]));
    return d;
  }

  bool on_boundary(const Point& p, double tol = 1e-10) const { return boundary_distance(p) <= tol; }

  friend bool operator==(const Domain&, const Domain&) = default;
};

struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::vector<std::size_t>> cells;
  Domain domain;
  double h = 0.0;

  std::size_t n_cells() const { return cells.size(); }

  Polygon cell_polygon(std::size_t c) const {
    Polygon p;
    p.reserve(cells[c].size());
    for (auto v : cells[c])
      p.push_back(vertices[v]);
    return p;
  }
};

inline ElementGeometry element_geometry(const Mesh& mesh, std::size_t cell) {
  if (cell >= mesh.cells.size())
    throw mesh_error("cell index " + std::to_string(cell) + " out of range");
  const Polygon p = mesh.cell_polygon(cell);
  return compute_geometry(p);
}

inline double compute_mesh_size(const Mesh& mesh) {
  double h = 0.0;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c)
    h = std::max(h, polygon_diameter(mesh.cell_polygon(c)));
  return h;
}

/// Checks every structural invariant of a mesh and throws mesh_error with a
/// description of the first violation found.
inline void validate_mesh(const Mesh& mesh) {
  if (mesh.cells.empty())
    throw mesh_error("mesh has no cells");
  double area_sum = 0.0;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<int>> edges;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& cell = mesh.cells[c];
    if (cell.size() < 3)
      throw mesh_error("cell " + std::to_string(c) + " has fewer than 3 vertices");
    for (auto v : cell)
      if (v >= mesh.vertices.size())
        throw mesh_error("cell " + std::to_string(c) + " references missing vertex " + std::to_string(v));
    const Polygon poly = mesh.cell_polygon(c);
    if (!is_simple(poly))
      throw mesh_error("cell " + std::to_string(c) + " is not a simple polygon");
    const double a = signed_area(poly);
    if (!(a > 0.0))
      throw mesh_error("cell " + std::to_string(c) + " is not counterclockwise");
    area_sum += a;
    for (std::size_t i = 0; i < cell.size(); ++i) {
      const std::size_t u = cell[i];
      const std::size_t w = cell[(i + 1) % cell.size()];
      const auto key = std::minmax(u, w);
      edges[{key.first, key.second}].push_back(u < w ? 1 : -1);
    }
  }
  const double dom = mesh.domain.area();
  if (std::abs(area_sum - dom) > 1e-10 * dom)
    throw mesh_error("cell areas sum to " + std::to_string(area_sum) + ", domain area is " +
                     std::to_string(dom));
  const double h = compute_mesh_size(mesh);
  const double tol = 1e-10 * std::max(1.0, h);
  for (const auto& [key, uses] : edges) {
    if (uses.size() > 2)
      throw mesh_error("edge (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                       ") is shared by more than two cells");
    if (uses.size() == 2) {
      if (uses[0] == uses[1])
        throw mesh_error("edge (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                         ") is used twice with the same orientation");
      continue;
    }
    const Point& a = mesh.vertices[key.first];
    const Point& b = mesh.vertices[key.second];
    if (!mesh.domain.on_boundary(a, tol) || !mesh.domain.on_boundary(b, tol) ||
        !mesh.domain.on_boundary(0.5 * (a + b), tol))
      throw mesh_error("unmatched edge (" + std::to_string(key.first) + "," +
                       std::to_string(key.second) + ") does not lie on the domain boundary");
  }
}

struct RegularityReport {
  double gamma0_observed = 1.0;
  double gamma1_observed = 1.0;
  double quasi_uniformity = 1.0;
  std::vector<std::size_t> violations;

  bool ok() const { return violations.empty(); }
};

/// Shape-regularity audit: star-shapedness ratio rho_K/h_K, smallest
/// vertex separation relative to h_K, and max/min cell diameter.
inline RegularityReport check_regularity(const Mesh& mesh, double gamma0, double gamma1) {
  RegularityReport r;
  double hmin = std::numeric_limits<double>::infinity();
  double hmax = 0.0;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const Polygon poly = mesh.cell_polygon(c);
    const ElementGeometry g = compute_geometry(poly);
    const double ratio0 = g.rho / g.h;
    const double ratio1 = min_vertex_distance(poly) / g.h;
    r.gamma0_observed = std::min(r.gamma0_observed, ratio0);
    r.gamma1_observed = std::min(r.gamma1_observed, ratio1);
    hmin = std::min(hmin, g.h);
    hmax = std::max(hmax, g.h);
    if (ratio0 < gamma0 || ratio1 < gamma1)
      r.violations.push_back(c);
  }
  r.quasi_uniformity = hmax / hmin;
  return r;
}

} // namespace vem
