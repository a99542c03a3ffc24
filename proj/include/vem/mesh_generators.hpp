#pragma once

// Structured hexagonal and Lloyd-relaxed Voronoi tessellations of the test
// domains. Cells are generated as convex polygons, clipped to convex pieces
// of the domain, welded into an indexed mesh and cleaned up.
//
// The L-shape is split along the diagonal y = x (x, y <= 0) into two convex
// wedges. Pieces of the same parent cell are glued back together whenever
// the union is convex, so only a cell containing the re-entrant corner in
// its interior stays split in two.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vem/errors.hpp"
#include "vem/geometry.hpp"
#include "vem/mesh.hpp"

namespace vem {

namespace detail {

/// Splits a convex polygon containing the origin by the ray from the origin
/// along direction d (third quadrant): returns {part with x <= 0 right of the
/// ray, part with y <= 0 left of the ray}.
inline std::pair<Polygon, Polygon> split_at_corner(const Polygon& box, const Point& d) {
  Polygon upper = clip_halfplane(box, Point(1, 0), 0.0);
  upper = clip_halfplane(upper, Point(-d.y(), d.x()), 0.0);
  Polygon lower = clip_halfplane(box, Point(0, 1), 0.0);
  lower = clip_halfplane(lower, Point(d.y(), -d.x()), 0.0);
  return {upper, lower};
}

inline double piece_quality(const Polygon& p) {
  if (p.size() < 3 || !(signed_area(p) > 0.0))
    return 0.0;
  try {
    const ElementGeometry g = compute_geometry(p);
    return std::min(g.rho / g.h, min_vertex_distance(p) / g.h);
  } catch (const mesh_error&) {
    return 0.0;
  }
}

/// Domain clipping in a scaled frame: physical = (sx * u, sy * v).
///
/// For the L-shape the pieces are cut along the diagonal y = x, x <= 0, so
/// neighbours crossing it stay conforming once their pieces are glued back.
/// A cell holding the re-entrant corner in its interior cannot be glued; it
/// is cut along the ray through one of its own vertices that gives the best
/// shaped pair, or along the diagonal when that is better.
inline std::vector<Polygon> clip_to_domain(const Polygon& poly, const Domain& domain, double sx = 1.0,
                                           double sy = 1.0) {
  const Point lo = domain.lower_left();
  const Point hi = domain.upper_right();
  Polygon box = clip_halfplane(poly, Point(1, 0), hi.x() / sx);
  box = clip_halfplane(box, Point(-1, 0), -lo.x() / sx);
  box = clip_halfplane(box, Point(0, 1), hi.y() / sy);
  box = clip_halfplane(box, Point(0, -1), -lo.y() / sy);
  if (domain.kind == DomainKind::unit_square)
    return {box};
  const Point diagonal(-1.0 / sx, -1.0 / sy);
  auto best = split_at_corner(box, diagonal);
  const Point origin = Point::Zero();
  bool corner_inside = box.size() >= 3 && point_in_polygon(origin, box);
  if (corner_inside) {
    const double scale = polygon_diameter(box);
    for (std::size_t i = 0; i < box.size(); ++i)
      if (segment_distance(origin, box[i], box[(i + 1) % box.size()]) <= 1e-12 * scale)
        corner_inside = false;
  }
  if (corner_inside) {
    double best_q = std::min(piece_quality(best.first), piece_quality(best.second));
    for (const Point& v : box) {
      if (!(v.x() < 0.0 && v.y() < 0.0))
        continue;
      auto cand = split_at_corner(box, v);
      const double q = std::min(piece_quality(cand.first), piece_quality(cand.second));
      if (q > best_q) {
        best_q = q;
        best = std::move(cand);
      }
    }
  }
  return {best.first, best.second};
}

class VertexWelder {
public:
  explicit VertexWelder(double tol) : tol_(tol) {}

  std::size_t insert(const Point& p) {
    const auto ix = static_cast<std::int64_t>(std::floor(p.x() / tol_));
    const auto iy = static_cast<std::int64_t>(std::floor(p.y() / tol_));
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = bins_.find(key(ix + dx, iy + dy));
        if (it == bins_.end())
          continue;
        for (std::size_t idx : it->second)
          if ((points_[idx] - p).norm() <= tol_)
            return idx;
      }
    points_.push_back(p);
    bins_[key(ix, iy)].push_back(points_.size() - 1);
    return points_.size() - 1;
  }

  std::vector<Point>& points() { return points_; }

private:
  static std::uint64_t key(std::int64_t x, std::int64_t y) {
    return (static_cast<std::uint64_t>(x) * 0x9E3779B97F4A7C15ULL) ^ static_cast<std::uint64_t>(y);
  }

  double tol_;
  std::vector<Point> points_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> bins_;
};

using IndexCycle = std::vector<std::size_t>;

/// Union of two index cycles sharing a contiguous chain of edges (with
/// opposite orientations). Returns nullopt if they share no edge or the
/// union is not a single simple cycle.
inline std::optional<IndexCycle> merge_index_cycles(const IndexCycle& a, const IndexCycle& b) {
  using Edge = std::pair<std::size_t, std::size_t>;
  auto edges_of = [](const IndexCycle& c) {
    std::vector<Edge> e;
    for (std::size_t i = 0; i < c.size(); ++i)
      e.emplace_back(c[i], c[(i + 1) % c.size()]);
    return e;
  };
  const auto ea = edges_of(a);
  const auto eb = edges_of(b);
  auto contains = [](const std::vector<Edge>& es, const Edge& e) {
    return std::find(es.begin(), es.end(), e) != es.end();
  };
  std::vector<Edge> rest;
  for (const Edge& e : ea)
    if (!contains(eb, {e.second, e.first}))
      rest.push_back(e);
  for (const Edge& e : eb)
    if (!contains(ea, {e.second, e.first}))
      rest.push_back(e);
  if (rest.size() == ea.size() + eb.size() || rest.size() < 3)
    return std::nullopt;
  std::map<std::size_t, std::size_t> next;
  for (const Edge& e : rest)
    if (!next.emplace(e.first, e.second).second)
      return std::nullopt;
  IndexCycle out;
  std::size_t cur = rest.front().first;
  do {
    out.push_back(cur);
    auto it = next.find(cur);
    if (it == next.end() || out.size() > rest.size())
      return std::nullopt;
    cur = it->second;
  } while (cur != rest.front().first);
  if (out.size() != rest.size())
    return std::nullopt;
  return out;
}

inline bool is_straight_vertex(const std::vector<Point>& pts, const IndexCycle& c, std::size_t i,
                               double rel_tol) {
  const Point& a = pts[c[(i + c.size() - 1) % c.size()]];
  const Point& b = pts[c[i]];
  const Point& d = pts[c[(i + 1) % c.size()]];
  const double len = (d - a).norm();
  return len > 0.0 && line_distance(b, a, d) <= rel_tol * len && (b - a).dot(d - b) > 0.0;
}

inline Polygon cycle_polygon(const std::vector<Point>& pts, const IndexCycle& c) {
  Polygon p;
  for (auto v : c)
    p.push_back(pts[v]);
  return p;
}

/// Moves a point within tol of an (axis-aligned) boundary segment exactly
/// onto it, so boundary vertices carry exact coordinates.
inline void snap_to_boundary(Point& q, const Domain& domain, double tol) {
  const Polygon b = domain.boundary();
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Point& u = b[i];
    const Point& v = b[(i + 1) % b.size()];
    if (segment_distance(q, u, v) > tol)
      continue;
    if (u.y() == v.y())
      q.y() = u.y();
    else
      q.x() = u.x();
  }
}

struct Piece {
  Polygon poly;
  std::size_t parent;
};

struct BuildOptions {
  double weld_tol = 1e-10;
  double nominal_cell_area = 0.0;
  double sliver_fraction = 1e-3;
  // Voronoi generation fails on degenerate parents; hexagons touching the
  // domain only along a line are legitimately dropped.
  bool require_parents = false;
  std::size_t n_parents = 0;
};

/// Welds clipped pieces into a conforming indexed mesh.
inline Mesh build_mesh(const std::vector<Piece>& pieces, const Domain& domain, const BuildOptions& opt) {
  const double artifact_area = 1e-12 * opt.nominal_cell_area;
  VertexWelder welder(opt.weld_tol);
  std::vector<IndexCycle> cells;
  std::vector<std::size_t> parent_of;
  std::vector<double> parent_area(opt.n_parents, 0.0);
  for (const Piece& piece : pieces) {
    const Polygon p = remove_duplicate_vertices(piece.poly, opt.weld_tol);
    if (p.size() < 3)
      continue;
    const double a = signed_area(p);
    if (piece.parent < parent_area.size())
      parent_area[piece.parent] += std::max(a, 0.0);
    if (a <= artifact_area)
      continue;
    IndexCycle c;
    for (const Point& q : p) {
      const std::size_t idx = welder.insert(q);
      if (c.empty() || c.back() != idx)
        c.push_back(idx);
    }
    while (c.size() > 1 && c.front() == c.back())
      c.pop_back();
    if (c.size() < 3)
      continue;
    cells.push_back(std::move(c));
    parent_of.push_back(piece.parent);
  }
  if (opt.require_parents)
    for (std::size_t i = 0; i < parent_area.size(); ++i)
      if (parent_area[i] < 1e-12 * domain.area())
        throw mesh_error("degenerate cell from seed " + std::to_string(i) +
                         "; retry with another seed or more Lloyd iterations");
  std::vector<Point>& pts = welder.points();
  for (Point& q : pts)
    snap_to_boundary(q, domain, opt.weld_tol);

  // glue sibling pieces back together when the union is convex
  std::vector<bool> alive(cells.size(), true);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!alive[i])
      continue;
    // pieces arrive grouped by parent
    for (std::size_t j = i + 1; j < cells.size() && parent_of[j] == parent_of[i]; ++j) {
      if (!alive[j])
        continue;
      auto merged = merge_index_cycles(cells[i], cells[j]);
      if (!merged)
        continue;
      // drop the junction vertices that became straight
      IndexCycle cleaned;
      for (std::size_t v = 0; v < merged->size(); ++v)
        if (!is_straight_vertex(pts, *merged, v, 1e-9))
          cleaned.push_back((*merged)[v]);
      if (!is_convex(cycle_polygon(pts, cleaned), 1e-9))
        continue;
      cells[i] = *merged;
      alive[j] = false;
    }
  }

  // merge tiny slivers into the neighbour sharing the longest edge
  const double sliver_area = opt.sliver_fraction * opt.nominal_cell_area;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!alive[i] || signed_area(cycle_polygon(pts, cells[i])) >= sliver_area)
      continue;
    std::size_t best = cells.size();
    double best_len = 0.0;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j == i || !alive[j])
        continue;
      for (std::size_t a = 0; a < cells[i].size(); ++a) {
        const std::size_t u = cells[i][a];
        const std::size_t w = cells[i][(a + 1) % cells[i].size()];
        for (std::size_t b = 0; b < cells[j].size(); ++b)
          if (cells[j][b] == w && cells[j][(b + 1) % cells[j].size()] == u) {
            const double len = (pts[u] - pts[w]).norm();
            if (len > best_len) {
              best_len = len;
              best = j;
            }
          }
      }
    }
    if (best == cells.size())
      continue;
    if (auto merged = merge_index_cycles(cells[best], cells[i])) {
      cells[best] = *merged;
      alive[i] = false;
    }
  }

  std::vector<IndexCycle> kept;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (alive[i])
      kept.push_back(std::move(cells[i]));

  // remove vertices that are straight in every cell referencing them
  std::vector<std::vector<std::size_t>> users(pts.size());
  for (std::size_t c = 0; c < kept.size(); ++c)
    for (auto v : kept[c])
      users[v].push_back(c);
  std::vector<bool> drop(pts.size(), false);
  for (std::size_t v = 0; v < pts.size(); ++v) {
    if (users[v].empty())
      continue;
    bool straight = true;
    for (std::size_t c : users[v]) {
      const auto& cyc = kept[c];
      const auto pos = static_cast<std::size_t>(std::find(cyc.begin(), cyc.end(), v) - cyc.begin());
      if (!is_straight_vertex(pts, cyc, pos, 1e-9)) {
        straight = false;
        break;
      }
    }
    drop[v] = straight;
  }

  Mesh mesh;
  mesh.domain = domain;
  std::vector<std::size_t> remap(pts.size(), static_cast<std::size_t>(-1));
  for (auto& cyc : kept) {
    std::vector<std::size_t> out;
    for (auto v : cyc) {
      if (drop[v])
        continue;
      if (remap[v] == static_cast<std::size_t>(-1)) {
        remap[v] = mesh.vertices.size();
        mesh.vertices.push_back(pts[v]);
      }
      out.push_back(remap[v]);
    }
    mesh.cells.push_back(std::move(out));
  }
  mesh.h = compute_mesh_size(mesh);
  validate_mesh(mesh);
  return mesh;
}

/// Collapses edges shorter than ratio * h_K of an adjacent cell. Interior
/// endpoints move to the edge midpoint; boundary vertices stay on the
/// boundary and domain corners never move. A collapse that would leave any
/// cell non-simple is rolled back.
inline void collapse_short_edges(Mesh& mesh, double ratio) {
  const Polygon corners = mesh.domain.boundary();
  const double tol = 1e-12;
  auto corner_index = [&](const Point& p) -> int {
    for (std::size_t i = 0; i < corners.size(); ++i)
      if ((corners[i] - p).norm() <= tol)
        return static_cast<int>(i);
    return -1;
  };
  auto segment_index = [&](const Point& p) -> int {
    for (std::size_t i = 0; i < corners.size(); ++i)
      if (segment_distance(p, corners[i], corners[(i + 1) % corners.size()]) <= tol)
        return static_cast<int>(i);
    return -1;
  };
  auto target = [&](const Point& a, const Point& b) -> std::optional<Point> {
    const int ca = corner_index(a), cb = corner_index(b);
    if (ca >= 0 && cb >= 0)
      return std::nullopt;
    if (ca >= 0)
      return a;
    if (cb >= 0)
      return b;
    const int sa = segment_index(a), sb = segment_index(b);
    if (sa >= 0 && sb >= 0)
      return sa == sb ? std::optional<Point>(0.5 * (a + b)) : std::nullopt;
    if (sa >= 0)
      return a;
    if (sb >= 0)
      return b;
    return 0.5 * (a + b);
  };
  auto cell_ok = [&](const std::vector<std::size_t>& c) {
    if (c.size() < 3)
      return false;
    const Polygon p = cycle_polygon(mesh.vertices, c);
    return is_simple(p) && signed_area(p) > 0.0;
  };

  std::vector<std::vector<std::size_t>> users(mesh.vertices.size());
  for (std::size_t c = 0; c < mesh.cells.size(); ++c)
    for (auto v : mesh.cells[c])
      users[v].push_back(c);

  std::vector<double> hk(mesh.cells.size());
  for (std::size_t c = 0; c < mesh.cells.size(); ++c)
    hk[c] = polygon_diameter(cycle_polygon(mesh.vertices, mesh.cells[c]));
  std::vector<bool> dead(mesh.cells.size(), false);

  for (int pass = 0; pass < 8; ++pass) {
    bool changed = false;
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
      if (dead[c])
        continue;
      for (std::size_t e = 0; e < mesh.cells[c].size(); ++e) {
        const std::size_t u = mesh.cells[c][e];
        const std::size_t w = mesh.cells[c][(e + 1) % mesh.cells[c].size()];
        // local mesh size around the edge
        double h_edge = hk[c];
        for (auto o : users[u])
          h_edge = std::max(h_edge, hk[o]);
        for (auto o : users[w])
          h_edge = std::max(h_edge, hk[o]);
        if ((mesh.vertices[u] - mesh.vertices[w]).norm() >= ratio * h_edge)
          continue;
        const auto t = target(mesh.vertices[u], mesh.vertices[w]);
        if (!t)
          continue;
        std::vector<std::size_t> affected = users[u];
        affected.insert(affected.end(), users[w].begin(), users[w].end());
        std::sort(affected.begin(), affected.end());
        affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
        std::vector<std::vector<std::size_t>> saved;
        for (auto a : affected)
          saved.push_back(mesh.cells[a]);
        const Point saved_u = mesh.vertices[u];
        mesh.vertices[u] = *t;
        bool ok = true;
        std::vector<std::size_t> vanished;
        for (auto a : affected) {
          auto& cyc = mesh.cells[a];
          std::replace(cyc.begin(), cyc.end(), w, u);
          std::vector<std::size_t> out;
          for (auto v : cyc)
            if (out.empty() || out.back() != v)
              out.push_back(v);
          while (out.size() > 1 && out.front() == out.back())
            out.pop_back();
          cyc = std::move(out);
          if (cyc.size() < 3)
            vanished.push_back(a);
          else
            ok = ok && cell_ok(cyc);
        }
        // only a collapsing triangle may disappear
        for (auto a : vanished)
          ok = ok && saved[static_cast<std::size_t>(std::find(affected.begin(), affected.end(), a) -
                                                    affected.begin())]
                             .size() == 3;
        if (!ok) {
          mesh.vertices[u] = saved_u;
          for (std::size_t i = 0; i < affected.size(); ++i)
            mesh.cells[affected[i]] = saved[i];
          continue;
        }
        for (auto a : vanished) {
          dead[a] = true;
          mesh.cells[a].clear();
        }
        std::vector<std::size_t> alive_users;
        for (auto a : affected)
          if (!dead[a]) {
            alive_users.push_back(a);
            hk[a] = polygon_diameter(cycle_polygon(mesh.vertices, mesh.cells[a]));
          }
        for (auto& list : users)
          list.erase(std::remove_if(list.begin(), list.end(), [&](std::size_t a) { return dead[a]; }),
                     list.end());
        users[u] = alive_users;
        users[w].clear();
        changed = true;
        break; // cell c changed; move on
      }
    }
    if (!changed)
      break;
  }

  std::vector<std::vector<std::size_t>> kept;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c)
    if (!dead[c])
      kept.push_back(std::move(mesh.cells[c]));
  mesh.cells = std::move(kept);

  std::vector<std::size_t> remap(mesh.vertices.size(), static_cast<std::size_t>(-1));
  std::vector<Point> verts;
  for (auto& cyc : mesh.cells)
    for (auto& v : cyc) {
      if (remap[v] == static_cast<std::size_t>(-1)) {
        remap[v] = verts.size();
        verts.push_back(mesh.vertices[v]);
      }
      v = remap[v];
    }
  mesh.vertices = std::move(verts);
  mesh.h = compute_mesh_size(mesh);
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
inline double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace detail

/// Nominal hexagon diameter at a refinement level.
inline double hex_mesh_size(int level) { return 0.2 * std::ldexp(1.0, 1 - level); }

/// Structured hexagonal tessellation. The lattice is anchored so that the
/// origin is a hexagon vertex and every domain edge runs through lattice
/// points; the hexagons are flattened by a level-independent factor
/// (height/width = 5/6 instead of sqrt(3)/2) so that the unit square holds an
/// integer number of half-rows. Clipping therefore never creates slivers.
inline Mesh generate_hex_mesh(const Domain& domain, int level) {
  if (level < 1 || level > 12)
    throw config_error("hex mesh level must lie in [1, 12], got " + std::to_string(level));
  const long scale = 1L << (level - 1);
  const double dx = 1.0 / (20.0 * static_cast<double>(scale));
  const double dy = 1.0 / (12.0 * static_cast<double>(scale));
  const Point lo = domain.lower_left();
  const Point hi = domain.upper_right();
  const long u0 = std::lround(lo.x() / dx), u1 = std::lround(hi.x() / dx);
  const long v0 = std::lround(lo.y() / dy), v1 = std::lround(hi.y() / dy);

  std::vector<detail::Piece> pieces;
  std::size_t parent = 0;
  const long i_lo = u0 / 3 - 2, i_hi = u1 / 3 + 2;
  for (long i = i_lo; i <= i_hi; ++i) {
    const long cx = -2 + 3 * i;
    const long shift = ((i % 2) + 2) % 2;
    for (long j = v0 / 2 - 2; j <= v1 / 2 + 2; ++j) {
      const long cy = 2 * j + shift;
      if (cx + 2 <= u0 || cx - 2 >= u1 || cy + 1 <= v0 || cy - 1 >= v1)
        continue;
      const Polygon hex = {Point(cx + 2, cy),     Point(cx + 1, cy + 1), Point(cx - 1, cy + 1),
                           Point(cx - 2, cy),     Point(cx - 1, cy - 1), Point(cx + 1, cy - 1)};
      for (Polygon& piece : detail::clip_to_domain(hex, domain, dx, dy)) {
        for (Point& p : piece)
          p = Point(p.x() * dx, p.y() * dy);
        pieces.push_back({std::move(piece), parent});
      }
      ++parent;
    }
  }
  detail::BuildOptions opt;
  opt.weld_tol = 1e-9 * dx;
  opt.nominal_cell_area = 6.0 * dx * dy * 2.0;
  opt.n_parents = parent;
  Mesh mesh = detail::build_mesh(pieces, domain, opt);
  if (mesh.cells.size() < 4)
    throw mesh_error("hex mesh level " + std::to_string(level) + " produced fewer than 4 cells");
  return mesh;
}

/// Voronoi cells of the seeds clipped to the axis-aligned box [lo, hi],
/// one convex polygon per seed.
inline std::vector<Polygon> voronoi_cells(const std::vector<Point>& seeds, const Point& lo, const Point& hi) {
  const std::size_t n = seeds.size();
  const double w = hi.x() - lo.x();
  const double hgt = hi.y() - lo.y();
  const double bin = std::sqrt(w * hgt / static_cast<double>(n));
  const long nbx = std::max(1L, static_cast<long>(std::ceil(w / bin)));
  const long nby = std::max(1L, static_cast<long>(std::ceil(hgt / bin)));
  auto bin_of = [&](const Point& p) {
    const long bx = std::clamp(static_cast<long>((p.x() - lo.x()) / bin), 0L, nbx - 1);
    const long by = std::clamp(static_cast<long>((p.y() - lo.y()) / bin), 0L, nby - 1);
    return std::pair{bx, by};
  };
  std::vector<std::vector<std::size_t>> bins(static_cast<std::size_t>(nbx * nby));
  for (std::size_t i = 0; i < n; ++i) {
    auto [bx, by] = bin_of(seeds[i]);
    bins[static_cast<std::size_t>(by * nbx + bx)].push_back(i);
  }
  const Polygon box = {lo, Point(hi.x(), lo.y()), hi, Point(lo.x(), hi.y())};
  std::vector<Polygon> cells(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& s = seeds[i];
    Polygon cell = box;
    auto [bx, by] = bin_of(s);
    const long max_ring = std::max(nbx, nby);
    for (long ring = 0; ring <= max_ring; ++ring) {
      for (long gy = by - ring; gy <= by + ring; ++gy) {
        if (gy < 0 || gy >= nby)
          continue;
        for (long gx = bx - ring; gx <= bx + ring; ++gx) {
          if (gx < 0 || gx >= nbx)
            continue;
          if (std::max(std::abs(gx - bx), std::abs(gy - by)) != ring)
            continue;
          for (std::size_t j : bins[static_cast<std::size_t>(gy * nbx + gx)]) {
            if (j == i)
              continue;
            const Point d = seeds[j] - s;
            cell = clip_halfplane(cell, d, d.dot(0.5 * (seeds[j] + s)));
          }
        }
      }
      double rmax = 0.0;
      for (const Point& p : cell)
        rmax = std::max(rmax, (p - s).norm());
      // seeds beyond this ring are at least ring * bin away
      if (static_cast<double>(ring) * bin >= 2.0 * rmax)
        break;
    }
    cells[i] = std::move(cell);
  }
  return cells;
}

/// Lloyd-relaxed Voronoi tessellation of the domain. A pure function of its
/// arguments.
///
/// Voronoi edges shorter than short_edge_ratio * h_K are collapsed after
/// relaxation (pass 0 to keep the raw diagram).
inline Mesh generate_voronoi_mesh(const Domain& domain, std::size_t n_seeds, std::size_t lloyd_iters,
                                  std::uint64_t rng_seed, double short_edge_ratio = 0.1) {
  if (n_seeds < 4)
    throw config_error("voronoi mesh needs at least 4 seeds");
  std::mt19937_64 rng(rng_seed);
  const Point lo = domain.lower_left();
  const Point hi = domain.upper_right();
  const bool mirrored = domain.kind == DomainKind::l_shape;
  auto draw = [&] {
    return Point(lo.x() + (hi.x() - lo.x()) * detail::unit_draw(rng),
                 lo.y() + (hi.y() - lo.y()) * detail::unit_draw(rng));
  };
  auto mirror = [](const Point& p) { return Point(p.y(), p.x()); };
  std::vector<Point> seeds;
  seeds.reserve(n_seeds);
  if (!mirrored) {
    while (seeds.size() < n_seeds)
      seeds.push_back(draw());
  } else {
    // The L-shape is symmetric about y = x. Seeds come in mirror pairs, so
    // the diagonal is a union of Voronoi edges and the re-entrant corner
    // never falls inside a cell. An odd count puts one seed on the diagonal.
    while (seeds.size() + 1 < n_seeds) {
      const Point p = draw();
      if (!domain.contains(p, 0.0) || !(p.y() > p.x()))
        continue;
      seeds.push_back(p);
      seeds.push_back(mirror(p));
    }
    if (seeds.size() < n_seeds) {
      const double t = -detail::unit_draw(rng);
      seeds.emplace_back(t, t);
    }
  }
  auto clipped = [&](const std::vector<Polygon>& cells) {
    std::vector<detail::Piece> pieces;
    for (std::size_t i = 0; i < cells.size(); ++i)
      for (Polygon& p : detail::clip_to_domain(cells[i], domain))
        pieces.push_back({std::move(p), i});
    return pieces;
  };
  // clipping near the re-entrant corner leaves slivers whose centroid is
  // not computable; they carry no mass anyway
  const double artifact_area = 1e-12 * domain.area() / static_cast<double>(n_seeds);
  for (std::size_t it = 0; it < lloyd_iters; ++it) {
    const auto pieces = clipped(voronoi_cells(seeds, lo, hi));
    std::vector<double> area(n_seeds, 0.0);
    std::vector<Point> moment(n_seeds, Point::Zero());
    for (const auto& piece : pieces) {
      if (piece.poly.size() < 3)
        continue;
      const double a = signed_area(piece.poly);
      if (!(a > artifact_area))
        continue;
      const Point c = polygon_centroid(piece.poly);
      if (!c.allFinite())
        continue;
      area[piece.parent] += a;
      moment[piece.parent] += a * c;
    }
    for (std::size_t i = 0; i < n_seeds; ++i)
      if (area[i] > 0.0)
        seeds[i] = moment[i] / area[i];
    if (mirrored) {
      for (std::size_t i = 0; i + 1 < n_seeds; i += 2)
        seeds[i + 1] = mirror(seeds[i]);
      if (n_seeds % 2 == 1) {
        const double t = 0.5 * (seeds.back().x() + seeds.back().y());
        seeds.back() = Point(t, t);
      }
    }
  }
  detail::BuildOptions opt;
  opt.nominal_cell_area = domain.area() / static_cast<double>(n_seeds);
  opt.weld_tol = 1e-10 * std::sqrt(opt.nominal_cell_area);
  opt.require_parents = true;
  opt.n_parents = n_seeds;
  Mesh mesh = detail::build_mesh(clipped(voronoi_cells(seeds, lo, hi)), domain, opt);
  detail::collapse_short_edges(mesh, short_edge_ratio);
  validate_mesh(mesh);
  return mesh;
}

/// Seed count of the Voronoi refinement family: 4^level * n0, with n0
/// proportional to the domain area so that cell sizes match across domains.
inline std::size_t voronoi_seed_count(const Domain& domain, int level) {
  if (level < 1 || level > 10)
    throw config_error("voronoi mesh level must lie in [1, 10], got " + std::to_string(level));
  const auto n0 = static_cast<std::size_t>(std::lround(10.0 * domain.area()));
  return n0 * (std::size_t{1} << (2 * level));
}

} // namespace vem
