#pragma once

// Plain-text mesh format:
//
//   vem-mesh 1
//   vertices N
//   x y                      (N lines, 17 significant digits)
//   cells M
//   i0 i1 i2 ...             (M lines, 0-based, counterclockwise)
//   domain square|lshape

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "vem/errors.hpp"
#include "vem/mesh.hpp"

namespace vem {

inline void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << "vem-mesh 1\n";
  os << "vertices " << mesh.vertices.size() << '\n';
  os << std::setprecision(17);
  for (const Point& p : mesh.vertices)
    os << p.x() << ' ' << p.y() << '\n';
  os << "cells " << mesh.cells.size() << '\n';
  for (const auto& cell : mesh.cells) {
    for (std::size_t i = 0; i < cell.size(); ++i)
      os << (i ? " " : "") << cell[i];
    os << '\n';
  }
  os << "domain " << mesh.domain.name() << '\n';
}

inline void write_mesh(const std::string& path, const Mesh& mesh) {
  std::ofstream os(path);
  if (!os)
    throw config_error("cannot open '" + path + "' for writing");
  write_mesh(os, mesh);
}

namespace detail {

inline std::string next_content_line(std::istream& is, const char* what) {
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos)
      return line;
  }
  throw mesh_error(std::string("unexpected end of mesh file while reading ") + what);
}

inline std::size_t read_count(std::istream& is, const std::string& keyword) {
  std::istringstream ls(next_content_line(is, keyword.c_str()));
  std::string kw;
  long long n = -1;
  if (!(ls >> kw >> n) || kw != keyword || n < 0)
    throw mesh_error("expected '" + keyword + " <count>'");
  return static_cast<std::size_t>(n);
}

} // namespace detail

/// Parses a mesh and validates all mesh invariants.
inline Mesh read_mesh(std::istream& is) {
  {
    std::istringstream ls(detail::next_content_line(is, "header"));
    std::string magic;
    int version = 0;
    if (!(ls >> magic >> version) || magic != "vem-mesh" || version != 1)
      throw mesh_error("missing 'vem-mesh 1' header");
  }
  Mesh mesh;
  const std::size_t nv = detail::read_count(is, "vertices");
  mesh.vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    std::istringstream ls(detail::next_content_line(is, "vertices"));
    double x = 0.0, y = 0.0;
    if (!(ls >> x >> y))
      throw mesh_error("malformed vertex line " + std::to_string(i));
    mesh.vertices.emplace_back(x, y);
  }
  const std::size_t nc = detail::read_count(is, "cells");
  mesh.cells.reserve(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    std::istringstream ls(detail::next_content_line(is, "cells"));
    std::vector<std::size_t> cell;
    long long v = 0;
    while (ls >> v) {
      if (v < 0)
        throw mesh_error("negative vertex index in cell " + std::to_string(c));
      cell.push_back(static_cast<std::size_t>(v));
    }
    if (!ls.eof())
      throw mesh_error("malformed cell line " + std::to_string(c));
    mesh.cells.push_back(std::move(cell));
  }
  {
    std::istringstream ls(detail::next_content_line(is, "domain"));
    std::string kw, name;
    if (!(ls >> kw >> name) || kw != "domain")
      throw mesh_error("expected 'domain square|lshape'");
    try {
      mesh.domain = Domain::parse(name);
    } catch (const config_error& e) {
      throw mesh_error(e.what());
    }
  }
  validate_mesh(mesh);
  mesh.h = compute_mesh_size(mesh);
  return mesh;
}

inline Mesh read_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is)
    throw mesh_error("cannot open mesh file '" + path + "'");
  return read_mesh(is);
}

} // namespace vem
