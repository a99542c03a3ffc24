#pragma once

// Model problems for -Laplace(u) = f with Dirichlet data g = u.
//
//   square  u = r^(2/3) sin(2 theta / 3) on (0,1)^2, theta in [0, pi/2]
//   lshape  same u on the L-shape, theta in [pi/2, 2 pi] measured from the
//           positive x-axis; the branch cut is the ray theta = pi/4 outside
//           the domain, so the re-entrant edge y = 0, x > 0 has theta = 2 pi
//   smooth  u = sin(pi x) sin(pi y) on (0,1)^2

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>

#include "vem/errors.hpp"
#include "vem/mesh.hpp"
#include "vem/postproc.hpp"

namespace vem {

struct TestProblem {
  std::string id;
  Domain domain;
  ScalarFunction u;
  VectorFunction grad_u;
  ScalarFunction f;
  ScalarFunction g;
  Subdomain subdomain;
  std::optional<Point> singular_point;
  std::function<double(int)> expected_global_rate;
  std::function<double(int)> expected_local_rate;

  ExactSolution exact() const { return {u, grad_u}; }
};

namespace detail {

enum class AngleBranch { first_quadrant, l_shape };

inline double corner_angle(const Point& p, AngleBranch branch) {
  double t = std::atan2(p.y(), p.x());
  if (branch == AngleBranch::l_shape && t < 0.25 * std::numbers::pi)
    t += 2.0 * std::numbers::pi;
  return t;
}

inline double corner_u(const Point& p, AngleBranch branch) {
  const double r2 = p.squaredNorm();
  if (r2 == 0.0)
    return 0.0;
  return std::cbrt(r2) * std::sin(2.0 * corner_angle(p, branch) / 3.0);
}

/// grad u = (2/3) r^(-1/3) (-sin(theta/3), cos(theta/3)).
inline Point corner_grad(const Point& p, AngleBranch branch) {
  const double r = p.norm();
  if (r == 0.0)
    throw evaluation_error("gradient of the corner solution is unbounded at the origin");
  const double t = corner_angle(p, branch) / 3.0;
  const double s = (2.0 / 3.0) / std::cbrt(r);
  return {-s * std::sin(t), s * std::cos(t)};
}

} // namespace detail

inline TestProblem make_test_problem(const std::string& id) {
  TestProblem p;
  p.id = id;
  if (id == "square" || id == "lshape") {
    const bool square = id == "square";
    const auto branch = square ? detail::AngleBranch::first_quadrant : detail::AngleBranch::l_shape;
    p.domain = square ? Domain::unit_square() : Domain::l_shape();
    p.u = [branch](const Point& x) { return detail::corner_u(x, branch); };
    p.grad_u = [branch](const Point& x) { return detail::corner_grad(x, branch); };
    p.f = [](const Point&) { return 0.0; };
    p.subdomain = square ? Subdomain{Point(0.5, 0.5), 0.25} : Subdomain{Point(-0.5, -0.5), 0.25};
    p.singular_point = Point::Zero();
    p.expected_global_rate = [](int) { return 0.5; };
    if (square)
      p.expected_local_rate = [](int k) { return static_cast<double>(k); };
    else
      p.expected_local_rate = [](int k) { return std::min(4.0 / 3.0, static_cast<double>(k)); };
  } else if (id == "smooth") {
    constexpr double pi = std::numbers::pi;
    p.domain = Domain::unit_square();
    p.u = [](const Point& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); };
    p.grad_u = [](const Point& x) {
      return Point(pi * std::cos(pi * x.x()) * std::sin(pi * x.y()), pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
    };
    p.f = [](const Point& x) { return 2.0 * pi * pi * std::sin(pi * x.x()) * std::sin(pi * x.y()); };
    p.subdomain = Subdomain{Point(0.5, 0.5), 0.25};
    p.expected_global_rate = [](int k) { return static_cast<double>(k); };
    p.expected_local_rate = [](int k) { return static_cast<double>(k); };
  } else {
    throw config_error("unknown problem '" + id + "' (expected square|lshape|smooth)");
  }
  p.g = p.u;
  return p;
}

} // namespace vem
