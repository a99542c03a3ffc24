#pragma once

#include <stdexcept>
#include <string>

namespace vem {

/// Invalid user-supplied configuration (orders, levels, flags).
class config_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid or degenerate geometry: bad polygons, non-conforming meshes,
/// generator failures.
class mesh_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Linear solver failure. Carries the last relative residual.
class solver_error : public std::runtime_error {
public:
  solver_error(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// A field could not be evaluated at a requested point.
class evaluation_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace vem
