// Solve the corner-singularity problem on one hex mesh and print the errors.
//
//   solve_corner [level] [k]

#include <cstdio>
#include <cstdlib>

#include "vem/vem.hpp"

int main(int argc, char** argv) {
  const int level = argc > 1 ? std::atoi(argv[1]) : 3;
  const int k = argc > 2 ? std::atoi(argv[2]) : 2;

  const vem::TestProblem prob = vem::make_test_problem("square");
  const vem::Mesh mesh = vem::generate_hex_mesh(prob.domain, level);
  const vem::LevelResult r = vem::solve_on_mesh(mesh, prob, {k, k});

  std::printf("cells %zu  dofs %d  h %.4g\n", mesh.n_cells(), r.dofmap.n_global, mesh.h);
  std::printf("solver %s  residual %.2e\n", r.solve.used == vem::SolverKind::direct ? "direct" : "cg",
              r.solve.relative_residual);
  std::printf("e1 global %.4e  inner %.4e  outer %.4e\n", r.errors.e1_global, r.errors.e1_inner,
              r.errors.e1_outer);
  return 0;
}
