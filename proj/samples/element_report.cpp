// Build the local operators on a single pentagon and check the basic
// identities: polynomial consistency of the projector and the kernel of
// the stiffness matrix.

#include <cstdio>

#include "vem/vem.hpp"

int main() {
  const vem::Polygon pentagon = {vem::Point(0, 0), vem::Point(1, 0), vem::Point(1.3, 0.8), vem::Point(0.5, 1.4),
                                 vem::Point(-0.2, 0.7)};
  for (int k = 1; k <= 4; ++k) {
    const vem::ElementContext ctx(pentagon, {k, k});
    const vem::LocalOperators op = vem::build_local_operators(ctx);
    const Eigen::MatrixXd& D = op.nabla.D;
    const double consistency = (op.nabla.Pi_star * D - Eigen::MatrixXd::Identity(D.cols(), D.cols())).norm();
    const Eigen::VectorXd ones = D.col(0);
    std::printf("k=%d  dofs=%d  |Pi*D - I|=%.2e  |K 1|=%.2e\n", k, ctx.dofs.size(), consistency,
                (op.K_loc * ones).norm());
  }
  return 0;
}
