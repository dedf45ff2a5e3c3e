#include "conserva/equilibrium.hpp"

#include <cmath>
#include <stdexcept>

namespace conserva {

namespace {

// Minimum-norm least-squares solution of M q = b plus kernel bookkeeping.
EquilibriumResult solve_affine(const Matrix& m, const Vector& b, double rank_tol) {
  if (!(rank_tol > 0.0))
    throw std::invalid_argument("formal_equilibrium: rank_tol must be positive");

  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(rank_tol);

  EquilibriumResult out;
  out.representative = svd.solve(b);
  out.residual = (m * out.representative - b).cwiseAbs().maxCoeff();

  NullspaceResult kernel = nullspace_basis(m, rank_tol);
  out.degrees_of_freedom = kernel.dimension();
  out.basis = std::move(kernel.basis);
  out.feasible = out.residual <= 1e-8 * (1.0 + m.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff());
  return out;
}

}  // namespace

EquilibriumResult formal_equilibrium(const ReplicatorSystem& sys, double rank_tol) {
  const int n = sys.strategies();
  Matrix m(n, n);
  const Matrix& a = sys.payoff();
  for (int i = 0; i < n - 1; ++i) m.row(i) = a.row(i) - a.row(n - 1);
  m.row(n - 1).setOnes();
  Vector b = Vector::Zero(n);
  b(n - 1) = 1.0;
  return solve_affine(m, b, rank_tol);
}

EquilibriumResult formal_equilibrium(const LotkaVolterraSystem& sys, double rank_tol) {
  return solve_affine(sys.interaction(), -sys.growth(), rank_tol);
}

Vector embed_orthant_equilibrium(const Vector& q) {
  const double s = 1.0 + q.sum();
  if (std::abs(s) <= 1e-12 * (1.0 + q.cwiseAbs().sum()))
    throw std::domain_error("embed_orthant_equilibrium: degenerate normalization 1 + sum(q) = 0");
  Vector out(q.size() + 1);
  out.head(q.size()) = q / s;
  out(q.size()) = 1.0 / s;
  return out;
}

}  // namespace conserva
