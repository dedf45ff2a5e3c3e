#pragma once

#include <Eigen/Dense>
#include <vector>

namespace conserva {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct NullspaceResult {
  // Orthonormal kernel vectors, each sign-fixed so that the entry of largest
  // magnitude (first such entry on ties) is positive.
  std::vector<Vector> basis;
  double rank_tolerance = 0.0;
  double sigma_max = 0.0;

  int dimension() const { return static_cast<int>(basis.size()); }
};

// Kernel of m via SVD. Singular values at or below rank_tol * sigma_max are
// treated as zero; a zero matrix therefore has a full kernel. A matrix with
// no rows constrains nothing and also yields a full kernel.
// Throws std::invalid_argument on non-finite entries or rank_tol <= 0.
NullspaceResult nullspace_basis(const Matrix& m, double rank_tol = 1e-10);

// Largest |(m + m^T)_ij|; zero exactly when m is skew-symmetric.
// Throws std::invalid_argument unless m is square.
double skew_residual(const Matrix& m);

// Largest off-diagonal |m_ij|; zero exactly when m is diagonal.
// Throws std::invalid_argument unless m is square.
double offdiag_residual(const Matrix& m);

// max over v in `from` of the Euclidean distance from v to span(onto).
// Neither collection needs to be orthonormal; an empty `onto` spans {0}.
double subspace_projection_residual(const std::vector<Vector>& from,
                                    const std::vector<Vector>& onto);

// Flips the sign of v in place so its largest-magnitude entry is positive.
void fix_sign(Vector& v);

bool all_finite(const Matrix& m);

}  // namespace conserva
