#pragma once

#include <optional>
#include <string>

#include "conserva/conservation.hpp"

namespace conserva {

// Constant-coefficient geometric structure spanned by the graph
// {(B w, D^T w)} in R^m x R^m. Isotropy of the graph is equivalent to D B
// being skew-symmetric; maximality to ker B intersecting ker D^T trivially.
enum class StructureLabel {
  none,           // not isotropic
  big_isotropic,  // isotropic, not maximal
  dirac,          // isotropic and maximal
  presymplectic,  // Dirac with invertible B: graph of the 2-form D^T B^{-1}
  poisson,        // Dirac with invertible D^T: graph of the bivector B D^{-T}
  symplectic      // both matrices invertible
};

const char* to_string(StructureLabel label);

struct StructureClassification {
  bool isotropic = false;
  double isotropy_residual = 0.0;
  bool maximal = false;
  bool field_matrix_invertible = false;
  bool certificate_invertible = false;
  StructureLabel label = StructureLabel::none;
  std::optional<Matrix> presymplectic_matrix;  // D^T B^{-1}, skew when defined
  std::optional<Matrix> poisson_matrix;        // B D^{-T}, skew when defined
};

// Classifies the structure induced by a field matrix B and a certificate D.
// Rank decisions use rank_tol relative to the largest singular value;
// isotropy uses iso_tol scaled by the product of Frobenius norms, so the
// label is invariant under simultaneous positive rescaling of B and D.
StructureClassification classify(const Matrix& field_matrix, const Matrix& certificate,
                                 double rank_tol = 1e-10, double iso_tol = 1e-8);

struct HamiltonianPairReport {
  // Scaled chart field versus (s B) applied to the equilibrium offset.
  double field_residual = 0.0;
  // Chart gradient of H versus (s D^T) applied to the equilibrium offset.
  double gradient_residual = 0.0;
  // Chart gradient versus central finite differences of H, relative.
  double gradient_fd_residual = 0.0;
};

// Checks, over the supplied chart points, that the pair (field, gradient)
// coming out of a certificate really matches the scaled-structure picture.
// Throws CertificateError when the certificate fails its defining
// conditions against field_matrix.
HamiltonianPairReport verify_hamiltonian_pair(const Matrix& field_matrix,
                                              const ConservationCertificate& cert,
                                              const std::vector<Vector>& chart_points);

}  // namespace conserva
