#include "conserva/dirac.hpp"

#include <cmath>

namespace conserva {

const char* to_string(StructureLabel label) {
  switch (label) {
    case StructureLabel::none: return "none";
    case StructureLabel::big_isotropic: return "big-isotropic";
    case StructureLabel::dirac: return "dirac";
    case StructureLabel::presymplectic: return "presymplectic";
    case StructureLabel::poisson: return "poisson";
    case StructureLabel::symplectic: return "symplectic";
  }
  return "unknown";
}

StructureClassification classify(const Matrix& field_matrix, const Matrix& certificate,
                                 double rank_tol, double iso_tol) {
  const Eigen::Index m = field_matrix.rows();
  if (field_matrix.cols() != m || certificate.rows() != m || certificate.cols() != m)
    throw std::invalid_argument("classify: matrices must be square of equal size");
  if (!all_finite(field_matrix) || !all_finite(certificate))
    throw std::invalid_argument("classify: non-finite entries");

  StructureClassification out;
  out.isotropy_residual = skew_residual(certificate * field_matrix);
  out.isotropic =
      out.isotropy_residual <= iso_tol * (1.0 + certificate.norm() * field_matrix.norm());

  Matrix stacked(2 * m, m);
  stacked.topRows(m) = field_matrix;
  stacked.bottomRows(m) = certificate.transpose();
  out.maximal = nullspace_basis(stacked, rank_tol).dimension() == 0;

  out.field_matrix_invertible = nullspace_basis(field_matrix, rank_tol).dimension() == 0;
  out.certificate_invertible = nullspace_basis(certificate, rank_tol).dimension() == 0;

  if (!out.isotropic) {
    out.label = StructureLabel::none;
    return out;
  }
  if (out.field_matrix_invertible && out.certificate_invertible)
    out.label = StructureLabel::symplectic;
  else if (out.certificate_invertible)
    out.label = StructureLabel::poisson;
  else if (out.field_matrix_invertible)
    out.label = StructureLabel::presymplectic;
  else if (out.maximal)
    out.label = StructureLabel::dirac;
  else
    out.label = StructureLabel::big_isotropic;

  if (out.field_matrix_invertible)
    out.presymplectic_matrix =
        certificate.transpose() * field_matrix.partialPivLu().inverse();
  if (out.certificate_invertible)
    out.poisson_matrix = field_matrix * certificate.transpose().partialPivLu().inverse();
  return out;
}

HamiltonianPairReport verify_hamiltonian_pair(const Matrix& field_matrix,
                                              const ConservationCertificate& cert,
                                              const std::vector<Vector>& chart_points) {
  // Re-validate so that a stale or tampered certificate cannot slip through.
  make_certificate(cert.d, cert.q, field_matrix);
  const ConstantOfMotion h = constant_of_motion(cert, Chart::u);
  const Eigen::Index m = field_matrix.rows();

  HamiltonianPairReport report;
  const double fd_step = 1e-6;
  for (const Vector& u : chart_points) {
    if (u.size() != m)
      throw std::invalid_argument("verify_hamiltonian_pair: chart point has wrong dimension");
    double s = 1.0;
    for (Eigen::Index i = 0; i < m; ++i) s += std::exp(u(i));
    const Vector offset = equilibrium_offset(cert.q, u);

    const Vector field = scaled_chart_field(field_matrix, cert.q, u);
    const Vector field_ref = (s * field_matrix) * offset;
    report.field_residual =
        std::max(report.field_residual, (field - field_ref).cwiseAbs().maxCoeff());

    const Vector grad = chart_gradient(h, u);
    const Vector grad_ref = (s * cert.d.transpose()) * offset;
    report.gradient_residual =
        std::max(report.gradient_residual, (grad - grad_ref).cwiseAbs().maxCoeff());

    Vector grad_fd(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      Vector up = u, dn = u;
      up(i) += fd_step;
      dn(i) -= fd_step;
      grad_fd(i) = (eval_constant(h, up) - eval_constant(h, dn)) / (2.0 * fd_step);
    }
    const double denom = std::max(1.0, grad.cwiseAbs().maxCoeff());
    report.gradient_fd_residual =
        std::max(report.gradient_fd_residual, (grad_fd - grad).cwiseAbs().maxCoeff() / denom);
  }
  return report;
}

}  // namespace conserva
