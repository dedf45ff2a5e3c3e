#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "conserva/systems.hpp"

namespace conserva {

// A certificate is an (n-1) x (n-1) matrix D that simultaneously
// skew-symmetrizes the chart field matrix B (D B skew) and satisfies a
// closedness condition (off-diagonals of D^T * closedness_matrix vanish).
// Every such D induces a constant of motion of the flow.

// Entry (i, j) = q_i - delta_ij, built from the leading n-1 components of a
// simplex-affine point q of length n.
Matrix closedness_matrix(const Vector& q);

// Entry (i, j) = delta_ij + q_i / q_n. For payoffs with zero last row and
// equilibrium q, chart_field_matrix == -A_lead * chart_factor where A_lead
// is the leading (n-1) x (n-1) payoff block.
// Throws std::domain_error when q_n vanishes.
Matrix chart_factor(const Vector& q);

// Columns span the solutions of the closedness condition: column i has ones
// off the diagonal and (q_i + q_n) / q_i at the diagonal; when q_i = 0 the
// column degenerates to e_i. Any closedness solution is lift * diag(d) when
// no q_i other than q_n vanishes.
// Throws std::domain_error when q_n vanishes.
Matrix certificate_lift(const Vector& q);

struct CertificateError : std::runtime_error {
  CertificateError(const std::string& msg, double skew, double offdiag)
      : std::runtime_error(msg), skew_residual(skew), offdiag_residual(offdiag) {}
  double skew_residual;
  double offdiag_residual;
};

enum class SearchMethod { general, reduced };

struct CertificateFamily {
  SearchMethod method = SearchMethod::general;
  // Certificate matrices, unit Frobenius norm, deterministic sign.
  std::vector<Matrix> basis;
  // For the reduced method only: the unit-norm diagonal parameter vectors d
  // with basis[k] proportional to certificate_lift(q) * diag(directions[k]).
  std::vector<Vector> directions;
  // Residuals of the two defining conditions for each basis element.
  std::vector<double> skew_residuals;
  std::vector<double> offdiag_residuals;

  int dimension() const { return static_cast<int>(basis.size()); }
};

// Solves both defining conditions as one homogeneous linear system in all
// (n-1)^2 entries of D. q must be simplex-affine of length n = rows(B) + 1.
CertificateFamily certificate_search_general(const Matrix& chart_matrix,
                                             const Vector& q,
                                             double rank_tol = 1e-10);

// Searches only certificates of the form certificate_lift(q) * diag(d),
// which satisfy the closedness condition by construction; the remaining
// unknown is d. interaction_block is the leading (n-1) x (n-1) payoff block
// (for Lotka-Volterra inputs, the interaction matrix itself).
// Throws std::domain_error when q_n vanishes.
CertificateFamily certificate_search_reduced(const Matrix& interaction_block,
                                             const Vector& q,
                                             double rank_tol = 1e-10);

struct ConservationCertificate {
  Matrix d;  // the certificate matrix
  Vector q;  // the simplex-affine reference point, length rows(d) + 1
  Vector c;  // logarithmic coefficients, c_i = sum_k d(k, i) q_k
  Vector g;  // exponential coefficients, g_i = c_i - d(i, i)
};

// Validates the two defining conditions against chart_matrix and, on
// success, extracts the coefficient vectors of the induced constant of
// motion. Throws CertificateError carrying both residuals otherwise.
// A condition fails when its residual exceeds tol * (1 + scale) with scale
// the product of the Frobenius norms involved.
ConservationCertificate make_certificate(const Matrix& d, const Vector& q,
                                         const Matrix& chart_matrix,
                                         double tol = 1e-8);

enum class Chart { u, x, y };

// H(u)     = sum_i c_i u_i + g_i e^{u_i}                (chart coordinates)
// H(x)     = sum_i c_i log(x_i / x_n) + g_i x_i / x_n   (simplex, interior)
// H(y)     = sum_i c_i log(y_i) + g_i y_i               (positive orthant)
// The additive constant is informational and never enters evaluation.
struct ConstantOfMotion {
  Chart chart = Chart::u;
  Vector c;
  Vector g;
  double additive_constant = 0.0;
};

ConstantOfMotion constant_of_motion(const ConservationCertificate& cert, Chart chart);

// Evaluates H at a point of the chart's domain. Simplex evaluation requires
// all components positive; orthant evaluation requires all components
// positive. Throws std::domain_error otherwise.
double eval_constant(const ConstantOfMotion& h, const Vector& point);

// Gradient in chart coordinates: component i is c_i + g_i e^{u_i}.
Vector chart_gradient(const ConstantOfMotion& h, const Vector& u);

// Reconstructs the certificate matrix whose coefficient vectors are (c, g):
// ones * c^T - diag(g).
Matrix certificate_matrix(const Vector& c, const Vector& g);

// Searches a positive diagonal rescaling that makes interaction * diag(d)
// skew-symmetric. Failure is an expected outcome and is reported in
// `reason`, not thrown.
struct GaugeResult {
  bool found = false;
  Vector scaling;
  std::string reason;
};

GaugeResult gauge_skew_symmetrizer(const Matrix& interaction);

// Constant of motion induced by a gauge scaling d at an orthant equilibrium
// q, both componentwise positive: c_i = q_i / d_i, g_i = -1 / d_i. The
// additive constant -sum_i (q_i / d_i) log(q_i) is reported but not applied.
// Throws std::invalid_argument on nonpositive inputs.
ConstantOfMotion certificate_from_gauge(const Vector& q, const Vector& d);

// The classical orthant integral sum_i (y_i - q_i log y_i), i.e. c = -q,
// g = 1 in orthant coordinates. Requires q componentwise positive.
ConstantOfMotion classical_integral(const Vector& q);

}  // namespace conserva
