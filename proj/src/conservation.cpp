#include "conserva/conservation.hpp"

#include <cmath>
#include <queue>
#include <sstream>

namespace conserva {

namespace {

constexpr double kZeroComponentTol = 1e-14;

void require_reference_point(const Vector& q, Eigen::Index m, const char* what) {
  if (q.size() != m + 1)
    throw std::invalid_argument(std::string(what) + ": reference point has wrong dimension");
  if (!all_finite(q))
    throw std::invalid_argument(std::string(what) + ": reference point has non-finite entries");
  if (std::abs(q.sum() - 1.0) > 1e-8 * (1.0 + q.cwiseAbs().sum()))
    throw std::invalid_argument(std::string(what) + ": reference point components must sum to 1");
}

double last_component_or_throw(const Vector& q, const char* what) {
  const double qn = q(q.size() - 1);
  if (std::abs(qn) <= kZeroComponentTol * (1.0 + q.cwiseAbs().maxCoeff()))
    throw std::domain_error(std::string(what) +
                            ": last component of the reference point must be nonzero");
  return qn;
}

Matrix reshape_row_major(const Vector& v, Eigen::Index m) {
  Matrix d(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) d(i, j) = v(i * m + j);
  return d;
}

void record_residuals(CertificateFamily& family, const Matrix& d, const Matrix& chart_matrix,
                      const Matrix& closedness) {
  family.skew_residuals.push_back(skew_residual(d * chart_matrix));
  family.offdiag_residuals.push_back(offdiag_residual(d.transpose() * closedness));
}

}  // namespace

Matrix closedness_matrix(const Vector& q) {
  if (q.size() < 2) throw std::invalid_argument("closedness_matrix: need dimension >= 2");
  const Eigen::Index m = q.size() - 1;
  Matrix q1(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) q1(i, j) = q(i) - (i == j ? 1.0 : 0.0);
  return q1;
}

Matrix chart_factor(const Vector& q) {
  if (q.size() < 2) throw std::invalid_argument("chart_factor: need dimension >= 2");
  const double qn = last_component_or_throw(q, "chart_factor");
  const Eigen::Index m = q.size() - 1;
  Matrix q2(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) q2(i, j) = (i == j ? 1.0 : 0.0) + q(i) / qn;
  return q2;
}

Matrix certificate_lift(const Vector& q) {
  if (q.size() < 2) throw std::invalid_argument("certificate_lift: need dimension >= 2");
  const double qn = last_component_or_throw(q, "certificate_lift");
  const Eigen::Index m = q.size() - 1;
  const double zero_tol = kZeroComponentTol * (1.0 + q.cwiseAbs().maxCoeff());
  Matrix lift(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    if (std::abs(q(k)) <= zero_tol) {
      lift.col(k).setZero();
      lift(k, k) = 1.0;
    } else {
      lift.col(k).setOnes();
      lift(k, k) = (q(k) + qn) / q(k);
    }
  }
  return lift;
}

CertificateFamily certificate_search_general(const Matrix& chart_matrix, const Vector& q,
                                             double rank_tol) {
  const Eigen::Index m = chart_matrix.rows();
  if (chart_matrix.cols() != m || m < 1)
    throw std::invalid_argument("certificate_search_general: chart matrix must be square");
  if (!all_finite(chart_matrix))
    throw std::invalid_argument("certificate_search_general: non-finite entries");
  require_reference_point(q, m, "certificate_search_general");

  const Matrix q1 = closedness_matrix(q);
  const double b_scale = std::max(1.0, chart_matrix.cwiseAbs().maxCoeff());

  const Eigen::Index skew_rows = m * (m + 1) / 2;
  const Eigen::Index closed_rows = m * (m - 1);
  Matrix sys = Matrix::Zero(skew_rows + closed_rows, m * m);

  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i; j < m; ++j, ++row)
      for (Eigen::Index k = 0; k < m; ++k) {
        sys(row, i * m + k) += chart_matrix(k, j) / b_scale;
        sys(row, j * m + k) += chart_matrix(k, i) / b_scale;
      }
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) continue;
      for (Eigen::Index k = 0; k < m; ++k) sys(row, k * m + i) += q1(k, j);
      ++row;
    }

  CertificateFamily family;
  family.method = SearchMethod::general;
  for (const Vector& flat : nullspace_basis(sys, rank_tol).basis) {
    Matrix d = reshape_row_major(flat, m);
    family.basis.push_back(d);
    record_residuals(family, d, chart_matrix, q1);
  }
  return family;
}

CertificateFamily certificate_search_reduced(const Matrix& interaction_block, const Vector& q,
                                             double rank_tol) {
  const Eigen::Index m = interaction_block.rows();
  if (interaction_block.cols() != m || m < 1)
    throw std::invalid_argument("certificate_search_reduced: interaction block must be square");
  if (!all_finite(interaction_block))
    throw std::invalid_argument("certificate_search_reduced: non-finite entries");
  require_reference_point(q, m, "certificate_search_reduced");

  const Matrix chart_matrix = -(interaction_block * chart_factor(q));
  const Matrix lift = certificate_lift(q);
  const Matrix q1 = closedness_matrix(q);

  Matrix sys = Matrix::Zero(m * (m + 1) / 2, m);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i; j < m; ++j, ++row)
      for (Eigen::Index k = 0; k < m; ++k)
        sys(row, k) = lift(i, k) * chart_matrix(k, j) + lift(j, k) * chart_matrix(k, i);

  CertificateFamily family;
  family.method = SearchMethod::reduced;
  for (const Vector& d_vec : nullspace_basis(sys, rank_tol).basis) {
    const Matrix lifted = lift * d_vec.asDiagonal();
    Vector flat = Eigen::Map<const Vector>(lifted.data(), lifted.size());
    int lead = 0;
    for (Eigen::Index i = 1; i < flat.size(); ++i)
      if (std::abs(flat(i)) > std::abs(flat(lead))) lead = static_cast<int>(i);
    const double sign = flat(lead) < 0.0 ? -1.0 : 1.0;
    const double norm = flat.norm();
    const double scale = norm > 0.0 ? sign / norm : 1.0;
    family.basis.push_back(lifted * scale);
    family.directions.push_back(d_vec * sign);
    record_residuals(family, family.basis.back(), chart_matrix, q1);
  }
  return family;
}

ConservationCertificate make_certificate(const Matrix& d, const Vector& q,
                                         const Matrix& chart_matrix, double tol) {
  const Eigen::Index m = d.rows();
  if (d.cols() != m || chart_matrix.rows() != m || chart_matrix.cols() != m)
    throw std::invalid_argument("make_certificate: dimension mismatch");
  if (!all_finite(d) || !all_finite(chart_matrix))
    throw std::invalid_argument("make_certificate: non-finite entries");
  require_reference_point(q, m, "make_certificate");

  const Matrix q1 = closedness_matrix(q);
  const double rs = skew_residual(d * chart_matrix);
  const double ro = offdiag_residual(d.transpose() * q1);
  const double rs_tol = tol * (1.0 + d.norm() * chart_matrix.norm());
  const double ro_tol = tol * (1.0 + d.norm() * q1.norm());
  if (rs > rs_tol || ro > ro_tol) {
    std::ostringstream msg;
    msg << "make_certificate: conditions violated";
    if (rs > rs_tol) msg << "; skew-symmetry residual " << rs << " exceeds " << rs_tol;
    if (ro > ro_tol) msg << "; closedness residual " << ro << " exceeds " << ro_tol;
    throw CertificateError(msg.str(), rs, ro);
  }

  ConservationCertificate cert;
  cert.d = d;
  cert.q = q;
  cert.c = d.transpose() * q.head(m);
  cert.g = cert.c - d.diagonal();
  return cert;
}

ConstantOfMotion constant_of_motion(const ConservationCertificate& cert, Chart chart) {
  return ConstantOfMotion{chart, cert.c, cert.g, 0.0};
}

double eval_constant(const ConstantOfMotion& h, const Vector& point) {
  const Eigen::Index m = h.c.size();
  if (h.g.size() != m) throw std::invalid_argument("eval_constant: malformed coefficients");
  double value = 0.0;
  switch (h.chart) {
    case Chart::u: {
      if (point.size() != m) throw std::invalid_argument("eval_constant: wrong dimension");
      for (Eigen::Index i = 0; i < m; ++i)
        value += h.c(i) * point(i) + h.g(i) * std::exp(point(i));
      return value;
    }
    case Chart::x: {
      if (point.size() != m + 1) throw std::invalid_argument("eval_constant: wrong dimension");
      for (Eigen::Index i = 0; i < m + 1; ++i)
        if (!(point(i) > 0.0))
          throw std::domain_error("eval_constant: simplex point must have positive components");
      const double log_last = std::log(point(m));
      for (Eigen::Index i = 0; i < m; ++i)
        value += h.c(i) * (std::log(point(i)) - log_last) + h.g(i) * (point(i) / point(m));
      return value;
    }
    case Chart::y: {
      if (point.size() != m) throw std::invalid_argument("eval_constant: wrong dimension");
      for (Eigen::Index i = 0; i < m; ++i)
        if (!(point(i) > 0.0))
          throw std::domain_error("eval_constant: orthant point must have positive components");
      for (Eigen::Index i = 0; i < m; ++i)
        value += h.c(i) * std::log(point(i)) + h.g(i) * point(i);
      return value;
    }
  }
  throw std::logic_error("eval_constant: unknown chart");
}

Vector chart_gradient(const ConstantOfMotion& h, const Vector& u) {
  if (u.size() != h.c.size()) throw std::invalid_argument("chart_gradient: wrong dimension");
  Vector grad(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i)
    grad(i) = h.c(i) + h.g(i) * std::exp(u(i));
  return grad;
}

Matrix certificate_matrix(const Vector& c, const Vector& g) {
  if (c.size() != g.size()) throw std::invalid_argument("certificate_matrix: size mismatch");
  const Eigen::Index m = c.size();
  Matrix d = Vector::Ones(m) * c.transpose();
  d.diagonal() -= g;
  return d;
}

GaugeResult gauge_skew_symmetrizer(const Matrix& interaction) {
  const Eigen::Index m = interaction.rows();
  if (interaction.cols() != m || m < 1)
    throw std::invalid_argument("gauge_skew_symmetrizer: matrix must be square");
  if (!all_finite(interaction))
    throw std::invalid_argument("gauge_skew_symmetrizer: non-finite entries");

  GaugeResult out;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (interaction(i, i) != 0.0) {
      std::ostringstream msg;
      msg << "diagonal entry (" << i << ", " << i << ") is nonzero; no positive diagonal scaling "
          << "can skew-symmetrize";
      out.reason = msg.str();
      return out;
    }
  }
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double a = interaction(i, j), b = interaction(j, i);
      if ((a == 0.0) != (b == 0.0)) {
        std::ostringstream msg;
        msg << "one-sided interaction between " << i << " and " << j
            << "; skew-symmetry is impossible";
        out.reason = msg.str();
        return out;
      }
      if (a * b > 0.0) {
        std::ostringstream msg;
        msg << "entries (" << i << ", " << j << ") and (" << j << ", " << i
            << ") share a sign; the required scaling ratio would be negative";
        out.reason = msg.str();
        return out;
      }
    }

  // Propagate the scaling along interaction edges; each connected component
  // is normalized by setting its lowest-index member to 1.
  Vector scaling = Vector::Zero(m);
  for (Eigen::Index root = 0; root < m; ++root) {
    if (scaling(root) != 0.0) continue;
    scaling(root) = 1.0;
    std::queue<Eigen::Index> frontier;
    frontier.push(root);
    while (!frontier.empty()) {
      const Eigen::Index i = frontier.front();
      frontier.pop();
      for (Eigen::Index j = 0; j < m; ++j) {
        if (j == i || interaction(i, j) == 0.0) continue;
        // Skewness of interaction * diag(s) requires
        // a_ij * s_j = -a_ji * s_i.
        const double candidate = -scaling(i) * interaction(j, i) / interaction(i, j);
        if (scaling(j) == 0.0) {
          scaling(j) = candidate;
          frontier.push(j);
        } else {
          const double lhs = scaling(j) * interaction(i, j);
          const double rhs = -scaling(i) * interaction(j, i);
          if (std::abs(lhs - rhs) > 1e-9 * std::max({1e-300, std::abs(lhs), std::abs(rhs)})) {
            std::ostringstream msg;
            msg << "inconsistent interaction cycle through " << i << " and " << j
                << "; relative mismatch exceeds 1e-9";
            out.reason = msg.str();
            return out;
          }
        }
      }
    }
  }

  out.found = true;
  out.scaling = scaling;
  return out;
}

ConstantOfMotion certificate_from_gauge(const Vector& q, const Vector& d) {
  if (q.size() != d.size() || q.size() < 1)
    throw std::invalid_argument("certificate_from_gauge: size mismatch");
  const Eigen::Index m = q.size();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(d(i) > 0.0))
      throw std::invalid_argument("certificate_from_gauge: scaling must be positive");
    if (!(q(i) > 0.0))
      throw std::invalid_argument("certificate_from_gauge: equilibrium must be positive");
  }
  ConstantOfMotion h;
  h.chart = Chart::y;
  h.c = q.cwiseQuotient(d);
  h.g = -d.cwiseInverse();
  // Constant completing the textbook form of the gauge integral; it is
  // reported as metadata and never enters evaluation.
  for (Eigen::Index i = 0; i < m; ++i)
    h.additive_constant -= (q(i) / d(i)) * std::log(q(i));
  return h;
}

ConstantOfMotion classical_integral(const Vector& q) {
  if (q.size() < 1) throw std::invalid_argument("classical_integral: empty equilibrium");
  if (!(q.minCoeff() > 0.0))
    throw std::invalid_argument("classical_integral: equilibrium must be positive");
  ConstantOfMotion h;
  h.chart = Chart::y;
  h.c = -q;
  h.g = Vector::Ones(q.size());
  h.additive_constant = 0.0;
  return h;
}

}  // namespace conserva
