#include "conserva/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace conserva {

bool all_finite(const Matrix& m) { return m.allFinite(); }

void fix_sign(Vector& v) {
  int lead = 0;
  double best = -1.0;
  for (int i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best) {
      best = a;
      lead = i;
    }
  }
  if (v.size() > 0 && v(lead) < 0.0) v = -v;
}

NullspaceResult nullspace_basis(const Matrix& m, double rank_tol) {
  if (!all_finite(m)) throw std::invalid_argument("nullspace_basis: non-finite entries");
  if (!(rank_tol > 0.0)) throw std::invalid_argument("nullspace_basis: rank_tol must be positive");

  NullspaceResult out;
  out.rank_tolerance = rank_tol;

  const int cols = static_cast<int>(m.cols());
  if (m.rows() == 0 || cols == 0) {
    out.sigma_max = 0.0;
    for (int j = 0; j < cols; ++j) {
      Vector e = Vector::Zero(cols);
      e(j) = 1.0;
      out.basis.push_back(e);
    }
    return out;
  }

  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  out.sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  const double cutoff = rank_tol * out.sigma_max;

  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;

  const Matrix& v = svd.matrixV();
  for (int j = rank; j < cols; ++j) {
    Vector b = v.col(j);
    fix_sign(b);
    out.basis.push_back(b);
  }
  return out;
}

double skew_residual(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("skew_residual: matrix must be square");
  if (m.size() == 0) return 0.0;
  return (m + m.transpose()).cwiseAbs().maxCoeff();
}

double offdiag_residual(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("offdiag_residual: matrix must be square");
  double worst = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (i != j) worst = std::max(worst, std::abs(m(i, j)));
  return worst;
}

double subspace_projection_residual(const std::vector<Vector>& from,
                                    const std::vector<Vector>& onto) {
  if (from.empty()) return 0.0;
  const auto dim = from.front().size();
  for (const Vector& v : from)
    if (v.size() != dim)
      throw std::invalid_argument("subspace_projection_residual: inconsistent dimensions");

  Matrix span(dim, static_cast<Eigen::Index>(onto.size()));
  for (size_t j = 0; j < onto.size(); ++j) {
    if (onto[j].size() != dim)
      throw std::invalid_argument("subspace_projection_residual: inconsistent dimensions");
    span.col(static_cast<Eigen::Index>(j)) = onto[j];
  }

  double worst = 0.0;
  if (onto.empty()) {
    for (const Vector& v : from) worst = std::max(worst, v.norm());
    return worst;
  }

  Eigen::JacobiSVD<Matrix> svd(span, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double cutoff = 1e-12 * (sv.size() > 0 ? sv(0) : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;

  const Matrix u = svd.matrixU().leftCols(rank);
  for (const Vector& v : from) {
    const Vector residual = v - u * (u.transpose() * v);
    worst = std::max(worst, residual.norm());
  }
  return worst;
}

}  // namespace conserva
