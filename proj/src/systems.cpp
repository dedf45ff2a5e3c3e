#include "conserva/systems.hpp"

#include <cmath>
#include <stdexcept>

namespace conserva {

namespace {

void require_size(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n) throw std::invalid_argument(std::string(what) + ": wrong dimension");
}

}  // namespace

ReplicatorSystem::ReplicatorSystem(Matrix payoff) : payoff_(std::move(payoff)) {
  if (payoff_.rows() != payoff_.cols())
    throw std::invalid_argument("ReplicatorSystem: payoff must be square");
  if (payoff_.rows() < 1)
    throw std::invalid_argument("ReplicatorSystem: need at least one strategy");
  if (!all_finite(payoff_))
    throw std::invalid_argument("ReplicatorSystem: payoff has non-finite entries");
}

LotkaVolterraSystem::LotkaVolterraSystem(Matrix interaction, Vector growth)
    : interaction_(std::move(interaction)), growth_(std::move(growth)) {
  if (interaction_.rows() != interaction_.cols())
    throw std::invalid_argument("LotkaVolterraSystem: interaction must be square");
  if (interaction_.rows() < 1)
    throw std::invalid_argument("LotkaVolterraSystem: need at least one species");
  if (growth_.size() != interaction_.rows())
    throw std::invalid_argument("LotkaVolterraSystem: growth dimension mismatch");
  if (!all_finite(interaction_) || !all_finite(growth_))
    throw std::invalid_argument("LotkaVolterraSystem: non-finite entries");
}

ReplicatorSystem normalize_payoff(const ReplicatorSystem& sys) {
  Matrix a = sys.payoff();
  a.rowwise() -= a.row(a.rows() - 1);
  return ReplicatorSystem(std::move(a));
}

Vector replicator_field(const ReplicatorSystem& sys, const Vector& x) {
  require_size(x, sys.strategies(), "replicator_field");
  const Vector ax = sys.payoff() * x;
  const double avg = x.dot(ax);
  return x.cwiseProduct(ax - Vector::Constant(x.size(), avg));
}

Vector lv_field(const LotkaVolterraSystem& sys, const Vector& y) {
  require_size(y, sys.species(), "lv_field");
  return y.cwiseProduct(sys.growth() + sys.interaction() * y);
}

Matrix interaction_bivector(const ReplicatorSystem& sys, const Vector& x) {
  require_size(x, sys.strategies(), "interaction_bivector");
  const Eigen::Index n = x.size();
  const Matrix t = x * Eigen::RowVectorXd::Ones(n) - Matrix::Identity(n, n);
  const Matrix dx = x.asDiagonal();
  return -(t * dx * sys.payoff() * dx * t.transpose());
}

Vector chart_to_simplex(const Vector& u) {
  const Eigen::Index m = u.size();
  Vector x(m + 1);
  double s = 1.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    x(i) = std::exp(u(i));
    s += x(i);
  }
  x(m) = 1.0;
  return x / s;
}

Vector simplex_to_chart(const Vector& x) {
  const Eigen::Index n = x.size();
  if (n < 2) throw std::invalid_argument("simplex_to_chart: need dimension >= 2");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(x(i) > 0.0))
      throw std::domain_error("simplex_to_chart: point must have positive components");
  Vector u(n - 1);
  const double log_last = std::log(x(n - 1));
  for (Eigen::Index i = 0; i < n - 1; ++i) u(i) = std::log(x(i)) - log_last;
  return u;
}

Matrix chart_jacobian(const Vector& u) {
  const Eigen::Index m = u.size();
  const Vector x = chart_to_simplex(u);
  Matrix j(m + 1, m);
  for (Eigen::Index i = 0; i < m + 1; ++i)
    for (Eigen::Index k = 0; k < m; ++k)
      j(i, k) = x(i) * ((i == k ? 1.0 : 0.0) - x(k));
  return j;
}

Matrix contrast_matrix(int n) {
  if (n < 2) throw std::invalid_argument("contrast_matrix: need n >= 2");
  Matrix e = Matrix::Zero(n - 1, n);
  e.leftCols(n - 1) = -Matrix::Identity(n - 1, n - 1);
  e.col(n - 1).setOnes();
  return e;
}

Matrix chart_field_matrix(const ReplicatorSystem& sys) {
  const Matrix e = contrast_matrix(sys.strategies());
  return -(e * sys.payoff() * e.transpose());
}

Vector equilibrium_offset(const Vector& q, const Vector& u) {
  if (q.size() != u.size() + 1)
    throw std::invalid_argument("equilibrium_offset: q must have one more component than u");
  const Vector x = chart_to_simplex(u);
  return q.head(u.size()) - x.head(u.size());
}

Vector chart_field(const Matrix& chart_matrix, const Vector& q, const Vector& u) {
  if (chart_matrix.rows() != chart_matrix.cols() || chart_matrix.rows() != u.size())
    throw std::invalid_argument("chart_field: dimension mismatch");
  return chart_matrix * equilibrium_offset(q, u);
}

Vector scaled_chart_field(const Matrix& chart_matrix, const Vector& q, const Vector& u) {
  double s = 1.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) s += std::exp(u(i));
  return s * chart_field(chart_matrix, q, u);
}

ReplicatorSystem lv_to_replicator(const LotkaVolterraSystem& sys) {
  const int m = sys.species();
  Matrix a = Matrix::Zero(m + 1, m + 1);
  a.topLeftCorner(m, m) = sys.interaction();
  a.topRightCorner(m, 1) = sys.growth();
  return ReplicatorSystem(std::move(a));
}

LotkaVolterraSystem replicator_to_lv(const ReplicatorSystem& sys) {
  const ReplicatorSystem norm = normalize_payoff(sys);
  const int m = norm.strategies() - 1;
  if (m < 1) throw std::invalid_argument("replicator_to_lv: need at least two strategies");
  Matrix a = norm.payoff().topLeftCorner(m, m);
  Vector r = norm.payoff().topRightCorner(m, 1);
  return LotkaVolterraSystem(std::move(a), std::move(r));
}

Vector simplex_to_orthant(const Vector& x) {
  const Eigen::Index n = x.size();
  if (n < 2) throw std::invalid_argument("simplex_to_orthant: need dimension >= 2");
  if (std::abs(x(n - 1)) <= 1e-300)
    throw std::domain_error("simplex_to_orthant: last component must be nonzero");
  return x.head(n - 1) / x(n - 1);
}

Vector orthant_to_simplex(const Vector& y) {
  const double s = 1.0 + y.sum();
  if (std::abs(s) <= 1e-12 * (1.0 + y.cwiseAbs().sum()))
    throw std::domain_error("orthant_to_simplex: degenerate normalization 1 + sum(y) = 0");
  Vector x(y.size() + 1);
  x.head(y.size()) = y / s;
  x(y.size()) = 1.0 / s;
  return x;
}

Vector ProjectiveTransform::apply(const Vector& x) const {
  require_size(x, weights.size(), "ProjectiveTransform::apply");
  const Vector w = weights.cwiseProduct(x);
  const double s = w.sum();
  if (std::abs(s) <= 1e-300)
    throw std::domain_error("ProjectiveTransform::apply: zero normalization");
  return w / s;
}

ProjectiveTransform projective_transform(const ReplicatorSystem& sys, const Vector& c) {
  require_size(c, sys.strategies(), "projective_transform");
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (!(c(i) > 0.0))
      throw std::invalid_argument("projective_transform: weights must be positive");
  Matrix a = sys.payoff() * c.cwiseInverse().asDiagonal();
  return ProjectiveTransform{ReplicatorSystem(std::move(a)), c};
}

ReplicatorSystem restrict_to_face(const ReplicatorSystem& sys, const std::vector<int>& kept) {
  if (kept.empty())
    throw std::invalid_argument("restrict_to_face: kept set must be nonempty");
  int prev = -1;
  for (int idx : kept) {
    if (idx <= prev || idx >= sys.strategies())
      throw std::invalid_argument("restrict_to_face: indices must be strictly increasing and in range");
    prev = idx;
  }
  const Eigen::Index k = static_cast<Eigen::Index>(kept.size());
  Matrix a(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      a(i, j) = sys.payoff()(kept[static_cast<size_t>(i)], kept[static_cast<size_t>(j)]);
  return ReplicatorSystem(std::move(a));
}

}  // namespace conserva
