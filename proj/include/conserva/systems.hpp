#pragma once

#include <vector>

#include "conserva/linalg.hpp"

namespace conserva {

// Replicator dynamics on the probability simplex: each strategy's share
// grows with its payoff advantage over the population average.
class ReplicatorSystem {
 public:
  explicit ReplicatorSystem(Matrix payoff);

  const Matrix& payoff() const { return payoff_; }
  int strategies() const { return static_cast<int>(payoff_.rows()); }

 private:
  Matrix payoff_;
};

// Lotka-Volterra dynamics on the open positive orthant: per-capita growth is
// affine in the population vector.
class LotkaVolterraSystem {
 public:
  LotkaVolterraSystem(Matrix interaction, Vector growth);

  const Matrix& interaction() const { return interaction_; }
  const Vector& growth() const { return growth_; }
  int species() const { return static_cast<int>(growth_.size()); }

 private:
  Matrix interaction_;
  Vector growth_;
};

// Subtracts the last payoff row from every row. The replicator field is
// unchanged; the last row becomes zero.
ReplicatorSystem normalize_payoff(const ReplicatorSystem& sys);

// dx_i/dt = x_i ((A x)_i - x^T A x)
Vector replicator_field(const ReplicatorSystem& sys, const Vector& x);

// dy_i/dt = y_i (r_i + (A y)_i)
Vector lv_field(const LotkaVolterraSystem& sys, const Vector& y);

// State-dependent structure matrix through which the replicator field is a
// gradient flow: with T = x 1^T - I and Dx = diag(x), returns
// -T Dx A Dx T^T. Vanishes at every vertex of the simplex.
Matrix interaction_bivector(const ReplicatorSystem& sys, const Vector& x);

// Log-ratio chart of the open simplex: u in R^{n-1} maps to the interior
// point with x_i proportional to e^{u_i} (i < n) and x_n proportional to 1.
Vector chart_to_simplex(const Vector& u);

// Inverse chart, u_i = log(x_i / x_n). Requires every component positive.
Vector simplex_to_chart(const Vector& x);

// n x (n-1) Jacobian of chart_to_simplex at u.
Matrix chart_jacobian(const Vector& u);

// (n-1) x n matrix of contrasts against the last coordinate: [-I | 1].
Matrix contrast_matrix(int n);

// Constant matrix representing the replicator field in the chart,
// -E A E^T with E the contrast matrix.
Matrix chart_field_matrix(const ReplicatorSystem& sys);

// Offset between a reference simplex point q (length n) and the current
// chart point: component i is q_i - e^{u_i} / (1 + sum_j e^{u_j}).
Vector equilibrium_offset(const Vector& q, const Vector& u);

// Chart velocity field: chart_field_matrix * equilibrium_offset.
Vector chart_field(const Matrix& chart_matrix, const Vector& q, const Vector& u);

// Chart field rescaled by 1 + sum_j e^{u_j}; same orbits, reparametrized time.
Vector scaled_chart_field(const Matrix& chart_matrix, const Vector& q, const Vector& u);

// Embeds an m-species Lotka-Volterra system as an (m+1)-strategy replicator
// system: payoff [[A, r], [0, 0]].
ReplicatorSystem lv_to_replicator(const LotkaVolterraSystem& sys);

// Inverse of the embedding after payoff normalization: interaction
// a_ij - a_nj, growth a_in - a_nn.
LotkaVolterraSystem replicator_to_lv(const ReplicatorSystem& sys);

// y_i = x_i / x_n for i < n; requires x_n != 0 within tolerance.
Vector simplex_to_orthant(const Vector& x);

// x = (y, 1) / (1 + sum y); requires the denominator nonzero.
Vector orthant_to_simplex(const Vector& y);

struct ProjectiveTransform {
  ReplicatorSystem system;  // payoff A * diag(1/c)
  Vector weights;           // the positive vector c

  // Pushforward of a simplex point: x_i -> c_i x_i / sum_j c_j x_j.
  Vector apply(const Vector& x) const;
};

// Orbit-preserving change of coordinates indexed by a positive vector c.
ProjectiveTransform projective_transform(const ReplicatorSystem& sys, const Vector& c);

// Restriction of the game to a sub-simplex: keeps the listed strategies
// (indices into 0..n-1, strictly increasing).
ReplicatorSystem restrict_to_face(const ReplicatorSystem& sys,
                                  const std::vector<int>& kept);

}  // namespace conserva
