#pragma once

#include "conserva/systems.hpp"

namespace conserva {

// Solution of a linear equilibrium system. The solution set is an affine
// space; `representative` is its minimum-norm member and `basis` spans its
// direction space. `feasible` is false when the equations have no solution,
// in which case `representative` is the least-squares point and `residual`
// records how far it misses.
struct EquilibriumResult {
  Vector representative;
  double residual = 0.0;
  int degrees_of_freedom = 0;
  std::vector<Vector> basis;
  bool feasible = false;
};

// Points q with equal payoff across strategies relative to the last one,
// normalized to sum 1: rows (A_i - A_n) q = 0 together with 1^T q = 1.
// Components may be negative or zero; no positivity is imposed.
EquilibriumResult formal_equilibrium(const ReplicatorSystem& sys,
                                     double rank_tol = 1e-10);

// Points q with vanishing per-capita growth: interaction * q = -growth.
EquilibriumResult formal_equilibrium(const LotkaVolterraSystem& sys,
                                     double rank_tol = 1e-10);

// Maps an orthant equilibrium q (length m) to the simplex-affine point
// (q, 1) / (1 + sum q) of length m + 1.
// Throws std::domain_error when 1 + sum(q) vanishes.
Vector embed_orthant_equilibrium(const Vector& q);

}  // namespace conserva
