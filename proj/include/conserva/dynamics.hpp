#pragma once

#include <functional>
#include <string>
#include <utility>

#include "conserva/conservation.hpp"

namespace conserva {

struct IntegratorConfig {
  enum class Method { fixed_rk4, adaptive_rk45 };
  Method method = Method::adaptive_rk45;
  double t_end = 10.0;
  double step = 0.01;      // fixed-step size
  double abs_tol = 1e-10;  // adaptive error control
  double rel_tol = 1e-10;
  long max_steps = 1000000;
  int record_every = 1;
  double divergence_threshold = 1e8;
};

enum class TrajectoryStatus { completed, domain_exit, diverged, max_steps_reached };

const char* to_string(TrajectoryStatus status);

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  // Named series aligned with `times`, filled from Flow::diagnostics.
  std::vector<std::pair<std::string, std::vector<double>>> observables;
  TrajectoryStatus status = TrajectoryStatus::completed;
  long accepted_steps = 0;
  std::string note;  // human-readable detail for non-completed runs
};

// A vector field together with its admissible domain and optional per-state
// diagnostics recorded along trajectories.
struct Flow {
  int dimension = 0;
  std::function<Vector(const Vector&)> velocity;
  std::function<bool(const Vector&)> in_domain;  // null means all states admissible
  std::vector<std::pair<std::string, std::function<double(const Vector&)>>> diagnostics;
};

Flow make_flow(const ReplicatorSystem& sys);
Flow make_flow(const LotkaVolterraSystem& sys);
// time_scaled selects the field rescaled by 1 + sum(e^u).
Flow make_chart_flow(const Matrix& chart_matrix, const Vector& q, bool time_scaled);

// Integrates the flow from x0 over [0, t_end]. Dormand-Prince 5(4) with a
// PI-free step controller, or classical fixed-step RK4. States that leave
// the domain or exceed the divergence threshold stop the run early with the
// corresponding flagged status; such states are not recorded.
// Throws std::invalid_argument for malformed configs and std::domain_error
// when x0 itself is outside the domain.
Trajectory integrate(const Flow& flow, const Vector& x0, const IntegratorConfig& config);

struct DriftStats {
  double max_abs = 0.0;
  double max_rel = 0.0;  // max_abs / max(1, |H at t=0|)
  double initial_value = 0.0;
};

// Largest deviation of H from its initial value over the recorded states.
// Throws std::domain_error naming the first sample outside H's domain.
DriftStats conservation_drift(const Trajectory& traj, const ConstantOfMotion& h);

// Largest entrywise defect of the chart/simplex compatibility identity
// J(u) B J(u)^T = bivector(x(u)) over the supplied chart points.
double chart_identity_residual(const ReplicatorSystem& sys,
                               const std::vector<Vector>& chart_points);

// Largest entrywise defect of the orthant-map equivalence: pushing the
// replicator field forward through x -> x_head / x_n must match the
// orthant field scaled by x_n. Points must have positive last component.
double pushforward_residual(const ReplicatorSystem& sys,
                            const std::vector<Vector>& simplex_points);

// Largest relative mismatch between the chart gradient of H and central
// finite differences, over the supplied chart points.
double gradient_check(const ConstantOfMotion& h, const std::vector<Vector>& chart_points,
                      double fd_step = 1e-6);

// Largest scaled inner product between the chart field and the chart
// gradient: |<field, grad>| / ((1 + |field|)(1 + |grad|)).
double pointwise_orthogonality(const Matrix& chart_matrix, const ConservationCertificate& cert,
                               const std::vector<Vector>& chart_points);

}  // namespace conserva
