#include "conserva/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace conserva {

namespace {

// Dormand-Prince 5(4) tableau (autonomous fields, so stage times drop out).
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384,      0.0,  500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,    0.0,       7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

bool admissible(const Flow& flow, const Vector& x) {
  return !flow.in_domain || flow.in_domain(x);
}

bool bounded(const Vector& x, double threshold) {
  return x.allFinite() && x.cwiseAbs().maxCoeff() <= threshold;
}

void record(Trajectory& traj, const Flow& flow, double t, const Vector& x) {
  traj.times.push_back(t);
  traj.states.push_back(x);
  for (size_t k = 0; k < flow.diagnostics.size(); ++k)
    traj.observables[k].second.push_back(flow.diagnostics[k].second(x));
}

Vector rk4_step(const Flow& flow, const Vector& x, double h) {
  const Vector k1 = flow.velocity(x);
  const Vector k2 = flow.velocity(x + 0.5 * h * k1);
  const Vector k3 = flow.velocity(x + 0.5 * h * k2);
  const Vector k4 = flow.velocity(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

const char* to_string(TrajectoryStatus status) {
  switch (status) {
    case TrajectoryStatus::completed: return "completed";
    case TrajectoryStatus::domain_exit: return "domain_exit";
    case TrajectoryStatus::diverged: return "diverged";
    case TrajectoryStatus::max_steps_reached: return "max_steps_reached";
  }
  return "unknown";
}

Flow make_flow(const ReplicatorSystem& sys) {
  Flow flow;
  flow.dimension = sys.strategies();
  flow.velocity = [sys](const Vector& x) { return replicator_field(sys, x); };
  flow.in_domain = [](const Vector& x) { return x.minCoeff() > -1e-9; };
  flow.diagnostics.emplace_back("simplex_sum", [](const Vector& x) { return x.sum(); });
  return flow;
}

Flow make_flow(const LotkaVolterraSystem& sys) {
  Flow flow;
  flow.dimension = sys.species();
  flow.velocity = [sys](const Vector& y) { return lv_field(sys, y); };
  flow.in_domain = [](const Vector& y) { return y.minCoeff() > 0.0; };
  flow.diagnostics.emplace_back("min_coordinate", [](const Vector& y) { return y.minCoeff(); });
  return flow;
}

Flow make_chart_flow(const Matrix& chart_matrix, const Vector& q, bool time_scaled) {
  if (chart_matrix.rows() != chart_matrix.cols() || chart_matrix.rows() + 1 != q.size())
    throw std::invalid_argument("make_chart_flow: dimension mismatch");
  Flow flow;
  flow.dimension = static_cast<int>(chart_matrix.rows());
  if (time_scaled)
    flow.velocity = [chart_matrix, q](const Vector& u) {
      return scaled_chart_field(chart_matrix, q, u);
    };
  else
    flow.velocity = [chart_matrix, q](const Vector& u) {
      return chart_field(chart_matrix, q, u);
    };
  return flow;
}

Trajectory integrate(const Flow& flow, const Vector& x0, const IntegratorConfig& config) {
  if (!flow.velocity || flow.dimension <= 0)
    throw std::invalid_argument("integrate: flow has no velocity field");
  if (x0.size() != flow.dimension)
    throw std::invalid_argument("integrate: initial state has wrong dimension");
  if (!all_finite(x0)) throw std::invalid_argument("integrate: non-finite initial state");
  if (!(config.t_end > 0.0)) throw std::invalid_argument("integrate: t_end must be positive");
  if (config.max_steps < 1) throw std::invalid_argument("integrate: max_steps must be positive");
  if (config.record_every < 1)
    throw std::invalid_argument("integrate: record_every must be positive");
  if (config.method == IntegratorConfig::Method::fixed_rk4 && !(config.step > 0.0))
    throw std::invalid_argument("integrate: fixed-step size must be positive");
  if (config.method == IntegratorConfig::Method::adaptive_rk45 &&
      (!(config.abs_tol > 0.0) || !(config.rel_tol > 0.0)))
    throw std::invalid_argument("integrate: tolerances must be positive");
  if (!admissible(flow, x0)) throw std::domain_error("integrate: initial state outside domain");

  Trajectory traj;
  for (const auto& diag : flow.diagnostics) traj.observables.emplace_back(diag.first, std::vector<double>{});
  record(traj, flow, 0.0, x0);

  double t = 0.0;
  Vector x = x0;
  const double t_end = config.t_end;

  auto finish_step = [&](double t_new, const Vector& x_new) -> bool {
    // Returns false when the run must stop without recording x_new.
    if (!bounded(x_new, config.divergence_threshold)) {
      traj.status = TrajectoryStatus::diverged;
      std::ostringstream msg;
      msg << "state magnitude exceeded " << config.divergence_threshold << " near t = " << t_new;
      traj.note = msg.str();
      return false;
    }
    if (!admissible(flow, x_new)) {
      traj.status = TrajectoryStatus::domain_exit;
      std::ostringstream msg;
      msg << "state left the admissible domain near t = " << t_new;
      traj.note = msg.str();
      return false;
    }
    t = t_new;
    x = x_new;
    ++traj.accepted_steps;
    const bool at_end = t >= t_end * (1.0 - 1e-14);
    if (at_end || traj.accepted_steps % config.record_every == 0) record(traj, flow, t, x);
    return true;
  };

  if (config.method == IntegratorConfig::Method::fixed_rk4) {
    while (t < t_end * (1.0 - 1e-14)) {
      if (traj.accepted_steps >= config.max_steps) {
        traj.status = TrajectoryStatus::max_steps_reached;
        traj.note = "step budget exhausted";
        return traj;
      }
      const double h = std::min(config.step, t_end - t);
      if (!finish_step(t + h, rk4_step(flow, x, h))) return traj;
    }
    return traj;
  }

  double h = std::min(config.step > 0.0 ? config.step : 1e-3, t_end);
  Vector k[7];
  k[0] = flow.velocity(x);  // stays valid for the current x across rejections

  while (t < t_end * (1.0 - 1e-14)) {
    if (traj.accepted_steps >= config.max_steps) {
      traj.status = TrajectoryStatus::max_steps_reached;
      traj.note = "step budget exhausted";
      return traj;
    }
    if (h < 1e-14 * std::max(1.0, std::abs(t))) {
      traj.status = TrajectoryStatus::diverged;
      std::ostringstream msg;
      msg << "step size underflow at t = " << t;
      traj.note = msg.str();
      return traj;
    }
    h = std::min(h, t_end - t);

    for (int s = 1; s < 7; ++s) {
      Vector arg = x;
      for (int j = 0; j < s; ++j)
        if (kA[s][j] != 0.0) arg += (h * kA[s][j]) * k[j];
      k[s] = flow.velocity(arg);
    }

    Vector x5 = x, err = Vector::Zero(x.size());
    for (int s = 0; s < 7; ++s) {
      if (kB5[s] != 0.0) x5 += (h * kB5[s]) * k[s];
      const double db = kB5[s] - kB4[s];
      if (db != 0.0) err += (h * db) * k[s];
    }

    if (!x5.allFinite()) {
      h *= 0.2;
      continue;
    }

    double scale = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double tol =
          config.abs_tol + config.rel_tol * std::max(std::abs(x(i)), std::abs(x5(i)));
      scale = std::max(scale, std::abs(err(i)) / tol);
    }

    if (scale <= 1.0) {
      const Vector k_last = k[6];  // the last stage sits exactly at x5
      if (!finish_step(t + h, x5)) return traj;
      k[0] = k_last;
      const double growth = scale > 0.0 ? 0.9 * std::pow(scale, -0.2) : 5.0;
      h *= std::min(5.0, std::max(0.2, growth));
    } else {
      h *= std::max(0.2, 0.9 * std::pow(scale, -0.2));
    }
  }
  return traj;
}

DriftStats conservation_drift(const Trajectory& traj, const ConstantOfMotion& h) {
  if (traj.states.empty()) throw std::invalid_argument("conservation_drift: empty trajectory");
  DriftStats stats;
  for (size_t i = 0; i < traj.states.size(); ++i) {
    double value = 0.0;
    try {
      value = eval_constant(h, traj.states[i]);
    } catch (const std::domain_error& e) {
      std::ostringstream msg;
      msg << "conservation_drift: sample " << i << " at t = " << traj.times[i]
          << " is outside the domain (" << e.what() << ")";
      throw std::domain_error(msg.str());
    }
    if (i == 0)
      stats.initial_value = value;
    else
      stats.max_abs = std::max(stats.max_abs, std::abs(value - stats.initial_value));
  }
  stats.max_rel = stats.max_abs / std::max(1.0, std::abs(stats.initial_value));
  return stats;
}

double chart_identity_residual(const ReplicatorSystem& sys,
                               const std::vector<Vector>& chart_points) {
  const Matrix b = chart_field_matrix(sys);
  double worst = 0.0;
  for (const Vector& u : chart_points) {
    if (u.size() != sys.strategies() - 1)
      throw std::invalid_argument("chart_identity_residual: wrong chart dimension");
    const Matrix j = chart_jacobian(u);
    const Matrix lhs = j * b * j.transpose();
    const Matrix rhs = interaction_bivector(sys, chart_to_simplex(u));
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

double pushforward_residual(const ReplicatorSystem& sys,
                            const std::vector<Vector>& simplex_points) {
  const LotkaVolterraSystem lv = replicator_to_lv(sys);
  const Eigen::Index n = sys.strategies();
  double worst = 0.0;
  for (const Vector& x : simplex_points) {
    if (x.size() != n)
      throw std::invalid_argument("pushforward_residual: wrong dimension");
    if (!(x(n - 1) > 0.0))
      throw std::domain_error("pushforward_residual: last component must be positive");
    const Vector y = simplex_to_orthant(x);
    // Jacobian of x -> x_head / x_n: row i has 1/x_n at column i and
    // -x_i / x_n^2 at the last column.
    const Vector xdot = replicator_field(sys, x);
    Vector pushed(n - 1);
    for (Eigen::Index i = 0; i < n - 1; ++i)
      pushed(i) = xdot(i) / x(n - 1) - x(i) * xdot(n - 1) / (x(n - 1) * x(n - 1));
    const Vector target = x(n - 1) * lv_field(lv, y);
    worst = std::max(worst, (pushed - target).cwiseAbs().maxCoeff());
  }
  return worst;
}

double gradient_check(const ConstantOfMotion& h, const std::vector<Vector>& chart_points,
                      double fd_step) {
  if (!(fd_step > 0.0)) throw std::invalid_argument("gradient_check: step must be positive");
  double worst = 0.0;
  for (const Vector& u : chart_points) {
    const Vector grad = chart_gradient(h, u);
    Vector grad_fd(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      Vector up = u, dn = u;
      up(i) += fd_step;
      dn(i) -= fd_step;
      ConstantOfMotion hu = h;
      hu.chart = Chart::u;
      grad_fd(i) = (eval_constant(hu, up) - eval_constant(hu, dn)) / (2.0 * fd_step);
    }
    const double denom = std::max(1.0, grad.cwiseAbs().maxCoeff());
    worst = std::max(worst, (grad_fd - grad).cwiseAbs().maxCoeff() / denom);
  }
  return worst;
}

double pointwise_orthogonality(const Matrix& chart_matrix, const ConservationCertificate& cert,
                               const std::vector<Vector>& chart_points) {
  const ConstantOfMotion h = constant_of_motion(cert, Chart::u);
  double worst = 0.0;
  for (const Vector& u : chart_points) {
    const Vector field = chart_field(chart_matrix, cert.q, u);
    const Vector grad = chart_gradient(h, u);
    const double bound = (1.0 + field.norm()) * (1.0 + grad.norm());
    worst = std::max(worst, std::abs(field.dot(grad)) / bound);
  }
  return worst;
}

}  // namespace conserva
