#include "conserva/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "conserva/dirac.hpp"
#include "conserva/equilibrium.hpp"
#include "conserva/log.hpp"
#include "conserva/rng.hpp"

namespace conserva {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

constexpr int kSchemaVersion = 1;
constexpr double kChartSampleBound = 3.0;

const char* chart_name(Chart chart) {
  switch (chart) {
    case Chart::u: return "u";
    case Chart::x: return "x";
    case Chart::y: return "y";
  }
  return "?";
}

std::vector<Vector> sample_chart_points(Rng& rng, int dim, int count,
                                        double bound = kChartSampleBound) {
  std::vector<Vector> pts;
  pts.reserve(static_cast<size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) pts.push_back(rng.uniform_vector(dim, -bound, bound));
  return pts;
}

// Everything the pipeline needs, independent of the input flavor.
struct Prepared {
  Prepared(SystemFile::Kind kind, ReplicatorSystem normalized, Matrix interaction_block,
           int chart_dim, EquilibriumResult equilibrium)
      : kind(kind),
        normalized(std::move(normalized)),
        interaction_block(std::move(interaction_block)),
        chart_dim(chart_dim),
        equilibrium(std::move(equilibrium)) {}

  SystemFile::Kind kind;
  ReplicatorSystem normalized;  // last payoff row zero
  Matrix interaction_block;     // leading block; the LV interaction matrix itself
  int chart_dim;
  EquilibriumResult equilibrium;  // native coordinates (simplex / orthant)
  bool have_reference = false;
  Vector q;  // simplex-affine reference point, length chart_dim + 1
  std::optional<Vector> orthant_q;
  std::string reference_source = "computed";
  std::vector<std::string> notes;
};

Prepared prepare(const SystemFile& file, double rank_tol) {
  if (file.kind == SystemFile::Kind::replicator) {
    const ReplicatorSystem& sys = *file.replicator;
    ReplicatorSystem normalized = normalize_payoff(sys);
    const int m = sys.strategies() - 1;
    Prepared p(file.kind, normalized, normalized.payoff().topLeftCorner(m, m), m,
               formal_equilibrium(sys, rank_tol));

    if (file.equilibrium_hint) {
      const Vector& hint = *file.equilibrium_hint;
      const Matrix& a = sys.payoff();
      double residual = std::abs(hint.sum() - 1.0);
      for (int i = 0; i < p.chart_dim; ++i)
        residual = std::max(residual, std::abs((a.row(i) - a.row(p.chart_dim)) * hint));
      if (residual > 1e-8 * (1.0 + a.cwiseAbs().maxCoeff()))
        throw ParseError("equilibrium", "hint is not a formal equilibrium of the payoff matrix");
      p.q = hint;
      p.have_reference = true;
      p.reference_source = "hint";
    } else if (p.equilibrium.feasible) {
      p.q = p.equilibrium.representative;
      p.have_reference = true;
    } else {
      p.notes.push_back("no formal equilibrium: equal-payoff system is infeasible");
    }
    return p;
  }

  const LotkaVolterraSystem& lv = *file.lv;
  Prepared p(file.kind, lv_to_replicator(lv), lv.interaction(), lv.species(),
             formal_equilibrium(lv, rank_tol));

  std::optional<Vector> qprime;
  if (file.equilibrium_hint) {
    const Vector& hint = *file.equilibrium_hint;
    const double residual = (lv.interaction() * hint + lv.growth()).cwiseAbs().maxCoeff();
    if (residual > 1e-8 * (1.0 + lv.interaction().cwiseAbs().maxCoeff() +
                           lv.growth().cwiseAbs().maxCoeff()))
      throw ParseError("equilibrium", "hint does not solve interaction * q = -r");
    qprime = hint;
    p.reference_source = "hint";
  } else if (p.equilibrium.feasible) {
    qprime = p.equilibrium.representative;
  } else {
    p.notes.push_back("no formal equilibrium: interaction * q = -r is infeasible");
  }

  if (qprime) {
    try {
      p.q = embed_orthant_equilibrium(*qprime);
      p.orthant_q = *qprime;
      p.have_reference = true;
    } catch (const std::domain_error&) {
      p.notes.push_back(
          "equilibrium cannot be embedded: 1 + sum(q) vanishes, so no simplex-affine "
          "reference point exists");
    }
  }
  return p;
}

json equilibrium_to_json(const Prepared& p) {
  json out;
  out["feasible"] = p.equilibrium.feasible;
  out["representative"] = vector_to_json(p.equilibrium.representative);
  out["residual"] = p.equilibrium.residual;
  out["degrees_of_freedom"] = p.equilibrium.degrees_of_freedom;
  json basis = json::array();
  for (const Vector& v : p.equilibrium.basis) basis.push_back(vector_to_json(v));
  out["basis"] = basis;
  if (p.have_reference) {
    out["reference_point"] = vector_to_json(p.q);
    out["source"] = p.reference_source;
    if (p.orthant_q) out["orthant_point"] = vector_to_json(*p.orthant_q);
  } else {
    out["reference_point"] = nullptr;
  }
  return out;
}

json family_to_json(const CertificateFamily& family) {
  json out;
  out["dimension"] = family.dimension();
  json basis = json::array();
  for (const Matrix& d : family.basis) basis.push_back(matrix_to_json(d));
  out["basis"] = basis;
  if (!family.directions.empty()) {
    json dirs = json::array();
    for (const Vector& d : family.directions) dirs.push_back(vector_to_json(d));
    out["directions"] = dirs;
  }
  out["skew_residuals"] = family.skew_residuals;
  out["closedness_residuals"] = family.offdiag_residuals;
  return out;
}

json classification_to_json(const StructureClassification& c) {
  json out;
  out["isotropic"] = c.isotropic;
  out["isotropy_residual"] = c.isotropy_residual;
  out["maximal"] = c.maximal;
  out["field_matrix_invertible"] = c.field_matrix_invertible;
  out["certificate_invertible"] = c.certificate_invertible;
  out["label"] = to_string(c.label);
  out["presymplectic_matrix"] =
      c.presymplectic_matrix ? matrix_to_json(*c.presymplectic_matrix) : json(nullptr);
  out["poisson_matrix"] = c.poisson_matrix ? matrix_to_json(*c.poisson_matrix) : json(nullptr);
  return out;
}

// Flattens certificate matrices so families can be compared as subspaces.
std::vector<Vector> flatten_family(const std::vector<Matrix>& basis) {
  std::vector<Vector> flat;
  flat.reserve(basis.size());
  for (const Matrix& d : basis)
    flat.push_back(Eigen::Map<const Vector>(d.data(), d.size()));
  return flat;
}

// Deterministic representative: the basis element with the largest induced
// log-coefficient vector, preferring earlier elements on ties.
int representative_index(const CertificateFamily& family, const Vector& q) {
  const Eigen::Index m = q.size() - 1;
  int best = 0;
  double best_norm = -1.0;
  for (int k = 0; k < family.dimension(); ++k) {
    const double norm = (family.basis[static_cast<size_t>(k)].transpose() * q.head(m)).norm();
    if (norm > best_norm + 1e-15) {
      best_norm = norm;
      best = k;
    }
  }
  return best;
}

Chart native_chart(SystemFile::Kind kind) {
  return kind == SystemFile::Kind::replicator ? Chart::x : Chart::y;
}

std::vector<std::string> state_names(const SystemFile& file) {
  if (!file.labels.empty()) return file.labels;
  const char prefix = file.kind == SystemFile::Kind::replicator ? 'x' : 'y';
  std::vector<std::string> names;
  for (int i = 0; i < file.state_dimension(); ++i)
    names.push_back(std::string(1, prefix) + std::to_string(i + 1));
  return names;
}

}  // namespace

CommandResult run_analyze(const SystemFile& file, const AnalyzeOptions& options) {
  if (options.method != "general" && options.method != "reduced" && options.method != "both")
    throw std::invalid_argument("run_analyze: method must be general, reduced, or both");
  if (!(options.rank_tol > 0.0))
    throw std::invalid_argument("run_analyze: rank_tol must be positive");

  Prepared p = prepare(file, options.rank_tol);
  const Matrix b = chart_field_matrix(p.normalized);

  CommandResult result;
  json& report = result.report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = "analyze";
  report["options"] = {{"method", options.method},
                       {"rank_tol", options.rank_tol},
                       {"certificate_tol", options.certificate_tol},
                       {"identity_samples", options.identity_samples},
                       {"orthogonality_samples", options.orthogonality_samples},
                       {"seed", options.seed}};
  report["system"] = system_to_json(file);
  report["chart_dimension"] = p.chart_dim;
  report["chart_field_matrix"] = matrix_to_json(b);
  report["formal_equilibrium"] = equilibrium_to_json(p);

  Rng rng(options.seed);
  const std::vector<Vector> identity_points =
      sample_chart_points(rng, p.chart_dim, options.identity_samples);
  std::vector<Vector> simplex_points;
  for (const Vector& u : identity_points) simplex_points.push_back(chart_to_simplex(u));

  json verification;
  verification["chart_identity_max"] = chart_identity_residual(p.normalized, identity_points);
  verification["pushforward_max"] = pushforward_residual(p.normalized, simplex_points);
  verification["pointwise_orthogonality_max"] = nullptr;
  verification["gradient_check_max"] = nullptr;

  report["certificates"] = nullptr;
  report["representative_certificate"] = nullptr;
  report["constant_of_motion"] = nullptr;
  report["classification"] = nullptr;

  if (!p.have_reference) {
    report["verification"] = verification;
    report["notes"] = p.notes;
    result.exit_code = 2;
    report["exit_code"] = result.exit_code;
    return result;
  }

  json certificates;
  std::optional<CertificateFamily> general, reduced;
  if (options.method != "reduced") {
    general = certificate_search_general(b, p.q, options.rank_tol);
    certificates["general"] = family_to_json(*general);
  }
  if (options.method != "general") {
    try {
      reduced = certificate_search_reduced(p.interaction_block, p.q, options.rank_tol);
      certificates["reduced"] = family_to_json(*reduced);
    } catch (const std::domain_error& e) {
      certificates["reduced"] = {{"supported", false}, {"reason", e.what()}};
      p.notes.push_back(std::string("reduced search unavailable: ") + e.what());
    }
  }
  if (general && reduced) {
    const auto flat_g = flatten_family(general->basis);
    const auto flat_r = flatten_family(reduced->basis);
    certificates["span_consistency"] = {
        {"general_onto_reduced", subspace_projection_residual(flat_g, flat_r)},
        {"reduced_onto_general", subspace_projection_residual(flat_r, flat_g)},
        {"dimensions_equal", general->dimension() == reduced->dimension()}};
  }
  report["certificates"] = certificates;

  const CertificateFamily* source_family = nullptr;
  const char* source_name = "";
  if (general) {
    source_family = &*general;
    source_name = "general";
  } else if (reduced) {
    source_family = &*reduced;
    source_name = "reduced";
  }

  if (source_family == nullptr || source_family->dimension() == 0) {
    p.notes.push_back("certificate family is empty: no constant of motion of this form exists "
                      "at the chosen reference point");
    report["verification"] = verification;
    report["notes"] = p.notes;
    result.exit_code = 3;
    report["exit_code"] = result.exit_code;
    return result;
  }

  const int rep_index = representative_index(*source_family, p.q);
  const Matrix& d = source_family->basis[static_cast<size_t>(rep_index)];
  const ConservationCertificate cert = make_certificate(d, p.q, b, options.certificate_tol);
  const ConstantOfMotion h = constant_of_motion(cert, native_chart(file.kind));

  report["representative_certificate"] = {{"matrix", matrix_to_json(cert.d)},
                                          {"source", source_name},
                                          {"index", rep_index}};
  report["constant_of_motion"] = {{"chart", chart_name(h.chart)},
                                  {"c", vector_to_json(h.c)},
                                  {"g", vector_to_json(h.g)},
                                  {"additive_constant", h.additive_constant}};
  report["classification"] = classification_to_json(classify(b, cert.d, options.rank_tol));

  const std::vector<Vector> orthogonality_points =
      sample_chart_points(rng, p.chart_dim, options.orthogonality_samples);
  verification["pointwise_orthogonality_max"] =
      pointwise_orthogonality(b, cert, orthogonality_points);
  verification["gradient_check_max"] = gradient_check(h, identity_points);
  const HamiltonianPairReport pair = verify_hamiltonian_pair(b, cert, identity_points);
  verification["hamiltonian_field_max"] = pair.field_residual;
  verification["hamiltonian_gradient_max"] = pair.gradient_residual;
  report["verification"] = verification;
  report["notes"] = p.notes;
  report["exit_code"] = result.exit_code;
  return result;
}

CommandResult run_convert(const SystemFile& file, const std::string& to) {
  SystemFile out;
  if (to == "replicator") {
    if (file.kind == SystemFile::Kind::replicator) {
      out = file;
    } else {
      out.kind = SystemFile::Kind::replicator;
      out.replicator = lv_to_replicator(*file.lv);
      if (file.equilibrium_hint) {
        try {
          out.equilibrium_hint = embed_orthant_equilibrium(*file.equilibrium_hint);
        } catch (const std::domain_error&) {
          log::warn("convert: equilibrium hint dropped, 1 + sum(q) vanishes");
        }
      }
      if (!file.labels.empty()) {
        out.labels = file.labels;
        out.labels.push_back("reference");
      }
    }
  } else if (to == "lv") {
    if (file.kind == SystemFile::Kind::lotka_volterra) {
      out = file;
    } else {
      out.kind = SystemFile::Kind::lotka_volterra;
      out.lv = replicator_to_lv(*file.replicator);
      if (file.equilibrium_hint) {
        const Vector& q = *file.equilibrium_hint;
        if (std::abs(q(q.size() - 1)) > 1e-12)
          out.equilibrium_hint = simplex_to_orthant(q);
        else
          log::warn("convert: equilibrium hint dropped, last component vanishes");
      }
      if (!file.labels.empty())
        out.labels = std::vector<std::string>(file.labels.begin(), file.labels.end() - 1);
    }
  } else {
    throw std::invalid_argument("run_convert: target must be 'replicator' or 'lv'");
  }
  return CommandResult{system_to_json(out), 0};
}

CommandResult run_classify(const SystemFile& file, const ClassifyOptions& options) {
  Prepared p = prepare(file, options.rank_tol);
  const Matrix b = chart_field_matrix(p.normalized);

  CommandResult result;
  json& report = result.report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = "classify";
  report["system"] = system_to_json(file);
  report["chart_dimension"] = p.chart_dim;
  report["chart_field_matrix"] = matrix_to_json(b);
  report["classification"] = nullptr;

  if (!p.have_reference) {
    report["notes"] = p.notes;
    result.exit_code = 2;
    report["exit_code"] = result.exit_code;
    return result;
  }

  Matrix d;
  std::string source;
  if (options.certificate) {
    if (options.certificate->rows() != p.chart_dim || options.certificate->cols() != p.chart_dim)
      throw std::invalid_argument("run_classify: certificate has the wrong dimension");
    d = *options.certificate;
    source = "supplied";
  } else {
    const CertificateFamily family =
        certificate_search_general(b, p.q, options.rank_tol);
    if (family.dimension() == 0) {
      p.notes.push_back("certificate family is empty; nothing to classify");
      report["notes"] = p.notes;
      result.exit_code = 3;
      report["exit_code"] = result.exit_code;
      return result;
    }
    d = family.basis[static_cast<size_t>(representative_index(family, p.q))];
    source = "general";
  }

  const ConservationCertificate cert = make_certificate(d, p.q, b, options.certificate_tol);
  report["certificate"] = {{"matrix", matrix_to_json(cert.d)}, {"source", source}};
  report["classification"] = classification_to_json(classify(b, cert.d, options.rank_tol));
  report["notes"] = p.notes;
  report["exit_code"] = result.exit_code;
  return result;
}

CommandResult run_check(const SystemFile& file, const CheckOptions& options) {
  if (options.samples < 0) throw std::invalid_argument("run_check: samples must be >= 0");
  Prepared p = prepare(file, options.rank_tol);
  const Matrix b = chart_field_matrix(p.normalized);

  CommandResult result;
  json& report = result.report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = "check";
  report["options"] = {{"samples", options.samples},
                       {"seed", options.seed},
                       {"rank_tol", options.rank_tol}};
  report["system"] = system_to_json(file);

  json verification = json::object();
  if (options.samples > 0) {
    Rng rng(options.seed);
    const std::vector<Vector> points =
        sample_chart_points(rng, p.chart_dim, options.samples);
    std::vector<Vector> simplex_points;
    for (const Vector& u : points) simplex_points.push_back(chart_to_simplex(u));
    verification["chart_identity_max"] = chart_identity_residual(p.normalized, points);
    verification["pushforward_max"] = pushforward_residual(p.normalized, simplex_points);

    if (p.have_reference) {
      const CertificateFamily family =
          certificate_search_general(b, p.q, options.rank_tol);
      report["certificate_dimension"] = family.dimension();
      if (family.dimension() > 0) {
        const Matrix& d = family.basis[static_cast<size_t>(representative_index(family, p.q))];
        const ConservationCertificate cert =
            make_certificate(d, p.q, b, options.certificate_tol);
        const ConstantOfMotion h = constant_of_motion(cert, Chart::u);
        verification["pointwise_orthogonality_max"] = pointwise_orthogonality(b, cert, points);
        verification["gradient_check_max"] = gradient_check(h, points);
      }
    }
  }
  report["verification"] = verification;
  report["notes"] = p.notes;
  report["exit_code"] = 0;
  return result;
}

SimulateResult run_simulate(const SystemFile& file, const SimulateOptions& options) {
  Prepared p = prepare(file, options.rank_tol);
  const Matrix b = chart_field_matrix(p.normalized);

  SimulateResult result;
  json& summary = result.summary;
  summary["schema_version"] = kSchemaVersion;
  summary["command"] = "simulate";

  if (options.start == SimulateOptions::Start::simplex &&
      file.kind != SystemFile::Kind::replicator)
    throw std::invalid_argument("run_simulate: simplex initial conditions need a replicator system");
  if (options.start == SimulateOptions::Start::orthant &&
      file.kind != SystemFile::Kind::lotka_volterra)
    throw std::invalid_argument(
        "run_simulate: orthant initial conditions need a Lotka-Volterra system");

  Chart chart = Chart::u;
  Flow flow;
  std::vector<std::string> columns;
  switch (options.start) {
    case SimulateOptions::Start::simplex:
      flow = make_flow(*file.replicator);
      chart = Chart::x;
      columns = state_names(file);
      break;
    case SimulateOptions::Start::orthant:
      flow = make_flow(*file.lv);
      chart = Chart::y;
      columns = state_names(file);
      break;
    case SimulateOptions::Start::chart: {
      if (!p.have_reference) {
        summary["error"] = "chart flow needs a formal equilibrium";
        summary["notes"] = p.notes;
        summary["exit_code"] = 2;
        result.exit_code = 2;
        return result;
      }
      flow = make_chart_flow(b, p.q, options.time_scaled_chart);
      chart = Chart::u;
      for (int i = 0; i < p.chart_dim; ++i) columns.push_back("u" + std::to_string(i + 1));
      break;
    }
  }

  std::optional<ConstantOfMotion> h;
  if (options.observe_h) {
    if (!p.have_reference) {
      summary["error"] = "observing H needs a formal equilibrium";
      summary["notes"] = p.notes;
      summary["exit_code"] = 2;
      result.exit_code = 2;
      return result;
    }
    std::optional<Matrix> d;
    if (options.certificate) {
      d = *options.certificate;
    } else {
      const CertificateFamily family =
          certificate_search_general(b, p.q, options.rank_tol);
      if (family.dimension() == 0) {
        summary["error"] =
            "certificate family is empty; nothing to observe (rerun with --observe none)";
        summary["notes"] = p.notes;
        summary["exit_code"] = 3;
        result.exit_code = 3;
        return result;
      }
      d = family.basis[static_cast<size_t>(representative_index(family, p.q))];
    }
    const ConservationCertificate cert =
        make_certificate(*d, p.q, b, options.certificate_tol);
    h = constant_of_motion(cert, chart);
  }

  const Trajectory traj = integrate(flow, options.initial, options.config);

  std::ostringstream csv;
  csv << "t";
  for (const std::string& name : columns) csv << "," << name;
  if (h) csv << ",H";
  for (const auto& diag : traj.observables) csv << "," << diag.first;
  csv << "\n";

  std::vector<double> h_values;
  bool h_domain_ok = true;
  for (size_t i = 0; i < traj.times.size(); ++i) {
    csv << format_double(traj.times[i]);
    const Vector& state = traj.states[i];
    for (Eigen::Index j = 0; j < state.size(); ++j) csv << "," << format_double(state(j));
    if (h) {
      double value = std::nan("");
      try {
        value = eval_constant(*h, state);
      } catch (const std::domain_error&) {
        h_domain_ok = false;
      }
      h_values.push_back(value);
      csv << "," << format_double(value);
    }
    for (const auto& diag : traj.observables)
      csv << "," << format_double(diag.second[i]);
    csv << "\n";
  }
  result.csv = csv.str();

  summary["status"] = to_string(traj.status);
  if (!traj.note.empty()) summary["note"] = traj.note;
  summary["accepted_steps"] = traj.accepted_steps;
  summary["samples"] = traj.times.size();
  summary["t_final"] = traj.times.back();
  summary["observe"] = h ? "H" : "none";
  summary["options"] = {
      {"t_end", options.config.t_end},
      {"method",
       options.config.method == IntegratorConfig::Method::adaptive_rk45 ? "rk45" : "rk4"},
      {"step", options.config.step},
      {"abs_tol", options.config.abs_tol},
      {"rel_tol", options.config.rel_tol},
      {"record_every", options.config.record_every}};
  if (h) {
    if (h_domain_ok) {
      const DriftStats drift = conservation_drift(traj, *h);
      summary["drift"] = {{"max_abs", drift.max_abs},
                          {"max_rel", drift.max_rel},
                          {"initial_value", drift.initial_value}};
    } else {
      summary["drift"] = nullptr;
      summary["note"] = "H left its domain along the trajectory; drift unavailable";
    }
  } else {
    summary["drift"] = nullptr;
  }

  if (options.plot_data) {
    if (h) {
      std::ostringstream th;
      th << "t,H\n";
      for (size_t i = 0; i < traj.times.size(); ++i)
        th << format_double(traj.times[i]) << "," << format_double(h_values[i]) << "\n";
      result.plot_time_h = th.str();
    }
    std::ostringstream phase;
    if (flow.dimension >= 2) {
      phase << columns[0] << "," << columns[1] << "\n";
      for (const Vector& state : traj.states)
        phase << format_double(state(0)) << "," << format_double(state(1)) << "\n";
    } else {
      phase << "t," << columns[0] << "\n";
      for (size_t i = 0; i < traj.times.size(); ++i)
        phase << format_double(traj.times[i]) << "," << format_double(traj.states[i](0)) << "\n";
    }
    result.plot_phase = phase.str();
  }

  result.exit_code = traj.status == TrajectoryStatus::completed ? 0 : 4;
  summary["exit_code"] = result.exit_code;
  return result;
}

}  // namespace conserva
