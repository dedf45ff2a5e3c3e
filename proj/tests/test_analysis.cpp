#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "conserva/analysis.hpp"

using conserva::AnalyzeOptions;
using conserva::CheckOptions;
using conserva::ClassifyOptions;
using conserva::CommandResult;
using conserva::Matrix;
using conserva::ParseError;
using conserva::SimulateOptions;
using conserva::SimulateResult;
using conserva::SystemFile;
using conserva::Vector;
using nlohmann::json;

namespace {

SystemFile predator_prey_file() {
  return conserva::parse_system_json(
      R"({"kind":"lotka_volterra","interaction":[[0,1],[-1,0]],"r":[-1,1]})");
}

SystemFile two_block_file() {
  return conserva::parse_system_json(
      R"({"kind":"lotka_volterra",
          "interaction":[[0,1,0,0],[1,0,0,0],[0,0,1,2],[0,0,3,1]],
          "r":[-1,-1,-3,-4]})");
}

SystemFile rps_file() {
  return conserva::parse_system_json(
      R"({"kind":"replicator","payoff":[[1,-2,1],[2,-1,-1],[0,0,0]]})");
}

}  // namespace

TEST_CASE("system parsing validates shape and content") {
  using conserva::parse_system_json;
  CHECK_THROWS_AS(parse_system_json("not json"), ParseError);
  CHECK_THROWS_AS(parse_system_json(R"({"payoff":[[0,1],[1,0]]})"), ParseError);
  CHECK_THROWS_AS(parse_system_json(R"({"kind":"elliptic"})"), ParseError);
  CHECK_THROWS_AS(
      parse_system_json(R"({"kind":"replicator","payoff":[[0,1],[1,0]],"r":[1,1]})"),
      ParseError);
  CHECK_THROWS_AS(parse_system_json(R"({"kind":"replicator","payoff":[[0,1,0],[1,0,0]]})"),
                  ParseError);
  CHECK_THROWS_AS(parse_system_json(R"({"kind":"replicator","payoff":[[0]]})"), ParseError);
  CHECK_THROWS_AS(
      parse_system_json(R"({"kind":"lotka_volterra","interaction":[[0,1],[1,0]],"r":[1]})"),
      ParseError);
  CHECK_THROWS_AS(
      parse_system_json(
          R"({"kind":"replicator","payoff":[[0,1],[1,0]],"equilibrium":[0.5,0.25,0.25]})"),
      ParseError);
  CHECK_THROWS_AS(
      parse_system_json(
          R"({"kind":"replicator","payoff":[[0,1],[1,0]],"labels":["a","b","c"]})"),
      ParseError);

  const SystemFile ok = conserva::parse_system_json(
      R"({"kind":"lotka_volterra","interaction":[[0,2],[-1,0]],"r":[-2,1],
          "equilibrium":[1,1],"labels":["prey","predator"]})");
  CHECK(ok.kind == SystemFile::Kind::lotka_volterra);
  CHECK(ok.equilibrium_hint.has_value());
  CHECK(ok.labels.size() == 2);
  CHECK(ok.state_dimension() == 2);

  SUBCASE("serialization round-trips through the parser") {
    const SystemFile back =
        conserva::parse_system_json(conserva::system_to_json(ok).dump());
    CHECK(back.kind == ok.kind);
    CHECK((back.lv->interaction() - ok.lv->interaction()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((*back.equilibrium_hint - *ok.equilibrium_hint).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.labels == ok.labels);
  }
}

TEST_CASE("analyze: predator-prey end to end") {
  const CommandResult result = run_analyze(predator_prey_file(), AnalyzeOptions{});
  const json& report = result.report;

  CHECK(result.exit_code == 0);
  CHECK(report.at("schema_version") == 1);
  CHECK(report.at("command") == "analyze");
  CHECK(report.at("chart_dimension") == 2);

  const json& eq = report.at("formal_equilibrium");
  CHECK(eq.at("feasible") == true);
  CHECK(eq.at("degrees_of_freedom") == 0);
  CHECK(std::abs(eq.at("representative")[0].get<double>() - 1.0) < 1e-10);
  CHECK(std::abs(eq.at("reference_point")[0].get<double>() - 1.0 / 3.0) < 1e-12);

  const json& certs = report.at("certificates");
  CHECK(certs.at("general").at("dimension") == 1);
  CHECK(certs.at("reduced").at("dimension") == 1);
  CHECK(certs.at("span_consistency").at("general_onto_reduced").get<double>() < 1e-8);
  CHECK(certs.at("span_consistency").at("reduced_onto_general").get<double>() < 1e-8);
  CHECK(certs.at("span_consistency").at("dimensions_equal") == true);

  const json& com = report.at("constant_of_motion");
  CHECK(com.at("chart") == "y");
  const double c0 = com.at("c")[0].get<double>();
  const double c1 = com.at("c")[1].get<double>();
  const double g0 = com.at("g")[0].get<double>();
  CHECK(c0 == doctest::Approx(1.0 / std::sqrt(10.0)));
  CHECK(c1 == doctest::Approx(c0));
  CHECK(g0 == doctest::Approx(-c0));

  CHECK(report.at("classification").at("label") == "symplectic");

  const json& v = report.at("verification");
  CHECK(v.at("chart_identity_max").get<double>() < 1e-10);
  CHECK(v.at("pushforward_max").get<double>() < 1e-10);
  CHECK(v.at("pointwise_orthogonality_max").get<double>() < 1e-10);
  CHECK(v.at("gradient_check_max").get<double>() < 1e-6);
  CHECK(v.at("hamiltonian_field_max").get<double>() < 1e-12);
  CHECK(v.at("hamiltonian_gradient_max").get<double>() < 1e-10);
}

TEST_CASE("analyze: two-block mutualistic system is presymplectic") {
  const CommandResult result = run_analyze(two_block_file(), AnalyzeOptions{});
  const json& report = result.report;
  CHECK(result.exit_code == 0);
  CHECK(report.at("certificates").at("general").at("dimension") == 1);
  CHECK(report.at("classification").at("label") == "presymplectic");
  CHECK(report.at("classification").at("field_matrix_invertible") == true);
  CHECK(report.at("classification").at("certificate_invertible") == false);

  // The reduced direction is the alternating scaling on the first block.
  const json& dirs = report.at("certificates").at("reduced").at("directions");
  REQUIRE(dirs.size() == 1);
  const double d0 = dirs[0][0].get<double>();
  const double d1 = dirs[0][1].get<double>();
  CHECK(d0 == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(d1 == doctest::Approx(-d0));
  CHECK(std::abs(dirs[0][2].get<double>()) < 1e-10);
  CHECK(std::abs(dirs[0][3].get<double>()) < 1e-10);
}

TEST_CASE("analyze: missing equilibrium still produces a full report with exit 2") {
  const SystemFile file = conserva::parse_system_json(
      R"({"kind":"lotka_volterra","interaction":[[1,0],[1,0]],"r":[1,-1]})");
  const CommandResult result = run_analyze(file, AnalyzeOptions{});
  CHECK(result.exit_code == 2);
  CHECK(result.report.at("exit_code") == 2);
  CHECK(result.report.at("formal_equilibrium").at("feasible") == false);
  CHECK(result.report.at("certificates").is_null());
  CHECK(result.report.at("verification").at("chart_identity_max").get<double>() < 1e-10);
  CHECK_FALSE(result.report.at("notes").empty());
}

TEST_CASE("analyze: empty certificate family exits 3 but reports everything else") {
  const CommandResult result = run_analyze(rps_file(), AnalyzeOptions{});
  CHECK(result.exit_code == 3);
  CHECK(result.report.at("certificates").at("general").at("dimension") == 0);
  CHECK(result.report.at("certificates").at("reduced").at("dimension") == 0);
  CHECK(result.report.at("constant_of_motion").is_null());
  CHECK(result.report.at("classification").is_null());
  CHECK(result.report.at("verification").at("pushforward_max").get<double>() < 1e-10);
}

TEST_CASE("analyze: boundary reference points disable only the reduced search") {
  const SystemFile file = conserva::parse_system_json(
      R"({"kind":"replicator","payoff":[[1,-1,0],[2,-2,0],[0,0,0]],
          "equilibrium":[0.5,0.5,0.0]})");
  const CommandResult result = run_analyze(file, AnalyzeOptions{});
  CHECK(result.exit_code == 0);
  const json& certs = result.report.at("certificates");
  CHECK(certs.at("general").at("dimension") == 1);
  CHECK(certs.at("reduced").at("supported") == false);
  CHECK(result.report.at("formal_equilibrium").at("source") == "hint");
}

TEST_CASE("analyze: equilibrium hints are validated") {
  const SystemFile bad_lv = conserva::parse_system_json(
      R"({"kind":"lotka_volterra","interaction":[[0,1],[-1,0]],"r":[-1,1],
          "equilibrium":[2,2]})");
  CHECK_THROWS_AS(run_analyze(bad_lv, AnalyzeOptions{}), ParseError);

  const SystemFile bad_rep = conserva::parse_system_json(
      R"({"kind":"replicator","payoff":[[1,-2,1],[2,-1,-1],[0,0,0]],
          "equilibrium":[0.5,0.25,0.25]})");
  CHECK_THROWS_AS(run_analyze(bad_rep, AnalyzeOptions{}), ParseError);

  AnalyzeOptions bad_method;
  bad_method.method = "fastest";
  CHECK_THROWS_AS(run_analyze(predator_prey_file(), bad_method), std::invalid_argument);
}

TEST_CASE("analyze is deterministic for a fixed seed") {
  AnalyzeOptions options;
  options.seed = 99;
  const std::string first = run_analyze(predator_prey_file(), options).report.dump();
  const std::string second = run_analyze(predator_prey_file(), options).report.dump();
  CHECK(first == second);
}

TEST_CASE("convert moves systems between the two representations") {
  SUBCASE("orthant to simplex embedding") {
    const CommandResult result = run_convert(predator_prey_file(), "replicator");
    CHECK(result.exit_code == 0);
    CHECK(result.report.at("kind") == "replicator");
    const json expected = json::parse("[[0,1,-1],[-1,0,1],[0,0,0]]");
    CHECK(result.report.at("payoff") == expected);
  }
  SUBCASE("hints and labels ride along") {
    const SystemFile file = conserva::parse_system_json(
        R"({"kind":"lotka_volterra","interaction":[[0,1],[-1,0]],"r":[-1,1],
            "equilibrium":[1,1],"labels":["prey","predator"]})");
    const CommandResult result = run_convert(file, "replicator");
    const json& eq = result.report.at("equilibrium");
    CHECK(std::abs(eq[0].get<double>() - 1.0 / 3.0) < 1e-12);
    CHECK(std::abs(eq[2].get<double>() - 1.0 / 3.0) < 1e-12);
    REQUIRE(result.report.at("labels").size() == 3);
    CHECK(result.report.at("labels")[2] == "reference");

    SUBCASE("and back again") {
      const SystemFile forward = conserva::parse_system_json(result.report.dump());
      const CommandResult back = run_convert(forward, "lv");
      CHECK(back.report.at("kind") == "lotka_volterra");
      CHECK(back.report.at("interaction") == json::parse("[[0,1],[-1,0]]"));
      CHECK(back.report.at("r") == json::parse("[-1,1]"));
      const json& hint = back.report.at("equilibrium");
      CHECK(std::abs(hint[0].get<double>() - 1.0) < 1e-10);
      CHECK(back.report.at("labels").size() == 2);
    }
  }
  SUBCASE("converting to the current kind is the identity") {
    const CommandResult result = run_convert(predator_prey_file(), "lv");
    CHECK(result.report.at("interaction") == json::parse("[[0,1],[-1,0]]"));
  }
  CHECK_THROWS_AS(run_convert(predator_prey_file(), "hamiltonian"), std::invalid_argument);
}

TEST_CASE("classify command") {
  SUBCASE("searched certificate") {
    const CommandResult result = run_classify(predator_prey_file(), ClassifyOptions{});
    CHECK(result.exit_code == 0);
    CHECK(result.report.at("classification").at("label") == "symplectic");
    CHECK(result.report.at("certificate").at("source") == "general");
  }
  SUBCASE("supplied certificate") {
    ClassifyOptions options;
    Matrix d(2, 2);
    d << 2, 1, 1, 2;
    options.certificate = d;
    const CommandResult result = run_classify(predator_prey_file(), options);
    CHECK(result.exit_code == 0);
    CHECK(result.report.at("certificate").at("source") == "supplied");
    CHECK(result.report.at("classification").at("isotropic") == true);
  }
  SUBCASE("invalid supplied certificate fails with residuals") {
    ClassifyOptions options;
    options.certificate = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(run_classify(predator_prey_file(), options),
                    conserva::CertificateError);
  }
  SUBCASE("empty family exits 3") {
    const CommandResult result = run_classify(rps_file(), ClassifyOptions{});
    CHECK(result.exit_code == 3);
    CHECK(result.report.at("classification").is_null());
  }
  SUBCASE("wrong certificate dimension is an input error") {
    ClassifyOptions options;
    options.certificate = Matrix::Identity(3, 3);
    CHECK_THROWS_AS(run_classify(predator_prey_file(), options), std::invalid_argument);
  }
}

TEST_CASE("check command") {
  SUBCASE("default run produces small residuals") {
    const CommandResult result = run_check(predator_prey_file(), CheckOptions{});
    CHECK(result.exit_code == 0);
    const json& v = result.report.at("verification");
    CHECK(v.at("chart_identity_max").get<double>() < 1e-10);
    CHECK(v.at("pushforward_max").get<double>() < 1e-10);
    CHECK(v.at("pointwise_orthogonality_max").get<double>() < 1e-10);
    CHECK(v.at("gradient_check_max").get<double>() < 1e-6);
    CHECK(result.report.at("certificate_dimension") == 1);
  }
  SUBCASE("zero samples yield an empty verification block") {
    CheckOptions options;
    options.samples = 0;
    const CommandResult result = run_check(predator_prey_file(), options);
    CHECK(result.exit_code == 0);
    CHECK(result.report.at("verification").is_object());
    CHECK(result.report.at("verification").empty());
  }
  SUBCASE("fixed seeds reproduce byte-identical reports") {
    CheckOptions options;
    options.seed = 31337;
    const std::string a = run_check(predator_prey_file(), options).report.dump();
    const std::string b = run_check(predator_prey_file(), options).report.dump();
    CHECK(a == b);
  }
}

TEST_CASE("simulate command") {
  SUBCASE("conserved quantity stays flat on the predator-prey orbit") {
    SimulateOptions options;
    options.start = SimulateOptions::Start::orthant;
    options.initial = (Vector(2) << 0.5, 1.5).finished();
    options.config.t_end = 20.0;
    const SimulateResult result = run_simulate(predator_prey_file(), options);
    CHECK(result.exit_code == 0);
    CHECK(result.summary.at("status") == "completed");
    CHECK(result.summary.at("drift").at("max_rel").get<double>() < 1e-6);
    CHECK(result.csv.rfind("t,y1,y2,H,min_coordinate\n", 0) == 0);
  }
  SUBCASE("equilibrium starts produce flat trajectories") {
    SimulateOptions options;
    options.start = SimulateOptions::Start::orthant;
    options.initial = Vector::Ones(2);
    options.config.t_end = 5.0;
    const SimulateResult result = run_simulate(predator_prey_file(), options);
    CHECK(result.summary.at("drift").at("max_abs").get<double>() < 1e-12);
  }
  SUBCASE("observe none drops the H column") {
    SimulateOptions options;
    options.start = SimulateOptions::Start::orthant;
    options.initial = (Vector(2) << 0.5, 1.5).finished();
    options.observe_h = false;
    options.config.t_end = 1.0;
    const SimulateResult result = run_simulate(predator_prey_file(), options);
    CHECK(result.csv.rfind("t,y1,y2,min_coordinate\n", 0) == 0);
    CHECK(result.summary.at("drift").is_null());
    CHECK(result.summary.at("observe") == "none");
  }
  SUBCASE("chart starts integrate the reduced coordinates") {
    SimulateOptions options;
    options.start = SimulateOptions::Start::chart;
    options.initial = (Vector(2) << 0.3, -0.2).finished();
    options.config.t_end = 5.0;
    const SimulateResult result = run_simulate(predator_prey_file(), options);
    CHECK(result.exit_code == 0);
    CHECK(result.csv.rfind("t,u1,u2,H\n", 0) == 0);
    CHECK(result.summary.at("drift").at("max_rel").get<double>() < 1e-6);
  }
  SUBCASE("divergence is flagged with exit 4 and drift over the recorded window") {
    SimulateOptions options;
    options.start = SimulateOptions::Start::orthant;
    options.initial = (Vector(4) << 0.5, 1.5, 1.2, 0.8).finished();
    options.config.t_end = 20.0;
    const SimulateResult result = run_simulate(two_block_file(), options);
    CHECK(result.exit_code == 4);
    CHECK(result.summary.at("status") == "diverged");
    CHECK(result.summary.at("t_final").get<double>() < 20.0);
    CHECK(result.summary.at("drift").at("max_rel").get<double>() < 1e-6);
  }
  SUBCASE("plot data files are emitted on request") {
    SimulateOptions options;
    options.start = SimulateOptions::Start::orthant;
    options.initial = (Vector(2) << 0.5, 1.5).finished();
    options.config.t_end = 2.0;
    options.plot_data = true;
    const SimulateResult result = run_simulate(predator_prey_file(), options);
    REQUIRE(result.plot_time_h.has_value());
    CHECK(result.plot_time_h->rfind("t,H\n", 0) == 0);
    REQUIRE(result.plot_phase.has_value());
    CHECK(result.plot_phase->rfind("y1,y2\n", 0) == 0);
  }
  SUBCASE("mismatched start kinds are input errors") {
    SimulateOptions options;
    options.start = SimulateOptions::Start::simplex;
    options.initial = Vector::Constant(3, 1.0 / 3.0);
    CHECK_THROWS_AS(run_simulate(predator_prey_file(), options), std::invalid_argument);
  }
}

TEST_CASE("formatted doubles round-trip exactly") {
  const std::vector<double> values = {0.0,    1.0,       -1.0, 1.0 / 3.0, 3.14159265358979312,
                                      1e-300, 1.234e300, -0.1, 2.0 / 7.0, 1e17};
  for (double v : values) {
    const std::string text = conserva::format_double(v);
    CHECK(std::stod(text) == v);
  }
}
